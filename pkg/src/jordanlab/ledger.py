"""Case ledger: bounds per surface type, their witness checks, and the per-field aggregation.

Rows live in ``data/ledger.json``; the headline values per field live in
``data/theorems.json``.  Rows without a computable witness are *axioms* and
are reported as such; every other row is checked against the engine.
"""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .dsl import CatalogEntry, CatalogError, Cyclic, Product, default_catalog, parse, to_text, build, validate_json
from .errors import CapExceeded, JordanLabError
from .jordan import (Valued, abar_index, find_embedding, jordan_constant, lattice_max_abelian,
                     lattice_nu, nu, weak_jordan_constant)
from .perm import ELEMENT_CAP, PermGroup, direct_product
from .subgroups import ORDER_CAP, all_subgroups

FIELDS = ("C", "R", "Q", "P2R", "S2")
EXCEPTIONAL = ("A4", "S4", "A5")
CLASSICAL = ("cyclic", "dihedral")


class LedgerError(JordanLabError, ValueError):
    pass


class AggregationBlocked(LedgerError):
    """A non-axiom row of the field did not verify."""


@dataclass(frozen=True)
class CaseBound:
    id: str
    field: str
    kind: str
    value: int
    quote: str
    witness: str | None = None
    witness_relation: str = "none"
    jbar: int | None = None
    check: str | None = None
    branch: str = ""
    note: str | None = None

    @property
    def is_axiom(self) -> bool:
        return self.kind == "exclusion" or self.witness is None

    @property
    def jbar_bound(self) -> int | None:
        """Bound on the weak constant implied by this row (``Jbar <= J``)."""
        if self.kind == "Jbar-bound":
            return self.value
        if self.kind == "J-bound":
            return self.jbar if self.jbar is not None else self.value
        return None


@dataclass
class CaseResult:
    case: CaseBound
    verdict: str
    method: str
    computed: dict = field(default_factory=dict)
    detail: str = ""
    time: float = 0.0

    def to_dict(self, timing: bool = True) -> dict:
        c = self.case
        out = {"id": c.id, "field": c.field, "kind": c.kind, "value": c.value, "jbar": c.jbar,
               "quote": c.quote, "witness": c.witness, "verdict": self.verdict, "method": self.method,
               "computed": self.computed, "detail": self.detail}
        if timing:
            out["time"] = round(self.time, 4)
        return out


@dataclass
class TheoremResult:
    field: str
    J: int
    Jbar: int | None
    attaining_case: str
    witness: str | None
    cases: list[str]
    quote: str
    name: str
    expected_J: int
    expected_Jbar: int | None

    @property
    def matches(self) -> bool:
        return self.J == self.expected_J and self.Jbar == self.expected_Jbar

    def summary(self) -> str:
        head = f"J({self.name}) = {self.J}"
        if self.Jbar is not None:
            head += f", Jbar = {self.Jbar}"
        return f"{head} \u2014 attained by {self.witness}"

    def to_dict(self) -> dict:
        return {"field": self.field, "J": self.J, "Jbar": self.Jbar, "attaining_case": self.attaining_case,
                "witness": self.witness, "quote": self.quote, "cases": self.cases,
                "expected_J": self.expected_J, "expected_Jbar": self.expected_Jbar, "matches": self.matches}


# -- fixtures -------------------------------------------------------------------

def _data_path(name: str) -> Path:
    return Path(str(resources.files("jordanlab").joinpath(f"data/{name}")))


def default_ledger_path() -> Path:
    return _data_path("ledger.json")


def load_ledger(path=None) -> list[CaseBound]:
    path = Path(path) if path is not None else default_ledger_path()
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LedgerError(f"schema violation at /: not valid JSON ({exc.msg})") from exc
    try:
        validate_json(doc, "ledger.schema.json")
    except CatalogError as exc:
        raise LedgerError(str(exc)) from None
    rows = [CaseBound(**r) for r in doc]
    seen: set[str] = set()
    branches: set[tuple[str, str]] = set()
    for r in rows:
        if r.id in seen:
            raise LedgerError(f"duplicate case id {r.id!r}")
        seen.add(r.id)
        if (r.field, r.branch) in branches:
            raise LedgerError(f"branch {r.branch!r} appears twice for field {r.field}")
        branches.add((r.field, r.branch))
    return sorted(rows, key=lambda r: r.id)


def load_theorems(path=None) -> dict[str, dict]:
    path = Path(path) if path is not None else _data_path("theorems.json")
    doc = json.loads(path.read_text(encoding="utf-8"))
    validate_json(doc, "theorems.schema.json")
    return {t["field"]: t for t in doc}


def rows_for(rows: list[CaseBound], fld: str) -> list[CaseBound]:
    """Rows contributing to ``fld``, including rows of the field it inherits from."""
    if fld not in FIELDS:
        raise LedgerError(f"unknown field {fld!r}")
    parent = load_theorems()[fld].get("inherits")
    own = [r for r in rows if r.field == fld]
    return own + ([r for r in rows if r.field == parent] if parent else [])


# -- case table lookups -----------------------------------------------------------

def _by_id(rows, case_id):
    for r in rows:
        if r.id == case_id:
            return r
    raise LedgerError(f"unknown combination: no case {case_id!r}")


def conic_bundle_bound(fiber: str, base: str, fld: str = "C", rows=None) -> CaseBound:
    """Bound for a conic bundle whose fiber and base groups have the given types."""
    rows = rows if rows is not None else load_ledger()
    for t in (fiber, base):
        if t not in EXCEPTIONAL + CLASSICAL:
            raise LedgerError(f"unknown group type {t!r}")
    fe, be = fiber in EXCEPTIONAL, base in EXCEPTIONAL
    if fld == "C":
        branch = {(True, True): "i", (False, True): "ii", (True, False): "iii", (False, False): "iv"}[fe, be]
        return _by_id(rows, f"CB-C-{branch}")
    if fld == "R":
        if fe or be:
            raise LedgerError(f"type {fiber if fe else base!r} does not occur over the reals")
        return _by_id(rows, "CB-R-iv")
    raise LedgerError(f"no conic bundle table for field {fld!r}")


def del_pezzo_bound(degree: int, variant: str = "default", fld: str = "C", rows=None) -> CaseBound:
    if not 1 <= degree <= 9:
        raise LedgerError(f"degree must be in 1..9, got {degree}")
    rows = rows if rows is not None else load_ledger()
    case_id = f"dP-{fld}-{degree}" + ("" if variant == "default" else f"-{variant}")
    return _by_id(rows, case_id)


# -- engine -------------------------------------------------------------------------

class Engine:
    """Catalog-backed cache of computed constants, shared across case checks."""

    def __init__(self, catalog: list[CatalogEntry] | None = None, order_cap: int = ORDER_CAP,
                 element_cap: int = ELEMENT_CAP, time_budget: float | None = None):
        self.entries = {e.label: e for e in (catalog if catalog is not None else default_catalog())}
        self.order_cap = order_cap
        self.element_cap = element_cap
        self.time_budget = time_budget
        self._memo: dict = {}
        self._lock = threading.Lock()

    def entry(self, label: str) -> CatalogEntry:
        try:
            return self.entries[label]
        except KeyError:
            raise LedgerError(f"witness {label!r} is not in the catalog") from None

    def group(self, label: str) -> PermGroup:
        return self.entry(label).group

    def _deadline(self):
        return None if self.time_budget is None else time.monotonic() + self.time_budget

    def _get(self, key, fn):
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        val = fn()
        with self._lock:
            return self._memo.setdefault(key, val)

    def J(self, G: PermGroup, key=None) -> Valued:
        return self._get(("J", key or id(G)), lambda: jordan_constant(G, self.order_cap, self._deadline()))

    def Jbar(self, G: PermGroup, key=None) -> Valued:
        return self._get(("Jbar", key or id(G)), lambda: weak_jordan_constant(G, self.order_cap, self._deadline()))

    def nu(self, G: PermGroup, key=None) -> Valued:
        return self._get(("nu", key or id(G)), lambda: nu(G))

    def abar(self, G: PermGroup, key=None) -> Valued:
        return self._get(("abar", key or id(G)), lambda: abar_index(G, self.element_cap))


# -- finite families ----------------------------------------------------------------

def o31_family(max_n: int = 12) -> list[tuple[str, PermGroup]]:
    """Cyclic, dihedral (n <= max_n), A4, S4, A5, and each of them times a central C2."""
    base = [f"C{n}" for n in range(1, max_n + 1)] + [f"D{n}" for n in range(1, max_n + 1)] + ["A4", "S4", "A5"]
    out = []
    c2 = build("C2")
    for text in base:
        G = build(text)
        out.append((text, G))
        out.append((f"{text} * C2", direct_product(G, c2)))
    return out


TORUS_LABELS = ("torus-d6-2", "torus-d6-3", "torus-d6-4", "torus-d6-5")


def verify_real_fermat_argument(engine: Engine | None = None) -> bool:
    """No injective map from S4 into GL_l(F3) for l = 1, 2."""
    engine = engine or Engine()
    s4 = engine.group("S4")
    return all(find_embedding(s4, engine.group(t)) is None for t in ("gl1-f3", "gl2-f3"))


# -- verification ---------------------------------------------------------------------

def _compare(rel: str, got: int, bound: int) -> bool:
    return got == bound if rel == "attains" else got <= bound


def _check_row(case: CaseBound, eng: Engine) -> tuple[bool, str, dict, str]:
    rel = case.witness_relation
    G = eng.group(case.witness)
    key = case.witness
    chk = case.check or ("Jbar" if case.kind == "Jbar-bound" else "J")
    comp: dict = {}
    ok = True

    if chk in ("J", "J+Jbar"):
        j = eng.J(G, key)
        comp["J"] = j.value
        ok &= _compare(rel, j.value, case.value)
        method = j.method
        if chk == "J+Jbar":
            jb = eng.Jbar(G, key)
            comp["Jbar"] = jb.value
            ok &= _compare(rel, jb.value, case.jbar if case.jbar is not None else case.value)
        return ok, method, comp, ""

    if chk == "Jbar":
        jb = eng.Jbar(G, key)
        comp["Jbar"] = jb.value
        return _compare(rel, jb.value, case.value), jb.method, comp, ""

    if chk in ("nu", "fermat-kernel"):
        v = eng.nu(G, key)
        comp["nu"] = v.value
        comp["nu_witness_order"] = v.witness.order if v.witness is not None else None
        ok = _compare(rel, v.value, case.value)
        if chk == "fermat-kernel":
            fa = verify_real_fermat_argument(eng)
            comp["no_faithful_S4_to_GL_l_F3"] = fa
            ok &= fa
        return ok, v.method, comp, ""

    if chk == "family-o31":
        worst_nu = worst_abar = worst_J = worst_Jbar = 0
        fam = o31_family()
        for text, H in fam:
            worst_nu = max(worst_nu, eng.nu(H, ("o31", text)).value)
            worst_abar = max(worst_abar, eng.abar(H, ("o31", text)).value)
            worst_J = max(worst_J, eng.J(H, ("o31", text)).value)
            worst_Jbar = max(worst_Jbar, eng.Jbar(H, ("o31", text)).value)
        jb = case.jbar if case.jbar is not None else case.value
        comp.update(members=len(fam), max_nu=worst_nu, max_abar=worst_abar, max_J=worst_J, max_Jbar=worst_Jbar)
        ok = worst_nu <= case.value and worst_abar <= jb and worst_J <= case.value and worst_Jbar <= jb
        if rel == "attains":
            comp["J"] = eng.J(G, key).value
            comp["Jbar"] = eng.Jbar(G, key).value
            ok &= comp["J"] == case.value and comp["Jbar"] == jb
        return ok, "family", comp, f"{len(fam)} groups from the finite O(3,1) list"

    if chk == "family-torus":
        vals = {}
        for label in TORUS_LABELS:
            H = eng.group(label)
            vals[label] = (eng.J(H, label).value, eng.Jbar(H, label).value)
        comp["members"] = {k: {"J": a, "Jbar": b} for k, (a, b) in vals.items()}
        jb = case.jbar if case.jbar is not None else case.value
        ok = all(a <= case.value and b <= jb for a, b in vals.values())
        return ok, "family", comp, ", ".join(TORUS_LABELS)

    if chk == "proper-subgroups":
        L = all_subgroups(G, eng.order_cap, eng._deadline())
        reps = [r for r in L.representatives() if r.order < G.order]
        mnu = max(r.order // lattice_nu(L, r).order for r in reps)
        mab = max(r.order // lattice_max_abelian(L, r).order for r in reps)
        comp.update(proper_classes=len(reps), max_nu=mnu, max_abar=mab)
        jb = case.jbar if case.jbar is not None else case.value
        return mnu <= case.value and mab <= jb, "full-enumeration", comp, ""

    if chk == "product-c2":
        expr = parse(eng.entry(case.witness).expr)
        if not (isinstance(expr, Product) and expr.right == Cyclic(2)):
            raise LedgerError(f"witness {case.witness!r} is not of the form K * C2")
        K = build(expr.left, _actions(eng))
        j = eng.J(G, key)
        jk = eng.J(K, ("K", to_text(expr.left)))
        v = eng.nu(G, key)
        comp.update(J=j.value, J_K=jk.value, nu=v.value)
        ok = _compare(rel, j.value, case.value) and j.value <= 2 * jk.value
        if case.jbar is not None:
            comp["Jbar"] = eng.Jbar(G, key).value
            ok &= comp["Jbar"] <= case.jbar
        return ok, j.method, comp, "J(K x C2) <= 2 J(K)"

    raise LedgerError(f"unknown check {chk!r} in case {case.id}")


def _actions(eng: Engine) -> dict:
    out: dict = {}
    for e in eng.entries.values():
        out.update(e.actions)
    return out


def verify_case(case: CaseBound, engine: Engine | None = None) -> CaseResult:
    """Check one row. Axiom rows are never computed; cap overruns give ``unverified``."""
    t0 = time.perf_counter()
    if case.kind == "exclusion":
        return CaseResult(case, "axiom", "axiom (geometry)", detail="excluded by a geometric argument")
    if case.witness is None:
        return CaseResult(case, "axiom", "axiom (cited)", detail=case.note or "")
    engine = engine or Engine()
    try:
        ok, method, comp, detail = _check_row(case, engine)
    except CapExceeded as exc:
        return CaseResult(case, "unverified", "cap-exceeded", detail=str(exc), time=time.perf_counter() - t0)
    return CaseResult(case, "verified" if ok else "failed", method, comp, detail, time.perf_counter() - t0)


def verify_cases(rows: list[CaseBound], engine: Engine | None = None, jobs: int = 1) -> list[CaseResult]:
    engine = engine or Engine()
    rows = sorted(rows, key=lambda r: r.id)
    if jobs <= 1:
        return [verify_case(r, engine) for r in rows]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda r: verify_case(r, engine), rows))


def fold(rows: list[CaseBound]) -> tuple[int, int | None]:
    """(max J-bound, max implied Jbar-bound or None when no row states one)."""
    J = max(r.value for r in rows if r.kind == "J-bound")
    stated = any(r.kind == "Jbar-bound" or r.jbar is not None for r in rows)
    Jbar = max(r.jbar_bound for r in rows if r.jbar_bound is not None) if stated else None
    return J, Jbar


def aggregate(fld: str, results: list[CaseResult] | None = None, engine: Engine | None = None,
              rows: list[CaseBound] | None = None) -> TheoremResult:
    """Fold the field's rows into its headline constants.

    Raises :class:`AggregationBlocked` if any non-axiom row fails or is unverified.
    """
    rows = rows if rows is not None else load_ledger()
    mine = rows_for(rows, fld)
    if results is None:
        results = verify_cases(mine, engine)
    verdicts = {res.case.id: res.verdict for res in results}
    bad = [r.id for r in mine if not r.is_axiom and verdicts.get(r.id) != "verified"]
    if bad:
        raise AggregationBlocked(f"field {fld}: cases not verified: {', '.join(sorted(bad))}")
    J, Jbar = fold(mine)
    att = [r for r in mine if r.kind == "J-bound" and r.value == J and r.witness_relation == "attains"]
    att.sort(key=lambda r: (r.field != fld, r.id))
    if not att:
        raise AggregationBlocked(f"field {fld}: no attaining witness for J = {J}")
    th = load_theorems()[fld]
    return TheoremResult(fld, J, Jbar, att[0].id, att[0].witness, sorted(r.id for r in mine),
                         th["quote"], th["name"], th["J"], th["Jbar"])


def verify_paper(fields=FIELDS, engine: Engine | None = None, jobs: int = 1, rows=None) -> dict:
    """Verify all rows of the given fields and aggregate each field.

    Returns a dict matching ``verify_report.schema.json`` with the live
    :class:`CaseResult` and :class:`TheoremResult` objects under ``_results``
    and ``_theorems``.
    """
    rows = rows if rows is not None else load_ledger()
    engine = engine or Engine()
    wanted = {r.id: r for f in fields for r in rows_for(rows, f)}
    results = verify_cases(list(wanted.values()), engine, jobs)
    theorems, errors = [], []
    for f in fields:
        try:
            theorems.append(aggregate(f, results, engine, rows))
        except AggregationBlocked as exc:
            errors.append(str(exc))
    ok = (not errors and all(r.verdict in ("verified", "axiom") for r in results)
          and all(t.matches for t in theorems))
    return {"ok": ok, "_results": results, "_theorems": theorems, "_errors": errors}


def report_json(res: dict, timing: bool = True) -> dict:
    """Schema-shaped view of a :func:`verify_paper` result."""
    return {"ok": res["ok"],
            "rows": [r.to_dict(timing) for r in res["_results"]],
            "theorems": [t.to_dict() for t in res["_theorems"]]}


def _cell(s) -> str:
    return str(s).replace("|", "\\|").replace("\n", " ")


def report_markdown(res: dict, timing: bool = True) -> str:
    head = ["case id", "value", "quote", "witness", "verdict", "method", "time"]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for r in res["_results"]:
        c = r.case
        val = f"{c.value}" + (f" / {c.jbar}" if c.jbar is not None else "")
        t = f"{r.time:.3f}" if timing else ""
        lines.append("| " + " | ".join(_cell(x) for x in
                                        (c.id, val, c.quote, c.witness or "", r.verdict, r.method, t)) + " |")
    return "\n".join(lines)
