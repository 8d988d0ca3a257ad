"""Group-expression language and the JSON group catalog.

Grammar::

    expr   := term (('*' | ':') term ['[' action ']'])*      (left-associative)
    term   := atom | '(' expr ')'
    atom   := ('C'|'D'|'S'|'A') integer | 'E(' p ',' k ')' | 'Heis(' p ')' | 'PSL(2,' q ')'
    action := 'swap' | 'inv' | 'explicit' identifier

``*`` is the direct product; ``:`` is a semidirect product and must carry an
action.  ``Dn`` has order ``2n``.

Explicit actions live in catalog files.  An action table maps the acting
group's generators ``h0, h1, ...`` to the images of the normal subgroup's
generators ``n0, n1, ...``, written as words such as ``"n0^-1 n2"``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Union

import jsonschema

from .errors import InvalidAction, JordanLabError
from .perm import PermGroup, Permutation, direct_product, semidirect_product, swap_extension


class DSLSyntaxError(JordanLabError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class CatalogError(JordanLabError, ValueError):
    pass


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Cyclic:
    n: int


@dataclass(frozen=True)
class Dihedral:
    n: int


@dataclass(frozen=True)
class Sym:
    n: int


@dataclass(frozen=True)
class Alt:
    n: int


@dataclass(frozen=True)
class ElemAbelian:
    p: int
    k: int


@dataclass(frozen=True)
class Heis:
    p: int


@dataclass(frozen=True)
class PSL2:
    q: int


@dataclass(frozen=True)
class Action:
    kind: str                    # swap | inv | explicit
    ident: str | None = None


@dataclass(frozen=True)
class Product:
    left: "GroupExpr"
    right: "GroupExpr"


@dataclass(frozen=True)
class Semidirect:
    normal: "GroupExpr"
    acting: "GroupExpr"
    action: Action


GroupExpr = Union[Cyclic, Dihedral, Sym, Alt, ElemAbelian, Heis, PSL2, Product, Semidirect]
ATOMS = (Cyclic, Dihedral, Sym, Alt, ElemAbelian, Heis, PSL2)
_LETTER_ATOM = {"C": Cyclic, "D": Dihedral, "S": Sym, "A": Alt}


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            ch = text[pos]
            if ch.isdigit():
                m = re.match(r"\d+", text[pos:])
                self.tokens.append(("int", m.group(), pos))
            elif ch.isascii() and (ch.isalpha() or ch == "_"):
                m = re.match(r"[A-Za-z_][A-Za-z0-9_\-]*", text[pos:])
                self.tokens.append(("name", m.group(), pos))
            elif ch in "()[]*:,":
                self.tokens.append(("op", ch, pos))
                pos += 1
                continue
            else:
                raise DSLSyntaxError(f"unexpected character {ch!r}", self._byte(pos))
            pos += len(m.group())
        self.i = 0

    def _byte(self, pos: int) -> int:
        return len(self.text[:pos].encode("utf-8"))

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", len(self.text))

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise DSLSyntaxError(msg, self._byte(tok[2]))

    def take(self, kind, value=None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            self.error(f"expected {want!r}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def integer(self) -> int:
        return int(self.take("int")[1])

    def parse(self) -> GroupExpr:
        e = self.expr()
        if self.peek()[0] != "eof":
            self.error(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self) -> GroupExpr:
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "*:":
            op = self.take("op")
            right = self.term()
            has_action = self.peek()[:2] == ("op", "[")
            if op[1] == "*":
                if has_action:
                    self.error("'*' takes no action annotation")
                left = Product(left, right)
            else:
                if not has_action:
                    self.error("':' requires an action annotation", op)
                action = self.action()
                left = Semidirect(left, right, action)
                _check_semidirect(left, self, op)
        return left

    def action(self) -> Action:
        self.take("op", "[")
        tok = self.take("name")
        if tok[1] in ("swap", "inv"):
            act = Action(tok[1])
        elif tok[1] == "explicit":
            act = Action("explicit", self.take("name")[1])
        else:
            self.error(f"unknown action {tok[1]!r}", tok)
        self.take("op", "]")
        return act

    def term(self) -> GroupExpr:
        tok = self.peek()
        if tok[:2] == ("op", "("):
            self.take("op", "(")
            e = self.expr()
            self.take("op", ")")
            return e
        if tok[0] != "name":
            self.error(f"expected a group, found {tok[1] or 'end of input'!r}")
        self.i += 1
        name = tok[1]
        m = re.fullmatch(r"([CDSA])(\d+)", name)
        if m:
            n = int(m.group(2))
            if n < 1:
                self.error("group parameter must be >= 1", tok)
            return _LETTER_ATOM[m.group(1)](n)
        if name == "E":
            self.take("op", "(")
            p = self.integer()
            self.take("op", ",")
            k = self.integer()
            self.take("op", ")")
            if not _is_prime(p) or k < 1:
                self.error(f"E(p,k) needs p prime and k >= 1, got E({p},{k})", tok)
            return ElemAbelian(p, k)
        if name == "Heis":
            self.take("op", "(")
            p = self.integer()
            self.take("op", ")")
            if not _is_prime(p):
                self.error(f"Heis(p) needs p prime, got {p}", tok)
            return Heis(p)
        if name == "PSL":
            self.take("op", "(")
            two = self.take("int")
            if two[1] != "2":
                self.error("only PSL(2,q) is supported", two)
            self.take("op", ",")
            q = self.integer()
            self.take("op", ")")
            if q not in PSL2_FIELDS:
                self.error(f"PSL(2,q) is available for q in {list(PSL2_FIELDS)}, got {q}", tok)
            return PSL2(q)
        self.error(f"unknown group {name!r}", tok)


def _check_semidirect(node: Semidirect, parser: _Parser, tok):
    if node.action.kind == "swap":
        ok = (isinstance(node.normal, Product) and node.normal.left == node.normal.right
              and node.acting == Cyclic(2))
        if not ok:
            parser.error("[swap] needs the form (X * X) : C2 with identical factors", tok)


def parse(text: str) -> GroupExpr:
    return _Parser(text).parse()


def to_text(e: GroupExpr) -> str:
    """Canonical text; ``parse(to_text(e)) == e``."""
    if isinstance(e, (Cyclic, Dihedral, Sym, Alt)):
        return f"{type(e).__name__[0]}{e.n}"
    if isinstance(e, ElemAbelian):
        return f"E({e.p},{e.k})"
    if isinstance(e, Heis):
        return f"Heis({e.p})"
    if isinstance(e, PSL2):
        return f"PSL(2,{e.q})"

    def sub(x):
        return to_text(x) if isinstance(x, ATOMS) else f"({to_text(x)})"

    if isinstance(e, Product):
        return f"{sub(e.left)} * {sub(e.right)}"
    if isinstance(e, Semidirect):
        a = e.action.kind if e.action.kind != "explicit" else f"explicit {e.action.ident}"
        return f"{sub(e.normal)} : {sub(e.acting)} [{a}]"
    raise TypeError(f"not a group expression: {e!r}")


# -- building ----------------------------------------------------------------

PSL2_FIELDS = (5, 7)


def _cycle(points, degree):
    return Permutation.from_cycles([tuple(points)], degree)


def _atom_group(e) -> PermGroup:
    if isinstance(e, Cyclic):
        return PermGroup([_cycle(range(e.n), e.n)]) if e.n > 1 else PermGroup([Permutation.identity(1)])
    if isinstance(e, Dihedral):
        n = e.n
        if n == 1:
            return PermGroup([Permutation.identity(2), _cycle((0, 1), 2)])
        if n == 2:
            return PermGroup([Permutation.from_cycles([(0, 1), (2, 3)], 4),
                              Permutation.from_cycles([(0, 2), (1, 3)], 4)])
        return PermGroup([_cycle(range(n), n), Permutation([(-i) % n for i in range(n)])])
    if isinstance(e, Sym):
        n = e.n
        if n == 1:
            return PermGroup([Permutation.identity(1)])
        if n == 2:
            return PermGroup([_cycle((0, 1), 2)])
        return PermGroup([_cycle((0, 1), n), _cycle(range(n), n)])
    if isinstance(e, Alt):
        n = e.n
        if n <= 2:
            return PermGroup([Permutation.identity(n)])
        if n == 3:
            return PermGroup([_cycle((0, 1, 2), 3)])
        long = range(n) if n % 2 else range(1, n)
        return PermGroup([_cycle((0, 1, 2), n), _cycle(long, n)])
    if isinstance(e, ElemAbelian):
        d = e.p * e.k
        return PermGroup([_cycle(range(i * e.p, (i + 1) * e.p), d) for i in range(e.k)])
    if isinstance(e, Heis):
        return heisenberg(e.p)
    if isinstance(e, PSL2):
        return psl2(e.q)
    raise TypeError(e)


def heisenberg(p: int) -> PermGroup:
    """Unipotent upper-triangular 3x3 matrices over F_p, left-regular on p^3 points.

    The point ``a*p^2 + b*p + c`` is the matrix with entries (1,2)=a, (2,3)=b,
    (1,3)=c.  Generators: the elementary matrices for entries (1,2) and (2,3).
    """
    def idx(a, b, c):
        return (a % p) * p * p + (b % p) * p + (c % p)

    def left(a1, b1, c1):
        img = [0] * p ** 3
        for a in range(p):
            for b in range(p):
                for c in range(p):
                    img[idx(a, b, c)] = idx(a1 + a, b1 + b, c1 + c + a1 * b)
        return Permutation(img)

    return PermGroup([left(1, 0, 0), left(0, 1, 0)])


def psl2(q: int) -> PermGroup:
    """PSL(2,q) on the projective line; point ``q`` is infinity.

    Generators ``x -> x+1`` and ``x -> -1/x``.
    """
    inf = q
    shift = [(x + 1) % q for x in range(q)] + [inf]
    inv = [inf if x == 0 else (-pow(x, -1, q)) % q for x in range(q)] + [0]
    return PermGroup([Permutation(shift), Permutation(inv)])


def expected_order(e: GroupExpr) -> int:
    if isinstance(e, Cyclic):
        return e.n
    if isinstance(e, Dihedral):
        return 2 * e.n
    if isinstance(e, Sym):
        return math.factorial(e.n)
    if isinstance(e, Alt):
        return max(1, math.factorial(e.n) // 2)
    if isinstance(e, ElemAbelian):
        return e.p ** e.k
    if isinstance(e, Heis):
        return e.p ** 3
    if isinstance(e, PSL2):
        return e.q * (e.q ** 2 - 1) // 2
    if isinstance(e, Product):
        return expected_order(e.left) * expected_order(e.right)
    if isinstance(e, Semidirect):
        return expected_order(e.normal) * expected_order(e.acting)
    raise TypeError(e)


_WORD = re.compile(r"n(\d+)(?:\^(-?\d+))?")


def eval_word(word: str, gens: tuple[Permutation, ...]) -> Permutation:
    result = gens[0].inverse() * gens[0]
    for tok in word.split():
        if tok == "1":
            continue
        m = _WORD.fullmatch(tok)
        if not m:
            raise InvalidAction(f"bad word token {tok!r}")
        j = int(m.group(1))
        if j >= len(gens):
            raise InvalidAction(f"word uses n{j} but the normal subgroup has {len(gens)} generators")
        result = result * gens[j] ** int(m.group(2) or 1)
    return result


def build(expr: GroupExpr | str, actions: dict | None = None) -> PermGroup:
    """Permutation group for an expression; explicit actions come from ``actions``."""
    if isinstance(expr, str):
        expr = parse(expr)
    actions = actions if actions is not None else default_actions()
    G = _build(expr, actions)
    want = expected_order(expr)
    if G.order != want:
        raise RuntimeError(f"{to_text(expr)} built with order {G.order}, expected {want}")
    return G


def _build(e: GroupExpr, actions: dict) -> PermGroup:
    if isinstance(e, ATOMS):
        return _atom_group(e)
    if isinstance(e, Product):
        return direct_product(_build(e.left, actions), _build(e.right, actions))
    if isinstance(e, Semidirect):
        kind = e.action.kind
        if kind == "swap":
            return swap_extension(_build(e.normal.left, actions))
        N = _build(e.normal, actions)
        H = _build(e.acting, actions)
        if kind == "inv":
            if not N.is_abelian():
                raise InvalidAction("[inv] needs an abelian normal subgroup")
            images = [[g.inverse() for g in N.generators] for _ in H.generators]
        else:
            table = actions.get(e.action.ident)
            if table is None:
                raise InvalidAction(f"unknown explicit action {e.action.ident!r}")
            images = []
            for i in range(len(H.generators)):
                words = table["images"].get(f"h{i}")
                if words is None or len(words) != len(N.generators):
                    raise InvalidAction(f"action {e.action.ident!r}: h{i} needs "
                                        f"{len(N.generators)} images")
                images.append([eval_word(w, N.generators) for w in words])
        return semidirect_product(N, H, images)
    raise TypeError(e)


# -- catalog -----------------------------------------------------------------

@dataclass
class CatalogEntry:
    label: str
    expr: str | None = None
    generators: dict | None = None
    actions: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    note: str | None = None
    group: PermGroup | None = field(default=None, repr=False)

    def build(self, actions: dict) -> PermGroup:
        if self.expr is not None:
            return build(self.expr, actions)
        d = self.generators["degree"]
        gens = [Permutation.from_cycles([tuple(c) for c in cyc], d) for cyc in self.generators["cycles"]]
        return PermGroup(gens or [Permutation.identity(d)], d)


def _schema(name: str) -> dict:
    with resources.files("jordanlab").joinpath(f"data/schemas/{name}").open(encoding="utf-8") as fh:
        return json.load(fh)


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def validate_json(doc, schema_name: str) -> None:
    """Raise :class:`CatalogError` with a JSON pointer on the first violation."""
    schema = _schema(schema_name)
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        raise CatalogError(f"schema violation at {_pointer(err.path)}: {err.message}")


def parse_catalog(doc) -> list[CatalogEntry]:
    validate_json(doc, "catalog.schema.json")
    entries = []
    labels = set()
    actions: dict = {}
    for i, raw in enumerate(doc):
        if raw["label"] in labels:
            raise CatalogError(f"duplicate label {raw['label']!r} at /{i}/label")
        labels.add(raw["label"])
        for k, v in raw.get("actions", {}).items():
            if k in actions:
                raise CatalogError(f"duplicate action id {k!r} at /{i}/actions/{k}")
            actions[k] = v
        entries.append(CatalogEntry(raw["label"], raw.get("expr"), raw.get("generators"),
                                    raw.get("actions", {}), raw.get("expected", {}), raw.get("note")))
    for e in entries:
        try:
            e.group = e.build(actions)
        except (JordanLabError, ValueError, RuntimeError) as exc:
            raise CatalogError(f"entry {e.label!r} does not build: {exc}") from exc
        want = e.expected.get("order")
        if want is not None and want != e.group.order:
            raise CatalogError(f"entry {e.label!r}: expected order {want}, built order {e.group.order}")
    return entries


def load_catalog(path) -> list[CatalogEntry]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"schema violation at /: not valid JSON ({exc.msg})") from exc
    return parse_catalog(doc)


def catalog_actions(entries: list[CatalogEntry]) -> dict:
    out: dict = {}
    for e in entries:
        out.update(e.actions)
    return out


def default_catalog_path() -> Path:
    return Path(str(resources.files("jordanlab").joinpath("data/catalog.json")))


@lru_cache(maxsize=None)
def _default_entries() -> tuple[CatalogEntry, ...]:
    return tuple(load_catalog(default_catalog_path()))


def default_catalog() -> list[CatalogEntry]:
    return list(_default_entries())


def default_actions() -> dict:
    return catalog_actions(default_catalog())


def catalog_by_label(entries=None) -> dict[str, CatalogEntry]:
    return {e.label: e for e in (entries if entries is not None else default_catalog())}


def read_expressions(path) -> list[str]:
    """Expressions from a DSL text file: one per line, ``#`` starts a comment."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out
