"""Jordan constants, weak Jordan constants and Chermak-Delgado data.

For a finite group ``G``:

* ``nu(G)``   -- least index of a normal abelian subgroup of ``G``;
* ``abar(G)`` -- least index of an abelian subgroup of ``G``;
* ``J(G)``    -- max of ``nu(H)`` over all subgroups ``H``;
* ``Jbar(G)`` -- max of ``abar(H)`` over all subgroups ``H``.

``Jbar(G) == abar(G)`` always holds, because for an abelian ``A <= G`` and any
``H <= G`` the index ``[H : H n A]`` is at most ``[G : A]``.  That identity
gives an exact ``Jbar`` even above the lattice cap.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import BudgetExceeded, CapExceeded
from .perm import (ELEMENT_CAP, Homomorphism, PermGroup, Permutation, quotient,
                   trivial_group)
from .subgroups import (ORDER_CAP, SubgroupLattice, SubgroupRecord, all_subgroups, closure,
                        element_table, ids_to_mask, max_abelian_subgroup,
                        minimal_normal_subgroups, normal_subgroups)


class Valued(NamedTuple):
    value: int
    witness: PermGroup | None
    method: str


@dataclass(frozen=True)
class Bounds:
    lower: int
    upper: int

    def to_json(self):
        return {"lower": self.lower, "upper": self.upper}


# -- per-subgroup quantities inside a lattice ---------------------------------

def _abelian_sorted(L: SubgroupLattice) -> list[SubgroupRecord]:
    key = "abelian_sorted"
    if key not in L.group._cache:
        recs = [r for r in L.records if r.is_abelian]
        recs.sort(key=lambda r: (-r.order, tuple(r.elements.tolist())))
        L.group._cache[key] = recs
    return L.group._cache[key]


def _normal_in(T, A: SubgroupRecord, H: SubgroupRecord) -> bool:
    for h in H.gens:
        for a in A.gens:
            if not (A.mask >> int(T.conj(a, h))) & 1:
                return False
    return True


def lattice_nu(L: SubgroupLattice, H: SubgroupRecord) -> SubgroupRecord:
    """Largest abelian record normal in ``H`` (least element ids on ties)."""
    T = L.table
    for A in _abelian_sorted(L):
        if H.order % A.order or A.mask & H.mask != A.mask:
            continue
        if _normal_in(T, A, H):
            return A
    raise AssertionError("the trivial subgroup is always normal abelian")


def lattice_max_abelian(L: SubgroupLattice, H: SubgroupRecord) -> SubgroupRecord:
    for A in _abelian_sorted(L):
        if H.order % A.order == 0 and A.mask & H.mask == A.mask:
            return A
    raise AssertionError("the trivial subgroup is always abelian")


def _best(candidates):
    """Tie-break for witnesses: largest value, then largest order, then least element ids."""
    return min(candidates, key=lambda t: (-t[0], -t[1].order, tuple(t[1].elements.tolist())))


# -- single-group operations -------------------------------------------------

def nu(G: PermGroup, lattice: SubgroupLattice | None = None) -> Valued:
    """Least index of a normal abelian subgroup, with the attaining subgroup."""
    if lattice is not None:
        A = lattice_nu(lattice, lattice.full())
        return Valued(G.order // A.order, lattice.as_group(A), "lattice")
    minimal = minimal_normal_subgroups(G)
    if all(not r.is_abelian for r in minimal):
        return Valued(G.order, trivial_group(G.degree), "socle-shortcut")
    T = element_table(G)
    abelian = [r for r in normal_subgroups(G) if r.is_abelian]
    A = min(abelian, key=lambda r: (-r.order, tuple(r.elements.tolist())))
    return Valued(G.order // A.order, T.to_group(A.gens), "normal-subgroups")


def abar_index(G: PermGroup, element_cap: int = ELEMENT_CAP) -> Valued:
    """``|G| / max_abelian_order(G)`` with an abelian witness of maximal order."""
    rec = max_abelian_subgroup(G, element_cap)
    T = element_table(G, element_cap)
    return Valued(G.order // rec.order, T.to_group(rec.gens), "branch-and-bound")


def jordan_constant(G: PermGroup, order_cap: int = ORDER_CAP, deadline: float | None = None) -> Valued:
    """Exact ``J(G)`` with an attaining subgroup.

    Uses the full lattice when ``|G| <= order_cap``; above it the value is
    certified only when no normal abelian subgroup is non-trivial, in which
    case ``J(G) = |G|``.
    """
    if G.order <= order_cap:
        L = all_subgroups(G, order_cap, deadline)
        H = _best((r.order // lattice_nu(L, r).order, r) for r in L.representatives())
        return Valued(H[0], L.as_group(H[1]), "full-enumeration")
    v = nu(G)
    if v.value == G.order:
        return Valued(G.order, G, "socle-shortcut")
    raise CapExceeded(f"uncertified: |G| = {G.order} exceeds order cap {order_cap} "
                      f"and G has a non-trivial normal abelian subgroup")


def weak_jordan_constant(G: PermGroup, order_cap: int = ORDER_CAP, deadline: float | None = None) -> Valued:
    """Exact ``Jbar(G)`` with an attaining subgroup."""
    if G.order <= order_cap:
        L = all_subgroups(G, order_cap, deadline)
        H = _best((r.order // lattice_max_abelian(L, r).order, r) for r in L.representatives())
        return Valued(H[0], L.as_group(H[1]), "full-enumeration")
    v = abar_index(G)
    return Valued(v.value, G, "abelian-index")


# -- reports -----------------------------------------------------------------

def _witness_json(H: PermGroup | None):
    if H is None:
        return None
    gens = [str(g) for g in H.generators if not g.is_identity()] if H.order > 1 else []
    return {"order": H.order, "generators": gens}


@dataclass
class JordanReport:
    label: str
    order: int
    degree: int
    nu: int | Bounds | None
    abar: int | Bounds | None
    J: int | Bounds
    Jbar: int | Bounds | None
    method: str
    witnesses: dict = field(default_factory=dict)
    expr: str | None = None
    nu_method: str | None = None
    certificate: dict | None = None
    subgroup_count: int | None = None
    class_count: int | None = None
    truncated: bool = False
    timing: float = 0.0

    @property
    def exact(self) -> bool:
        return isinstance(self.J, int)

    def to_dict(self, timing: bool = True) -> dict:
        def val(v):
            return v.to_json() if isinstance(v, Bounds) else v

        out = {
            "label": self.label,
            "expr": self.expr,
            "order": self.order,
            "degree": self.degree,
            "nu": val(self.nu),
            "abar": val(self.abar),
            "J": val(self.J),
            "Jbar": val(self.Jbar),
            "method": self.method,
            "nu_method": self.nu_method,
            "witnesses": {k: _witness_json(v) for k, v in sorted(self.witnesses.items()) if v is not None},
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.subgroup_count is not None:
            out["subgroup_count"] = self.subgroup_count
            out["class_count"] = self.class_count
        if self.truncated:
            out["truncated"] = True
        if timing:
            out["timing"] = round(self.timing, 4)
        return out


def jordan_report(G: PermGroup, label: str = "", expr: str | None = None,
                  order_cap: int = ORDER_CAP, element_cap: int = ELEMENT_CAP,
                  time_budget: float | None = None) -> JordanReport:
    """Compute every constant the engine can certify for ``G``.

    ``method`` records how ``J`` was obtained: ``full-enumeration``,
    ``socle-shortcut`` or ``bound-only`` (then ``J`` is a :class:`Bounds`).
    """
    t0 = time.perf_counter()
    deadline = None if time_budget is None else time.monotonic() + time_budget
    rep = JordanReport(label=label, order=G.order, degree=G.degree, nu=None, abar=None,
                       J=Bounds(1, G.order), Jbar=None, method="bound-only", expr=expr)
    if G.order > element_cap:
        rep.timing = time.perf_counter() - t0
        return rep

    minimal = minimal_normal_subgroups(G, element_cap)
    rep.certificate = {"minimal_normal_orders": [r.order for r in minimal],
                       "minimal_normal_abelian": [bool(r.is_abelian) for r in minimal]}
    v = nu(G)
    rep.nu, rep.nu_method = v.value, v.method
    rep.witnesses["nu"] = v.witness
    a = abar_index(G, element_cap)
    rep.abar = a.value
    rep.witnesses["abar"] = a.witness

    if G.order <= order_cap:
        try:
            L = all_subgroups(G, order_cap, deadline)
        except BudgetExceeded:
            rep.truncated = True
            L = None
        if L is not None:
            j = jordan_constant(G, order_cap)
            jb = weak_jordan_constant(G, order_cap)
            rep.J, rep.Jbar, rep.method = j.value, jb.value, "full-enumeration"
            rep.witnesses["J"] = j.witness
            rep.witnesses["Jbar"] = jb.witness
            rep.subgroup_count, rep.class_count = len(L), len(L.classes)
            rep.timing = time.perf_counter() - t0
            return rep
    rep.Jbar = a.value
    rep.witnesses["Jbar"] = G
    if rep.nu == G.order:
        rep.J, rep.method = G.order, "socle-shortcut"
        rep.witnesses["J"] = G
    else:
        rep.J = Bounds(max(rep.nu, a.value), min(G.order, a.value ** 2))
    rep.timing = time.perf_counter() - t0
    return rep


# -- Chermak-Delgado ----------------------------------------------------------

class CDEntry(NamedTuple):
    record: int
    measure: int


def centralizer_mask(L: SubgroupLattice, r: SubgroupRecord) -> int:
    T = L.table
    m = (1 << T.n) - 1
    for g in r.gens:
        m &= T.commute_mask(g)
    return m


def cd_measures(L: SubgroupLattice) -> list[int]:
    """``|H| * |C_G(H)|`` for every record (constant on conjugacy classes)."""
    out = [0] * len(L)
    for cls in L.classes:
        r = L.records[cls[0]]
        m = r.order * centralizer_mask(L, r).bit_count()
        for i in cls:
            out[i] = m
    return out


def cd_lattice(G: PermGroup, order_cap: int = ORDER_CAP) -> list[CDEntry]:
    """The subgroups of maximal Chermak-Delgado measure."""
    L = all_subgroups(G, order_cap)
    meas = cd_measures(L)
    top = max(meas)
    return [CDEntry(i, m) for i, m in enumerate(meas) if m == top]


def cd_is_sublattice(G: PermGroup, entries: list[CDEntry], order_cap: int = ORDER_CAP) -> bool:
    """Check that the maximal-measure set is closed under intersection and join."""
    L = all_subgroups(G, order_cap)
    T = L.table
    members = {L.records[e.record].mask for e in entries}
    recs = [L.records[e.record] for e in entries]
    for i, a in enumerate(recs):
        for b in recs[i + 1:]:
            if a.mask & b.mask not in members:
                return False
            elems, gens = a.elements, list(a.gens)
            for g in b.gens:
                if not (ids_to_mask(elems, T.n) >> g) & 1:
                    elems = closure(T, elems, gens, g)
                    gens.append(g)
            if ids_to_mask(elems, T.n) not in members:
                return False
    return True


# -- lemma verifiers -----------------------------------------------------------

def verify_cd_squeeze(G: PermGroup, order_cap: int = ORDER_CAP) -> bool:
    """``Jbar <= J <= Jbar^2`` for exactly computed constants."""
    J = jordan_constant(G, order_cap).value
    Jb = weak_jordan_constant(G, order_cap).value
    return Jb <= J <= Jb * Jb


def verify_monotonicity(G: PermGroup, H: PermGroup | None = None, N: PermGroup | None = None,
                        order_cap: int = ORDER_CAP) -> bool:
    """``J(H) <= J(G)`` for a subgroup ``H``, or ``J(G/N) <= J(G)`` for normal ``N``."""
    if (H is None) == (N is None):
        raise ValueError("give exactly one of H (subgroup) or N (normal subgroup)")
    JG = jordan_constant(G, order_cap).value
    if H is not None:
        if not H.is_subgroup_of(G):
            raise ValueError("H is not a subgroup of G")
        return jordan_constant(H, order_cap).value <= JG
    Q, _ = quotient(G, N)
    return jordan_constant(Q, order_cap).value <= JG


class SerreResult(NamedTuple):
    holds: bool
    counterexample: tuple[Permutation, Permutation, Permutation] | None


def verify_serre_lemma(G: PermGroup, element_cap: int = ELEMENT_CAP) -> SerreResult:
    """Check: if ``g`` normalizes ``<h>`` then ``g h g^-1`` is ``h`` or ``h^-1``.

    A failure carries the triple ``(g, h, g h g^-1)``.
    """
    if G.order > element_cap:
        raise CapExceeded(f"|G| = {G.order} exceeds element cap {element_cap}")
    T = element_table(G, element_cap)
    allg = np.arange(T.n)
    for h in range(1, T.n):
        cyc = ids_to_mask(T.powers(h), T.n)
        c = np.asarray(T.mul(T.mul(allg, h), T.inv[allg]))
        for g in np.flatnonzero((c != h) & (c != T.inv[h])):
            x = int(c[g])
            if (cyc >> x) & 1:
                return SerreResult(False, (T.elements[int(g)], T.elements[h], T.elements[x]))
    return SerreResult(True, None)


def find_embedding(source: PermGroup, target: PermGroup) -> tuple[Permutation, ...] | None:
    """Images of the source generators under some injective homomorphism, or None.

    Candidates are generator-image tuples with matching element orders, the
    first image ranging over conjugacy-class representatives only; each is
    tested with the graph-closure certificate.
    """
    gens = source.nontrivial_generators()
    if len(gens) > 2:
        raise ValueError("source must be given by at most 2 generators")
    if not gens:
        return (target.identity(),) * len(source.generators)
    if target.order % source.order:
        return None
    T = element_table(target)
    orders = T.element_orders()
    reps = [int(c[0]) for c in T.conjugacy_classes()]
    firsts = [x for x in reps if orders[x] == gens[0].order()]
    seconds = [[None]] if len(gens) == 1 else [np.flatnonzero(orders == gens[1].order()).tolist()]
    src = PermGroup(gens)
    for a in firsts:
        for b in seconds[0]:
            imgs = (T.elements[a],) if b is None else (T.elements[a], T.elements[b])
            phi = Homomorphism(src, target, imgs)
            if phi.is_injective():
                return imgs
    return None


def no_faithful_hom(source: PermGroup, target: PermGroup) -> bool:
    """True iff no injective homomorphism ``source -> target`` exists."""
    return find_embedding(source, target) is None
