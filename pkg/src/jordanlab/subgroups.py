"""Subgroup enumeration over a fixed element enumeration.

Subgroups are stored as sorted arrays of element ids plus a Python-int
bitmask over those ids; the bitmask doubles as the deduplication key and
makes inclusion tests a single ``&``.

The full lattice is built one conjugacy class at a time: every class
representative is joined with every cyclic subgroup of prime-power order,
and each new join contributes its whole conjugacy class.  Since
``<R^x, C^x> = <R, C>^x`` this reaches every subgroup.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, CapExceeded
from .perm import ELEMENT_CAP, PermGroup, Permutation, normal_closure

ORDER_CAP = 1000
TABLE_CAP = 2500


def ids_to_mask(ids, n: int) -> int:
    b = np.zeros(n, dtype=bool)
    b[ids] = True
    return int.from_bytes(np.packbits(b, bitorder="little").tobytes(), "little")


def mask_to_ids(mask: int, n: int) -> np.ndarray:
    raw = np.frombuffer(mask.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.flatnonzero(np.unpackbits(raw, bitorder="little")[:n])


def _check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise BudgetExceeded("time budget exhausted")


class ElementTable:
    """Element ids of a group with vectorized products.

    Ids follow the group's chain-order enumeration (id 0 is the identity).
    A dense multiplication table is kept when ``|G| <= table_cap``.
    """

    def __init__(self, G: PermGroup, element_cap: int = ELEMENT_CAP, table_cap: int = TABLE_CAP):
        if G.order > element_cap:
            raise CapExceeded(f"|G| = {G.order} exceeds element cap {element_cap}")
        self.group = G
        self.n = G.order
        self.elements = G.elements(element_cap)
        self.array = G.elements_array(element_cap)
        self.index = G.element_index(element_cap)
        self.inv = self.index.ids(np.argsort(self.array, axis=1).astype(self.array.dtype))
        self.gen_ids = [int(i) for i in self.index.ids(np.array([g.images for g in G.generators], dtype=self.array.dtype))]
        self.table = self._build_table() if self.n <= table_cap else None
        self._commute: dict[int, int] = {}
        self._orders: np.ndarray | None = None
        self._classes: list[np.ndarray] | None = None

    def _build_table(self) -> np.ndarray:
        n, deg = self.array.shape
        table = np.empty((n, n), dtype=np.int32)
        chunk = max(1, 4_000_000 // max(1, n * deg))
        arr = self.array
        for start in range(0, n, chunk):
            X = arr[start:start + chunk]
            prod = X[np.arange(len(X))[:, None, None], arr[None, :, :]]
            table[start:start + chunk] = self.index.ids(prod.reshape(-1, deg)).reshape(len(X), n)
        return table

    def mul(self, a, b):
        """Products ``a * b`` of ids (scalars or equal-shape/broadcastable arrays)."""
        if self.table is not None:
            return self.table[a, b]
        a_arr, b_arr = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        rows = np.take_along_axis(self.array[a_arr.ravel()], self.array[b_arr.ravel()].astype(np.intp), axis=1)
        out = self.index.ids(rows).reshape(a_arr.shape)
        return int(out) if out.ndim == 0 else out

    def conj(self, ids, g: int):
        """``g^-1 * x * g`` for each id ``x``."""
        return self.mul(self.mul(self.inv[g], ids), g)

    def conj_map(self, g: int) -> np.ndarray:
        return np.asarray(self.conj(np.arange(self.n), g))

    def commute_mask(self, x: int) -> int:
        """Bitmask of the centralizer of element ``x``."""
        m = self._commute.get(x)
        if m is None:
            arr = self.array
            s = arr[x].astype(np.intp)
            m = ids_to_mask(np.flatnonzero((arr[:, s] == s[arr]).all(axis=1)), self.n)
            self._commute[x] = m
        return m

    def element_orders(self) -> np.ndarray:
        if self._orders is None:
            self._orders = np.array([e.order() for e in self.elements], dtype=np.int64)
        return self._orders

    def powers(self, x: int) -> np.ndarray:
        out = [0]
        y = x
        while y != 0:
            out.append(int(y))
            y = self.mul(y, x)
        return np.array(sorted(out), dtype=np.int64)

    def conjugacy_classes(self) -> list[np.ndarray]:
        """Element conjugacy classes, ordered by smallest id."""
        if self._classes is None:
            self._classes = self._conjugacy_classes()
        return self._classes

    def _conjugacy_classes(self) -> list[np.ndarray]:
        maps = [self.conj_map(g) for g in self.gen_ids]
        label = np.full(self.n, -1, dtype=np.int64)
        classes = []
        for x in range(self.n):
            if label[x] >= 0:
                continue
            cid = len(classes)
            label[x] = cid
            orbit = [x]
            for y in orbit:
                for m in maps:
                    z = int(m[y])
                    if label[z] < 0:
                        label[z] = cid
                        orbit.append(z)
            classes.append(np.array(sorted(orbit), dtype=np.int64))
        return classes

    def is_abelian_ids(self, gens) -> bool:
        gens = list(gens)
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                if self.mul(a, b) != self.mul(b, a):
                    return False
        return True

    def to_group(self, gen_ids) -> PermGroup:
        gens = [self.elements[int(i)] for i in gen_ids if int(i) != 0]
        if not gens:
            return PermGroup([Permutation.identity(self.group.degree)])
        return PermGroup(gens)

    def ids_of_group(self, H: PermGroup) -> np.ndarray:
        return np.sort(self.index.ids(H.elements_array()))


def element_table(G: PermGroup, element_cap: int = ELEMENT_CAP) -> ElementTable:
    """The cached :class:`ElementTable` of ``G``."""
    T = G._cache.get("table")
    if T is None:
        T = ElementTable(G, element_cap)
        G._cache["table"] = T
    return T


@dataclass(eq=False)
class SubgroupRecord:
    """A subgroup of the parent group, as a set of parent element ids."""

    index: int
    elements: np.ndarray
    mask: int
    order: int
    gens: tuple[int, ...]
    is_abelian: bool
    is_normal: bool | None = None
    class_id: int | None = None
    parent_order: int = 0

    def sort_key(self):
        return (self.order, tuple(self.elements.tolist()))

    def contains(self, other: "SubgroupRecord") -> bool:
        return other.mask & self.mask == other.mask


def closure(T: ElementTable, elems: np.ndarray, gens: list[int], extra: int) -> np.ndarray:
    """Elements of ``<H, extra>`` where ``H`` has elements ``elems`` and generators ``gens``.

    Right cosets ``H*y`` are permuted by right multiplication, so a search over
    coset representatives fills the closure coset by coset.
    """
    inside = np.zeros(T.n, dtype=bool)
    inside[elems] = True
    parts = [elems]
    allgens = list(gens) + [extra]
    reps = [0]
    for x in reps:
        for t in allgens:
            y = int(T.mul(x, t))
            if not inside[y]:
                coset = np.asarray(T.mul(elems, y))
                inside[coset] = True
                parts.append(coset)
                reps.append(y)
    return np.sort(np.concatenate(parts))


def _make_record(T: ElementTable, elems: np.ndarray, gens, normal=None) -> SubgroupRecord:
    elems = np.asarray(elems, dtype=np.int64)
    gens = tuple(int(g) for g in gens if int(g) != 0)
    return SubgroupRecord(
        index=-1,
        elements=elems,
        mask=ids_to_mask(elems, T.n),
        order=len(elems),
        gens=gens,
        is_abelian=T.is_abelian_ids(gens),
        is_normal=normal,
        parent_order=T.n,
    )


@dataclass
class SubgroupLattice:
    group: PermGroup
    table: ElementTable
    records: list[SubgroupRecord]
    classes: list[list[int]]
    _by_mask: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._by_mask = {r.mask: r.index for r in self.records}

    def __len__(self):
        return len(self.records)

    def find(self, mask: int) -> SubgroupRecord | None:
        i = self._by_mask.get(mask)
        return None if i is None else self.records[i]

    def contains(self, i: int, j: int) -> bool:
        """True iff record ``j`` is a subgroup of record ``i``."""
        return self.records[i].contains(self.records[j])

    def subgroups_of(self, i: int) -> list[SubgroupRecord]:
        m = self.records[i].mask
        return [r for r in self.records if r.mask & m == r.mask]

    def inclusion(self) -> list[tuple[int, int]]:
        """All pairs ``(j, i)`` with record j contained in record i."""
        return [(r.index, s.index) for s in self.records for r in self.records if s.contains(r)]

    def representatives(self) -> list[SubgroupRecord]:
        return [self.records[c[0]] for c in self.classes]

    def class_of(self, i: int) -> list[int]:
        return self.classes[self.records[i].class_id]

    def normal_records(self) -> list[SubgroupRecord]:
        return [r for r in self.records if r.is_normal]

    def full(self) -> SubgroupRecord:
        return self.records[-1]

    def trivial(self) -> SubgroupRecord:
        return self.records[0]

    def as_group(self, r: SubgroupRecord) -> PermGroup:
        return self.table.to_group(r.gens)

    def counts_by_order(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for r in self.records:
            out[r.order] = out.get(r.order, 0) + 1
        return dict(sorted(out.items()))


def _prime_power(n: int) -> bool:
    if n == 1:
        return False
    p = 2
    while n % p:
        p += 1
    while n % p == 0:
        n //= p
    return n == 1


def all_subgroups(G: PermGroup, order_cap: int = ORDER_CAP, deadline: float | None = None) -> SubgroupLattice:
    """Every subgroup of ``G`` with its conjugacy class partition.

    Raises :class:`CapExceeded` (uncertified) when ``|G| > order_cap``; use
    :func:`minimal_normal_subgroups` based shortcuts for larger groups.
    """
    if G.order > order_cap:
        raise CapExceeded(f"uncertified: |G| = {G.order} exceeds order cap {order_cap}; "
                          "use the minimal-normal-subgroup shortcut instead")
    cached = G._cache.get("lattice")
    if cached is not None:
        return cached
    T = element_table(G)
    n = T.n
    conj_maps = [T.conj_map(g) for g in T.gen_ids]

    seen: dict[int, int] = {}
    classes: list[list[SubgroupRecord]] = []
    queue: list[SubgroupRecord] = []

    def add_class(elems, gens):
        rec = _make_record(T, elems, gens)
        if rec.mask in seen:
            return
        cid = len(classes)
        members = [rec]
        seen[rec.mask] = cid
        for r in members:
            for cm in conj_maps:
                e = np.sort(cm[r.elements])
                m = ids_to_mask(e, n)
                if m not in seen:
                    seen[m] = cid
                    members.append(SubgroupRecord(-1, e, m, r.order, tuple(int(cm[g]) for g in r.gens),
                                                  rec.is_abelian, parent_order=n))
        classes.append(members)
        queue.append(min(members, key=SubgroupRecord.sort_key))

    orders = T.element_orders()
    cyclic = []
    cyc_seen = set()
    for x in range(1, n):
        if not _prime_power(int(orders[x])):
            continue
        p = T.powers(x)
        m = ids_to_mask(p, n)
        if m not in cyc_seen:
            cyc_seen.add(m)
            cyclic.append((x, p))

    add_class(np.array([0]), ())
    for x, p in cyclic:
        add_class(p, (x,))
    for rep in queue:
        _check_deadline(deadline)
        for x, _ in cyclic:
            if (rep.mask >> x) & 1:
                continue
            elems = closure(T, rep.elements, list(rep.gens), x)
            if ids_to_mask(elems, n) not in seen:
                add_class(elems, list(rep.gens) + [x])

    # canonical sealing: records by (order, element ids); classes by their least member
    for members in classes:
        normal = len(members) == 1
        for r in members:
            r.is_normal = normal
    flat = sorted((r for members in classes for r in members), key=SubgroupRecord.sort_key)
    for i, r in enumerate(flat):
        r.index = i
    class_lists = sorted((sorted(r.index for r in members) for members in classes), key=lambda c: c[0])
    for cid, c in enumerate(class_lists):
        for i in c:
            flat[i].class_id = cid
    lattice = SubgroupLattice(G, T, flat, class_lists)
    G._cache["lattice"] = lattice
    return lattice


def subgroup_conjugacy_classes(G: PermGroup, lattice: SubgroupLattice) -> list[list[int]]:
    """Orbits of lattice records under conjugation by the generators of ``G``."""
    T = lattice.table
    maps = [T.conj_map(g) for g in T.gen_ids]
    label = [-1] * len(lattice)
    out = []
    for r in lattice.records:
        if label[r.index] >= 0:
            continue
        orbit = [r.index]
        label[r.index] = len(out)
        for i in orbit:
            for cm in maps:
                j = lattice.find(ids_to_mask(cm[lattice.records[i].elements], T.n)).index
                if label[j] < 0:
                    label[j] = len(out)
                    orbit.append(j)
        out.append(sorted(orbit))
    return out


def _normal_closure_record(T: ElementTable, x: int) -> tuple[SubgroupRecord, PermGroup]:
    N = normal_closure(T.group, [T.elements[x]])
    ids = T.ids_of_group(N)
    gens = T.index.ids(np.array([g.images for g in N.generators], dtype=T.array.dtype))
    return _make_record(T, ids, gens, normal=True), N


def minimal_normal_subgroups(G: PermGroup, element_cap: int = ELEMENT_CAP) -> list[SubgroupRecord]:
    """Minimal normal subgroups, as normal closures of single class representatives.

    A minimal normal subgroup is the normal closure of any of its non-identity
    elements, so the minimal members of the family of class-representative
    closures are exactly the minimal normal subgroups.
    """
    T = element_table(G, element_cap)
    found: dict[int, SubgroupRecord] = {}
    for cls in T.conjugacy_classes():
        x = int(cls[0])
        if x == 0:
            continue
        rec, _ = _normal_closure_record(T, x)
        found.setdefault(rec.mask, rec)
    cands = sorted(found.values(), key=SubgroupRecord.sort_key)
    minimal = [r for r in cands if not any(s is not r and r.contains(s) for s in cands)]
    for i, r in enumerate(minimal):
        r.index = i
    return minimal


def normal_subgroups(G: PermGroup, lattice: SubgroupLattice | None = None,
                     element_cap: int = ELEMENT_CAP) -> list[SubgroupRecord]:
    """All normal subgroups of ``G``.

    Without a lattice the normal subgroups are the joins of normal closures of
    conjugacy-class representatives.
    """
    if lattice is not None:
        return lattice.normal_records()
    T = element_table(G, element_cap)
    closures: dict[int, tuple[SubgroupRecord, PermGroup]] = {}
    for cls in T.conjugacy_classes():
        x = int(cls[0])
        if x != 0:
            rec, N = _normal_closure_record(T, x)
            closures.setdefault(rec.mask, (rec, N))
    trivial = _make_record(T, np.array([0]), (), normal=True)
    normals = {trivial.mask: (trivial, None)}
    normals.update(closures)
    frontier = list(normals.values())
    while frontier:
        nxt = []
        for rec, N in frontier:
            for crec, C in closures.values():
                if rec.contains(crec) or N is None:
                    continue
                J = PermGroup(list(N.generators) + list(C.generators))
                ids = T.ids_of_group(J)
                m = ids_to_mask(ids, T.n)
                if m not in normals:
                    gens = T.index.ids(np.array([g.images for g in J.generators], dtype=T.array.dtype))
                    item = (_make_record(T, ids, gens, normal=True), J)
                    normals[m] = item
                    nxt.append(item)
        frontier = nxt
    out = sorted((r for r, _ in normals.values()), key=SubgroupRecord.sort_key)
    for i, r in enumerate(out):
        r.index = i
    return out


def max_abelian_subgroup(G: PermGroup, element_cap: int = ELEMENT_CAP) -> SubgroupRecord:
    """An abelian subgroup of maximum order, found by branch and bound.

    A branch holds an abelian subgroup ``A`` and its centralizer ``C``; any
    abelian group containing ``A`` lies inside ``C``, so a branch is cut as
    soon as ``|C|`` cannot beat the incumbent.  Top-level choices range over
    conjugacy-class representatives only.
    """
    T = element_table(G, element_cap)
    n = T.n
    best = [np.array([0]), ()]
    visited: set[int] = set()

    def extend(elems, x):
        parts = [elems]
        inside = set(elems.tolist())
        y = x
        while y not in inside:
            parts.append(np.asarray(T.mul(elems, y)))
            y = int(T.mul(y, x))
        return np.unique(np.concatenate(parts))

    def search(elems, gens, cmask):
        if cmask.bit_count() <= len(best[0]):
            return
        amask = ids_to_mask(elems, n)
        if amask == cmask:
            best[0], best[1] = elems, gens
            return
        for x in mask_to_ids(cmask & ~amask, n):
            x = int(x)
            new = extend(elems, x)
            m = ids_to_mask(new, n)
            if m in visited:
                continue
            visited.add(m)
            search(new, gens + (x,), cmask & T.commute_mask(x))
            if cmask.bit_count() <= len(best[0]):
                return

    full = (1 << n) - 1
    reps = [int(c[0]) for c in T.conjugacy_classes() if int(c[0]) != 0]
    reps.sort(key=lambda x: -T.commute_mask(x).bit_count())
    for x in reps:
        p = T.powers(x)
        m = ids_to_mask(p, n)
        if m in visited:
            continue
        visited.add(m)
        search(p, (x,), full & T.commute_mask(x))
    elems, gens = best
    return _make_record(T, elems, gens)


def max_abelian_order(G: PermGroup, element_cap: int = ELEMENT_CAP) -> int:
    return max_abelian_subgroup(G, element_cap).order
