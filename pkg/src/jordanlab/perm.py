"""Permutations and permutation groups.

Elements are image tuples: ``p.images[i]`` is the image of point ``i``.
Products follow function composition, ``(p * q)(i) == p(q(i))``.

Every :class:`PermGroup` builds its stabilizer chain eagerly with a
deterministic Schreier-Sims pass (new base points are always the smallest
point moved by the sifted residue), so groups are immutable and safe to share
between threads once constructed.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, DegreeMismatch, InvalidAction, NotNormal

DEGREE_CAP = 64
ELEMENT_CAP = 20000


# -- raw tuple helpers (hot paths work on plain tuples) ----------------------

def _mul(p, q):
    return tuple([p[i] for i in q])


def _inv(p):
    r = [0] * len(p)
    for i, x in enumerate(p):
        r[x] = i
    return tuple(r)


def _first_moved(p):
    for i, x in enumerate(p):
        if i != x:
            return i
    return None


class Permutation:
    """A bijection of ``{0, ..., degree-1}`` stored as an image tuple."""

    __slots__ = ("images", "_hash")

    def __init__(self, images: Iterable[int]):
        images = tuple(int(x) for x in images)
        if not images:
            raise ValueError("a permutation needs degree >= 1")
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation: {images}")
        self.images = images
        self._hash = hash(images)

    @classmethod
    def _raw(cls, images: tuple) -> "Permutation":
        p = cls.__new__(cls)
        p.images = images
        p._hash = hash(images)
        return p

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls._raw(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, cycles: Sequence[Sequence[int]], degree: int) -> "Permutation":
        img = list(range(degree))
        seen = set()
        for cyc in cycles:
            for x in cyc:
                if not 0 <= x < degree:
                    raise ValueError(f"point {x} outside 0..{degree - 1}")
                if x in seen:
                    raise ValueError(f"point {x} repeated in cycle list")
                seen.add(x)
            for a, b in zip(cyc, list(cyc[1:]) + list(cyc[:1])):
                img[a] = b
        return cls._raw(tuple(img))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def inverse(self) -> "Permutation":
        return Permutation._raw(_inv(self.images))

    def __invert__(self):
        return self.inverse()

    def __pow__(self, k: int) -> "Permutation":
        if k < 0:
            return self.inverse() ** (-k)
        result = tuple(range(self.degree))
        base = self.images
        while k:
            if k & 1:
                result = _mul(result, base)
            base = _mul(base, base)
            k >>= 1
        return Permutation._raw(result)

    def is_identity(self) -> bool:
        return all(i == x for i, x in enumerate(self.images))

    def order(self) -> int:
        return math.lcm(*(len(c) for c in self.cycles())) if not self.is_identity() else 1

    def cycles(self) -> list[tuple[int, ...]]:
        """Non-trivial cycles, each starting at its smallest point."""
        seen = set()
        out = []
        for i in range(self.degree):
            if i in seen or self.images[i] == i:
                continue
            cyc = [i]
            seen.add(i)
            j = self.images[i]
            while j != i:
                cyc.append(j)
                seen.add(j)
                j = self.images[j]
            out.append(tuple(cyc))
        return out

    def commutes_with(self, other: "Permutation") -> bool:
        return _mul(self.images, other.images) == _mul(other.images, self.images)

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.images == other.images

    def __lt__(self, other):
        return self.images < other.images

    def __hash__(self):
        return self._hash

    def __str__(self):
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cyc)

    def __repr__(self):
        return f"Permutation({str(self)}, degree={self.degree})"


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Return ``p o q``, the permutation ``i -> p(q(i))``."""
    if p.degree != q.degree:
        raise DegreeMismatch(f"degree {p.degree} vs {q.degree}")
    return Permutation._raw(_mul(p.images, q.images))


# -- element hashing ---------------------------------------------------------

_HASH_WEIGHTS = np.random.default_rng(20180315).integers(
    1, 2**63, size=DEGREE_CAP * 4, dtype=np.uint64) | np.uint64(1)


def hash_rows(rows: np.ndarray) -> np.ndarray:
    """64-bit keys for image rows (wrapping arithmetic)."""
    w = _HASH_WEIGHTS[: rows.shape[-1]]
    with np.errstate(over="ignore"):
        return (rows.astype(np.uint64) * w).sum(axis=-1, dtype=np.uint64)


class ElementIndex:
    """Vectorized lookup from image rows to positions in a fixed element list."""

    def __init__(self, rows: np.ndarray):
        keys = hash_rows(rows)
        self._order = np.argsort(keys, kind="stable")
        self._sorted = keys[self._order]
        if len(self._sorted) > 1 and np.any(self._sorted[1:] == self._sorted[:-1]):
            raise RuntimeError("element hash collision")

    def ids(self, rows: np.ndarray) -> np.ndarray:
        """Positions of ``rows``; every row must be a listed element."""
        keys = hash_rows(rows)
        pos = np.searchsorted(self._sorted, keys)
        pos = np.minimum(pos, len(self._sorted) - 1)
        if not np.array_equal(self._sorted[pos], keys):
            raise KeyError("row is not an element of the group")
        return self._order[pos]


# -- stabilizer chain --------------------------------------------------------

def _orbit_transversal(b, gens, ident):
    trans = {b: (ident, ident)}
    queue = [b]
    for x in queue:
        u = trans[x][0]
        for s in gens:
            y = s[x]
            if y not in trans:
                v = _mul(s, u)
                trans[y] = (v, _inv(v))
                queue.append(y)
    return trans


def _strip(g, base, trans, start):
    for level in range(start, len(base)):
        t = trans[level].get(g[base[level]])
        if t is None:
            return g, level
        g = _mul(t[1], g)
    return g, len(base)


def _schreier_sims(gens, degree):
    ident = tuple(range(degree))
    base: list[int] = []
    strong: list[tuple] = []
    for g in gens:
        if g == ident or g in strong:
            continue
        strong.append(g)
        if all(g[b] == b for b in base):
            base.append(_first_moved(g))
    trans: list = [None] * len(base)
    i = len(base) - 1
    while i >= 0:
        level_gens = [s for s in strong if all(s[b] == b for b in base[:i])]
        trans[i] = _orbit_transversal(base[i], level_gens, ident)
        found = None
        for x, (u, _) in list(trans[i].items()):
            for s in level_gens:
                sch = _mul(trans[i][s[x]][1], _mul(s, u))
                h, j = _strip(sch, base, trans, i + 1)
                if h != ident:
                    found = (h, j)
                    break
            if found:
                break
        if found is None:
            i -= 1
            continue
        h, j = found
        strong.append(h)
        if j == len(base):
            base.append(_first_moved(h))
            trans.append(None)
        i = j
    return base, strong, trans


class PermGroup:
    """A finite permutation group given by generators."""

    def __init__(self, generators: Sequence[Permutation], degree: int | None = None):
        gens = list(generators)
        if not gens:
            if degree is None:
                raise ValueError("empty generator list")
            gens = [Permutation.identity(degree)]
        d = gens[0].degree
        if degree is not None and degree != d:
            raise DegreeMismatch(f"generators have degree {d}, expected {degree}")
        for g in gens:
            if g.degree != d:
                raise DegreeMismatch("generators of different degrees")
        if d > DEGREE_CAP:
            raise CapExceeded(f"degree {d} exceeds degree cap {DEGREE_CAP}")
        self.degree = d
        self.generators = tuple(gens)
        self._base, strong, self._trans = _schreier_sims([g.images for g in gens], d)
        self._strong = tuple(Permutation._raw(s) for s in strong)
        self.order = math.prod(len(t) for t in self._trans)
        self._lock = threading.Lock()
        self._cache: dict = {}

    # chain data
    @property
    def base(self) -> tuple[int, ...]:
        return tuple(self._base)

    @property
    def strong_generators(self) -> tuple[Permutation, ...]:
        return self._strong

    @property
    def basic_orbits(self) -> list[list[int]]:
        return [list(t) for t in self._trans]

    def identity(self) -> Permutation:
        return Permutation.identity(self.degree)

    def contains(self, p: Permutation) -> bool:
        if p.degree != self.degree:
            raise DegreeMismatch(f"degree {p.degree} vs group degree {self.degree}")
        h, j = _strip(p.images, self._base, self._trans, 0)
        return j == len(self._base) and h == tuple(range(self.degree))

    __contains__ = contains

    def is_trivial(self) -> bool:
        return self.order == 1

    def is_abelian(self) -> bool:
        gens = self.generators
        return all(a.commutes_with(b) for i, a in enumerate(gens) for b in gens[i + 1:])

    def is_subgroup_of(self, other: "PermGroup") -> bool:
        return self.degree == other.degree and all(g in other for g in self.generators)

    def is_normal_in(self, other: "PermGroup") -> bool:
        if not self.is_subgroup_of(other):
            return False
        return all(g.inverse() * n * g in self for g in other.generators for n in self.generators)

    def nontrivial_generators(self) -> list[Permutation]:
        return [g for g in self.generators if not g.is_identity()]

    def random_element(self, rng) -> Permutation:
        """Uniform random element (one random coset representative per level)."""
        g = tuple(range(self.degree))
        for t in self._trans:
            pts = list(t)
            u = t[pts[rng.randrange(len(pts))]][0]
            g = _mul(g, u)
        return Permutation._raw(g)

    def elements(self, cap: int = ELEMENT_CAP) -> list[Permutation]:
        """All elements in chain order; the identity is first."""
        if "elements" not in self._cache:
            if self.order > cap:
                raise CapExceeded(f"|G| = {self.order} exceeds element cap {cap}")
            with self._lock:
                elems = [tuple(range(self.degree))]
                for level in reversed(range(len(self._base))):
                    us = [u for u, _ in self._trans[level].values()]
                    elems = [_mul(u, e) for u in us for e in elems]
                self._cache["elements"] = [Permutation._raw(e) for e in elems]
        return self._cache["elements"]

    def elements_array(self, cap: int = ELEMENT_CAP) -> np.ndarray:
        if "array" not in self._cache:
            elems = self.elements(cap)
            self._cache["array"] = np.array([e.images for e in elems], dtype=np.uint8)
        return self._cache["array"]

    def element_index(self, cap: int = ELEMENT_CAP) -> ElementIndex:
        if "index" not in self._cache:
            self._cache["index"] = ElementIndex(self.elements_array(cap))
        return self._cache["index"]

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"PermGroup(order={self.order}, degree={self.degree}, gens=[{', '.join(map(str, self.generators))}])"


def group_from_generators(gens: Sequence[Permutation]) -> PermGroup:
    if not gens:
        raise ValueError("empty generator list")
    return PermGroup(gens)


def trivial_group(degree: int) -> PermGroup:
    return PermGroup([Permutation.identity(degree)])


def subgroup_from_elements(elements: Iterable[Permutation], degree: int) -> PermGroup:
    """Smallest group containing ``elements``, grown one generator at a time."""
    H = trivial_group(degree)
    gens: list[Permutation] = []
    for x in elements:
        if x not in H:
            gens.append(x)
            H = PermGroup(gens)
    return H


# -- structural subgroups ----------------------------------------------------

def _commute_mask(arr: np.ndarray, s: tuple) -> np.ndarray:
    s = np.asarray(s, dtype=arr.dtype)
    return (s[arr] == arr[:, s]).all(axis=1)


def centralizer(G: PermGroup, S: Iterable[Permutation], element_cap: int = ELEMENT_CAP) -> PermGroup:
    """Elements of ``G`` commuting with every element of ``S``.

    Uses a sweep over all elements; groups above ``element_cap`` raise
    :class:`CapExceeded` (no backtrack search is implemented).
    """
    S = list(S)
    for s in S:
        if s.degree != G.degree:
            raise DegreeMismatch("centralizing set has wrong degree")
    if G.order > element_cap:
        raise CapExceeded(f"centralizer needs |G| <= {element_cap}, got {G.order}")
    arr = G.elements_array(element_cap)
    mask = np.ones(len(arr), dtype=bool)
    for s in S:
        if not s.is_identity():
            mask &= _commute_mask(arr, s.images)
    elems = G.elements(element_cap)
    return subgroup_from_elements((elems[i] for i in np.flatnonzero(mask)), G.degree)


def center(G: PermGroup, element_cap: int = ELEMENT_CAP) -> PermGroup:
    return centralizer(G, G.generators, element_cap)


def normal_closure(G: PermGroup, S: Iterable[Permutation]) -> PermGroup:
    gens = [s for s in S if not s.is_identity()]
    if not gens:
        return trivial_group(G.degree)
    N = PermGroup(gens)
    changed = True
    while changed:
        changed = False
        for n in list(N.generators):
            for g in G.generators:
                c = g.inverse() * n * g
                if c not in N:
                    N = PermGroup(list(N.generators) + [c])
                    changed = True
    return N


def commutator(a: Permutation, b: Permutation) -> Permutation:
    return a.inverse() * b.inverse() * a * b


def derived_subgroup(G: PermGroup) -> PermGroup:
    gens = G.generators
    comms = [commutator(a, b) for i, a in enumerate(gens) for b in gens[i + 1:]]
    return normal_closure(G, comms)


# -- homomorphisms -----------------------------------------------------------

def _pair(p: Permutation, q: Permutation) -> Permutation:
    d = p.degree
    return Permutation._raw(p.images + tuple(d + x for x in q.images))


@dataclass(frozen=True, eq=False)
class Homomorphism:
    """A map given on generators; valid when the graph closure has order |source|."""

    source: PermGroup
    target: PermGroup
    gen_images: tuple

    def __post_init__(self):
        if len(self.gen_images) != len(self.source.generators):
            raise ValueError("need one image per source generator")
        object.__setattr__(self, "gen_images", tuple(self.gen_images))

    def graph(self) -> PermGroup:
        """Subgroup of source x target generated by the pairs (g_i, image_i)."""
        if "_graph" not in self.__dict__:
            pairs = [_pair(g, h) for g, h in zip(self.source.generators, self.gen_images)]
            object.__setattr__(self, "_graph", PermGroup(pairs))
        return self._graph

    def is_valid(self) -> bool:
        if not all(h in self.target for h in self.gen_images):
            return False
        return self.graph().order == self.source.order

    def image(self) -> PermGroup:
        return PermGroup(list(self.gen_images))

    def is_injective(self) -> bool:
        return self.is_valid() and self.image().order == self.source.order

    def __call__(self, x: Permutation) -> Permutation:
        """Evaluate by sifting through the graph chain (requires a valid map)."""
        gr = self.graph()
        ds = self.source.degree
        acc = tuple(range(self.target.degree))
        g = x.images
        for level, b in enumerate(gr._base):
            if b >= ds:
                raise ValueError("map is not a homomorphism")
            t = gr._trans[level].get(g[b])
            if t is None:
                raise ValueError("element is not in the source group")
            u = t[0]
            g = _mul(_inv(u[:ds]), g)
            acc = _mul(acc, tuple(y - ds for y in u[ds:]))
        if g != tuple(range(ds)):
            raise ValueError("element is not in the source group")
        return Permutation._raw(acc)


# -- constructions -----------------------------------------------------------

def quotient(G: PermGroup, N: PermGroup) -> tuple[PermGroup, Homomorphism]:
    """Action of ``G`` on the cosets of a normal subgroup ``N``."""
    if not N.is_subgroup_of(G):
        raise NotNormal("N is not a subgroup of G")
    if not N.is_normal_in(G):
        raise NotNormal("N is not normal in G")
    if N.is_trivial():
        return G, Homomorphism(G, G, G.generators)
    m = G.order // N.order
    # N-orbits are blocks for G; their action is often already faithful on G/N
    blocks = _block_action(G, N)
    if blocks is not None and blocks[0].order == m:
        Q, images = blocks
        return Q, Homomorphism(G, Q, images)
    if m > DEGREE_CAP:
        raise CapExceeded(f"quotient needs {m} points, degree cap is {DEGREE_CAP}")
    arr = G.elements_array()
    idx = G.element_index()
    narr = N.elements_array()
    coset = np.full(len(arr), -1, dtype=np.int64)
    reps = []
    for i in range(len(arr)):
        if coset[i] >= 0:
            continue
        members = idx.ids(arr[i][narr])
        coset[members] = len(reps)
        reps.append(i)
    images = []
    for g in G.generators:
        gi = np.asarray(g.images, dtype=arr.dtype)
        moved = idx.ids(gi[arr[reps]])
        images.append(Permutation(coset[moved].tolist()))
    Q = PermGroup(images)
    if Q.order != m:
        raise RuntimeError("coset action is not faithful on G/N")
    return Q, Homomorphism(G, Q, images)


def _block_action(G: PermGroup, N: PermGroup):
    """(image group, generator images) of ``G`` acting on the orbits of normal ``N``."""
    orbit = list(range(G.degree))

    def find(x):
        while orbit[x] != x:
            orbit[x] = orbit[orbit[x]]
            x = orbit[x]
        return x

    for g in N.generators:
        for i, j in enumerate(g.images):
            a, b = find(i), find(j)
            if a != b:
                orbit[max(a, b)] = min(a, b)
    roots = sorted({find(i) for i in range(G.degree)})
    if len(roots) < 2:
        return None
    block = {r: k for k, r in enumerate(roots)}
    images = [Permutation([block[find(g.images[r])] for r in roots]) for g in G.generators]
    return PermGroup(images), images


def _shift(p: Permutation, offset: int, degree: int) -> Permutation:
    img = list(range(degree))
    for i, x in enumerate(p.images):
        img[offset + i] = offset + x
    return Permutation._raw(tuple(img))


def direct_product(A: PermGroup, B: PermGroup) -> PermGroup:
    """``A x B`` acting on the disjoint union of the two point sets."""
    d = A.degree + B.degree
    gens = [_shift(a, 0, d) for a in A.nontrivial_generators()]
    gens += [_shift(b, A.degree, d) for b in B.nontrivial_generators()]
    P = PermGroup(gens, d) if gens else trivial_group(d)
    assert P.order == A.order * B.order
    return P


def swap_extension(X: PermGroup) -> PermGroup:
    """``(X x X) : C2`` with the involution exchanging the two factors."""
    d = X.degree
    base = direct_product(X, X)
    swap = Permutation._raw(tuple(list(range(d, 2 * d)) + list(range(d))))
    P = PermGroup(list(base.nontrivial_generators()) + [swap])
    assert P.order == 2 * X.order ** 2
    return P


def _automorphism_on_elements(N: PermGroup, images: Sequence[Permutation]) -> tuple[int, ...]:
    phi = Homomorphism(N, N, tuple(images))
    if not phi.is_valid():
        raise InvalidAction("generator images do not extend to a homomorphism N -> N")
    if phi.image().order != N.order:
        raise InvalidAction("generator images do not define an automorphism of N")
    elems = N.elements()
    pos = {e: i for i, e in enumerate(elems)}
    return tuple(pos[phi(e)] for e in elems)


def semidirect_product(N: PermGroup, H: PermGroup, action: Sequence[Sequence[Permutation]],
                       degree_cap: int = DEGREE_CAP) -> PermGroup:
    """``N : H`` where H's i-th generator acts on N by the images ``action[i]``.

    The product acts on the elements of ``N`` by ``x -> n * phi_h(x)``.  When
    that action has a kernel, the points of ``H`` are appended so the result
    is always faithful.
    """
    if len(action) != len(H.generators):
        raise InvalidAction("need one image list per generator of H")
    if N.order > degree_cap:
        raise CapExceeded(f"affine action needs {N.order} points, degree cap is {degree_cap}")
    sigmas = [Permutation(_automorphism_on_elements(N, imgs)) for imgs in action]
    aut = Homomorphism(H, PermGroup(sigmas), tuple(sigmas))
    if not aut.is_valid():
        raise InvalidAction("action is not a homomorphism from H")
    faithful = aut.image().order == H.order
    n = N.order
    d = n if faithful else n + H.degree
    if d > degree_cap:
        raise CapExceeded(f"semidirect product needs {d} points, degree cap is {degree_cap}")
    elems = N.elements()
    pos = {e: i for i, e in enumerate(elems)}
    gens = []
    for g in N.nontrivial_generators():
        img = [pos[g * x] for x in elems] + list(range(n, d))
        gens.append(Permutation(img))
    for h, s in zip(H.generators, sigmas):
        img = list(s.images)
        if not faithful:
            img += [n + y for y in h.images]
        gens.append(Permutation(img))
    P = PermGroup(gens)
    if P.order != N.order * H.order:
        raise RuntimeError(f"semidirect product has order {P.order}, expected {N.order * H.order}")
    return P
