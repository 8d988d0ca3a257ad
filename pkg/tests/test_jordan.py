import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import naive_for
from jordanlab import PermGroup, Permutation, quotient
from jordanlab.dsl import build
from jordanlab.errors import CapExceeded
from jordanlab.jordan import (Bounds, abar_index, cd_is_sublattice, cd_lattice, cd_measures,
                              find_embedding, jordan_constant, jordan_report, no_faithful_hom, nu,
                              verify_cd_squeeze, verify_monotonicity, verify_serre_lemma,
                              weak_jordan_constant)
from jordanlab.subgroups import all_subgroups, normal_subgroups
from oracles import naive_cd, naive_constants


def test_nu_examples():
    assert nu(build("C9")).value == 1
    assert nu(build("S5")).value == 120
    v = nu(build("(A5 * A5) : C2 [swap]"))
    assert v.value == 7200 and v.method == "socle-shortcut"


def test_abar_examples():
    assert abar_index(build("S5")).value == 20
    assert abar_index(build("A5")).value == 12
    assert abar_index(build("C12")).value == 1


def test_jordan_constant_examples():
    assert jordan_constant(build("A5")).value == 60
    assert jordan_constant(build("S5")).value == 120
    j = jordan_constant(build("(A5 * A5) : C2 [swap]"))
    assert j.value == 7200 and j.method == "socle-shortcut"


def test_weak_jordan_examples():
    assert weak_jordan_constant(build("S5")).value == 20
    assert weak_jordan_constant(build("C2 * C2")).value == 1
    assert weak_jordan_constant(build("A5")).value == 12


def test_weak_constant_equals_abar_above_cap():
    W = build("(A5 * A5) : C2 [swap]")
    jb = weak_jordan_constant(W)
    assert jb.value == abar_index(W).value == 288
    assert jb.method == "abelian-index"


@pytest.mark.parametrize("label", ["S4", "A5", "heis-108", "gl2-f3", "torus-d6-3", "F20", "PSL(2,7)"])
def test_weak_constant_equals_abar_when_enumerated(catalog, label):
    G = catalog[label].group
    assert weak_jordan_constant(G).value == abar_index(G).value


def test_uncertifiable_above_cap():
    G = build("PSL(2,7) * C2")
    with pytest.raises(CapExceeded):
        jordan_constant(G, order_cap=100)


def test_witnesses_attain():
    G = build("S4")
    j = jordan_constant(G)
    assert nu(j.witness).value == j.value
    v = nu(G)
    assert v.witness.order * v.value == G.order
    assert v.witness.is_abelian() and v.witness.is_normal_in(G)
    a = abar_index(G)
    assert a.witness.is_abelian() and a.witness.order * a.value == G.order


@pytest.mark.parametrize("label", ["S3", "D6", "A4", "S4", "F20", "A5", "heis-54", "heis-108",
                                   "gl2-f3", "torus-d6-2", "d4-witness-160", "PSL(2,7)"])
def test_report_invariants(catalog, label):
    G = catalog[label].group
    rep = jordan_report(G, label)
    assert rep.abar <= rep.nu <= rep.J <= rep.order
    assert 1 <= rep.Jbar <= rep.J <= rep.Jbar ** 2
    assert rep.witnesses["nu"].order * rep.nu == rep.order
    assert rep.witnesses["abar"].order * rep.abar == rep.order


@pytest.mark.parametrize("label", ["S4", "A5", "heis-54", "F20", "gl2-f3", "A5xC2", "torus-d6-2", "heis-108"])
def test_against_naive_pass(catalog, label):
    G = catalog[label].group
    J, Jbar, nu_, abar, count = naive_constants(naive_for(label))
    assert jordan_constant(G).value == J
    assert weak_jordan_constant(G).value == Jbar
    assert nu(G).value == nu_
    assert abar_index(G).value == abar
    assert len(all_subgroups(G)) == count


@pytest.mark.slow
@pytest.mark.parametrize("label", ["A6", "psl27xC2", "torus-d6-5"])
def test_against_naive_pass_up_to_400(catalog, label):
    G = catalog[label].group
    J, Jbar, *_ = naive_constants(naive_for(label))
    assert (jordan_constant(G).value, weak_jordan_constant(G).value) == (J, Jbar)


@pytest.mark.parametrize("label", ["A5", "S5", "A6", "PSL(2,7)", "A5xA5"])
def test_socle_shortcut_consistency(catalog, label):
    G = catalog[label].group
    via_socle = nu(G)
    assert via_socle.method == "socle-shortcut"
    abelian_normals = [r for r in normal_subgroups(G) if r.is_abelian]
    assert [r.order for r in abelian_normals] == [1]
    if G.order <= 1000:
        assert jordan_constant(G).value == via_socle.value == G.order


def test_nu_via_lattice_agrees(catalog):
    for label in ("S4", "D6", "heis-54", "F20"):
        G = catalog[label].group
        assert nu(G, all_subgroups(G)).value == nu(G).value


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(["S4", "D6", "F20", "heis-27", "gl2-f3"]), st.data())
def test_relabeling_invariance(label, data):
    from jordanlab.dsl import catalog_by_label
    G = catalog_by_label()[label].group
    r = Permutation(data.draw(st.permutations(range(G.degree))))
    H = PermGroup([r * g * r.inverse() for g in G.generators])
    for f in (nu, abar_index, jordan_constant, weak_jordan_constant):
        assert f(H).value == f(G).value


# -- Chermak-Delgado ----------------------------------------------------------------

def test_cd_abelian():
    G = build("C6")
    entries = cd_lattice(G)
    L = all_subgroups(G)
    assert any(L.records[e.record].order == 6 and e.measure == 36 for e in entries)


def test_cd_s3():
    G = build("S3")
    entries = cd_lattice(G)
    L = all_subgroups(G)
    assert [(L.records[e.record].order, e.measure) for e in entries] == [(3, 9)]


def test_cd_d4():
    G = build("D4")
    entries = cd_lattice(G)
    assert {e.measure for e in entries} == {16}
    assert len(entries) > 1


@pytest.mark.parametrize("label", ["S3", "D4", "S4", "D6", "heis-27", "heis-54", "F20", "A5", "gl2-f3"])
def test_cd_against_oracle_and_closure(catalog, label):
    G = catalog[label].group
    entries = cd_lattice(G)
    L = all_subgroups(G)
    top, members = naive_cd(naive_for(label))
    assert entries[0].measure == top
    assert len(entries) == len(members)
    assert cd_is_sublattice(G, entries)
    from jordanlab.perm import center
    assert top >= center(G).order * G.order
    # the least member is normal
    least = min((L.records[e.record] for e in entries), key=lambda r: r.order)
    assert least.is_normal


def test_cd_measures_constant_on_classes(catalog):
    L = all_subgroups(catalog["S4"].group)
    m = cd_measures(L)
    for cls in L.classes:
        assert len({m[i] for i in cls}) == 1


# -- lemma verifiers ------------------------------------------------------------------

def test_squeeze_examples():
    assert verify_cd_squeeze(build("S5"))
    assert verify_cd_squeeze(build("C12"))
    assert verify_cd_squeeze(build("A5"))


def test_monotonicity_examples():
    S5, A5 = build("S5"), build("A5")
    A5in = PermGroup([Permutation.from_cycles([(0, 1, 2)], 5), Permutation.from_cycles([(0, 1, 2, 3, 4)], 5)])
    assert A5in.is_subgroup_of(S5) and A5.order == 60
    assert verify_monotonicity(S5, H=A5in)
    S4 = build("S4")
    assert verify_monotonicity(S4, N=S4)
    V = PermGroup([Permutation.from_cycles([(0, 1), (2, 3)], 4), Permutation.from_cycles([(0, 2), (1, 3)], 4)])
    Q, _ = quotient(S4, V)
    assert jordan_constant(Q).value == 2 and jordan_constant(S4).value == 6
    assert verify_monotonicity(S4, N=V)


def test_monotonicity_argument_errors():
    with pytest.raises(ValueError):
        verify_monotonicity(build("S3"))
    with pytest.raises(ValueError):
        verify_monotonicity(build("S3"), H=build("C5"))


def test_serre_positive():
    assert verify_serre_lemma(build("S4")).holds
    assert verify_serre_lemma(build("A5")).holds


def test_serre_negative_control(catalog):
    res = verify_serre_lemma(catalog["F20"].group)
    assert not res.holds
    g, h, c = res.counterexample
    assert c == g * h * g.inverse()
    assert c not in (h, h.inverse())
    assert c in (h ** 2, h ** 3)


def test_serre_cap():
    with pytest.raises(CapExceeded):
        verify_serre_lemma(build("S5"), element_cap=10)


def test_no_faithful_hom(catalog):
    S4 = catalog["S4"].group
    assert no_faithful_hom(S4, catalog["gl2-f3"].group)
    assert not no_faithful_hom(S4, S4)
    assert no_faithful_hom(S4, catalog["gl1-f3"].group)
    assert find_embedding(build("C2"), catalog["gl1-f3"].group) is not None
    assert find_embedding(build("A4"), catalog["gl2-f3"].group) is None
    assert find_embedding(build("S3"), catalog["gl2-f3"].group) is not None


def test_find_embedding_rejects_three_generators():
    with pytest.raises(ValueError):
        find_embedding(build("C2 * C2 * C2"), build("S4"))


def test_report_bound_only():
    G = build("PSL(2,7) * C2")
    rep = jordan_report(G, "x", order_cap=100)
    assert rep.method == "bound-only"
    assert isinstance(rep.J, Bounds)
    assert rep.J.lower == 168 and rep.J.upper == 336
    assert rep.Jbar == 24
    assert not rep.exact


def test_report_above_element_cap():
    rep = jordan_report(build("S4"), "S4", element_cap=10)
    assert rep.method == "bound-only" and rep.nu is None
    assert rep.J == Bounds(1, 24)


def test_report_dict_is_deterministic():
    a = jordan_report(build("S4"), "S4").to_dict(timing=False)
    b = jordan_report(build("S4"), "S4").to_dict(timing=False)
    assert a == b and "timing" not in a


def test_random_monotonicity_pairs(catalog):
    rng = random.Random(11)
    labels = [lab for lab in ("S4", "A5", "S5", "heis-108", "F20", "gl2-f3", "D6", "torus-d6-3") if catalog[lab].group.order <= 400]
    for _ in range(10):
        G = catalog[rng.choice(labels)].group
        L = all_subgroups(G)
        H = L.as_group(rng.choice(L.records))
        assert verify_monotonicity(G, H=H)
