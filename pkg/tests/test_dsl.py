import json

import pytest
from hypothesis import given, settings, strategies as st

from jordanlab.dsl import (Action, Alt, CatalogError, Cyclic, DSLSyntaxError, Dihedral, ElemAbelian,
                           Heis, PSL2, Product, Semidirect, Sym, build, default_catalog,
                           default_catalog_path, expected_order, load_catalog, parse,
                           parse_catalog, read_expressions, to_text)
from jordanlab.errors import InvalidAction


# -- parse -------------------------------------------------------------------------

def test_parse_examples():
    assert parse("S5") == Sym(5)
    assert parse("(A5 * A5) : C2 [swap]") == Semidirect(Product(Alt(5), Alt(5)), Cyclic(2), Action("swap"))
    assert parse("E(3,3) : S4 [explicit fermat]") == Semidirect(ElemAbelian(3, 3), Sym(4),
                                                               Action("explicit", "fermat"))


def test_parse_atoms():
    assert parse("D6") == Dihedral(6)
    assert parse("Heis(3)") == Heis(3)
    assert parse("PSL(2,7)") == PSL2(7)
    assert parse("  C4 ") == Cyclic(4)


def test_products_are_left_associative():
    assert parse("C2 * C3 * C5") == Product(Product(Cyclic(2), Cyclic(3)), Cyclic(5))


@pytest.mark.parametrize("text,offset", [
    ("", 0),
    ("S5 *", 4),
    ("C5 : C4", 3),
    ("C2 * C3 [swap]", 8),
    ("(C5 * C5) : C3 [swap]", 10),
    ("Q8", 0),
    ("C5 : C4 [frob]", 9),
    ("E(4,2)", 0),
    ("PSL(2,11)", 0),
    ("PSL(3,2)", 4),
    ("(S3", 3),
    ("S3 )", 3),
    ("S3 + S4", 3),
    ("C0", 0),
    ("Heis(9)", 0),
])
def test_syntax_errors_carry_byte_offsets(text, offset):
    with pytest.raises(DSLSyntaxError) as exc:
        parse(text)
    assert exc.value.offset == offset
    assert f"at byte {offset}" in str(exc.value)


def test_offsets_count_bytes_not_characters():
    with pytest.raises(DSLSyntaxError) as exc:
        parse("é")
    assert exc.value.offset == 0
    with pytest.raises(DSLSyntaxError) as exc:
        parse("C2 × C3")
    assert exc.value.offset == 3
    with pytest.raises(DSLSyntaxError) as exc:
        parse("(C2 × C3")
    assert exc.value.offset == 4


def _atoms():
    n = st.integers(1, 9)
    return st.one_of(n.map(Cyclic), n.map(Dihedral), n.map(Sym), n.map(Alt),
                     st.tuples(st.sampled_from([2, 3, 5]), st.integers(1, 4)).map(lambda t: ElemAbelian(*t)),
                     st.sampled_from([2, 3, 5]).map(Heis), st.sampled_from([5, 7]).map(PSL2))


def _exprs():
    def extend(inner):
        prod = st.tuples(inner, inner).map(lambda t: Product(*t))
        semi = st.tuples(inner, inner, st.sampled_from([Action("inv"), Action("explicit", "act_1")])
                         ).map(lambda t: Semidirect(*t))
        swap = inner.map(lambda x: Semidirect(Product(x, x), Cyclic(2), Action("swap")))
        return st.one_of(prod, semi, swap)
    return st.recursive(_atoms(), extend, max_leaves=8)


@settings(max_examples=300)
@given(_exprs())
def test_round_trip(e):
    assert parse(to_text(e)) == e


@given(_exprs())
def test_printer_is_canonical(e):
    t = to_text(e)
    assert to_text(parse(t)) == t


# -- build ---------------------------------------------------------------------------

def test_build_examples():
    d6 = build(Dihedral(6))
    assert (d6.order, d6.degree) == (12, 6)
    h = build(Heis(3))
    assert (h.order, h.degree) == (27, 27)
    w = build(parse("(A5 * A5) : C2 [swap]"))
    assert (w.order, w.degree) == (7200, 10)


@pytest.mark.parametrize("text", ["C1", "D1", "D2", "S1", "S2", "A1", "A3", "E(2,3)", "Heis(2)",
                                  "PSL(2,5)", "C6 : C2 [inv]",
                                  "E(3,3) : S4 [explicit fermat]"])
def test_build_orders_match_arithmetic(text):
    e = parse(text)
    assert build(e).order == expected_order(e)


def test_build_errors():
    with pytest.raises(InvalidAction):
        build("C5 : C4 [explicit nosuch]")
    with pytest.raises(InvalidAction):
        build("S3 : C2 [inv]")


def test_explicit_action_from_argument():
    actions = {"sq": {"images": {"h0": ["n0^2"]}}}
    assert build("C5 : C4 [explicit sq]", actions).order == 20
    with pytest.raises(InvalidAction):
        build("C5 : C4 [explicit sq]", {"sq": {"images": {"h0": ["n0 n1"]}}})
    with pytest.raises(InvalidAction):
        build("C5 : C4 [explicit sq]", {"sq": {"images": {"h0": ["x"]}}})


def test_product_orders_multiply_over_catalog():
    exprs = [e.expr for e in default_catalog() if e.expr and e.group.order <= 200]
    for a, b in zip(exprs, exprs[1:] + exprs[:1]):
        left, right = build(a), build(b)
        if left.order * right.order > 20000:
            continue
        assert build(Product(parse(a), parse(b))).order == left.order * right.order


# -- catalog ------------------------------------------------------------------------

def test_shipped_catalog():
    entries = default_catalog()
    labels = {e.label for e in entries}
    assert len(entries) >= 18
    assert {"S5", "A5", "A6", "swap-A5", "fermat-648", "heis-108", "heis-54",
            "psl27xC2", "d4-witness-160"} <= labels


def test_every_entry_builds_to_its_expected_order():
    for e in default_catalog():
        if "order" in e.expected:
            assert e.group.order == e.expected["order"], e.label


def test_catalog_file_reloads_identically():
    a = load_catalog(default_catalog_path())
    b = default_catalog()
    assert [e.label for e in a] == [e.label for e in b]
    assert all(x.group.generators == y.group.generators for x, y in zip(a, b))


def test_empty_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("")
    with pytest.raises(CatalogError, match="schema violation"):
        load_catalog(p)


def test_schema_violation_has_pointer(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps([{"label": "x", "expr": "C2", "expected": {"order": "two"}}]))
    with pytest.raises(CatalogError, match=r"schema violation at /0/expected/order"):
        load_catalog(p)


def test_duplicate_label():
    with pytest.raises(CatalogError, match="duplicate label 'x'"):
        parse_catalog([{"label": "x", "expr": "C2"}, {"label": "x", "expr": "C3"}])


def test_order_mismatch_names_label():
    with pytest.raises(CatalogError, match="'bad-s4'"):
        parse_catalog([{"label": "bad-s4", "expr": "S4", "expected": {"order": 25}}])


def test_generator_entries():
    [e] = parse_catalog([{"label": "v4", "generators": {"degree": 4, "cycles": [[[0, 1], [2, 3]], [[0, 2], [1, 3]]]},
                          "expected": {"order": 4}}])
    assert e.group.order == 4


def test_catalog_actions_resolve_within_file():
    doc = [{"label": "f20", "expr": "C5 : C4 [explicit frob]",
            "actions": {"frob": {"images": {"h0": ["n0^2"]}}}, "expected": {"order": 20}}]
    [e] = parse_catalog(doc)
    assert e.group.order == 20
    with pytest.raises(CatalogError, match="does not build"):
        parse_catalog([{"label": "f20", "expr": "C5 : C4 [explicit frob]"}])


def test_read_expressions(tmp_path):
    p = tmp_path / "groups.txt"
    p.write_text("# witnesses\nS5\n\n(A5 * A5) : C2 [swap]  # wreath\n  A6\n", encoding="utf-8")
    assert read_expressions(p) == ["S5", "(A5 * A5) : C2 [swap]", "A6"]
