import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as o
from treegerms.errors import CycleSyntaxError, DegreeTooLarge, NotTransitive, OrderExceedsCap
from treegerms.named import (
    agaml18,
    agl15,
    alternating,
    beta_gf7_to_gf8,
    cyclic,
    named_group,
    psl27,
    symmetric,
    wreath_sym2_sym2,
)
from treegerms.permgroup import (
    BlockSystem,
    Perm,
    PermGroup,
    all_block_systems,
    block_systems,
    derived_subgroup,
    is_generated_by_point_stabilizers,
    is_permutation_equivalence,
    is_primitive,
    is_regular_on_block,
    is_transitive,
    maximal_blocks,
    normalizer_in_sym,
    orbits,
    parse_cycles,
    parse_generators,
    permutation_equivalence,
    point_stabilizer,
    structure_flags,
    transitivity_degree,
)

SMALL = ["C3", "S3", "S4", "A4", "A5", "AGL(1,5)"]


def elements(g):
    return o.closure([s.images for s in g.generators], g.degree)


def test_right_action():
    p = Perm([1, 2, 0])
    q = Perm([1, 0, 2])
    # p first: 0 -> 1 -> 0
    assert (p * q)(0) == 0
    assert (p * q).images == o.mul(p.images, q.images)
    assert (p * p.inverse()).is_identity()


def test_parse_cycles_roundtrip():
    p = parse_cycles("(0 1 2)(3 4)")
    assert p.images == (1, 2, 0, 4, 3)
    assert str(p) == "(0 1 2)(3 4)"
    assert parse_cycles("()", 3).is_identity()
    assert parse_cycles("(0,2)", 4).images == (2, 1, 0, 3)


@pytest.mark.parametrize(
    "text, position",
    [("(0 1", 0), ("(0 1 x)", 5), ("(0 1 0)", 5), ("(0 1) 2", 6), ("", 0)],
)
def test_cycle_syntax_errors_report_offsets(text, position):
    with pytest.raises(CycleSyntaxError) as info:
        parse_cycles(text)
    assert info.value.position == position


def test_generator_list_offsets_are_global():
    with pytest.raises(CycleSyntaxError) as info:
        parse_generators("(0 1 2),(0 1")
    assert info.value.position == 8


def test_generators_padded_to_common_degree():
    gens = parse_generators("(0 1 2),(0 1)")
    assert [g.degree for g in gens] == [3, 3]


@pytest.mark.parametrize("name, order", [("C3", 3), ("S3", 6), ("S4", 24), ("A4", 12), ("A5", 60),
                                         ("AGL(1,5)", 20), ("PSL(2,7)", 168), ("AGammaL(1,8)", 168)])
def test_orders_match_closure_oracle(name, order):
    g = named_group(name)
    assert g.order() == order == len(elements(g))


@pytest.mark.parametrize("name", SMALL + ["PSL(2,7)", "AGammaL(1,8)"])
def test_transitivity_degree(name):
    g = named_group(name)
    assert transitivity_degree(g) == o.transitivity_degree(elements(g), g.degree)


def test_transitivity_degree_zero_when_intransitive():
    g = PermGroup(4, [Perm.from_cycles([(0, 1)], 4)])
    assert not is_transitive(g)
    assert transitivity_degree(g) == 0
    assert orbits(g) == [[0, 1], [2], [3]]


@pytest.mark.parametrize("g", [symmetric(4), alternating(4), cyclic(4), cyclic(5), wreath_sym2_sym2(), agl15(),
                               cyclic(6), PermGroup(6, [Perm.from_cycles([(0, 1, 2), (3, 4, 5)], 6),
                                                        Perm.from_cycles([(0, 3)], 6)])])
def test_primitivity_matches_partition_oracle(g):
    gens = [s.images for s in g.generators]
    assert is_primitive(g) == o.is_primitive(gens, g.degree)


def test_primitive_requires_transitive():
    with pytest.raises(NotTransitive):
        is_primitive(PermGroup(3, [Perm.from_cycles([(0, 1)], 3)]))


def test_block_systems_of_c4_and_wreath():
    (sys4,) = block_systems(cyclic(4))
    assert sys4 == BlockSystem.from_cells(4, [[0, 2], [1, 3]])
    w = wreath_sym2_sym2()
    assert [s.block_size for s in all_block_systems(w)] == [2]
    c6 = cyclic(6)
    sizes = sorted(s.block_size for s in all_block_systems(c6))
    assert sizes == [2, 3]
    assert sorted(s.block_size for s in maximal_blocks(c6)) == [2, 3]


def test_regular_on_block_strict_versus_induced():
    w = wreath_sym2_sym2()
    (system,) = all_block_systems(w)
    assert not is_regular_on_block(w, system)
    assert is_regular_on_block(w, system, induced=True)
    c4 = cyclic(4)
    (system,) = all_block_systems(c4)
    assert is_regular_on_block(c4, system)


@pytest.mark.parametrize("name", SMALL)
def test_normalizer_order_matches_scan_of_sym(name):
    g = named_group(name)
    assert normalizer_in_sym(g).order() == o.normalizer_order(elements(g), g.degree)


def test_normalizer_of_intransitive_group():
    g = PermGroup(4, [Perm.from_cycles([(0, 1)], 4)])
    assert normalizer_in_sym(g).order() == o.normalizer_order(elements(g), 4) == 4


def test_normalizer_degree_limit():
    with pytest.raises(DegreeTooLarge):
        normalizer_in_sym(symmetric(9))
    assert normalizer_in_sym(cyclic(9), max_degree=9).order() == 54


def test_cap_is_enforced():
    with pytest.raises(OrderExceedsCap):
        symmetric(5).order(cap=100)


def test_point_stabilizer_views():
    st_ = point_stabilizer(psl27(), 7)
    assert st_.group.degree == 8 and st_.group.order() == 21
    assert st_.restricted.degree == 7 and st_.restricted.order() == 21
    assert st_.relabel[6] == 6
    st0 = point_stabilizer(agaml18(), 0)
    assert st0.relabel[1] == 0 and st0.relabel[7] == 6


def test_permutation_equivalence_witness():
    a = point_stabilizer(psl27(), 7).restricted
    b = point_stabilizer(agaml18(), 0).restricted
    beta = permutation_equivalence(a, b)
    assert beta is not None and is_permutation_equivalence(a, b, beta)
    assert is_permutation_equivalence(a, b, beta_gf7_to_gf8())
    # the oracle agrees on the conjugated element sets
    assert o.conjugate_set(set(a.element_tuples()), beta.images) == set(b.element_tuples())


def test_permutation_equivalence_negative():
    c4 = cyclic(4)
    v4 = PermGroup(4, [Perm.from_cycles([(0, 1), (2, 3)], 4), Perm.from_cycles([(0, 2), (1, 3)], 4)])
    assert permutation_equivalence(c4, v4) is None
    assert not o.equivalent(c4.element_tuples(), v4.element_tuples(), 4)
    # same order, different orbit structure
    a = PermGroup(4, [Perm.from_cycles([(0, 1)], 4)])
    b = PermGroup(4, [Perm.from_cycles([(0, 1), (2, 3)], 4)])
    assert permutation_equivalence(a, b) is None


@pytest.mark.parametrize("name", SMALL + ["PSL(2,7)", "AGammaL(1,8)"])
def test_derived_order_matches_commutator_closure(name):
    g = named_group(name)
    flags = structure_flags(g)
    assert flags.derived_order == derived_subgroup(g).order() == o.derived_order(elements(g), g.degree)


def test_psl_perfect_agaml_not():
    f1 = structure_flags(psl27())
    f2 = structure_flags(agaml18())
    assert f1.is_perfect and not f2.is_perfect
    assert not f1.is_abstractly_isomorphic_to(f2)


def test_fixed_point_free_readings():
    c3 = structure_flags(cyclic(3))
    assert c3.no_global_fixed_point and c3.semiregular
    s3 = structure_flags(symmetric(3))
    assert s3.no_global_fixed_point and not s3.semiregular


def test_generated_by_point_stabilizers():
    assert is_generated_by_point_stabilizers(symmetric(3))
    assert is_generated_by_point_stabilizers(alternating(4))
    assert not is_generated_by_point_stabilizers(cyclic(3))
    assert not is_generated_by_point_stabilizers(symmetric(2))


perms = st.integers(2, 5).flatmap(lambda n: st.lists(st.permutations(list(range(n))), min_size=1, max_size=3))


@settings(max_examples=60, deadline=None)
@given(perms)
def test_random_groups_agree_with_closure(gens):
    n = len(gens[0])
    g = PermGroup(n, [Perm(p) for p in gens])
    els = o.closure([tuple(p) for p in gens], n)
    assert set(g.element_tuples()) == els
    assert len({frozenset(x) for x in orbits(g)}) == len(orbits(g))
    if is_transitive(g):
        assert is_primitive(g) == o.is_primitive([tuple(p) for p in gens], n)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(*[st.permutations(list(range(n)))] * 3)))
def test_product_is_associative(triple):
    a, b, c = (Perm(p) for p in triple)
    assert (a * b) * c == a * (b * c)
    assert (a * b).inverse() == b.inverse() * a.inverse()
    assert (a * b).sign() == a.sign() * b.sign() == o.sign(a.images) * o.sign(b.images)


def test_sym_small_orders():
    for n in range(1, 6):
        assert symmetric(n).order() == len(list(itertools.permutations(range(n))))
