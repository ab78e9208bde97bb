import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as o
from treegerms import treepair as tp
from treegerms.errors import InvalidAddress, LeafAbsent, LevelTooShallow, NotComplete, NotPrefixFree


def boundary(t, level):
    return o.boundary(t.mapping(), {}, t.k, t.d, level)


def same_element(s, t):
    level = max(s.dom.depth(), t.dom.depth())
    return boundary(s, level) == boundary(t, level)


def unreduced(rng, k, d, carets=3, extra=3):
    """A random pair refined a few more times, so it needs reducing."""
    t = tp.random_pair(k, d, rng, max_carets=carets)
    for _ in range(rng.randint(1, extra)):
        t = tp.refine_pair(t, rng.randrange(len(t.dom)))
    return t


def test_validate_leafset():
    L = tp.validate_leafset(1, 2, [(0, 1), (0, 0)])
    assert L.leaves == ((0, 0), (0, 1))
    with pytest.raises(NotPrefixFree) as info:
        tp.validate_leafset(1, 2, [(0,), (0, 1)])
    assert info.value.witness == ((0,), (0, 1))
    with pytest.raises(NotComplete) as info:
        tp.validate_leafset(2, 3, [(0,), (1, 0)])
    assert info.value.kraft_sum == Fraction(1, 2) + Fraction(1, 6)
    with pytest.raises(InvalidAddress):
        tp.validate_leafset(1, 2, [(1,)])


def test_uniform_and_refine():
    V2 = tp.uniform(2, 3, 2)
    assert len(V2) == 6 and V2.is_uniform()
    L = tp.refine_leaf(tp.uniform(1, 2, 1), (0,))
    assert L.leaves == ((0, 0), (0, 1))
    with pytest.raises(LeafAbsent):
        tp.refine_leaf(L, (0,))


def test_identity_and_apply():
    e = tp.TreePair.identity(2, 3)
    assert e.is_identity() and tp.is_reduced(e)
    t = tp.parse_pair("0.0 0.1 1\n0 1.0 1.1\n2 0 1", 2, 2)
    with pytest.raises(LevelTooShallow):
        tp.apply(t, (0,))
    assert tp.apply(t, (0, 0, 1)) == (1, 1, 1)


@pytest.mark.parametrize("k, d", [(1, 2), (2, 2), (1, 3), (2, 3)])
def test_reduce_preserves_element_and_is_confluent(k, d):
    rng = random.Random(100 * k + d)
    for _ in range(40):
        t = unreduced(rng, k, d)
        r = tp.reduce(t)
        assert tp.is_reduced(r)
        assert same_element(t, r)
        for seed in range(5):
            assert tp.reduce(t, random.Random(seed)) == r


def test_reduced_pairs_are_minimal_diagrams():
    # an order-respecting family with identical images always collapses
    t = tp.TreePair.identity(1, 2)
    for _ in range(4):
        t = tp.refine_pair(t, 0)
    assert tp.reduce(t).is_identity()


@pytest.mark.parametrize("k, d", [(1, 2), (2, 3)])
def test_compose_and_inverse_match_boundary_oracle(k, d):
    rng = random.Random(d)
    for _ in range(30):
        s = tp.random_pair(k, d, rng, max_carets=3)
        t = tp.random_pair(k, d, rng, max_carets=3)
        st_ = tp.compose(s, t)
        level = s.depth() + t.depth()
        want = o.compose_boundary(boundary(s, level), t.mapping(), {})
        assert boundary(st_, level) == want
        assert tp.compose(s, tp.inverse(s)).is_identity()
        assert (s * t)((0,) * level) == t(s((0,) * level))


def test_group_laws_on_triples():
    rng = random.Random(1)
    for _ in range(30):
        a, b, c = (tp.random_pair(2, 3, rng) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        e = tp.TreePair.identity(2, 3)
        assert a * e == a == e * a


def test_common_refinement():
    A = tp.validate_leafset(1, 2, [(0, 0), (0, 1)])
    B = tp.validate_leafset(1, 2, [(0, 0, 0), (0, 0, 1), (0, 1)])
    assert tp.common_refinement(A, B) == B
    C = tp.validate_leafset(1, 2, [(0, 0), (0, 1, 0), (0, 1, 1)])
    assert tp.common_refinement(B, C).leaves == ((0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1))


def test_order_preserving():
    rng = random.Random(4)
    for _ in range(20):
        f = tp.random_pair(1, 2, rng, order_preserving=True)
        assert tp.is_order_preserving(f)
        assert tp.parity(f).value == tp.EVEN


def test_parity_is_invariant_for_odd_d():
    rng = random.Random(9)
    for _ in range(40):
        t = tp.random_pair(2, 3, rng)
        sign = o.pair_sign(t.mapping())
        assert (tp.parity(t).value == tp.EVEN) == (sign == 1)
        assert not tp.parity(t).representative_dependent
        for u in t.dom.leaves:
            assert o.pair_sign(o.refine(t.mapping(), u, 3)) == sign
        assert tp.parity_flip_witness(t) is None


def test_parity_flip_witness_for_even_d():
    rng = random.Random(12)
    found = 0
    while found < 30:
        t = tp.random_pair(1, 2, rng)
        if tp.is_order_preserving(t):
            # even in every diagram: refinement inflates the identity
            assert tp.parity_flip_witness(t) is None
            continue
        diagram, path = tp.parity_flip_witness(t)
        assert same_element(diagram, t)
        assert o.pair_sign(diagram.mapping()) != o.pair_sign(t.mapping())
        assert 1 <= len(path) <= 2
        found += 1


def test_refinement_changes_sign_by_inversion_count():
    # refining a leaf inverted with an odd number of others flips the sign for d = 2
    t = tp.parse_pair("0.0 0.1\n0.0 0.1\n1 0", 1, 2, reduce_result=False)
    assert tp.sign_of(t) == tp.ODD
    assert tp.sign_of(tp.refine_pair(t, 0)) == tp.EVEN


def test_text_roundtrip():
    rng = random.Random(2)
    for _ in range(30):
        t = tp.random_pair(2, 3, rng)
        text = tp.format_pair(t)
        assert tp.parse_pair(text, 2, 3) == t
        assert tp.format_pair(tp.parse_pair(text, 2, 3)) == text


def test_parse_sigma_follows_written_order():
    t = tp.parse_pair("0.1 0.0\n0.0 0.1\n0 1", 1, 2, reduce_result=False)
    assert t.mapping() == {(0, 1): (0, 0), (0, 0): (0, 1)}


@pytest.mark.parametrize(
    "text",
    ["0 1\n0 1", "0.0 0.1\n0.0 0.1\n0 0", "0.0 0.1\n0.0 0.1\n0 x", "0.0\n0.0\n0"],
)
def test_parse_errors(text):
    with pytest.raises(ValueError):
        tp.parse_pair(text, 1, 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from([(1, 2), (2, 2), (1, 3), (3, 3)]))
def test_inverse_is_two_sided(seed, kd):
    k, d = kd
    t = tp.random_pair(k, d, random.Random(seed))
    assert tp.inverse(t) * t == tp.TreePair.identity(k, d)
    assert tp.inverse(tp.inverse(t)) == t
