import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as o
from treegerms import portrait as pt
from treegerms.errors import ChildNotFixed, InvalidAddress, NotTransitive, ProfileMismatch, TowerOverflow
from treegerms.named import alternating, cyclic, named_group, symmetric
from treegerms.permgroup import Perm, PermGroup

P2 = pt.regular(2)
P3 = pt.regular(3)
SWAP = Perm([1, 0])


def raw(p):
    return {a: perm.images for a, perm in p.labels.items()}


def random_portrait(rng, profile, depth, density=0.6):
    labels = {}
    for a in profile.internal_vertices(depth):
        if rng.random() < density:
            images = list(range(profile.arity(a)))
            rng.shuffle(images)
            labels[a] = Perm(images)
    return pt.Portrait(profile, depth, labels)


def test_apply_example_source_indexed():
    p = pt.Portrait(P2, 2, {(): SWAP, (0,): SWAP})
    # root swaps the halves; the label at source vertex 0 flips below it
    assert pt.apply_address(p, (0, 0)) == (1, 1)
    assert pt.apply_address(p, (1, 0)) == (0, 0)
    table = {a: o.portrait_image(raw(p), a) for a in itertools.product(range(2), repeat=2)}
    assert all(pt.apply_address(p, a) == b for a, b in table.items())
    assert sorted(table.values()) == sorted(table)


def test_address_errors():
    p = pt.Portrait(P2, 1, {(): SWAP})
    with pytest.raises(InvalidAddress):
        pt.apply_address(p, (2,))
    with pytest.raises(InvalidAddress):
        pt.parse_address("0.x")
    with pytest.raises(ProfileMismatch):
        pt.Portrait(P3, 1, {(): SWAP})
    with pytest.raises(InvalidAddress):
        pt.Portrait(P2, 1, {(0,): SWAP})


def test_identity_labels_dropped_and_depth_ignored():
    a = pt.Portrait(P2, 3, {(): SWAP, (0, 1): Perm([0, 1])})
    b = pt.Portrait(P2, 1, {(): SWAP})
    assert a == b and hash(a) == hash(b)
    assert a.effective_depth == 1


@pytest.mark.parametrize("profile", [P2, P3, pt.ArityProfile(2, 3), pt.ArityProfile(3, 2)])
def test_compose_matches_sequential_application(profile):
    rng = random.Random(7)
    for _ in range(40):
        depth = rng.randint(0, 3)
        p = random_portrait(rng, profile, depth)
        q = random_portrait(rng, profile, rng.randint(0, 3))
        pq = pt.compose(p, q)
        level = max(p.depth, q.depth)
        for a in profile.addresses(level):
            want = o.portrait_image(raw(q), o.portrait_image(raw(p), a))
            assert pt.apply_address(pq, a) == want
        assert pt.compose(p, pt.inverse(p)).is_identity()
        assert pt.compose(pt.inverse(p), p).is_identity()


def test_compose_label_law():
    rng = random.Random(3)
    for _ in range(30):
        p = random_portrait(rng, P3, 2)
        q = random_portrait(rng, P3, 2)
        pq = p * q
        for a in P3.internal_vertices(2):
            assert pq.label(a) == p.label(a) * q.label(p(a))


def test_child_restriction_and_graft():
    p = pt.Portrait(P3, 2, {(): Perm([0, 2, 1]), (0,): Perm([1, 2, 0]), (1,): Perm([1, 0, 2])})
    child = pt.restrict_to_child(p, 0)
    assert child == pt.Portrait(P3, 1, {(): Perm([1, 2, 0])})
    with pytest.raises(ChildNotFixed):
        pt.restrict_to_child(p, 1)
    rebuilt = pt.graft(P3, p.label(()), [pt.child_portrait(p, i) for i in range(3)])
    assert rebuilt == p


def test_level_perm_is_a_homomorphism():
    rng = random.Random(11)
    for _ in range(20):
        p = random_portrait(rng, P2, 3)
        q = random_portrait(rng, P2, 3)
        for level in range(4):
            assert pt.level_perm(p * q, level) == pt.level_perm(p, level) * pt.level_perm(q, level)


def test_w_and_a_membership():
    c3 = cyclic(3)
    rot = Perm([1, 2, 0])
    flip = Perm([0, 2, 1])
    assert pt.is_w_portrait(pt.Portrait(P3, 2, {(): rot, (1,): rot}), c3)
    assert not pt.is_w_portrait(pt.Portrait(P3, 1, {(): flip}), c3)
    # N(C3) = Sym(3): the flip is allowed at the root
    assert pt.is_a_portrait(pt.Portrait(P3, 1, {(): flip}), c3)
    # a level with flips everywhere is congruent mod C3
    uniform = {(i,): flip for i in range(3)}
    assert pt.is_a_portrait(pt.Portrait(P3, 2, uniform), c3)
    # a flip at only one vertex of level 1 is not
    assert not pt.is_a_portrait(pt.Portrait(P3, 2, {(0,): flip}), c3)
    mixed = {(0,): flip, (1,): flip, (2,): Perm([1, 2, 0])}
    assert not pt.is_a_portrait(pt.Portrait(P3, 2, mixed), c3)


def test_json_roundtrip():
    rng = random.Random(5)
    for _ in range(20):
        p = random_portrait(rng, pt.ArityProfile(2, 3), 3)
        text = pt.dumps(p)
        assert pt.loads(text) == p
        assert pt.dumps(pt.loads(text)) == text


def test_enumerate_portraits_counts():
    elements = {2: [Perm([0, 1]), SWAP]}
    ports = list(pt.enumerate_portraits(P2, 2, elements))
    assert len(ports) == 8 and len(set(ports)) == 8


def _oracle_tower(D, n):
    d = D.degree
    gens = [s.images for s in D.generators]
    w = o.closure(o.tower_generators(gens, d, n), d**n)
    D_set = o.closure(gens, d)
    # A_n is W_n extended by the same normalizer element on a whole level
    normalizer = [s for s in itertools.permutations(range(d)) if o.conjugate_set(D_set, s) == D_set]
    extra = [o.uniform_level(s, d, level, n) for s in normalizer for level in range(n)]
    a = o.closure(list(w) + extra, d**n) if extra else w
    return len(w), len(a)


@pytest.mark.parametrize(
    "D, n, w, a",
    [
        (cyclic(3), 1, 3, 6),
        (cyclic(3), 2, 81, 324),
        (symmetric(3), 1, 6, 6),
        (symmetric(3), 2, 1296, 1296),
        (alternating(3), 2, 81, 324),
        (symmetric(2), 3, 128, 128),
    ],
)
def test_tower_orders_against_leaf_closure(D, n, w, a):
    res = pt.tower_orders(D, n, cross_check=True)
    assert (res.w_order, res.a_order) == (w, a)
    assert res.exhaustive == (w, a)
    assert _oracle_tower(D, n) == (w, a)
    assert res.ratio == res.index**n


def test_tower_large_depth_formula_only():
    res = pt.tower_orders(cyclic(3), 4)
    assert res.exhaustive is None
    assert res.w_order == 3 ** (1 + 3 + 9 + 27)
    assert res.ratio == 16


def test_tower_overflow_and_intransitive():
    with pytest.raises(TowerOverflow):
        pt.tower_orders(symmetric(3), 8)
    with pytest.raises(NotTransitive):
        pt.tower_orders(PermGroup(3, [Perm([1, 0, 2])]), 2)


@pytest.mark.parametrize("name, transitive", [("C3", True), ("S3", True), ("A4", True)])
def test_level_transitivity(name, transitive):
    assert pt.level_transitive_check(named_group(name), 3) is transitive


def test_level_transitivity_fails_for_intransitive_group():
    assert not pt.level_transitive_check(PermGroup(3, [Perm([1, 0, 2])]), 2)


addresses = st.lists(st.integers(0, 2), max_size=3).map(tuple)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), addresses)
def test_inverse_undoes_apply(seed, address):
    p = random_portrait(random.Random(seed), P3, 3)
    assert pt.apply_address(pt.inverse(p), pt.apply_address(p, address)) == address
