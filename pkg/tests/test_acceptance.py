"""Acceptance suite: eight criteria, each with its own tolerance and time limit.

Every criterion records one PASS/FAIL line; pytest prints them in the
terminal summary, and ``python tests/test_acceptance.py`` prints them
directly.
"""

import random
import sys
import time
from contextlib import contextmanager

import oracles as o
from treegerms import burger_mozes as bm
from treegerms import germ as gm
from treegerms import portrait as pt
from treegerms import treepair as tp
from treegerms.named import agaml18, agl15, alternating, beta_gf7_to_gf8, cyclic, psl27, symmetric
from treegerms.permgroup import (
    is_permutation_equivalence,
    permutation_equivalence,
    point_stabilizer,
    structure_flags,
    transitivity_degree,
)

RESULTS = []


@contextmanager
def criterion(number, title, limit):
    """Time the block, record a PASS/FAIL line, re-raise failures."""
    start = time.perf_counter()
    ok = False
    detail = ""
    try:
        yield
        elapsed = time.perf_counter() - start
        if elapsed >= limit:
            detail = f"too slow: {elapsed:.1f} s >= {limit} s"
            raise AssertionError(detail)
        ok = True
    except AssertionError as exc:
        if not detail:
            detail = str(exc).splitlines()[0] if str(exc) else "assertion failed"
        raise
    finally:
        elapsed = time.perf_counter() - start
        status = "PASS" if ok else "FAIL"
        line = f"criterion {number} {status}: {title} ({elapsed:.1f} s, limit {limit} s)"
        if detail:
            line += f" [{detail}]"
        RESULTS.append(line)
        print(line)


def test_criterion_1_psl_versus_agaml():
    with criterion(1, "PSL(2,7) and AGammaL(1,8): orders, stabilizers, beta, perfectness", 10):
        F, G = psl27(), agaml18()
        assert F.order() == G.order() == 168
        assert len(o.closure([s.images for s in F.generators], 8)) == 168
        assert len(o.closure([s.images for s in G.generators], 8)) == 168
        assert transitivity_degree(F) == transitivity_degree(G) == 2
        sF = point_stabilizer(F, 7).restricted
        sG = point_stabilizer(G, 0).restricted
        assert sF.order() == sG.order() == 21
        witness = permutation_equivalence(sF, sG)
        assert witness is not None and is_permutation_equivalence(sF, sG, witness)
        assert is_permutation_equivalence(sF, sG, beta_gf7_to_gf8())
        perfect = [structure_flags(F).is_perfect, structure_flags(G).is_perfect]
        assert perfect == [True, False]


def test_criterion_2_condition_iii_audit():
    with criterion(2, "condition (iii): Sym(d+1) passes, Alt(d+1) and AGL(1,5) fail", 30):
        cases = [(symmetric(d + 1), True) for d in (2, 3, 4)]
        cases += [(alternating(d + 1), False) for d in (3, 4)]
        cases += [(agl15(), False)]
        for F, passes in cases:
            row = bm.audit_theorems(F)
            assert row.F0_self_normalizing is passes, F.name
            F0 = point_stabilizer(F, F.degree - 1).restricted
            assert row.F0_normalizer_order == o.normalizer_order(set(F0.element_tuples()), F0.degree)


def test_criterion_3_tower_orders():
    with criterion(3, "tower orders for C3 and Sym(3), formula = enumeration", 60):
        expected = {1: (3, 6), 2: (81, 324)}
        for n, (w, a) in expected.items():
            res = pt.tower_orders(cyclic(3), n, cross_check=True)
            assert (res.w_order, res.a_order) == (w, a)
            assert res.exhaustive == (w, a)
            assert res.ratio == 2**n
            gens = [s.images for s in cyclic(3).generators]
            assert len(o.closure(o.tower_generators(gens, 3, n), 3**n)) == w
        for n in (1, 2):
            res = pt.tower_orders(symmetric(3), n, cross_check=True)
            assert res.ratio == 1
            assert res.exhaustive == (res.w_order, res.a_order)


def test_criterion_4_tits_independence():
    with criterion(4, "edge fixator splits as G_(h1) G_(h2) for Sym(2), Sym(3) at R=2", 60):
        for F in (symmetric(2), symmetric(3)):
            rec = bm.tits_independence_check(F, 2)
            assert rec.factorizes and rec.every_element_splits, F.name
            assert rec.fix_e == rec.fix_h1 * rec.fix_h2


def test_criterion_5_local_action_recovery():
    with criterion(5, "K/C recovered from edge balls is permutation-equivalent to F", 60):
        for F in (symmetric(2), symmetric(3)):
            rec = bm.recover_local_action(bm.build_ball_group(F, 2, bm.EDGE))
            assert rec.equivalent, F.name
            assert rec.quotient_order == F.order()


def _unreduced(rng, k, d):
    t = tp.random_pair(k, d, rng, max_carets=4)
    for _ in range(rng.randint(1, 4)):
        t = tp.refine_pair(t, rng.randrange(len(t.dom)))
    return t


def test_criterion_6_tree_pair_suite():
    with criterion(6, "tree pairs: confluence, group laws, parity", 120):
        rng = random.Random(6)
        shapes = [(1, 2), (2, 2), (1, 3), (2, 3)]
        for i in range(500):
            k, d = shapes[i % 4]
            t = _unreduced(rng, k, d)
            forms = {tp.reduce(t, random.Random(j)) for j in range(20)}
            assert len(forms) == 1
        for i in range(200):
            k, d = shapes[i % 4]
            a, b, c = (tp.random_pair(k, d, rng) for _ in range(3))
            e = tp.TreePair.identity(k, d)
            assert (a * b) * c == a * (b * c)
            assert a * e == a == e * a
            assert a * tp.inverse(a) == e == tp.inverse(a) * a
        for _ in range(100):
            t = tp.random_pair(2, 3, rng)
            sign = o.pair_sign(t.mapping())
            for i in range(len(t.dom)):
                assert tp.parity(tp.refine_pair(t, i)).value == tp.parity(t).value
                assert o.pair_sign(o.refine(t.mapping(), t.dom.leaves[i], 3)) == sign
        found = 0
        while found < 100:
            t = tp.random_pair(1, 2, rng)
            if tp.is_order_preserving(t):
                continue  # even in every diagram, see the decisions log
            witness = tp.parity_flip_witness(t)
            assert witness is not None
            diagram, _ = witness
            assert o.pair_sign(diagram.mapping()) != o.pair_sign(t.mapping())
            assert tp.reduce(diagram) == t
            found += 1


def test_criterion_7_factorization():
    with criterion(7, "F.A factorization: 200 germs reconstruct, 100 pairs refactor", 120):
        ctx = gm.GermContext(alternating(3), 2, name="A3")
        rng = random.Random(7)
        for _ in range(200):
            g = gm.random_germ(ctx, rng, max_label_depth=2)
            f, a = gm.factor_FA(g)
            assert gm.compose_FA(ctx, f, a) == g
            assert gm.membership(gm.lift(ctx, f)).in_F and tp.is_order_preserving(f)
            assert gm.membership(a).in_A
        for _ in range(100):
            f = gm.random_f_element(2, 3, rng)
            a = gm.random_a_element(ctx, rng, level=rng.randint(1, 3), max_label_depth=2)
            assert gm.factor_FA(gm.compose_FA(ctx, f, a)) == (f, a)


def _oracle_chi(g, level):
    mapping = {u: c for u, (c, _) in g.pairs.items()}
    labels = {u: {a: perm.images for a, perm in p.labels.items()} for u, (_, p) in g.pairs.items()}
    images = list(o.boundary(mapping, labels, g.k, g.d, level).values())
    return 0 if o.rank_sign(images) == 1 else 1


def test_criterion_8_sign_character():
    with criterion(8, "chi is a stable Z/2 character; in_M for Alt(3) and Sym(3)", 120):
        A3 = gm.GermContext(alternating(3), 2, name="A3")
        rng = random.Random(8)
        for _ in range(500):
            g = gm.random_germ(A3, rng)
            h = gm.random_germ(A3, rng)
            gh = g * h
            for x in (g, h, gh):
                n = gm.total_depth(x)
                assert gm.chi_sign(x, n) == gm.chi_sign(x, n + 1) == gm.chi_sign(x, n + 2)
            assert gm.chi_sign(gh) == (gm.chi_sign(g) + gm.chi_sign(h)) % 2
            assert gm.chi_sign(gh) == _oracle_chi(gh, gm.total_depth(gh))
        swap = pt.Portrait(A3.profile, 1, {(): symmetric(3).generators[0]})
        two_leaf_swap = gm.make_germ(A3, tp.TreePair.identity(2, 3), {(0,): swap})
        assert gm.in_M(two_leaf_swap).member is False
        S3 = gm.GermContext(symmetric(3), 2, name="S3")
        sigma = gm.make_germ(S3, tp.TreePair.identity(2, 3), {(0,): pt.Portrait(S3.profile, 1, swap.labels)})
        assert gm.membership(sigma).in_Wtilde and gm.chi_sign(sigma) == 1
        for _ in range(50):
            verdict = gm.in_M(gm.random_germ(S3, rng))
            assert verdict.member and verdict.rationale.startswith("index 1")
        assert gm.in_M(sigma).member


if __name__ == "__main__":
    failed = 0
    for name, func in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                func()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
