"""Finite balls in the legally coloured d-regular tree and their U(F) groups.

A vertex is the reduced word of colours read along the path from the base
vertex ``()``; no two consecutive colours agree.  The edge between ``w`` and
``w + (c,)`` carries colour ``c``, which is a legal colouring, and at a
non-base vertex the parent edge keeps its colour while the children take the
remaining colours in ascending order.

An element of a ball group is stored as the tuple of vertex images (indices
into ``ball.vertices``) and composes on the right like every other
permutation in the package.
"""

from __future__ import annotations

import json
from functools import cached_property
from dataclasses import dataclass, field

from .errors import OrderExceedsCap, RecipeDegenerate
from .permgroup import (
    DEFAULT_CAP,
    Perm,
    PermGroup,
    _inv,
    _mul,
    _small_generating_set,
    is_generated_by_point_stabilizers,
    is_primitive,
    is_transitive,
    normalizer_in_sym,
    permutation_equivalence,
    point_stabilizer,
    structure_flags,
    transitivity_degree,
)

VERTEX = "vertex"
EDGE = "edge"
CENTRAL_COLOUR = 0  # colour of the central edge of an edge ball


def neighbour(w, c):
    """The vertex joined to ``w`` by the edge of colour ``c``."""
    if w and w[-1] == c:
        return w[:-1]
    return w + (c,)


def edge_colour(x, y):
    if len(y) > len(x):
        return y[-1]
    return x[-1]


@dataclass(frozen=True)
class ColouredBall:
    d: int
    radius: int
    center_kind: str
    vertices: tuple
    interior: tuple

    @classmethod
    def build(cls, d, radius, center_kind=VERTEX):
        if center_kind not in (VERTEX, EDGE):
            raise ValueError(f"center_kind must be {VERTEX!r} or {EDGE!r}")
        if d < 2 or radius < 1:
            raise ValueError("need d >= 2 and radius >= 1")
        layers = [[()]]
        for _ in range(radius):
            layers.append([w + (c,) for w in layers[-1] for c in range(d) if not w or w[-1] != c])
        vertices = [w for layer in layers for w in layer]
        interior = [w for layer in layers[:-1] for w in layer]
        if center_kind == EDGE:
            extra = [w + (c,) for w in layers[-1] if w[0] == CENTRAL_COLOUR for c in range(d) if w[-1] != c]
            interior += [w for w in layers[-1] if w[0] == CENTRAL_COLOUR]
            vertices += extra
        return cls(d, radius, center_kind, tuple(vertices), tuple(interior))

    @cached_property
    def index(self):
        return {w: i for i, w in enumerate(self.vertices)}

    @cached_property
    def colouring(self):
        """Edge (parent, child) -> colour."""
        return {(w[:-1], w): w[-1] for w in self.vertices if w}

    def distance_to_centre(self, w):
        if self.center_kind == EDGE and w and w[0] == CENTRAL_COLOUR:
            return len(w) - 1
        return len(w)


def _check_colouring(ball):
    """Every interior vertex sees all d colours exactly once."""
    present = set(ball.vertices)
    for w in ball.interior:
        colours = [edge_colour(w, neighbour(w, c)) for c in range(ball.d) if neighbour(w, c) in present]
        if sorted(colours) != list(range(ball.d)):
            return False
    return True


@dataclass(frozen=True)
class BallGroup:
    ball: ColouredBall
    F: PermGroup
    elements: frozenset = field(repr=False)

    def order(self):
        return len(self.elements)

    def local_action(self, element, w):
        """The permutation of colours at interior vertex ``w``."""
        vertices = self.ball.vertices
        index = self.ball.index
        gw = vertices[element[index[w]]]
        images = []
        for c in range(self.ball.d):
            gx = vertices[element[index[neighbour(w, c)]]]
            images.append(edge_colour(gw, gx))
        return Perm(images)

    def as_permgroup(self):
        n = len(self.ball.vertices)
        return PermGroup._from_tuples(n, self.elements, f"U({self.F.name or 'F'}) ball")

    def stabilizer(self, w):
        i = self.ball.index[w]
        return frozenset(x for x in self.elements if x[i] == i)


def predicted_vertex_order(F, radius, cap=DEFAULT_CAP):
    """|F| * |F_a|^(d + d(d-1) + ... + d(d-1)^(R-2)) for transitive F."""
    d = F.degree
    stab = point_stabilizer(F, 0, cap).group.order(cap)
    exponent = sum(d * (d - 1) ** j for j in range(radius - 1))
    return F.order(cap) * stab**exponent


def predicted_edge_order(F, radius, cap=DEFAULT_CAP):
    """Full edge-ball group, flips included: 2 |F_a|^(2(1 + (d-1) + ... + (d-1)^(R-1)))."""
    d = F.degree
    stab = point_stabilizer(F, 0, cap).group.order(cap)
    return 2 * stab ** (2 * sum((d - 1) ** j for j in range(radius)))


def build_ball_group(F, radius, center_kind=VERTEX, cap=DEFAULT_CAP):
    """All colour-admissible automorphisms of the ball, by extending local
    actions outwards one interior vertex at a time."""
    ball = ColouredBall.build(F.degree, radius, center_kind)
    f_elements = sorted(F.element_tuples(cap))
    index = ball.index
    interior = ball.interior
    n = len(ball.vertices)
    centre = ()
    if center_kind == VERTEX:
        roots = [centre]
    else:
        roots = [centre, (CENTRAL_COLOUR,)]

    found = set()
    images = {}
    sigma = {}

    def extend(i):
        if i == len(interior):
            found.add(tuple(index[images[w]] for w in ball.vertices))
            if len(found) > cap:
                raise OrderExceedsCap(cap)
            return
        w = interior[i]
        gw = images[w]
        if w:
            p = w[-1]
            target = sigma[w[:-1]][p]
            choices = [s for s in f_elements if s[p] == target]
        elif center_kind == EDGE:
            choices = [s for s in f_elements if s[CENTRAL_COLOUR] == CENTRAL_COLOUR]
        else:
            choices = f_elements
        touched = [neighbour(w, c) for c in range(ball.d)]
        for s in choices:
            sigma[w] = s
            saved = {}
            for c, x in enumerate(touched):
                if x in index and x not in images:
                    saved[x] = True
                    images[x] = neighbour(gw, s[c])
            extend(i + 1)
            for x in saved:
                del images[x]
        sigma.pop(w, None)

    for r in roots:
        images.clear()
        images[centre] = r
        extend(0)
    assert all(len(set(x)) == n for x in found)
    return BallGroup(ball, F, frozenset(found))


def restrict_ball_group(group, radius):
    """Image of the group under restriction to the smaller concentric ball."""
    small = ColouredBall.build(group.ball.d, radius, group.ball.center_kind)
    big_index = group.ball.index
    small_index = small.index
    positions = [big_index[w] for w in small.vertices]
    vertices = group.ball.vertices
    restricted = frozenset(tuple(small_index[vertices[x[i]]] for i in positions) for x in group.elements)
    return BallGroup(small, group.F, restricted)


@dataclass(frozen=True)
class Admissibility:
    transitive: bool
    generated_by_point_stabilizers: bool
    verdict: bool


def bm_admissible(F, cap=DEFAULT_CAP):
    transitive = is_transitive(F)
    generated = transitive and is_generated_by_point_stabilizers(F, cap)
    return Admissibility(transitive, generated, transitive and generated)


@dataclass(frozen=True)
class TitsRecord:
    fix_e: int
    fix_h1: int
    fix_h2: int
    intersection_trivial: bool
    orders_multiply: bool
    every_element_splits: bool
    factorizes: bool


def tits_independence_check(F, radius=2, cap=DEFAULT_CAP, group=None):
    """Check G_(e) = G_(h1) G_(h2) in the edge ball by exhaustion.

    h1 is the half containing the base vertex, h2 the half through the
    central edge.
    """
    if group is None:
        group = build_ball_group(F, radius, EDGE, cap)
    ball = group.ball
    index = ball.index
    u, v = index[()], index[(CENTRAL_COLOUR,)]
    half1 = [index[w] for w in ball.vertices if not w or w[0] != CENTRAL_COLOUR]
    half2 = [index[w] for w in ball.vertices if w and w[0] == CENTRAL_COLOUR]
    fix_e = [x for x in group.elements if x[u] == u and x[v] == v]
    fix_h1 = [x for x in fix_e if all(x[i] == i for i in half1)]
    fix_h2 = [x for x in fix_e if all(x[i] == i for i in half2)]
    identity = tuple(range(len(ball.vertices)))
    intersection_trivial = set(fix_h1) & set(fix_h2) == {identity}
    orders_multiply = len(fix_e) == len(fix_h1) * len(fix_h2)
    products = {_mul(a, b) for a in fix_h1 for b in fix_h2}
    every_split = products == set(fix_e)
    return TitsRecord(
        fix_e=len(fix_e),
        fix_h1=len(fix_h1),
        fix_h2=len(fix_h2),
        intersection_trivial=intersection_trivial,
        orders_multiply=orders_multiply,
        every_element_splits=every_split,
        factorizes=intersection_trivial and orders_multiply and every_split,
    )


@dataclass(frozen=True)
class RecoveredAction:
    group: PermGroup
    K_order: int
    KL_order: int
    C_order: int
    quotient_order: int
    witness: Perm | None

    @property
    def equivalent(self):
        return self.witness is not None


def recover_local_action(group, cap=DEFAULT_CAP):
    """Run the K/C recipe inside a finite ball and compare with F.

    K is the stabilizer of the base vertex u and L that of its neighbour v
    across the colour-0 edge.  In an edge ball both endpoints are fixed by
    the same elements, so K is taken from the vertex ball of the same radius
    about u, which the edge ball contains.
    """
    if group.ball.center_kind == EDGE:
        group = build_ball_group(group.F, group.ball.radius, VERTEX, cap)
    ball = group.ball
    if ball.radius < 2:
        raise RecipeDegenerate("the recipe needs radius at least 2")
    index = ball.index
    vertices = ball.vertices
    d = ball.d
    K = group.elements
    v = index[(CENTRAL_COLOUR,)]
    KL = group.stabilizer((CENTRAL_COLOUR,))
    if KL == K:
        raise RecipeDegenerate("K is contained in L")
    # the conjugate g^-1 (K n L) g is the stabilizer of v.g; index it by
    # that point of the orbit (for d = 2 distinct points share a conjugate)
    conjugates = {}
    for g in sorted(K):
        if g[v] not in conjugates:
            gi = _inv(g)
            conjugates[g[v]] = frozenset(_mul(_mul(gi, h), g) for h in KL)
    C = frozenset.intersection(*conjugates.values())
    kernel = frozenset(x for x in K if all(x[i] == i for i in conjugates))
    if C != kernel:
        raise RecipeDegenerate("core of K n L differs from the kernel on the orbit of v")
    colour_of = {i: edge_colour((), vertices[i]) for i in conjugates}
    gens = []
    for k in _small_generating_set(K, len(vertices)):
        images = list(range(d))
        for i in conjugates:
            images[colour_of[i]] = colour_of[k[i]]
        if images != list(range(d)):
            gens.append(Perm(images))
    recovered = PermGroup(d, gens, name="K/C")
    quotient = len(K) // len(C)
    if recovered.order(cap) != quotient:
        raise RecipeDegenerate("action of K on the orbit of v is not faithful modulo C")
    witness = permutation_equivalence(recovered, group.F, cap)
    return RecoveredAction(
        group=recovered,
        K_order=len(K),
        KL_order=len(KL),
        C_order=len(C),
        quotient_order=quotient,
        witness=witness,
    )


@dataclass(frozen=True)
class AuditRow:
    name: str
    degree: int
    order: int
    bm_admissible: bool
    locally_primitive: bool
    two_transitive: bool
    F0_order: int | None
    F0_normalizer_order: int | None
    F0_self_normalizing: bool | None  # None: not applicable (F not 2-transitive)
    F0_perfect: bool | None
    F0_in_alt: bool | None
    predicted_LG_compactly_generated: bool | None
    predicted_commensurator_index: int | None
    notes: tuple = ()

    def as_dict(self):
        out = dict(self.__dict__)
        out["notes"] = list(self.notes)
        return out


def audit_theorems(F, cap=DEFAULT_CAP, max_degree=8):
    """Evaluate the finite hypotheses of the L(G) and M(D, k) results for
    F acting on d+1 points, with F_0 the stabilizer of the last point."""
    adm = bm_admissible(F, cap)
    transitive = adm.transitive
    primitive = transitive and is_primitive(F, cap)
    two = transitive and F.degree >= 2 and transitivity_degree(F, cap) >= 2
    d = F.degree - 1
    notes = []
    if not two:
        notes.append("not 2-transitive: condition (iii) not applicable")
        return AuditRow(
            name=F.name or "",
            degree=F.degree,
            order=F.order(cap),
            bm_admissible=adm.verdict,
            locally_primitive=primitive,
            two_transitive=False,
            F0_order=None,
            F0_normalizer_order=None,
            F0_self_normalizing=None,
            F0_perfect=None,
            F0_in_alt=None,
            predicted_LG_compactly_generated=None,
            predicted_commensurator_index=None,
            notes=tuple(notes),
        )
    stab = point_stabilizer(F, d, cap)
    F0 = stab.restricted
    normalizer = normalizer_in_sym(F0, max_degree=max_degree, cap=cap)
    self_normalizing = normalizer.order(cap) == F0.order(cap)
    flags = structure_flags(F0, cap)
    index = 2 if d % 2 == 1 and flags.in_alternating else 1
    notes.append(f"F_0 = stabilizer of point {d}, relabelled to 0..{d - 1}")
    return AuditRow(
        name=F.name or "",
        degree=F.degree,
        order=F.order(cap),
        bm_admissible=adm.verdict,
        locally_primitive=primitive,
        two_transitive=True,
        F0_order=F0.order(cap),
        F0_normalizer_order=normalizer.order(cap),
        F0_self_normalizing=self_normalizing,
        F0_perfect=flags.is_perfect,
        F0_in_alt=flags.in_alternating,
        predicted_LG_compactly_generated=self_normalizing,
        predicted_commensurator_index=index,
        notes=tuple(notes),
    )


def ball_to_json(group):
    ball = group.ball
    return {
        "d": ball.d,
        "radius": ball.radius,
        "center_kind": ball.center_kind,
        "F": [str(s) for s in group.F.generators],
        "vertices": [".".join(map(str, w)) for w in ball.vertices],
        "interior": [".".join(map(str, w)) for w in ball.interior],
        "order": group.order(),
        "elements": [list(x) for x in sorted(group.elements)],
    }


def dumps(group):
    return json.dumps(ball_to_json(group), sort_keys=True)
