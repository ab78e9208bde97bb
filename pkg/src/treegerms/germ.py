"""Finitely supported germs of automorphisms of W(D)^k.

A germ is a tree pair over T_{d,k} in which every domain leaf u carries a
portrait P_u: the subtree at u is carried onto the subtree at its image
leaf by P_u (identity below its recorded depth).  Labels are always
A-portraits for D, i.e. finite pieces of elements of N_Aut(T)(W(D)).

Normal form: a sibling family u.0 .. u.(d-1) of domain leaves is merged into
u whenever the images are the full family of one vertex v (in any order rho)
and the merged label (root rho, children P_u.i) is again an A-portrait.  A
vertex that admits such a label passes it to all of its children, so the
result does not depend on the order of the merges.

Every finitely supported germ is an element of V_{d,k}; the labels record
how much of it is already locally an automorphism of W.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property

from . import portrait as pt
from . import treepair as tp
from .errors import IncompatibleParameters, LevelTooShallow, NotARefinement
from .named import named_group
from .permgroup import DEFAULT_CAP, Perm, PermGroup, as_perm, normalizer_in_sym, parse_generators, structure_flags


class GermContext:
    """The data (d, k, D) shared by a family of germs, with D and N cached."""

    def __init__(self, D, k, cap=DEFAULT_CAP, name=None):
        if k < 1:
            raise IncompatibleParameters("k must be positive")
        self.D = D
        self.d = D.degree
        self.k = k
        self.name = name or D.name
        self.cap = cap
        self.N = normalizer_in_sym(D, cap=cap)
        self.d_elements = D.element_tuples(cap)
        self.n_elements = self.N.element_tuples(cap)
        self.profile = pt.regular(self.d)

    @cached_property
    def key(self):
        return (self.d, self.k, frozenset(self.d_elements))

    @cached_property
    def in_alternating(self):
        return structure_flags(self.D, self.cap).in_alternating

    @cached_property
    def normalizer_in_alternating(self):
        return all(Perm._raw(x).is_even() for x in self.n_elements)

    def is_a(self, p):
        return pt._is_a_labels(p, self.d_elements, self.n_elements)

    def is_w(self, p):
        return all(perm.images in self.d_elements for perm in p.labels.values())

    def identity(self):
        return GermElement(self, {(a,): ((a,), pt.Portrait(self.profile, 0)) for a in range(self.k)})

    def __eq__(self, other):
        return isinstance(other, GermContext) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"GermContext(D={self.name}, d={self.d}, k={self.k})"


class GermElement:
    """Normal-form germ; ``pairs`` maps a domain leaf to (image leaf, label)."""

    __slots__ = ("ctx", "pairs", "_key")

    def __init__(self, ctx, pairs):
        self.ctx = ctx
        self.pairs = dict(pairs)
        self._key = None

    @property
    def d(self):
        return self.ctx.d

    @property
    def k(self):
        return self.ctx.k

    @property
    def base(self):
        mapping = {u: c for u, (c, _) in self.pairs.items()}
        return tp.TreePair.from_mapping(self.k, self.d, mapping)

    @property
    def labels(self):
        return {u: p for u, (_, p) in self.pairs.items()}

    def key(self):
        if self._key is None:
            self._key = (
                self.ctx.key,
                tuple(sorted((u, c, p.key()) for u, (c, p) in self.pairs.items())),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, GermElement) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __mul__(self, other):
        return germ_compose(self, other)

    def __call__(self, address):
        return apply(self, address)

    def __repr__(self):
        return f"GermElement({self.ctx!r}, {len(self.pairs)} leaves, total_depth={total_depth(self)})"

    def is_identity(self):
        return all(u == c and p.is_identity() for u, (c, p) in self.pairs.items())


def _check_ctx(g, h):
    if g.ctx != h.ctx:
        raise IncompatibleParameters("germs over different (d, k, D)")


def _merge_candidates(ctx, pairs):
    d = ctx.d
    out = []
    for leaf in sorted(pairs):
        if len(leaf) < 2 or leaf[-1] != 0:
            continue
        u = leaf[:-1]
        family = [pairs.get(u + (i,)) for i in range(d)]
        if any(x is None for x in family):
            continue
        images = [c for c, _ in family]
        if any(len(c) < 2 for c in images):
            continue
        v = images[0][:-1]
        if any(c[:-1] != v for c in images):
            continue
        rho = [c[-1] for c in images]
        if sorted(rho) != list(range(d)):
            continue
        merged = pt.graft(ctx.profile, Perm(rho), [p for _, p in family])
        if ctx.is_a(merged):
            out.append((u, v, merged))
    return out


def germ_reduce(ctx, pairs, rng=None):
    """Normal form of a labelled pair map; ``rng`` randomises the merge order."""
    pairs = dict(pairs)
    while True:
        candidates = _merge_candidates(ctx, pairs)
        if not candidates:
            break
        u, v, merged = rng.choice(candidates) if rng is not None else candidates[0]
        for i in range(ctx.d):
            del pairs[u + (i,)]
        pairs[u] = (v, merged)
    return GermElement(ctx, pairs)


def make_germ(ctx, base, labels=None):
    """Germ from a tree pair and optional {dom leaf: portrait}; checks the A-condition."""
    if (base.k, base.d) != (ctx.k, ctx.d):
        raise IncompatibleParameters("tree pair does not match the context")
    labels = labels or {}
    pairs = {}
    for u, c in base.mapping().items():
        p = labels.get(u, pt.Portrait(ctx.profile, 0))
        if p.profile != ctx.profile:
            raise IncompatibleParameters(f"label at {pt.format_address(u)} has the wrong profile")
        if not ctx.is_a(p):
            raise IncompatibleParameters(f"label at {pt.format_address(u)} is not an A-portrait")
        pairs[u] = (c, p)
    extra = set(labels) - set(pairs)
    if extra:
        raise IncompatibleParameters(f"labels on non-leaves: {sorted(extra)}")
    return germ_reduce(ctx, pairs)


def lift(ctx, t):
    """The germ of a V_{d,k} element (identity labels)."""
    return make_germ(ctx, t)


def _leaf_above(pairs, address):
    for n in range(1, len(address) + 1):
        if address[:n] in pairs:
            return address[:n]
    return None


def apply(g, address):
    address = tuple(address)
    tp.check_address(g.k, g.d, address)
    u = _leaf_above(g.pairs, address)
    if u is None:
        raise LevelTooShallow(f"{pt.format_address(address)} lies above the domain leaves")
    c, p = g.pairs[u]
    return c + pt.apply_address(p, address[len(u) :])


def _pieces_at(g, x):
    """(image vertex, label) of the piece of g on the subtree at x, x below a dom leaf."""
    u = _leaf_above(g.pairs, x)
    if u is None:
        raise NotARefinement(f"{pt.format_address(x)} lies above the domain leaves")
    c, p = g.pairs[u]
    s = x[len(u) :]
    return c + pt.apply_address(p, s), pt.subportrait(p, s)


def germ_inverse(g):
    pairs = {}
    for u, (c, p) in g.pairs.items():
        pairs[c] = (u, pt.inverse(p))
    return germ_reduce(g.ctx, pairs)


def germ_compose(g, h):
    """``g`` then ``h``."""
    _check_ctx(g, h)
    g_cod = tp.LeafSet(g.k, g.d, tuple(sorted(c for c, _ in g.pairs.values())))
    h_dom = tp.LeafSet(g.k, g.d, tuple(sorted(h.pairs)))
    middle = tp.common_refinement(g_cod, h_dom)
    g_inv = {c: (u, p) for u, (c, p) in g.pairs.items()}
    pairs = {}
    for x in middle.leaves:
        c = _leaf_above(g_inv, x)
        u, p = g_inv[c]
        inv_p = pt.inverse(p)
        t = x[len(c) :]
        s = pt.apply_address(inv_p, t)
        first = pt.subportrait(p, s)
        image, second = _pieces_at(h, x)
        pairs[u + s] = (image, pt.compose(first, second))
    return germ_reduce(g.ctx, pairs)


def germ_power(g, n):
    out = g.ctx.identity()
    if n < 0:
        g, n = germ_inverse(g), -n
    for _ in range(n):
        out = germ_compose(out, g)
    return out


def total_depth(g):
    return max(len(u) + p.effective_depth for u, (_, p) in g.pairs.items())


def pure_mapping(g, level=None):
    """Leaf map with every label pushed below its support (or down to ``level``)."""
    mapping = {}
    for u, (c, p) in g.pairs.items():
        depth = p.effective_depth if level is None else max(level - len(u), p.effective_depth)
        for s in itertools.product(range(g.d), repeat=depth):
            mapping[u + s] = c + pt.apply_address(p, s)
    return mapping


def to_treepair(g):
    """The reduced V_{d,k} tree pair of g."""
    return tp.reduce(tp.TreePair.from_mapping(g.k, g.d, pure_mapping(g)))


def induced_level_perm(g, level):
    """Rank permutation of the images of the level-``level`` addresses."""
    if level < total_depth(g):
        raise LevelTooShallow(f"level {level} is below total depth {total_depth(g)}")
    addresses = tp.uniform(g.k, g.d, level).leaves
    images = [apply(g, x) for x in addresses]
    rank = {y: i for i, y in enumerate(sorted(images))}
    return Perm([rank[y] for y in images])


def phi_leafmap(g, L):
    """Image leaf set of a leaf set refining dom(g), with the leaf bijection."""
    images = []
    for x in L.leaves:
        image, _ = _pieces_at(g, x)
        images.append(image)
    target = tp.validate_leafset(g.k, g.d, images)
    return target, dict(zip(L.leaves, images))


def cone_portrait(g, v):
    """If g carries the subtree at v onto the subtree at a vertex w by one
    portrait, return (w, portrait); otherwise None."""
    v = tuple(v)
    u = _leaf_above(g.pairs, v)
    if u is not None:
        return _pieces_at(g, v)
    below = [u for u in g.pairs if u[: len(v)] == v]
    if not below:
        return None
    n = len(v)
    w = g.pairs[below[0]][0][:n]
    steps = {}
    for u in below:
        c, _ = g.pairs[u]
        s = u[n:]
        if c[:n] != w or len(c) - n != len(s):
            return None
        t = c[n:]
        # walk the path, recording where each symbol goes at each source vertex
        for i in range(len(s)):
            slot = steps.setdefault(s[:i], {})
            if slot.get(s[i], t[i]) != t[i]:
                return None
            slot[s[i]] = t[i]
    labels = {}
    for a, slot in steps.items():
        if len(slot) != g.d or sorted(slot.values()) != list(range(g.d)):
            return None
        perm = Perm([slot[i] for i in range(g.d)])
        if not perm.is_identity():
            labels[a] = perm
    top_depth = max(len(u) - n for u in below)
    top = pt.Portrait(g.ctx.profile, top_depth, labels)
    for u in below:
        c, p = g.pairs[u]
        if pt.apply_address(top, u[n:]) != c[n:]:
            return None
        for a, perm in p.labels.items():
            labels[u[n:] + a] = perm
    depth = max(len(u) - n + g.pairs[u][1].effective_depth for u in below)
    return w, pt.Portrait(g.ctx.profile, depth, labels)


@dataclass(frozen=True)
class Membership:
    in_F: bool
    in_V: bool
    in_A: bool
    in_O: bool
    in_Wtilde: bool
    labels_trivial: bool  # the normal form carries no labels at all
    labels_in_W: bool  # every normal-form label is a W-portrait

    def as_dict(self):
        return dict(self.__dict__)


def membership(g):
    """Layer flags for a finitely supported germ.

    in_A: some uniform level is carried onto itself, which for normal forms
    means every leaf keeps its length.  Labels vanish below total_depth, so
    an element of A is already a level permutation with trivial labels and
    in_O coincides with in_A here; ``labels_in_W`` reports the stored labels.
    """
    ctx = g.ctx
    level_preserving = all(len(u) == len(c) for u, (c, _) in g.pairs.items())
    in_F = tp.is_order_preserving(to_treepair(g))
    in_wtilde = True
    for a in range(ctx.k):
        cone = cone_portrait(g, (a,))
        if cone is None or len(cone[0]) != 1 or not ctx.is_w(cone[1]):
            in_wtilde = False
            break
    return Membership(
        in_F=in_F,
        in_V=True,
        in_A=level_preserving,
        in_O=level_preserving,
        in_Wtilde=in_wtilde,
        labels_trivial=all(p.is_identity() for _, p in g.pairs.values()),
        labels_in_W=all(ctx.is_w(p) for _, p in g.pairs.values()),
    )


def refine_cod_to_level(g, level):
    """Same germ, with the codomain cut at ``level`` (labels follow)."""
    pairs = {}
    for u, (c, p) in g.pairs.items():
        if len(c) >= level:
            pairs[u] = (c, p)
            continue
        inv_p = pt.inverse(p)
        for t in itertools.product(range(g.d), repeat=level - len(c)):
            s = pt.apply_address(inv_p, t)
            pairs[u + s] = (c + t, pt.subportrait(p, s))
    return pairs


def factor_FA(g):
    """g = f a with f in F_{d,k} (order-preserving tree pair) and a in A_k.

    The codomain is cut at the uniform level V_N; f matches the resulting
    domain leaves to V_N in planar order and a = f^-1 g.
    """
    ctx = g.ctx
    level = max(total_depth(g), max(len(c) for c, _ in g.pairs.values()))
    pairs = refine_cod_to_level(g, level)
    dom = tp.LeafSet(g.k, g.d, tuple(sorted(pairs)))
    target = tp.uniform(g.k, g.d, level)
    f = tp.reduce(tp.TreePair(dom, target, range(len(dom))))
    a = germ_compose(germ_inverse(lift(ctx, f)), g)
    return f, a


def compose_FA(ctx, f, a):
    return germ_compose(lift(ctx, f), a)


@dataclass(frozen=True)
class ChiDetail:
    value: int
    level: int
    stable: bool
    note: str


def chi_sign(g, level=None):
    """Parity (0 even, 1 odd) of the induced permutation at ``level``
    (default: total depth)."""
    return chi_detail(g, level).value


def chi_detail(g, level=None):
    if level is None:
        level = total_depth(g)
    perm = induced_level_perm(g, level)
    value = 0 if perm.is_even() else 1
    if g.d % 2 == 1:
        note = "d odd: value is the same at every level >= total depth"
        stable = True
    else:
        note = "d even: every level beyond total depth gives 0"
        stable = level > total_depth(g) or value == 0
    return ChiDetail(value, level, stable, note)


@dataclass(frozen=True)
class MVerdict:
    member: bool
    rationale: str

    def __bool__(self):
        return self.member


def in_M(g):
    """Membership in M(D, k), the intersection of the non-trivial closed
    normal subgroups, via the sign character when it can cut a proper subgroup."""
    ctx = g.ctx
    if ctx.d % 2 == 1 and ctx.in_alternating:
        value = chi_sign(g)
        return MVerdict(value == 0, f"index 2 (d odd, D <= Alt(d)): chi = {value}")
    reason = "d even" if ctx.d % 2 == 0 else "D contains an odd permutation"
    return MVerdict(True, f"index 1 ({reason}): M is the whole commensurator")


def plus_levels_nested(ctx):
    """Whether Aut(W) wr Alt(k d^n) sits inside Aut(W) wr Alt(k d^(n+1)).

    Refining a level multiplies the parity by the signs of the root labels of
    the Aut(W)-factors, which range over N_Sym(d)(D); so the nesting holds
    exactly when every element of that normalizer is even.  Returns
    (holds, witness); the witness is a germ with one odd root label from N
    when the nesting fails.
    """
    odd = [x for x in sorted(ctx.n_elements) if not Perm._raw(x).is_even()]
    if not odd:
        return True, None
    label = pt.Portrait(ctx.profile, 1, {(): Perm._raw(odd[0])})
    pairs = {(a,): ((a,), label if a == 0 else pt.Portrait(ctx.profile, 0)) for a in range(ctx.k)}
    return False, germ_reduce(ctx, pairs)


# -- random elements ---------------------------------------------------------


def random_a_portrait(ctx, depth, rng, w_only=False):
    """Random A-portrait: each level below the root picks one coset of D in N."""
    d_list = sorted(ctx.d_elements)
    n_list = sorted(ctx.n_elements)
    labels = {}
    for level in range(depth):
        rep = Perm._raw(rng.choice(d_list if w_only else n_list))
        for a in ctx.profile.addresses(level):
            delta = Perm._raw(rng.choice(d_list))
            labels[a] = rep if level == 0 and not w_only else delta * rep
    return pt.Portrait(ctx.profile, depth, labels)


def random_germ(ctx, rng, max_carets=3, max_label_depth=2, w_only=False):
    t = tp.random_pair(ctx.k, ctx.d, rng, max_carets=max_carets)
    labels = {u: random_a_portrait(ctx, rng.randint(0, max_label_depth), rng, w_only) for u in t.dom.leaves}
    return make_germ(ctx, t, labels)


def random_a_element(ctx, rng, level=2, max_label_depth=2):
    """Random element of A_k: a permutation of V_level with A-portrait labels."""
    leaves = list(tp.uniform(ctx.k, ctx.d, level).leaves)
    images = leaves[:]
    rng.shuffle(images)
    pairs = {u: (c, random_a_portrait(ctx, rng.randint(0, max_label_depth), rng)) for u, c in zip(leaves, images)}
    return germ_reduce(ctx, pairs)


def random_f_element(k, d, rng, max_carets=4):
    return tp.random_pair(k, d, rng, max_carets=max_carets, order_preserving=True)


# -- JSON --------------------------------------------------------------------


def group_spec(ctx):
    if ctx.name:
        try:
            if named_group(ctx.name).element_tuples(ctx.cap) == ctx.d_elements:
                return ctx.name
        except KeyError:
            pass
    return [str(s) for s in ctx.D.generators]


def germ_to_json(g):
    base = g.base
    return {
        "d": g.d,
        "k": g.k,
        "D": group_spec(g.ctx),
        "pair": tp.format_pair(base),
        "labels": {
            pt.format_address(u): pt.portrait_to_json(p) for u, p in sorted(g.labels.items()) if not p.is_identity()
        },
    }


def context_from_spec(spec, d, k, cap=DEFAULT_CAP):
    if isinstance(spec, str):
        try:
            D = named_group(spec)
        except KeyError:
            D = PermGroup(d, parse_generators(spec, d))
        name = spec
    else:
        D = PermGroup(d, [as_perm(x, d) for x in spec])
        name = None
    if D.degree != d:
        raise IncompatibleParameters(f"D has degree {D.degree}, expected {d}")
    return GermContext(D, k, cap=cap, name=name)


def germ_from_json(obj, ctx=None, cap=DEFAULT_CAP):
    d, k = int(obj["d"]), int(obj["k"])
    if ctx is None:
        ctx = context_from_spec(obj["D"], d, k, cap)
    base = tp.parse_pair(obj["pair"], k, d, reduce_result=False)
    labels = {pt.parse_address(a): pt.portrait_from_json(p) for a, p in obj.get("labels", {}).items()}
    return make_germ(ctx, base, labels)


def dumps(g):
    return json.dumps(germ_to_json(g), sort_keys=True)


def loads(text, ctx=None):
    return germ_from_json(json.loads(text), ctx)
