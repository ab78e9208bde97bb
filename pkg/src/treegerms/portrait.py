"""Truncated rooted-tree automorphisms stored as labelled portraits.

A vertex is addressed by its path from the root, a tuple of child indices
(the root is ``()``).  A portrait assigns one permutation to each internal
vertex; the label at vertex ``a`` says how the children of ``a`` are sent to
the children of the image of ``a``:

    image(a + (x,)) = image(a) + (label(a)(x),)

Labels are indexed by the source vertex and products act on the right, so
``compose(p, q)`` applies ``p`` first.  Only non-identity labels are stored;
two portraits are equal when they have the same profile and the same
non-identity labels, whatever their nominal depth.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .errors import (
    ChildNotFixed,
    InvalidAddress,
    NotTransitive,
    OrderExceedsCap,
    ProfileMismatch,
    TowerOverflow,
)
from .permgroup import DEFAULT_CAP, Perm, PermGroup, as_perm, is_transitive, normalizer_in_sym


@dataclass(frozen=True)
class ArityProfile:
    """Root arity and the arity of every other internal vertex.

    ``(d, d)`` is the d-regular rooted tree, ``(d, d-1)`` a ball in the
    (d)-regular unrooted tree seen from its centre, ``(k, d)`` the tree
    with k level-one vertices and d-ary below.
    """

    root_arity: int
    deep_arity: int

    def __post_init__(self):
        if self.root_arity < 1 or self.deep_arity < 1:
            raise ValueError("arities must be positive")

    def arity(self, address):
        return self.root_arity if len(address) == 0 else self.deep_arity

    def level_size(self, level):
        if level == 0:
            return 1
        return self.root_arity * self.deep_arity ** (level - 1)

    def addresses(self, level):
        """All addresses of the given level, in lexicographic order."""
        if level == 0:
            return [()]
        return [
            (first,) + rest
            for first in range(self.root_arity)
            for rest in itertools.product(range(self.deep_arity), repeat=level - 1)
        ]

    def internal_vertices(self, depth):
        return [a for level in range(depth) for a in self.addresses(level)]


def regular(d):
    return ArityProfile(d, d)


def format_address(address):
    return ".".join(map(str, address))


def parse_address(text):
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split("."))
    except ValueError:
        raise InvalidAddress(f"bad address {text!r}") from None


class Portrait:
    """A depth-``depth`` labelled tree automorphism (identity below ``depth``)."""

    __slots__ = ("profile", "depth", "labels", "_key")

    def __init__(self, profile, depth, labels=None):
        if depth < 0:
            raise ValueError("depth must be non-negative")
        clean = {}
        for address, perm in (labels or {}).items():
            address = tuple(address)
            if len(address) >= depth:
                if perm.is_identity():
                    continue
                raise InvalidAddress(f"label at {format_address(address)!r} lies at depth >= {depth}")
            _check_address(profile, address)
            if perm.degree != profile.arity(address):
                raise ProfileMismatch(
                    f"label at {format_address(address)!r} has degree {perm.degree}, "
                    f"expected {profile.arity(address)}"
                )
            if not perm.is_identity():
                clean[address] = perm
        self.profile = profile
        self.depth = depth
        self.labels = clean
        self._key = None

    @classmethod
    def identity(cls, profile, depth=0):
        return cls(profile, depth)

    def label(self, address):
        perm = self.labels.get(tuple(address))
        if perm is None:
            return Perm.identity(self.profile.arity(address))
        return perm

    @property
    def effective_depth(self):
        """Depth after trimming identity levels at the bottom."""
        return max((len(a) + 1 for a in self.labels), default=0)

    def is_identity(self):
        return not self.labels

    def key(self):
        if self._key is None:
            self._key = (self.profile, tuple(sorted((a, p.images) for a, p in self.labels.items())))
        return self._key

    def __eq__(self, other):
        return isinstance(other, Portrait) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        body = ", ".join(f"{format_address(a) or '<root>'}: {p}" for a, p in sorted(self.labels.items()))
        return f"Portrait({self.profile.root_arity},{self.profile.deep_arity}; depth={self.depth}; {{{body}}})"

    def __mul__(self, other):
        return compose(self, other)

    def __call__(self, address):
        return apply_address(self, address)


def _check_address(profile, address):
    for i, x in enumerate(address):
        arity = profile.root_arity if i == 0 else profile.deep_arity
        if not 0 <= x < arity:
            raise InvalidAddress(f"symbol {x} at position {i} of {address} exceeds arity {arity}")


def apply_address(p, address):
    """Image of ``address``: each symbol goes through the label at its parent."""
    address = tuple(address)
    _check_address(p.profile, address)
    labels = p.labels
    out = []
    for i, x in enumerate(address):
        perm = labels.get(address[:i])
        out.append(perm.images[x] if perm is not None else x)
    return tuple(out)


def _pad_check(p, q):
    if p.profile != q.profile:
        raise ProfileMismatch(f"profiles {p.profile} and {q.profile} differ")


def compose(p, q):
    """``p`` then ``q``: label(a) = label_p(a) * label_q(p(a))."""
    _pad_check(p, q)
    depth = max(p.depth, q.depth)
    if not q.labels:
        return Portrait(p.profile, depth, p.labels)
    if not p.labels:
        return Portrait(p.profile, depth, q.labels)
    inv = inverse(p)
    support = set(p.labels)
    support.update(apply_address(inv, b) for b in q.labels)
    labels = {}
    for a in support:
        pa = p.label(a)
        qa = q.label(apply_address(p, a))
        prod = pa * qa
        if not prod.is_identity():
            labels[a] = prod
    return Portrait(p.profile, depth, labels)


def inverse(p):
    labels = {apply_address(p, a): perm.inverse() for a, perm in p.labels.items()}
    return Portrait(p.profile, p.depth, labels)


def child_portrait(p, i):
    """The portrait of the map from the subtree below child ``i`` onto the
    subtree below its image (no fixing required)."""
    return subportrait(p, (i,))


def subportrait(p, address):
    """The portrait hanging below ``address`` (always profile (d, d))."""
    address = tuple(address)
    if not address:
        return p
    n = len(address)
    sub = {a[n:]: perm for a, perm in p.labels.items() if a[:n] == address}
    profile = ArityProfile(p.profile.deep_arity, p.profile.deep_arity)
    return Portrait(profile, max(p.depth - n, 0), sub)


def restrict_to_child(p, i):
    """Action on the subtree below child ``i``, which the root label must fix."""
    if p.depth < 1:
        raise ChildNotFixed("depth-0 portrait has no children to restrict to")
    if p.label(()).images[i] != i:
        raise ChildNotFixed(f"root label {p.label(())} moves child {i}")
    return child_portrait(p, i)


def graft(profile, root_label, children):
    """Portrait with the given root label and child sub-portraits."""
    labels = {}
    if root_label is not None and not root_label.is_identity():
        labels[()] = root_label
    depth = 1
    for i, child in enumerate(children):
        if child is None:
            continue
        depth = max(depth, child.depth + 1)
        for a, perm in child.labels.items():
            labels[(i,) + a] = perm
    return Portrait(profile, depth, labels)


def level_perm(p, level):
    """The permutation induced on the level-``level`` addresses (lexicographic indices)."""
    addresses = p.profile.addresses(level)
    index = {a: i for i, a in enumerate(addresses)}
    return Perm([index[apply_address(p, a)] for a in addresses])


def is_w_portrait(p, D, cap=DEFAULT_CAP):
    """Every label lies in ``D``."""
    elements = D.element_tuples(cap)
    return all(perm.images in elements for perm in p.labels.values())


def is_a_portrait(p, D, N=None, cap=DEFAULT_CAP):
    """Labels lie in ``N = N_Sym(d)(D)`` and, on each level below the root,
    all labels are congruent modulo ``D``."""
    if N is None:
        N = normalizer_in_sym(D, cap=cap)
    return _is_a_labels(p, D.element_tuples(cap), N.element_tuples(cap))


def _is_a_labels(p, d_elements, n_elements):
    by_level = {}
    for a, perm in p.labels.items():
        if perm.images not in n_elements:
            return False
        if a:
            by_level.setdefault(len(a), []).append(perm)
    for level, perms in by_level.items():
        if len(perms) < p.profile.level_size(level):
            # some vertex carries the identity, so every label must lie in D
            if any(perm.images not in d_elements for perm in perms):
                return False
        else:
            ref_inv = perms[0].inverse()
            if any((perm * ref_inv).images not in d_elements for perm in perms[1:]):
                return False
    return True


def enumerate_portraits(profile, depth, label_elements, cap=DEFAULT_CAP):
    """Every portrait of the given depth whose labels come from ``label_elements``.

    ``label_elements`` maps an arity to the allowed permutations.
    """
    vertices = profile.internal_vertices(depth)
    choices = [sorted(label_elements[profile.arity(a)]) for a in vertices]
    total = 1
    for c in choices:
        total *= len(c)
    if total > cap:
        raise OrderExceedsCap(cap)
    for combo in itertools.product(*choices):
        yield Portrait(profile, depth, dict(zip(vertices, combo)))


@dataclass(frozen=True)
class TowerOrders:
    w_order: int
    a_order: int
    ratio: int
    index: int  # [N : D]
    exhaustive: tuple | None = None  # (w, a) counted by enumeration, when run


def tower_orders(D, n, cap=DEFAULT_CAP, limit=2**128, cross_check=None):
    """Orders of the depth-n wreath tower W_n = D_n and its normalizer tower A_n.

    |D_1| = |D|, |D_{m+1}| = |D|^(d^m) |D_m|;  |A_1| = |N|,
    |A_{m+1}| = |B_m| |A_m| with |B_m| = |D|^(d^m) [N:D].
    For d <= 3 and n <= 2 the orders are also counted by enumerating portraits
    (set ``cross_check`` to force either way).
    """
    if not is_transitive(D):
        raise NotTransitive(f"{D} is not transitive")
    if n < 1:
        raise ValueError("tower depth must be at least 1")
    d = D.degree
    N = normalizer_in_sym(D, cap=cap)
    order_d = D.order(cap)
    order_n = N.order(cap)
    index = order_n // order_d
    w = order_d
    a = order_n
    for m in range(1, n):
        w = order_d ** (d**m) * w
        a = order_d ** (d**m) * index * a
        if w > limit or a > limit:
            raise TowerOverflow(f"tower orders exceed {limit} at depth {m + 1}")
    ratio = a // w
    assert a == w * ratio and ratio == index**n
    if cross_check is None:
        cross_check = d <= 3 and n <= 2
    exhaustive = None
    if cross_check:
        exhaustive = _count_tower(D, N, n, cap)
    return TowerOrders(w_order=w, a_order=a, ratio=ratio, index=index, exhaustive=exhaustive)


def _count_tower(D, N, n, cap):
    d = D.degree
    profile = regular(d)
    n_perms = [Perm._raw(t) for t in N.element_tuples(cap)]
    d_elements = D.element_tuples(cap)
    n_elements = N.element_tuples(cap)
    w_count = a_count = 0
    for p in enumerate_portraits(profile, n, {d: n_perms}, cap):
        if all(perm.images in d_elements for perm in p.labels.values()):
            w_count += 1
        if _is_a_labels(p, d_elements, n_elements):
            a_count += 1
    return (w_count, a_count)


def w_generators(D, depth):
    """Portraits putting one generator of D at one vertex, for every vertex."""
    profile = regular(D.degree)
    return [
        Portrait(profile, depth, {a: s})
        for a in profile.internal_vertices(depth)
        for s in D.generators
        if not s.is_identity()
    ]


def level_transitive_check(D, n, cap=DEFAULT_CAP):
    """Whether the depth-n W-portraits act transitively on level-n addresses."""
    gens = w_generators(D, n)
    start = (0,) * n
    seen = {start}
    frontier = [start]
    for a in frontier:
        for g in gens:
            b = apply_address(g, a)
            if b not in seen:
                seen.add(b)
                if len(seen) > cap:
                    raise OrderExceedsCap(cap)
                frontier.append(b)
    return len(seen) == D.degree**n


# -- JSON ------------------------------------------------------------------


def portrait_to_json(p):
    return {
        "profile": [p.profile.root_arity, p.profile.deep_arity],
        "depth": p.depth,
        "labels": {format_address(a): str(perm) for a, perm in sorted(p.labels.items())},
    }


def portrait_from_json(obj):
    r, a = obj["profile"]
    profile = ArityProfile(int(r), int(a))
    labels = {}
    for key, value in obj.get("labels", {}).items():
        address = parse_address(key)
        labels[address] = as_perm(value, profile.arity(address))
    depth = obj.get("depth")
    if depth is None:
        depth = max((len(x) + 1 for x in labels), default=0)
    return Portrait(profile, int(depth), labels)


def dumps(p):
    return json.dumps(portrait_to_json(p), sort_keys=True)


def loads(text):
    return portrait_from_json(json.loads(text))
