"""Higman-Thompson elements of V_{d,k} and F_{d,k} as reduced tree pairs.

Addresses live in T_{d,k}: the first symbol is < k and every later one < d,
so even for k = 1 an address starts with 0.  A leaf set is a complete
prefix code, kept sorted (tuple order is the planar left-to-right order).
A pair maps dom leaf i to cod leaf sigma[i] and a deeper address u + w to
the image leaf followed by w.
"""

from __future__ import annotations

import itertools
import random as _random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import (
    IncompatibleParameters,
    InvalidAddress,
    LeafAbsent,
    LevelTooShallow,
    NotComplete,
    NotPrefixFree,
)
from .permgroup import Perm
from .portrait import format_address, parse_address


def check_address(k, d, address):
    if not address:
        raise InvalidAddress("the root is not a leaf of T_{d,k}")
    if not 0 <= address[0] < k:
        raise InvalidAddress(f"first symbol of {format_address(address)} must be < {k}")
    for x in address[1:]:
        if not 0 <= x < d:
            raise InvalidAddress(f"symbol {x} of {format_address(address)} must be < {d}")


def weight(k, d, address):
    return Fraction(1, k * d ** (len(address) - 1))


@dataclass(frozen=True)
class LeafSet:
    k: int
    d: int
    leaves: tuple

    def __len__(self):
        return len(self.leaves)

    def __iter__(self):
        return iter(self.leaves)

    def __contains__(self, leaf):
        return tuple(leaf) in self.index

    @cached_property
    def index(self):
        return {leaf: i for i, leaf in enumerate(self.leaves)}

    def depth(self):
        return max(len(x) for x in self.leaves)

    def leaf_above(self, address):
        """The leaf that is a prefix of ``address`` (``None`` if ``address`` is too short)."""
        index = self.index
        for n in range(1, len(address) + 1):
            if address[:n] in index:
                return address[:n]
        return None

    def is_uniform(self):
        return len({len(x) for x in self.leaves}) == 1


def validate_leafset(k, d, leaves):
    """Sorted, prefix-free, Kraft-complete leaf set or a diagnosis."""
    if k < 1 or d < 2:
        raise IncompatibleParameters("need k >= 1 and d >= 2")
    ordered = sorted(tuple(x) for x in leaves)
    for x in ordered:
        check_address(k, d, x)
    for a, b in zip(ordered, ordered[1:]):
        if b[: len(a)] == a:
            raise NotPrefixFree(a, b)
    total = sum((weight(k, d, x) for x in ordered), Fraction(0))
    if total != 1:
        raise NotComplete(total)
    return LeafSet(k, d, tuple(ordered))


def uniform(k, d, level):
    """V_level: every address of the given length."""
    if level < 1:
        raise ValueError("level must be at least 1")
    leaves = tuple((a,) + rest for a in range(k) for rest in itertools.product(range(d), repeat=level - 1))
    return LeafSet(k, d, leaves)


def refine_leaf(L, leaf):
    leaf = tuple(leaf)
    if leaf not in L.index:
        raise LeafAbsent(f"{format_address(leaf)} is not a leaf")
    i = L.index[leaf]
    children = tuple(leaf + (j,) for j in range(L.d))
    return LeafSet(L.k, L.d, L.leaves[:i] + children + L.leaves[i + 1 :])


class TreePair:
    """A leaf bijection dom -> cod; ``sigma[i]`` is the cod index of dom leaf i.

    The constructor does not reduce; use :func:`make` or :func:`reduce`.
    """

    __slots__ = ("dom", "cod", "sigma")

    def __init__(self, dom, cod, sigma):
        if (dom.k, dom.d) != (cod.k, cod.d):
            raise IncompatibleParameters("dom and cod live in different trees")
        sigma = tuple(sigma)
        if len(dom) != len(cod) or sorted(sigma) != list(range(len(cod))):
            raise ValueError("sigma must be a bijection between the leaf sets")
        self.dom = dom
        self.cod = cod
        self.sigma = sigma

    @property
    def k(self):
        return self.dom.k

    @property
    def d(self):
        return self.dom.d

    def mapping(self):
        cod = self.cod.leaves
        return {u: cod[j] for u, j in zip(self.dom.leaves, self.sigma)}

    @classmethod
    def from_mapping(cls, k, d, mapping):
        dom = LeafSet(k, d, tuple(sorted(mapping)))
        cod = LeafSet(k, d, tuple(sorted(mapping.values())))
        sigma = [cod.index[mapping[u]] for u in dom.leaves]
        return cls(dom, cod, sigma)

    @classmethod
    def identity(cls, k, d):
        level = uniform(k, d, 1)
        return cls(level, level, range(k))

    def key(self):
        return (self.k, self.d, self.dom.leaves, self.cod.leaves, self.sigma)

    def __eq__(self, other):
        return isinstance(other, TreePair) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"TreePair(k={self.k}, d={self.d}, {format_pair(self)!r})"

    def __mul__(self, other):
        return compose(self, other)

    def __call__(self, address):
        return apply(self, address)

    def is_identity(self):
        return self.dom == self.cod and self.sigma == tuple(range(len(self.sigma)))

    def depth(self):
        return max(self.dom.depth(), self.cod.depth())


def make(dom, cod, sigma):
    return reduce(TreePair(dom, cod, sigma))


def _families(mapping, d):
    """Collapsible sibling families as (u, v) pairs, in planar order of u."""
    out = []
    for leaf in sorted(mapping):
        if len(leaf) < 2 or leaf[-1] != 0:
            continue
        u = leaf[:-1]
        first = mapping[leaf]
        if len(first) < 2 or first[-1] != 0:
            continue
        v = first[:-1]
        if all(mapping.get(u + (j,)) == v + (j,) for j in range(1, d)):
            out.append((u, v))
    return out


def _collapse(mapping, d, u, v):
    for j in range(d):
        del mapping[u + (j,)]
    mapping[u] = v


def reduce(t, rng=None):
    """Collapse order-respecting sibling families until none is left.

    With ``rng`` the family collapsed at each step is chosen at random; the
    result does not depend on the choice.
    """
    mapping = t.mapping()
    d = t.d
    while True:
        families = _families(mapping, d)
        if not families:
            break
        u, v = rng.choice(families) if rng is not None else families[0]
        _collapse(mapping, d, u, v)
    return TreePair.from_mapping(t.k, t.d, mapping)


def is_reduced(t):
    return not _families(t.mapping(), t.d)


def common_refinement(A, B):
    """Coarsest leaf set refining both A and B."""
    union = set(A.leaves) | set(B.leaves)
    # members that are proper prefixes of another member are dropped
    deep = set()
    for x in union:
        for n in range(1, len(x)):
            deep.add(x[:n])
    leaves = sorted(x for x in union if x not in deep)
    return LeafSet(A.k, A.d, tuple(leaves))


def _route(mapping_index, leaf_of, x):
    u = leaf_of(x)
    return mapping_index[u] + x[len(u) :]


def compose(s, t):
    """``s`` then ``t``."""
    if (s.k, s.d) != (t.k, t.d):
        raise IncompatibleParameters("tree pairs over different trees")
    middle = common_refinement(s.cod, t.dom)
    s_inverse = inverse(s).mapping()
    t_map = t.mapping()
    mapping = {}
    for x in middle.leaves:
        pre = _route(s_inverse, s.cod.leaf_above, x)
        mapping[pre] = _route(t_map, t.dom.leaf_above, x)
    return reduce(TreePair.from_mapping(s.k, s.d, mapping))


def inverse(t):
    inv = [0] * len(t.sigma)
    for i, j in enumerate(t.sigma):
        inv[j] = i
    return TreePair(t.cod, t.dom, inv)


def apply(t, address):
    """Image of an address lying on or below a dom leaf."""
    address = tuple(address)
    check_address(t.k, t.d, address)
    u = t.dom.leaf_above(address)
    if u is None:
        raise LevelTooShallow(f"{format_address(address)} lies above the domain leaves")
    return t.cod.leaves[t.sigma[t.dom.index[u]]] + address[len(u) :]


def boundary_map(t, level):
    """The induced map on every address of length ``level``."""
    return {x: apply(t, x) for x in uniform(t.k, t.d, level).leaves}


def is_order_preserving(t):
    return t.sigma == tuple(range(len(t.sigma)))


def refine_pair(t, i):
    """Unfold dom leaf i and its image leaf together (same element, larger diagram)."""
    mapping = t.mapping()
    u = t.dom.leaves[i]
    v = mapping.pop(u)
    for j in range(t.d):
        mapping[u + (j,)] = v + (j,)
    return TreePair.from_mapping(t.k, t.d, mapping)


EVEN = "even"
ODD = "odd"


@dataclass(frozen=True)
class Parity:
    value: str
    representative_dependent: bool

    def __str__(self):
        return self.value + (" (representative-dependent)" if self.representative_dependent else "")


def sign_of(t):
    """Parity of sigma against the order-preserving matching of this diagram."""
    return EVEN if Perm(t.sigma).is_even() else ODD


def parity(t):
    """For d odd the value is an invariant of the element; for d even only
    of the diagram, and :func:`parity_flip_witness` produces the other sign."""
    return Parity(sign_of(t), t.d % 2 == 0)


def parity_flip_witness(t, max_steps=3):
    """A diagram of the same element whose sign differs, found by breadth-first
    search over simultaneous single-leaf refinements.

    Returns ``(diagram, refined_dom_leaves)`` or ``None``.  Two steps always
    suffice for d even and a non-order-preserving t; none exists for d odd or
    for order-preserving t.
    """
    start = sign_of(t)
    queue = deque([(t, ())])
    seen = {t.key()}
    while queue:
        pair, path = queue.popleft()
        if len(path) == max_steps:
            continue
        for i, u in enumerate(pair.dom.leaves):
            bigger = refine_pair(pair, i)
            if bigger.key() in seen:
                continue
            seen.add(bigger.key())
            step = path + (u,)
            if sign_of(bigger) != start:
                return bigger, step
            queue.append((bigger, step))
    return None


# -- random elements ---------------------------------------------------------


def random_leafset(k, d, carets, rng):
    leaves = list(uniform(k, d, 1).leaves)
    for _ in range(carets):
        i = rng.randrange(len(leaves))
        leaf = leaves.pop(i)
        leaves[i:i] = [leaf + (j,) for j in range(d)]
    return LeafSet(k, d, tuple(sorted(leaves)))


def random_pair(k, d, rng, max_carets=4, order_preserving=False, reduced=True):
    carets = rng.randint(0, max_carets)
    dom = random_leafset(k, d, carets, rng)
    cod = random_leafset(k, d, carets, rng)
    sigma = list(range(len(dom)))
    if not order_preserving:
        rng.shuffle(sigma)
    t = TreePair(dom, cod, sigma)
    return reduce(t) if reduced else t


def default_rng(seed=None):
    return _random.Random(seed)


# -- text format -------------------------------------------------------------


def format_pair(t):
    return "\n".join(
        [
            " ".join(format_address(x) for x in t.dom.leaves),
            " ".join(format_address(x) for x in t.cod.leaves),
            " ".join(map(str, t.sigma)),
        ]
    )


def parse_pair(text, k, d, reduce_result=True):
    lines = [line for line in text.strip().splitlines() if line.strip()]
    if len(lines) != 3:
        raise ValueError(f"expected 3 non-empty lines, got {len(lines)}")
    dom_leaves = [parse_address(x) for x in lines[0].split()]
    cod_leaves = [parse_address(x) for x in lines[1].split()]
    dom = validate_leafset(k, d, dom_leaves)
    cod = validate_leafset(k, d, cod_leaves)
    try:
        images = [int(x) for x in lines[2].split()]
    except ValueError:
        raise ValueError(f"bad sigma line {lines[2]!r}") from None
    if len(images) != len(dom_leaves) or sorted(images) != list(range(len(cod_leaves))):
        raise ValueError("sigma must list each cod index once per dom leaf")
    # sigma refers to the leaves in the order written; re-index to sorted order
    mapping = {dom_leaves[i]: cod_leaves[j] for i, j in enumerate(images)}
    t = TreePair.from_mapping(k, d, mapping)
    assert t.dom == dom and t.cod == cod
    return reduce(t) if reduce_result else t
