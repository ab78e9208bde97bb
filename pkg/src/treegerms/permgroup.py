"""Finite permutation groups given by generators.

Points are 0-indexed and products act on the right: ``p * q`` applies ``p``
first, then ``q``.  Everything is computed from the breadth-first closure of
the generators, which is plenty for the degrees (<= 12) this package targets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import (
    CycleSyntaxError,
    DegreeTooLarge,
    NotTransitive,
    OrderExceedsCap,
)

DEFAULT_CAP = 2_000_000
DEFAULT_MAX_SYM_DEGREE = 8


def _mul(a, b):
    # a then b
    return tuple(b[i] for i in a)


def _inv(a):
    out = [0] * len(a)
    for i, j in enumerate(a):
        out[j] = i
    return tuple(out)


def _conj(x, beta):
    """beta^-1 x beta, i.e. x relabelled through beta."""
    out = [0] * len(x)
    for i, xi in enumerate(x):
        out[beta[i]] = beta[xi]
    return tuple(out)


class Perm:
    """A bijection of ``{0, ..., degree-1}`` stored as its image table."""

    __slots__ = ("images",)

    def __init__(self, images):
        images = tuple(int(i) for i in images)
        if not images:
            raise ValueError("a permutation needs a positive degree")
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation of 0..{len(images) - 1}: {images}")
        self.images = images

    @classmethod
    def _raw(cls, images):
        p = object.__new__(cls)
        p.images = images
        return p

    @classmethod
    def identity(cls, degree):
        return cls._raw(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, cycles, degree):
        """Product of ``cycles`` (applied left to right) on ``degree`` points."""
        images = list(range(degree))
        for cycle in cycles:
            cyc = list(range(degree))
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                cyc[a] = b
            images = [cyc[i] for i in images]
        return cls(images)

    @property
    def degree(self):
        return len(self.images)

    def __call__(self, point):
        return self.images[point]

    def __mul__(self, other):
        if not isinstance(other, Perm):
            return NotImplemented
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        return Perm._raw(_mul(self.images, other.images))

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = Perm.identity(self.degree)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inverse(self):
        return Perm._raw(_inv(self.images))

    def conjugate(self, beta):
        """``beta^-1 * self * beta``: the same map with points renamed by beta."""
        return Perm._raw(_conj(self.images, beta.images))

    def is_identity(self):
        return all(i == x for i, x in enumerate(self.images))

    def cycles(self):
        seen = set()
        out = []
        for i in range(self.degree):
            if i in seen or self.images[i] == i:
                continue
            cycle = [i]
            seen.add(i)
            j = self.images[i]
            while j != i:
                cycle.append(j)
                seen.add(j)
                j = self.images[j]
            out.append(tuple(cycle))
        return out

    def sign(self):
        parity = sum(len(c) - 1 for c in self.cycles()) % 2
        return -1 if parity else 1

    def is_even(self):
        return self.sign() == 1

    def order(self):
        from math import lcm

        return lcm(1, *(len(c) for c in self.cycles()))

    def fixed_points(self):
        return [i for i, x in enumerate(self.images) if i == x]

    def __eq__(self, other):
        return isinstance(other, Perm) and self.images == other.images

    def __lt__(self, other):
        return self.images < other.images

    def __hash__(self):
        return hash(self.images)

    def __str__(self):
        cycles = self.cycles()
        if not cycles:
            return "()"
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cycles)

    def __repr__(self):
        return f"Perm({list(self.images)})"


# -- parsing ---------------------------------------------------------------


def parse_cycles(text, degree=None):
    """Parse cycle notation such as ``"(0 1 2)(3 4)"`` into a :class:`Perm`.

    Points inside a cycle may be separated by spaces or commas.  ``"()"`` is
    the identity.  Non-disjoint cycles compose left to right.  When ``degree``
    is omitted it is one more than the largest point mentioned.
    """
    cycles = []
    pos = 0
    n = len(text)
    saw_any = False
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch != "(":
            raise CycleSyntaxError(f"expected '(' but found {ch!r}", text, pos)
        start = pos
        pos += 1
        cycle = []
        token_start = None
        while True:
            if pos >= n:
                raise CycleSyntaxError("unterminated cycle opened", text, start)
            ch = text[pos]
            if ch.isdigit():
                if token_start is None:
                    token_start = pos
                pos += 1
                continue
            if token_start is not None:
                cycle.append((int(text[token_start:pos]), token_start))
                token_start = None
            if ch == ")":
                pos += 1
                break
            if ch.isspace() or ch == ",":
                pos += 1
                continue
            raise CycleSyntaxError(f"unexpected character {ch!r}", text, pos)
        points = [p for p, _ in cycle]
        for i, (p, where) in enumerate(cycle):
            if p in points[:i]:
                raise CycleSyntaxError(f"point {p} repeated inside one cycle", text, where)
        saw_any = True
        if len(points) > 1:
            cycles.append(tuple(points))
    if not saw_any:
        raise CycleSyntaxError("empty permutation text", text, 0)
    largest = max((max(c) for c in cycles), default=0)
    if degree is None:
        degree = largest + 1
    elif largest >= degree:
        where = text.find(str(largest))
        raise CycleSyntaxError(f"point {largest} outside degree {degree}", text, max(where, 0))
    return Perm.from_cycles(cycles, degree)


def split_generators(text):
    """Split ``"(0 1 2),(0 1)"`` at top-level commas; returns (chunk, offset) pairs."""
    chunks = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            chunks.append((text[start:i], start))
            start = i + 1
    chunks.append((text[start:], start))
    return [(c, off) for c, off in chunks if c.strip()]


def parse_generators(text, degree=None):
    """Parse a comma-separated list of cycle-notation generators."""
    chunks = split_generators(text)
    if not chunks:
        raise CycleSyntaxError("no generators given", text, 0)
    parsed = []
    for chunk, offset in chunks:
        try:
            parsed.append(parse_cycles(chunk))
        except CycleSyntaxError as exc:
            raise CycleSyntaxError(exc.message, text, offset + exc.position) from None
    if degree is None:
        degree = max(p.degree for p in parsed)
    return [_pad(p, degree) for p in parsed]


def _pad(p, degree):
    if p.degree > degree:
        raise ValueError(f"{p} does not fit in degree {degree}")
    return Perm(p.images + tuple(range(p.degree, degree)))


def as_perm(obj, degree):
    """Coerce a cycle string, image list or Perm to a Perm of ``degree``."""
    if isinstance(obj, Perm):
        return _pad(obj, degree)
    if isinstance(obj, str):
        return parse_cycles(obj, degree)
    return Perm(obj)


# -- groups ----------------------------------------------------------------


def _closure(gens, degree, cap):
    ident = tuple(range(degree))
    seen = {ident}
    queue = [ident]
    for x in queue:
        for s in gens:
            y = tuple(s[i] for i in x)
            if y not in seen:
                seen.add(y)
                if len(seen) > cap:
                    raise OrderExceedsCap(cap)
                queue.append(y)
    return seen


class PermGroup:
    """A permutation group of a given degree, presented by generators."""

    def __init__(self, degree, generators=(), name=None):
        if degree < 1:
            raise ValueError("degree must be positive")
        gens = [as_perm(g, degree) for g in generators]
        if not gens:
            gens = [Perm.identity(degree)]
        for g in gens:
            if g.degree != degree:
                raise ValueError(f"generator {g} has degree {g.degree}, expected {degree}")
        self.degree = degree
        self.generators = tuple(gens)
        self.name = name
        self._elements = None

    @classmethod
    def _from_tuples(cls, degree, elements, name=None, generators=None):
        if generators is None:
            generators = _small_generating_set(elements, degree)
        g = cls(degree, [Perm._raw(t) for t in generators], name=name)
        g._elements = frozenset(elements)
        return g

    def element_tuples(self, cap=DEFAULT_CAP):
        if self._elements is None:
            self._elements = frozenset(
                _closure([p.images for p in self.generators], self.degree, cap)
            )
        elif len(self._elements) > cap:
            raise OrderExceedsCap(cap)
        return self._elements

    def elements(self, cap=DEFAULT_CAP):
        return {Perm._raw(t) for t in self.element_tuples(cap)}

    def order(self, cap=DEFAULT_CAP):
        return len(self.element_tuples(cap))

    def __contains__(self, p):
        return p.images in self.element_tuples()

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        gens = ", ".join(str(g) for g in self.generators)
        return f"PermGroup({label}degree={self.degree}, [{gens}])"

    def __str__(self):
        return self.name or repr(self)


def _small_generating_set(elements, degree, preferred=()):
    """Greedy generating set: keep an element only if it enlarges the closure."""
    ident = tuple(range(degree))
    target = len(elements)
    gens = []
    closure = {ident}
    candidates = list(preferred) + sorted(elements)
    for e in candidates:
        if len(closure) == target:
            break
        if e in closure:
            continue
        gens.append(e)
        closure = _closure(gens, degree, target)
    if not gens:
        gens = [ident]
    return gens


def enumerate_elements(g, cap=DEFAULT_CAP):
    """All elements of ``g``; raises :class:`OrderExceedsCap` past ``cap``."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    return g.elements(cap)


def orbits(g):
    """Orbits of the generated group, each sorted, ordered by least point."""
    n = g.degree
    seen = [False] * n
    out = []
    gens = [p.images for p in g.generators]
    for start in range(n):
        if seen[start]:
            continue
        orbit = [start]
        seen[start] = True
        for x in orbit:
            for s in gens:
                y = s[x]
                if not seen[y]:
                    seen[y] = True
                    orbit.append(y)
        out.append(sorted(orbit))
    return out


def is_transitive(g):
    return len(orbits(g)) == 1


def _require_transitive(g):
    if not is_transitive(g):
        raise NotTransitive(f"{g} is not transitive")


def transitivity_degree(g, cap=DEFAULT_CAP):
    """Largest t with the group transitive on ordered t-tuples of distinct points.

    Zero when the group is not transitive.
    """
    if not is_transitive(g):
        return 0
    n = g.degree
    elements = g.element_tuples(cap)
    t = 0
    expected = 1
    for size in range(1, n + 1):
        expected *= n - size + 1
        images = {x[:size] for x in elements}
        if len(images) != expected:
            break
        t = size
    return t


@dataclass(frozen=True)
class Stabilizer:
    """A point stabilizer in two views.

    ``group`` keeps the original degree.  ``restricted`` acts on the other
    ``degree - 1`` points, relabelled by deleting ``point`` and closing the gap
    (``relabel[old] == new``).  ``restricted`` is None for degree 1.
    """

    point: int
    group: PermGroup
    restricted: PermGroup | None
    relabel: dict = field(compare=False)


def point_stabilizer(g, p, cap=DEFAULT_CAP):
    n = g.degree
    if not 0 <= p < n:
        raise ValueError(f"point {p} outside 0..{n - 1}")
    elements = [x for x in g.element_tuples(cap) if x[p] == p]
    base = g.name or "G"
    full = PermGroup._from_tuples(n, elements, name=f"{base}_{p}")
    relabel = {old: (old if old < p else old - 1) for old in range(n) if old != p}
    restricted = None
    if n > 1:
        keep = [old for old in range(n) if old != p]
        reduced = {tuple(relabel[x[old]] for old in keep) for x in elements}
        restricted = PermGroup._from_tuples(n - 1, reduced, name=f"{base}_{p}|{n - 1}")
    return Stabilizer(point=p, group=full, restricted=restricted, relabel=relabel)


# -- blocks ----------------------------------------------------------------


@dataclass(frozen=True)
class BlockSystem:
    degree: int
    blocks: tuple

    @classmethod
    def from_cells(cls, degree, cells):
        cells = tuple(sorted(tuple(sorted(c)) for c in cells))
        return cls(degree, cells)

    @property
    def block_size(self):
        return len(self.blocks[0])

    def is_trivial(self):
        return self.block_size in (1, self.degree)

    def refines(self, other):
        """True when every cell of ``self`` lies inside a cell of ``other``."""
        where = {}
        for i, cell in enumerate(other.blocks):
            for x in cell:
                where[x] = i
        return all(len({where[x] for x in cell}) == 1 for cell in self.blocks)

    def cell_of(self, point):
        for cell in self.blocks:
            if point in cell:
                return cell
        raise ValueError(point)

    def is_invariant_under(self, g):
        cells = set(self.blocks)
        for s in g.generators:
            for cell in self.blocks:
                if tuple(sorted(s.images[x] for x in cell)) not in cells:
                    return False
        return True


def _minimal_block_system(gens, degree, seed):
    """Finest invariant partition putting all of ``seed`` in one cell (Atkinson)."""
    parent = list(range(degree))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    queue = []
    seed = list(seed)
    for b in seed[1:]:
        ra, rb = find(seed[0]), find(b)
        if ra != rb:
            parent[rb] = ra
            queue.append((seed[0], b))
    while queue:
        a, b = queue.pop()
        for s in gens:
            x, y = s[a], s[b]
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[ry] = rx
                queue.append((x, y))
    cells = {}
    for x in range(degree):
        cells.setdefault(find(x), []).append(x)
    return BlockSystem.from_cells(degree, cells.values())


def all_block_systems(g):
    """Every non-trivial block system of a transitive group."""
    _require_transitive(g)
    n = g.degree
    gens = [p.images for p in g.generators]
    found = set()
    frontier = [_minimal_block_system(gens, n, (0, b)) for b in range(1, n)]
    while frontier:
        system = frontier.pop()
        if system in found or system.block_size == n:
            continue
        found.add(system)
        cell = system.cell_of(0)
        for b in range(n):
            if b not in cell:
                frontier.append(_minimal_block_system(gens, n, cell + (b,)))
    return sorted((s for s in found if not s.is_trivial()), key=lambda s: (s.block_size, s.blocks))


def block_systems(g, cap=DEFAULT_CAP):
    """Minimal non-trivial block systems (none strictly finer is non-trivial)."""
    systems = all_block_systems(g)
    return [s for s in systems if not any(t != s and t.refines(s) for t in systems)]


def is_primitive(g, cap=DEFAULT_CAP):
    _require_transitive(g)
    n = g.degree
    gens = [p.images for p in g.generators]
    return all(_minimal_block_system(gens, n, (0, b)).block_size == n for b in range(1, n))


def maximal_blocks(g, cap=DEFAULT_CAP):
    """Non-trivial block systems that are maximal under refinement."""
    systems = all_block_systems(g)
    return [s for s in systems if not any(t != s and s.refines(t) for t in systems)]


def is_regular_on_block(g, system, cap=DEFAULT_CAP, induced=False):
    """Whether the setwise stabilizer of each cell acts regularly on that cell.

    By default the stabilizer itself must act regularly (transitively with
    trivial point stabilizers), so its order equals the cell size.  With
    ``induced=True`` only the permutation group it induces on the cell is
    tested, i.e. a point stabilizer must fix its whole cell.
    """
    _require_transitive(g)
    elements = g.element_tuples(cap)
    for cell in system.blocks:
        cell_set = set(cell)
        stab = [x for x in elements if {x[c] for c in cell} == cell_set]
        if induced:
            action = {tuple(x[c] for c in cell) for x in stab}
        else:
            action = stab
        if len(action) != len(cell):
            return False
        if len({x[cell[0]] for x in stab}) != len(cell):
            return False
    return True


# -- normalizers and equivalence ------------------------------------------


def normalizer_in_sym(g, max_degree=DEFAULT_MAX_SYM_DEGREE, cap=DEFAULT_CAP):
    """Normalizer of ``g`` in Sym(degree), by brute force over Sym(degree).

    Only permutations carrying orbits onto orbits of the same size are tested.
    """
    n = g.degree
    if n > max_degree:
        raise DegreeTooLarge(n, max_degree)
    elements = g.element_tuples(cap)
    gens = [p.images for p in g.generators]
    orbit_list = orbits(g)
    orbit_sets = {frozenset(o) for o in orbit_list}
    normal = []
    for sigma in itertools.permutations(range(n)):
        if len(orbit_list) > 1 and any(
            frozenset(sigma[x] for x in o) not in orbit_sets for o in orbit_list
        ):
            continue
        if all(_conj(x, sigma) in elements for x in gens):
            normal.append(sigma)
    gens_n = _small_generating_set(normal, n, preferred=_small_generating_set(elements, n))
    base = g.name or "G"
    return PermGroup._from_tuples(n, normal, name=f"N_Sym({n})({base})", generators=gens_n)


def is_generated_by_point_stabilizers(g, cap=DEFAULT_CAP):
    _require_transitive(g)
    elements = g.element_tuples(cap)
    n = g.degree
    stab_union = {x for x in elements if any(x[p] == p for p in range(n))}
    if len(stab_union) == 0:
        return len(elements) == 1
    return len(_closure(sorted(stab_union), n, len(elements))) == len(elements)


def is_permutation_equivalence(g1, g2, beta, cap=DEFAULT_CAP):
    """Check that relabelling points by ``beta`` carries ``g1`` onto ``g2``."""
    if g1.degree != g2.degree or beta.degree != g1.degree:
        return False
    e1 = g1.element_tuples(cap)
    e2 = g2.element_tuples(cap)
    if len(e1) != len(e2):
        return False
    b = beta.images
    return all(_conj(x.images, b) in e2 for x in g1.generators)


def permutation_equivalence(g1, g2, cap=DEFAULT_CAP):
    """A point bijection ``beta`` with ``beta^-1 g1 beta == g2``, or None.

    Backtracks over point images in increasing order, pruning by the sizes of
    pointwise stabilizers and of their orbits, so the witness returned is the
    lexicographically smallest one.
    """
    if g1.degree != g2.degree:
        return None
    n = g1.degree
    e1 = list(g1.element_tuples(cap))
    e2 = list(g2.element_tuples(cap))
    if len(e1) != len(e2):
        return None
    if sorted(len(o) for o in orbits(g1)) != sorted(len(o) for o in orbits(g2)):
        return None
    e2_set = set(e2)
    gens1 = [p.images for p in g1.generators]
    beta = [None] * n
    used = [False] * n

    def search(p, h1, h2):
        if p == n:
            b = tuple(beta)
            if all(_conj(x, b) in e2_set for x in gens1):
                return b
            return None
        orbit_p = len({h[p] for h in h1})
        stab1 = [h for h in h1 if h[p] == p]
        for q in range(n):
            if used[q]:
                continue
            if len({h[q] for h in h2}) != orbit_p:
                continue
            stab2 = [h for h in h2 if h[q] == q]
            if len(stab2) != len(stab1):
                continue
            beta[p] = q
            used[q] = True
            found = search(p + 1, stab1, stab2)
            if found is not None:
                return found
            used[q] = False
        beta[p] = None
        return None

    found = search(0, e1, e2)
    return Perm._raw(found) if found is not None else None


def derived_subgroup(g, cap=DEFAULT_CAP):
    """Commutator subgroup, as the normal closure of generator commutators."""
    n = g.degree
    gens = [p.images for p in g.generators]
    comms = set()
    for a in gens:
        for b in gens:
            c = _mul(_mul(_inv(a), _inv(b)), _mul(a, b))
            comms.add(c)
    ident = tuple(range(n))
    comms.discard(ident)
    if not comms:
        return PermGroup(n, name=f"[{g.name or 'G'},{g.name or 'G'}]")
    hgens = sorted(comms)
    closure = _closure(hgens, n, cap)
    changed = True
    while changed:
        changed = False
        for h in list(hgens):
            for s in gens:
                c = _mul(_mul(_inv(s), h), s)
                if c not in closure:
                    hgens.append(c)
                    closure = _closure(hgens, n, cap)
                    changed = True
    base = g.name or "G"
    return PermGroup._from_tuples(n, closure, name=f"[{base},{base}]")


def _element_order(x):
    ident = tuple(range(len(x)))
    k, y = 1, x
    while y != ident:
        y = _mul(y, x)
        k += 1
    return k


def _order_profile(elements):
    counts = {}
    for x in elements:
        o = _element_order(x)
        counts[o] = counts.get(o, 0) + 1
    return counts


def abstract_isomorphism(g1, g2, cap=DEFAULT_CAP, max_candidates=2_000_000):
    """An abstract isomorphism ``g1 -> g2`` as a dict of element tuples, or None.

    Degrees may differ.  Cheap invariants (order, element-order profile,
    perfectness) are compared first; then generator images are chosen by
    backtracking and extended along the Cayley graph.
    """
    e1 = g1.element_tuples(cap)
    e2 = g2.element_tuples(cap)
    if len(e1) != len(e2):
        return None
    prof1, prof2 = _order_profile(e1), _order_profile(e2)
    if prof1 != prof2:
        return None
    if (derived_subgroup(g1, cap).order(cap) == len(e1)) != (derived_subgroup(g2, cap).order(cap) == len(e2)):
        return None
    gens1 = _small_generating_set(e1, g1.degree, preferred=[p.images for p in g1.generators])
    orders = [_element_order(s) for s in gens1]
    by_order = {}
    for y in sorted(e2):
        by_order.setdefault(_element_order(y), []).append(y)
    id1, id2 = tuple(range(g1.degree)), tuple(range(g2.degree))
    tried = 0

    def extend(images):
        phi = {id1: id2}
        queue = [id1]
        for x in queue:
            fx = phi[x]
            for s, t in zip(gens1, images):
                xs = _mul(x, s)
                ft = _mul(fx, t)
                have = phi.get(xs)
                if have is None:
                    phi[xs] = ft
                    queue.append(xs)
                elif have != ft:
                    return None
        if len(set(phi.values())) != len(e2):
            return None
        return phi

    def search(i, images):
        nonlocal tried
        if i == len(gens1):
            tried += 1
            if tried > max_candidates:
                raise OrderExceedsCap(max_candidates)
            return extend(images)
        for y in by_order.get(orders[i], []):
            found = search(i + 1, images + [y])
            if found is not None:
                return found
        return None

    return search(0, [])


@dataclass(frozen=True)
class StructureFlags:
    """Abstract structure of a permutation group.

    ``no_global_fixed_point`` and ``semiregular`` are the two readings of a
    "fixed-point-free" group: no point fixed by the whole group, versus every
    non-identity element moving every point.
    """

    order: int
    derived_order: int
    is_perfect: bool
    in_alternating: bool
    no_global_fixed_point: bool
    semiregular: bool
    group: PermGroup = field(repr=False, compare=False)
    cap: int = field(default=DEFAULT_CAP, repr=False, compare=False)

    def is_abstractly_isomorphic_to(self, other):
        other_group = other.group if isinstance(other, StructureFlags) else other
        return abstract_isomorphism(self.group, other_group, self.cap) is not None


def structure_flags(g, cap=DEFAULT_CAP):
    elements = g.element_tuples(cap)
    n = g.degree
    derived = derived_subgroup(g, cap).order(cap)
    ident = tuple(range(n))
    fixed_by_all = [p for p in range(n) if all(s.images[p] == p for s in g.generators)]
    semiregular = all(
        all(x[p] != p for p in range(n)) for x in elements if x != ident
    )
    return StructureFlags(
        order=len(elements),
        derived_order=derived,
        is_perfect=derived == len(elements),
        in_alternating=all(s.is_even() for s in g.generators),
        no_global_fixed_point=not fixed_by_all,
        semiregular=semiregular,
        group=g,
        cap=cap,
    )
