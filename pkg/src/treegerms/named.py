"""Named permutation groups used as fixtures.

Generator choices:

* PSL(2,7) acts on the projective line GF(7) u {inf}; points 0..6 are the
  field elements and point 7 is infinity.  Generators z -> z+1, z -> -1/z.
* AGammaL(1,8) acts on GF(8) = GF(2)[x]/(x^3+x+1); point v is the field
  element whose bit i is the coefficient of x^i.  Generators x -> x+1,
  x -> zeta*x with zeta = x (point 2), and the Frobenius x -> x^2.
* AGL(1,5) acts on GF(5) by x -> x+1 and x -> 2x.
"""

from __future__ import annotations

from .permgroup import Perm, PermGroup

INFINITY = 7  # point standing for infinity in PSL(2,7)
ZETA = 2  # generator of GF(8)^x in the bit encoding


def symmetric(n):
    if n == 1:
        return PermGroup(1, name="Sym(1)")
    gens = [Perm.from_cycles([(0, 1)], n)]
    if n > 2:
        gens.append(Perm.from_cycles([tuple(range(n))], n))
    return PermGroup(n, gens, name=f"Sym({n})")


def alternating(n):
    if n < 3:
        return PermGroup(n, name=f"Alt({n})")
    gens = [Perm.from_cycles([(0, 1, i)], n) for i in range(2, n)]
    return PermGroup(n, gens, name=f"Alt({n})")


def cyclic(n):
    return PermGroup(n, [Perm.from_cycles([tuple(range(n))], n)], name=f"C{n}")


def wreath_sym2_sym2():
    """Sym(2) wr Sym(2) on 4 points with blocks {0,1}, {2,3}."""
    return PermGroup(
        4,
        [Perm.from_cycles([(0, 1)], 4), Perm.from_cycles([(0, 2), (1, 3)], 4)],
        name="Sym(2)wrSym(2)",
    )


def gf8_mul(a, b):
    out = 0
    for i in range(3):
        if b >> i & 1:
            out ^= a << i
    for bit in (4, 3):
        if out >> bit & 1:
            out ^= 0b1011 << (bit - 3)
    return out


def gf8_power(a, n):
    out = 1
    for _ in range(n):
        out = gf8_mul(out, a)
    return out


def psl27():
    p = 7

    def translate(z):
        return INFINITY if z == INFINITY else (z + 1) % p

    def invert(z):
        if z == INFINITY:
            return 0
        if z == 0:
            return INFINITY
        return (-pow(z, p - 2, p)) % p

    gens = [Perm([f(z) for z in range(8)]) for f in (translate, invert)]
    return PermGroup(8, gens, name="PSL(2,7)")


def agaml18():
    translate = Perm([z ^ 1 for z in range(8)])
    scale = Perm([gf8_mul(ZETA, z) for z in range(8)])
    frobenius = Perm([gf8_mul(z, z) for z in range(8)])
    return PermGroup(8, [translate, scale, frobenius], name="AGammaL(1,8)")


def agl15():
    return PermGroup(
        5,
        [Perm([(x + 1) % 5 for x in range(5)]), Perm([(2 * x) % 5 for x in range(5)])],
        name="AGL(1,5)",
    )


def beta_gf7_to_gf8():
    """The bijection n -> zeta^n from GF(7) onto GF(8)^x, as a point map.

    Returned as a Perm of degree 7 between the restricted stabilizer views:
    PSL(2,7)_inf on points 0..6 (unchanged labels) and AGammaL(1,8)_0 on the
    points 1..7 relabelled to 0..6 (value v becomes v-1).
    """
    return Perm([gf8_power(ZETA, n) - 1 for n in range(7)])


NAMED_GROUPS = {
    "C3": lambda: cyclic(3),
    "S2": lambda: symmetric(2),
    "S3": lambda: symmetric(3),
    "S4": lambda: symmetric(4),
    "S5": lambda: symmetric(5),
    "A3": lambda: alternating(3),
    "A4": lambda: alternating(4),
    "A5": lambda: alternating(5),
    "PSL(2,7)": psl27,
    "AGL(1,5)": agl15,
    "AGammaL(1,8)": agaml18,
}

ALIASES = {
    "AΓL(1,8)": "AGammaL(1,8)",
    "AGAMMAL(1,8)": "AGammaL(1,8)",
    "SYM(2)": "S2",
    "SYM(3)": "S3",
    "SYM(4)": "S4",
    "SYM(5)": "S5",
    "ALT(3)": "A3",
    "ALT(4)": "A4",
    "ALT(5)": "A5",
}


def named_group(name):
    """Look up a fixture group by name (``Sym(n)``, ``Alt(n)``, ``Cn`` also work)."""
    key = ALIASES.get(name.upper(), ALIASES.get(name, name))
    if key in NAMED_GROUPS:
        return NAMED_GROUPS[key]()
    upper = key.upper()
    for prefix, build in (("SYM(", symmetric), ("ALT(", alternating)):
        if upper.startswith(prefix) and upper.endswith(")"):
            return build(int(upper[len(prefix):-1]))
    for prefix, build in (("S", symmetric), ("A", alternating), ("C", cyclic)):
        if upper.startswith(prefix) and upper[1:].isdigit():
            return build(int(upper[1:]))
    raise KeyError(f"unknown group name {name!r}")
