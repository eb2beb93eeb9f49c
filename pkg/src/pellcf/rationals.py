"""Exact rational scalars and height measurements.

Everything in this package computes over Q.  Coefficient bit sizes grow
quadratically along an expansion, so we use gmpy2's mpq when it is
importable and fall back to fractions.Fraction otherwise.  Set
PELLCF_BACKEND=fraction to force the stdlib path (useful for checking
that nothing depends on gmpy2 semantics).

Heights follow the usual projective convention: a vector over Q is
rescaled to its canonical coprime integer representative (common
denominator cleared, common gcd divided out, first nonzero entry
positive) and the height is the natural log of the largest absolute
entry.  The affine height of v is the projective height of (1, v).
"""

from __future__ import annotations

import math
import os

_BACKEND = os.environ.get("PELLCF_BACKEND", "").strip().lower()

if _BACKEND in ("", "gmp", "gmpy2"):
    try:
        from gmpy2 import mpq as _Q

        BACKEND = "gmpy2"
    except ImportError:
        from fractions import Fraction as _Q

        BACKEND = "fraction"
elif _BACKEND == "fraction":
    from fractions import Fraction as _Q

    BACKEND = "fraction"
else:
    raise RuntimeError(f"unknown PELLCF_BACKEND value: {_BACKEND!r}")

#: the active exact rational constructor; accepts ints, strings like
#: "-3/4", and instances of itself
QQ = _Q

R_ZERO = QQ(0)
R_ONE = QQ(1)

_LN2 = math.log(2)


def rational_type():
    """Return the concrete class used for rationals."""
    return type(R_ZERO)


def as_int_pair(x) -> tuple[int, int]:
    """Return (numerator, denominator) of x as plain ints, denominator > 0."""
    q = QQ(x)
    return int(q.numerator), int(q.denominator)


def rat_str(x) -> str:
    """Serialize a rational as 'n' or 'n/d' with decimal-string integers."""
    n, d = as_int_pair(x)
    return str(n) if d == 1 else f"{n}/{d}"


def parse_rat(s: str):
    """Parse 'n' or 'n/d' back into a rational.

    Raises ValueError on malformed input or zero denominator.
    """
    s = s.strip()
    if "/" in s:
        a, _, b = s.partition("/")
        num, den = int(a), int(b)
        if den == 0:
            raise ValueError(f"zero denominator in rational literal {s!r}")
        return QQ(num, den)
    return QQ(int(s))


def sqrt_exact(x):
    """Exact square root of a rational, or None when x is not a square."""
    n, d = as_int_pair(x)
    if n < 0:
        return None
    rn = math.isqrt(n)
    rd = math.isqrt(d)
    if rn * rn != n or rd * rd != d:
        return None
    return QQ(rn, rd)


def ln_int(x: int) -> float:
    """Natural log of a positive integer, safe for values beyond float range."""
    if x <= 0:
        raise ValueError("ln_int needs a positive integer")
    x = int(x)
    nbits = x.bit_length()
    if nbits <= 512:
        return math.log(x)
    shift = nbits - 64
    return math.log(x >> shift) + shift * _LN2


def canonical_integer_vector(vec) -> tuple[int, ...]:
    """Canonical coprime integer representative of a projective point.

    Clears denominators with one lcm, divides out the gcd, and fixes the
    sign so the first nonzero entry is positive.  The zero vector is not
    a projective point and raises ValueError.
    """
    pairs = [as_int_pair(c) for c in vec]
    if all(n == 0 for n, _ in pairs):
        raise ValueError("zero vector has no projective representative")
    common = 1
    for _, d in pairs:
        common = common * d // math.gcd(common, d)
    ints = [n * (common // d) for n, d in pairs]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    ints = [v // g for v in ints]
    for v in ints:
        if v != 0:
            if v < 0:
                ints = [-w for w in ints]
            break
    return tuple(ints)


def projective_height(vec) -> float:
    """log max |entry| of the canonical integer representative.  Always >= 0."""
    ints = canonical_integer_vector(vec)
    return ln_int(max(abs(v) for v in ints))


def projective_height_bits(vec) -> int:
    """Exact bit length of the largest canonical entry (log2 analogue)."""
    ints = canonical_integer_vector(vec)
    return max(abs(v) for v in ints).bit_length()


def affine_height(vec) -> float:
    """Projective height of the vector augmented with a leading 1.

    Dominates the projective height; the zero vector gets height 0.
    """
    return projective_height((R_ONE, *[QQ(c) for c in vec]))


def affine_height_bits(vec) -> int:
    return projective_height_bits((R_ONE, *[QQ(c) for c in vec]))
