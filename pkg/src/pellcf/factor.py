"""Exact factorization of rational polynomials, and the R_n factor ledger.

The pipeline is the classical one: squarefree decomposition over Q,
reduction modulo a deterministic prime, Cantor-Zassenhaus over GF(p),
linear multifactor Hensel lifting past the Landau-Mignotte bound, and
Zassenhaus subset recombination.  Degrees here stay small (factors of
R_n have degree < d), so the exponential recombination worst case is
irrelevant and simplicity wins over lattice methods.

Finite field polynomials are plain lists of ints in [0, p), ascending,
no trailing zeros.  Randomized splitting draws from a generator seeded
by (seed, p, input), so every call is reproducible bit for bit.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from itertools import combinations
from math import gcd, isqrt

from .errors import ChooseAnotherPrimeError, InternalInvariantError
from .poly import Poly, divrem, yun_decomposition
from .rationals import QQ, rat_str
from .surd import Transcript

# -- prime utilities ---------------------------------------------------------


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f <= isqrt(n):
        if n % f == 0:
            return False
        f += 2
    return True


# -- GF(p) arithmetic on int lists ------------------------------------------


def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _deg(a: list) -> int:
    return len(a) - 1


def _add(a, b, p):
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % p
    return _trim(out)


def _sub(a, b, p):
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % p
    return _trim(out)


def _mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
    return _trim([c % p for c in out])


def _scale(a, c, p):
    c %= p
    return _trim([x * c % p for x in a])


def _monic(a, p):
    if not a:
        return []
    inv = pow(a[-1], -1, p)
    return _scale(a, inv, p)


def _divmod_gf(a, b, p):
    if not b:
        raise ZeroDivisionError("GF(p) division by zero")
    a = list(a)
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] % p
        if c:
            c = c * inv % p
            q[i] = c
            for j, cb in enumerate(b):
                a[i + j] = (a[i + j] - c * cb) % p
    return _trim(q), _trim([c % p for c in a])


def _mod(a, b, p):
    return _divmod_gf(a, b, p)[1]


def _div(a, b, p):
    q, r = _divmod_gf(a, b, p)
    if r:
        raise InternalInvariantError("inexact GF(p) division")
    return q


def _gcd_gf(a, b, p):
    while b:
        a, b = b, _mod(a, b, p)
    return _monic(a, p)


def _pow_mod(base, e: int, mod, p):
    result = [1]
    base = _mod(base, mod, p)
    while e:
        if e & 1:
            result = _mod(_mul(result, base, p), mod, p)
        base = _mod(_mul(base, base, p), mod, p)
        e >>= 1
    return result


def _deriv_gf(a, p):
    return _trim([i * c % p for i, c in enumerate(a)][1:])


def _invmod_gf(a, m, p):
    """Inverse of a modulo m over GF(p), via extended Euclid."""
    r0, r1 = _mod(a, m, p), m
    s0, s1 = [1], []
    while r1:
        q, r = _divmod_gf(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _sub(s0, _mul(q, s1, p), p)
    if _deg(r0) != 0:
        raise InternalInvariantError("GF(p) inverse of a non-unit")
    return _scale(s0, pow(r0[0], -1, p), p)


# -- factorization over GF(p) ------------------------------------------------


def _squarefree_gf(f, p):
    """Monic squarefree split: returns [(g, m)] with monic(f) = prod g^m.

    Char-p subtlety: when the derivative loop ends with a nontrivial
    cofactor, that cofactor is a p-th power (coefficients live at
    exponents divisible by p) and is handled by recursion on its p-th
    root with multiplicities scaled by p.
    """
    f = _monic(f, p)
    out = []
    c = _gcd_gf(f, _deriv_gf(f, p), p)
    w = _div(f, c, p)
    i = 1
    while _deg(w) > 0:
        y = _gcd_gf(w, c, p)
        fac = _div(w, y, p)
        if _deg(fac) > 0:
            out.append((fac, i))
        w = y
        c = _div(c, y, p)
        i += 1
    if _deg(c) > 0:
        root = _trim(list(c[::p]))
        for g, m in _squarefree_gf(root, p):
            out.append((g, m * p))
    return out


def _ddf(f, p):
    """Distinct-degree split of a monic squarefree f: [(product, degree)]."""
    out = []
    h = [0, 1]
    v = f
    i = 0
    while _deg(v) >= 2 * (i + 1):
        i += 1
        h = _pow_mod(h, p, v, p)
        g = _gcd_gf(_sub(h, [0, 1], p), v, p)
        if _deg(g) > 0:
            out.append((g, i))
            v = _div(v, g, p)
            h = _mod(h, v, p)
    if _deg(v) > 0:
        out.append((v, _deg(v)))
    return out


def _edf(g, i, p, rng):
    """Equal-degree split: g is a product of irreducibles of degree i."""
    if _deg(g) == i:
        return [g]
    while True:
        r = _trim([rng.randrange(p) for _ in range(_deg(g))])
        if _deg(r) < 1:
            continue
        if p == 2:
            # the trace map of GF(2^i) splits where the power map cannot
            s = _mod(r, g, p)
            acc = s
            for _ in range(i - 1):
                s = _mod(_mul(s, s, p), g, p)
                acc = _add(acc, s, p)
            d = _gcd_gf(acc, g, p)
        else:
            s = _pow_mod(r, (p ** i - 1) // 2, g, p)
            d = _gcd_gf(_sub(s, [1], p), g, p)
        if 0 < _deg(d) < _deg(g):
            return _edf(d, i, p, rng) + _edf(_div(g, d, p), i, p, rng)


def _seeded_rng(seed: int, p: int, coeffs) -> random.Random:
    material = repr((seed, p, tuple(coeffs))).encode()
    return random.Random(int.from_bytes(hashlib.sha256(material).digest()[:8], "big"))


@dataclass(frozen=True)
class ModPFactorization:
    p: int
    unit: int
    factors: tuple          # ((coeff list as Poly, multiplicity), ...)

    def verify(self, fbar: list) -> bool:
        prod = [self.unit % self.p]
        for g, m in self.factors:
            gl = [int(c) for c in g.coeffs]
            for _ in range(m):
                prod = _mul(prod, gl, self.p)
        return prod == fbar


def _reduce_poly_mod_p(f: Poly, p: int) -> list:
    out = []
    for c in f.coeffs:
        num, den = c.numerator, c.denominator
        if den % p == 0:
            raise ChooseAnotherPrimeError(
                f"coefficient denominator {den} vanishes mod {p}"
            )
        out.append(num * pow(den, -1, p) % p)
    return _trim(out)


def factor_mod_p(f: Poly, p: int, seed: int = 0) -> ModPFactorization:
    """Complete factorization over GF(p) into monic irreducibles.

    Deterministic for fixed (f, p, seed).  Refuses primes dividing the
    leading coefficient, since those change the degree.
    """
    if f.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if f.lead.numerator % p == 0:
        raise ChooseAnotherPrimeError(f"{p} divides the leading coefficient")
    fbar = _reduce_poly_mod_p(f, p)
    unit = fbar[-1]
    fbar = _monic(fbar, p)
    rng = _seeded_rng(seed, p, fbar)
    found = []
    if _deg(fbar) > 0:
        for sqf, mult in _squarefree_gf(fbar, p):
            for prod, i in _ddf(sqf, p):
                for irr in _edf(prod, i, p, rng):
                    found.append((irr, mult))
    found.sort(key=lambda gm: (_deg(gm[0]), gm[0]))
    factors = tuple(
        (Poly([QQ(c) for c in g]), m) for g, m in found
    )
    return ModPFactorization(p=p, unit=unit, factors=factors)


# -- integer polynomial helpers ----------------------------------------------


def _int_coeffs(f: Poly) -> list:
    den = 1
    for c in f.coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    return [int(c * den) for c in f.coeffs]


def _primitive(coeffs: list) -> list:
    g = 0
    for c in coeffs:
        g = gcd(g, c)
    if g == 0:
        return list(coeffs)
    if coeffs[-1] < 0:
        g = -g
    return [c // g for c in coeffs]


def _poly_from_ints(coeffs: list) -> Poly:
    return Poly([QQ(c) for c in coeffs])


def _sym(c: int, pk: int) -> int:
    c %= pk
    return c - pk if c > pk // 2 else c


def _mul_int(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
    return out


# -- Hensel lifting -----------------------------------------------------------


def _hensel_lift(f_int: list, p: int, gbars: list, k: int) -> list:
    """Lift the monic mod-p factors of f to monic factors mod p^k.

    Linear diagonal version: the CRT multipliers sigma_i (inverse of
    prod_{j != i} g_j modulo g_i over GF(p)) are computed once; each
    round divides the defect by p^j and corrects every factor in place.
    Works against the monicized image of f modulo p^k.
    """
    pk = p ** k
    lead = f_int[-1]
    u = pow(lead % pk, -1, pk)
    F = [c * u % pk for c in f_int]
    sigmas = []
    for i, gi in enumerate(gbars):
        others = [1]
        for j, gj in enumerate(gbars):
            if j != i:
                others = _mul(others, gj, p)
        sigmas.append(_invmod_gf(others, gi, p))
    lifted = [[int(c) for c in g] for g in gbars]
    modulus = p
    for _ in range(k - 1):
        prod = [1]
        for g in lifted:
            prod = _mul_int(prod, g)
        E = [(a - b) for a, b in zip(F + [0] * len(prod), prod + [0] * len(F))]
        e = _trim([(c // modulus) % p for c in E])
        for i, g in enumerate(lifted):
            delta = _mod(_mul(e, sigmas[i], p), [c % p for c in g], p)
            for j, dc in enumerate(delta):
                g[j] = (g[j] + modulus * dc) % (modulus * p)
        modulus *= p
    return lifted


def _landau_mignotte_bits(f_int: list) -> int:
    """Bits needed for the lift: the modulus must exceed twice
    B = 2^deg(f) * l2norm(f) * |lead(f)|, the classical coefficient
    bound for the lead-adjusted divisors tried in recombination.
    """
    n = _deg(f_int)
    norm_sq = sum(c * c for c in f_int)
    l2_bits = (isqrt(norm_sq) + 1).bit_length()
    return n + l2_bits + abs(f_int[-1]).bit_length() + 2


def _choose_prime(f_int: list, start: int = 101) -> int:
    """Smallest prime >= start keeping f squarefree with stable degree."""
    p = start
    while True:
        if _is_prime(p) and f_int[-1] % p != 0:
            fbar = _trim([c % p for c in f_int])
            if _deg(_gcd_gf(fbar, _deriv_gf(fbar, p), p)) == 0:
                return p
        p += 1


# -- factorization over Q -----------------------------------------------------


@dataclass(frozen=True)
class FactorList:
    """unit * prod(factor^multiplicity) == input, exactly.

    Factors are primitive integer polynomials with positive leading
    coefficient (the canonical representative of each monic-over-Q
    class), pairwise non-associate, sorted by degree then coefficients.
    """

    unit: object
    factors: tuple

    def expand(self) -> Poly:
        prod = Poly([self.unit])
        for f, m in self.factors:
            prod = prod * f ** m
        return prod

    def to_json(self) -> dict:
        return {
            "unit": rat_str(self.unit),
            "factors": [
                {"poly": f.to_json(), "text": f.to_text(), "multiplicity": m}
                for f, m in self.factors
            ],
        }


def _factor_squarefree_primitive(g_int: list, seed: int) -> list:
    """Irreducible primitive integer factors of a primitive squarefree
    integer polynomial with positive lead."""
    if _deg(g_int) <= 1:
        return [g_int]
    p = _choose_prime(g_int)
    modp = factor_mod_p(_poly_from_ints(g_int), p, seed=seed)
    gbars = [[int(c) for c in f.coeffs] for f, _ in modp.factors]
    if len(gbars) == 1:
        return [g_int]    # irreducible mod p certifies irreducibility over Q
    bits = _landau_mignotte_bits(g_int)
    k = 1
    while (p ** k).bit_length() <= bits:
        k += 1
    lifted = _hensel_lift(g_int, p, gbars, k)
    pk = p ** k
    # Zassenhaus recombination, smallest subsets first
    out = []
    rem = list(g_int)
    pool = lifted
    s = 1
    while 2 * s <= len(pool):
        hit = None
        for combo in combinations(range(len(pool)), s):
            cand = [rem[-1]]
            for i in combo:
                cand = _mul_int(cand, pool[i])
            cand = _primitive([_sym(c, pk) for c in cand])
            q, r = divrem(_poly_from_ints(rem), _poly_from_ints(cand))
            if r.is_zero():
                hit = (combo, cand, q)
                break
        if hit is None:
            s += 1
            continue
        combo, cand, q = hit
        out.append(cand)
        rem = _primitive(_int_coeffs(q))
        pool = [g for i, g in enumerate(pool) if i not in combo]
    if _deg(rem) > 0:
        out.append(_primitive(rem))
    return out


def factor_over_Q(f: Poly, seed: int = 0) -> FactorList:
    """Factor f in Q[t]; the result is verified by exact re-expansion."""
    if f.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    if f.degree == 0:
        return FactorList(unit=f.lead, factors=())
    unit, parts = yun_decomposition(f)
    collected = []
    for s_part, mult in parts:
        g_int = _primitive(_int_coeffs(s_part))
        for h in _factor_squarefree_primitive(g_int, seed):
            collected.append((_poly_from_ints(h), mult))
    collected.sort(key=lambda fm: (fm[0].degree, [ (c.numerator, c.denominator) for c in fm[0].coeffs ]))
    prod = Poly([QQ(1)])
    for h, m in collected:
        prod = prod * h ** m
    true_unit = f.lead / prod.lead
    result = FactorList(unit=true_unit, factors=tuple(collected))
    if result.expand() != f:
        raise InternalInvariantError("factorization failed exact re-expansion")
    return result


# -- the R_n factor ledger -----------------------------------------------------


@dataclass(frozen=True)
class LedgerRow:
    n: int
    recurring: tuple      # ((Poly, multiplicity), ...)
    new: tuple            # ((Poly, multiplicity), ...)

    @property
    def new_count(self) -> int:
        return len(self.new)

    @property
    def new_degree(self):
        return sum(int(f.degree) * 1 for f, _ in self.new) if self.new else None

    @property
    def new_max_multiplicity(self):
        return max((m for _, m in self.new), default=None)


@dataclass
class FactorLedger:
    """Per-index split of the factors of R_n into recurring and new.

    The recurring pool collects every irreducible seen at two or more
    distinct indices of the window; it is an observed stand-in for the
    finite exceptional set the structure theory predicts, never claimed
    equal to it.
    """

    window: tuple
    rows: list
    recurring_pool: list

    def to_json(self) -> dict:
        return {
            "window": list(self.window),
            "recurring_pool": [f.to_text() for f in self.recurring_pool],
            "rows": [
                {
                    "n": row.n,
                    "recurring": [
                        {"poly": f.to_text(), "multiplicity": m}
                        for f, m in row.recurring
                    ],
                    "new": [
                        {"poly": f.to_text(), "multiplicity": m}
                        for f, m in row.new
                    ],
                }
                for row in self.rows
            ],
        }


def rn_factor_ledger(tr: Transcript, lo: int, hi: int, seed: int = 0) -> FactorLedger:
    """Factor R_n for lo <= n <= hi and classify the irreducibles.

    A factor is recurring when it divides R_n at >= 2 distinct window
    indices; everything else is new to its index.  Constant R_n (the
    Pellian case) contributes empty rows.
    """
    if not 0 <= lo <= hi <= tr.last_n:
        raise ValueError("window outside transcript range")
    tr.require_full(lo, hi, "factor ledger")
    factored = {}
    for n in range(lo, hi + 1):
        factored[n] = factor_over_Q(tr.record(n).R, seed=seed)
    seen_at = {}
    for n, fl in factored.items():
        for f, _ in fl.factors:
            seen_at.setdefault(f.coeffs, set()).add(n)
    recurring_keys = {key for key, where in seen_at.items() if len(where) >= 2}
    rows = []
    for n in range(lo, hi + 1):
        rec, new = [], []
        for f, m in factored[n].factors:
            (rec if f.coeffs in recurring_keys else new).append((f, m))
        rows.append(LedgerRow(n=n, recurring=tuple(rec), new=tuple(new)))
    pool = sorted(
        (Poly(list(key)) for key in recurring_keys),
        key=lambda f: (f.degree, [(c.numerator, c.denominator) for c in f.coeffs]),
    )
    return FactorLedger(window=(lo, hi), rows=rows, recurring_pool=pool)
