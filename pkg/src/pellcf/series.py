"""Lazy exact Laurent tails in 1/t and the square root series.

A TailSeries represents an element of Q((1/t)): finitely many positive
powers of t followed by an infinite tail of negative powers.  Terms are
produced on demand and memoized; a series never forgets a coefficient it
has produced, so reads are referentially transparent.  Each series has a
single writer (its own rule) and no shared mutable state beyond the
memo, which only grows.

`lead_exp` is an upper bound for the support: coefficients above it are
identically zero, and for constructors that know their exact leading
term (sqrt_series, from_poly of a nonzero poly) it is attained.

The square root of a polynomial D of even degree 2d with square leading
coefficient is the branch whose leading term is +sqrt(lead(D)) * t^d.
Coefficients come from matching (sum c_j t^-j)^2 = D term by term, which
is division-free past the leading 2*c_lead inversion.

The module also hosts the series-side cross-checks: Hankel determinants
of the tail (fraction-free Bareiss after clearing row denominators) and
the Pade pair construction used as an independent oracle against the
expansion engine's convergents.
"""

from __future__ import annotations

from .errors import NotASquareLeadError, OddDegreeError
from .poly import Poly
from .rationals import QQ, R_ONE, R_ZERO, sqrt_exact


class TailSeries:
    """Laurent series in 1/t with lazily memoized exact coefficients."""

    __slots__ = ("lead_exp", "_memo", "_rule")

    def __init__(self, lead_exp: int, rule):
        self.lead_exp = int(lead_exp)
        self._memo: list = []
        #: rule(i) returns the coefficient at exponent lead_exp - i; it may
        #: read self coefficients at offsets < i (the memo fills in order)
        self._rule = rule

    def coefficient(self, exp: int):
        """Exact coefficient of t^exp."""
        if exp > self.lead_exp:
            return R_ZERO
        i = self.lead_exp - exp
        memo = self._memo
        while len(memo) <= i:
            memo.append(self._rule(len(memo)))
        return memo[i]

    def tail_coefficient(self, j: int):
        """Coefficient of t^-j (the c_j convention for Hankel work)."""
        return self.coefficient(-j)

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_poly(cls, f: Poly) -> "TailSeries":
        if f.is_zero():
            return cls(0, lambda i: R_ZERO)
        d = f.degree
        return cls(d, lambda i: f.coeff(d - i))

    @classmethod
    def constant(cls, c) -> "TailSeries":
        c = QQ(c)
        return cls(0, lambda i: c if i == 0 else R_ZERO)

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "TailSeries") -> "TailSeries":
        lead = max(self.lead_exp, other.lead_exp)
        return TailSeries(
            lead,
            lambda i: self.coefficient(lead - i) + other.coefficient(lead - i),
        )

    def __sub__(self, other: "TailSeries") -> "TailSeries":
        lead = max(self.lead_exp, other.lead_exp)
        return TailSeries(
            lead,
            lambda i: self.coefficient(lead - i) - other.coefficient(lead - i),
        )

    def __neg__(self) -> "TailSeries":
        return TailSeries(self.lead_exp, lambda i: -self.coefficient(self.lead_exp - i))

    def scale(self, c) -> "TailSeries":
        c = QQ(c)
        return TailSeries(self.lead_exp, lambda i: c * self.coefficient(self.lead_exp - i))

    def shift(self, k: int) -> "TailSeries":
        """Multiply by t^k (k of either sign)."""
        return TailSeries(
            self.lead_exp + k, lambda i: self.coefficient(self.lead_exp - i)
        )

    def __mul__(self, other: "TailSeries") -> "TailSeries":
        lead = self.lead_exp + other.lead_exp

        def rule(i):
            # Cauchy product at exponent lead - i: both factor exponents are
            # bounded above by their leads, so the sum is finite.
            target = lead - i
            acc = R_ZERO
            lo = target - other.lead_exp
            for a in range(lo, self.lead_exp + 1):
                ca = self.coefficient(a)
                if ca != 0:
                    acc = acc + ca * other.coefficient(target - a)
            return acc

        return TailSeries(lead, rule)

    def inverse(self) -> "TailSeries":
        """Multiplicative inverse; requires a nonzero coefficient at lead_exp."""
        c0 = self.coefficient(self.lead_exp)
        if c0 == 0:
            raise ValueError("inverse needs an exact leading coefficient")
        inv0 = 1 / c0
        lead = -self.lead_exp
        out = TailSeries(lead, None)

        def rule(i):
            if i == 0:
                return inv0
            # convolution of self (offsets 1..i) against earlier output terms
            acc = R_ZERO
            for k in range(1, i + 1):
                ck = self.coefficient(self.lead_exp - k)
                if ck != 0:
                    acc = acc + ck * out._memo[i - k]
            return -inv0 * acc

        out._rule = rule
        return out

    # -- projections --------------------------------------------------------

    def polynomial_part(self) -> Poly:
        """The terms with nonnegative exponents, as a Poly."""
        if self.lead_exp < 0:
            return Poly()
        return Poly([self.coefficient(e) for e in range(0, self.lead_exp + 1)])

    def first_nonzero(self, floor_exp: int):
        """Largest exponent e >= floor_exp with nonzero coefficient, or None."""
        for e in range(self.lead_exp, floor_exp - 1, -1):
            c = self.coefficient(e)
            if c != 0:
                return e, c
        return None


def sqrt_series(D: Poly) -> TailSeries:
    """The +branch square root of D as a TailSeries.

    D must be nonzero of even degree with a leading coefficient that is
    a square in Q.  Perfect squares are fine here; callers that need
    irrationality must reject them separately.
    """
    if D.is_zero():
        raise OddDegreeError("the zero polynomial has no square root series")
    if D.degree % 2 != 0:
        raise OddDegreeError(
            f"degree {D.degree} is odd; the square root lives outside Q((1/t))"
        )
    s0 = sqrt_exact(D.lead)
    if s0 is None:
        from .rationals import rat_str

        raise NotASquareLeadError(
            f"leading coefficient {rat_str(D.lead)} is not a rational square"
        )
    d = D.degree // 2
    twod = D.degree
    inv2s0 = 1 / (2 * s0)
    out = TailSeries(d, None)

    def rule(i):
        if i == 0:
            return s0
        # match the coefficient of t^(2d - i) in (series)^2 against D
        target = twod - i
        acc = R_ZERO
        for k in range(1, i):
            acc = acc + out._memo[k] * out._memo[i - k]
        want = D.coeff(target) if target >= 0 else R_ZERO
        return (want - acc) * inv2s0

    out._rule = rule
    return out


def polynomial_part_of_sqrt(D: Poly) -> Poly:
    return sqrt_series(D).polynomial_part()


# -- Hankel determinants ---------------------------------------------------


def _bareiss_det(rows: list[list[int]]) -> int:
    """Exact determinant of an integer matrix, fraction-free Bareiss."""
    m = len(rows)
    if m == 0:
        return 1
    a = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(m - 1):
        if a[k][k] == 0:
            for r in range(k + 1, m):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = pivot
    return sign * a[m - 1][m - 1]


def hankel_determinant(f: TailSeries, m: int):
    """Determinant of the m x m Hankel matrix of tail coefficients.

    Entry (i, j) is c_{i+j+1} where c_k is the coefficient of t^-k in f.
    H_0 is the empty determinant 1.  Row denominators are cleared first
    so the elimination runs over Z.
    """
    if m < 0:
        raise ValueError("Hankel index must be >= 0")
    if m == 0:
        return R_ONE
    from math import gcd

    entries = [[f.tail_coefficient(i + j + 1) for j in range(m)] for i in range(m)]
    scale_den = 1
    scale_num = 1
    int_rows = []
    for row in entries:
        common = 1
        for c in row:
            den = int(QQ(c).denominator)
            common = common * den // gcd(common, den)
        int_rows.append([int(QQ(c).numerator) * (common // int(QQ(c).denominator)) for c in row])
        scale_den *= common
    det = _bareiss_det(int_rows)
    return QQ(det * scale_num, scale_den)


def hankel_nonzero_set(f: TailSeries, m_max: int) -> list[int]:
    """Indices m <= m_max with H_m != 0."""
    return [m for m in range(0, m_max + 1) if hankel_determinant(f, m) != 0]


# -- Pade pairs -------------------------------------------------------------


def pade_pair(D: Poly, m: int) -> tuple[Poly, Poly]:
    """Best rational approximant to sqrt(D) with deg q <= m, via linear algebra.

    q is a nonzero solution of the m homogeneous conditions that the
    coefficients of t^-1 .. t^-m in q*sqrt(D) vanish, so that
    p := polynomial_part(q*sqrt(D)) satisfies ord(p - q*sqrt(D)) > m.
    The kernel vector is chosen canonically: pivot columns are taken
    greedily left to right, the last free column is set to one, and the
    result is rescaled to coprime integer coefficients with positive
    leading coefficient.
    """
    if m < 0:
        raise ValueError("Pade index must be >= 0")
    s = sqrt_series(D)
    # rows j = 1..m, columns i = 0..m, entry c_{i+j}
    rows = [[s.tail_coefficient(i + j) for i in range(m + 1)] for j in range(1, m + 1)]
    ncols = m + 1
    pivots: list[tuple[int, int]] = []  # (row, col) in echelon order
    reduced = [list(r) for r in rows]
    pivot_cols: list[int] = []
    r = 0
    for col in range(ncols):
        sel = None
        for rr in range(r, len(reduced)):
            if reduced[rr][col] != 0:
                sel = rr
                break
        if sel is None:
            continue
        reduced[r], reduced[sel] = reduced[sel], reduced[r]
        pv = reduced[r][col]
        for rr in range(len(reduced)):
            if rr != r and reduced[rr][col] != 0:
                factor = reduced[rr][col] / pv
                for cc in range(col, ncols):
                    reduced[rr][cc] = reduced[rr][cc] - factor * reduced[r][cc]
        pivot_cols.append(col)
        pivots.append((r, col))
        r += 1
        if r == len(reduced):
            break
    free_cols = [c for c in range(ncols) if c not in pivot_cols]
    # the system has m rows and m+1 unknowns, so a free column always exists
    free = free_cols[-1]
    q_vec = [R_ZERO] * ncols
    q_vec[free] = R_ONE
    for rr, col in reversed(pivots):
        acc = R_ZERO
        for cc in range(col + 1, ncols):
            if q_vec[cc] != 0:
                acc = acc + reduced[rr][cc] * q_vec[cc]
        q_vec[col] = -acc / reduced[rr][col]
    from .rationals import canonical_integer_vector

    ints = canonical_integer_vector(q_vec)
    # positive leading coefficient of q as a polynomial
    lead_idx = max(i for i, v in enumerate(ints) if v != 0)
    if ints[lead_idx] < 0:
        ints = tuple(-v for v in ints)
    q = Poly(ints)
    qs = TailSeries.from_poly(q) * s
    p = qs.polynomial_part()
    return p, q
