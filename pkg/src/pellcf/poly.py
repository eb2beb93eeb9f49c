"""Dense exact polynomials over Q in one variable t.

Coefficients are stored ascending by power as a tuple of rationals with
no trailing zeros, so the zero polynomial is the empty tuple and its
degree is the NEG_INF sentinel (float('-inf'), which absorbs degree
arithmetic the way valuations expect).

Multiplication switches from schoolbook to Karatsuba above a size
threshold; division, gcd and Yun's squarefree decomposition are the
classical exact algorithms with monic normalization to keep remainder
chains tame.
"""

from __future__ import annotations

from .rationals import QQ, R_ONE, R_ZERO, parse_rat, rat_str

NEG_INF = float("-inf")

#: coefficient count above which multiplication splits Karatsuba-style
KARATSUBA_THRESHOLD = 32


class PolyParseError(ValueError):
    """Malformed polynomial text; carries the offending position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


def _trim(cs: list) -> tuple:
    n = len(cs)
    while n and cs[n - 1] == 0:
        n -= 1
    return tuple(cs[:n])


class Poly:
    """Immutable dense polynomial over Q."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        if isinstance(coeffs, Poly):
            object.__setattr__(self, "coeffs", coeffs.coeffs)
            return
        object.__setattr__(self, "coeffs", _trim([QQ(c) for c in coeffs]))

    def __setattr__(self, *a):
        raise AttributeError("Poly is immutable")

    # -- basic queries ------------------------------------------------

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    @property
    def lead(self):
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coeff(self, i: int):
        """Coefficient of t^i (zero outside the stored range)."""
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return R_ZERO

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int,)) or type(other) is type(R_ZERO):
            return self.coeffs == Poly([other]).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(("Poly", self.coeffs))

    def __repr__(self):
        return f"Poly({self.to_text()!r})"

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            if isinstance(other, int) or type(other) is type(R_ZERO):
                c = QQ(other)
                if c == 0:
                    return Poly()
                return Poly([c * x for x in self.coeffs])
            return NotImplemented
        return Poly(_mul(list(self.coeffs), list(other.coeffs)))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = Poly([R_ONE])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __divmod__(self, other):
        return divrem(self, _coerce(other))

    def __floordiv__(self, other):
        return divrem(self, _coerce(other))[0]

    def __mod__(self, other):
        return divrem(self, _coerce(other))[1]

    # -- calculus and evaluation ---------------------------------------

    def derivative(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        """Evaluate at a rational point by Horner's rule."""
        acc = R_ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def taylor_at(self, rho, order: int) -> list:
        """First `order` Taylor coefficients of self at t = rho.

        Entry k is the coefficient of (t - rho)^k, i.e. the k-th
        derivative over k factorial, computed by repeated synthetic
        division so everything stays exact.
        """
        rho = QQ(rho)
        work = list(self.coeffs)
        jets = []
        for _ in range(order):
            if not work:
                jets.append(R_ZERO)
                continue
            q = [R_ZERO] * (len(work) - 1)
            acc = work[-1]
            for i in range(len(work) - 2, -1, -1):
                q[i] = acc
                acc = work[i] + rho * acc
            jets.append(acc)
            work = q
        return jets

    # -- normal forms ---------------------------------------------------

    def monic(self) -> "Poly":
        if not self.coeffs:
            raise ValueError("zero polynomial cannot be made monic")
        inv = 1 / self.lead
        return Poly([c * inv for c in self.coeffs])

    def scale(self, c) -> "Poly":
        return self * QQ(c)

    def shift_mul_t(self, k: int) -> "Poly":
        """Multiply by t^k (k >= 0)."""
        if not self.coeffs or k == 0:
            return self
        return Poly([R_ZERO] * k + list(self.coeffs))

    # -- serialization ---------------------------------------------------

    def to_json(self) -> list[str]:
        """Coefficient strings ascending by power."""
        return [rat_str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data) -> "Poly":
        return cls([parse_rat(s) for s in data])

    def to_text(self) -> str:
        """Human form, descending powers, e.g. 't^2 - 3/4*t + 1'."""
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            neg = c < 0
            mag = -c if neg else c
            if i == 0:
                body = rat_str(mag)
            else:
                var = "t" if i == 1 else f"t^{i}"
                body = var if mag == 1 else f"{rat_str(mag)}*{var}"
            if not parts:
                parts.append(("-" if neg else "") + body)
            else:
                parts.append(("- " if neg else "+ ") + body)
        return " ".join(parts)


def _coerce(x) -> Poly:
    if isinstance(x, Poly):
        return x
    return Poly([x])


def _mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    if min(len(a), len(b)) < KARATSUBA_THRESHOLD:
        out = [R_ZERO] * (len(a) + len(b) - 1)
        if len(a) > len(b):
            a, b = b, a
        for i, c in enumerate(a):
            if c == 0:
                continue
            for j, d in enumerate(b):
                out[i + j] = out[i + j] + c * d
        return out
    half = max(len(a), len(b)) // 2
    a0, a1 = a[:half], a[half:]
    b0, b1 = b[:half], b[half:]
    z0 = _mul(a0, b0)
    z2 = _mul(a1, b1)
    s1 = _addl(a0, a1)
    s2 = _addl(b0, b1)
    z1 = _subl(_subl(_mul(s1, s2), z0), z2)
    out = [R_ZERO] * (len(a) + len(b) - 1)
    for i, c in enumerate(z0):
        out[i] = out[i] + c
    for i, c in enumerate(z1):
        out[i + half] = out[i + half] + c
    for i, c in enumerate(z2):
        out[i + 2 * half] = out[i + 2 * half] + c
    return out


def _addl(a: list, b: list) -> list:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = out[i] + c
    return out


def _subl(a: list, b: list) -> list:
    out = list(a) + [R_ZERO] * (len(b) - len(a))
    for i, c in enumerate(b):
        out[i] = out[i] - c
    return out


def divrem(f: Poly, g: Poly) -> tuple[Poly, Poly]:
    """Exact division with remainder: f = q*g + r, deg r < deg g."""
    if g.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if f.degree < g.degree:
        return Poly(), f
    rem = list(f.coeffs)
    dg = len(g.coeffs) - 1
    inv = 1 / g.lead
    q = [R_ZERO] * (len(rem) - dg)
    for k in range(len(rem) - dg - 1, -1, -1):
        c = rem[k + dg] * inv
        if c != 0:
            q[k] = c
            for i, gc in enumerate(g.coeffs):
                rem[k + i] = rem[k + i] - c * gc
    return Poly(q), Poly(rem[:dg])


def exact_div(f: Poly, g: Poly) -> Poly:
    """Division known to be remainder-free; raises if it is not."""
    q, r = divrem(f, g)
    if not r.is_zero():
        raise ValueError("division was expected to be exact")
    return q


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd over Q (monic Euclid; gcd(0, 0) = 0)."""
    a, b = f, g
    while not b.is_zero():
        a, b = b, divrem(a, b)[1]
        if not b.is_zero():
            b = b.monic()
    if a.is_zero():
        return a
    return a.monic()


def poly_lcm(f: Poly, g: Poly) -> Poly:
    if f.is_zero() or g.is_zero():
        return Poly()
    return exact_div(f * g, poly_gcd(f, g)).monic()


def yun_decomposition(f: Poly) -> tuple:
    """Yun's squarefree decomposition over Q.

    Returns (unit, [(s_1, 1), (s_2, 2), ...]) with the s_i monic,
    squarefree, pairwise coprime, and unit * prod s_i^i == f.  Parts
    with s_i == 1 are omitted.
    """
    if f.is_zero():
        raise ValueError("zero polynomial has no squarefree decomposition")
    unit = f.lead
    f = f.monic()
    if f.degree == 0:
        return unit, []
    parts = []
    df = f.derivative()
    a = poly_gcd(f, df)
    b = exact_div(f, a)
    c = exact_div(df, a)
    i = 1
    while True:
        d = c - b.derivative()
        s = poly_gcd(b, d)
        if s.degree > 0:
            parts.append((s, i))
        if d.is_zero() and s == b:
            break
        b = exact_div(b, s)
        if b.degree <= 0:
            break
        c = exact_div(d, s)
        i += 1
    return unit, parts


def squarefree_decomposition(f: Poly) -> tuple[Poly, Poly, object]:
    """Split f as unit * D1^2 * Dtilde with D1, Dtilde monic and Dtilde squarefree.

    This is the square-part extraction used to reduce an expansion input
    to its squarefree core.
    """
    unit, parts = yun_decomposition(f)
    d1 = Poly([R_ONE])
    dt = Poly([R_ONE])
    for s, i in parts:
        if i // 2:
            d1 = d1 * s ** (i // 2)
        if i % 2:
            dt = dt * s
    return d1, dt, unit


# -- text parsing -----------------------------------------------------

def parse_poly(text: str) -> Poly:
    """Parse human polynomial syntax in the variable t.

    Grammar: terms joined by + or -, each term an optional rational
    coefficient (n or n/d), an optional '*', and an optional power of t
    written t, t^k, or t**k.  Whitespace is free.  Raises PolyParseError
    with the offending position.
    """
    coeffs: dict[int, object] = {}
    i, n = 0, len(text)

    def skip_ws(j):
        while j < n and text[j].isspace():
            j += 1
        return j

    def read_int(j):
        start = j
        while j < n and text[j].isdigit():
            j += 1
        if j == start:
            raise PolyParseError("expected a number", start)
        return int(text[start:j]), j

    i = skip_ws(i)
    if i == n:
        raise PolyParseError("empty polynomial", 0)
    first = True
    while i < n:
        sign = 1
        i = skip_ws(i)
        if i < n and text[i] in "+-":
            if text[i] == "-":
                sign = -1
            i = skip_ws(i + 1)
        elif not first:
            raise PolyParseError("expected '+' or '-' between terms", i)
        first = False
        coef = None
        if i < n and text[i].isdigit():
            num, i = read_int(i)
            den = 1
            if i < n and text[i] == "/":
                den, i = read_int(i + 1)
                if den == 0:
                    raise PolyParseError("zero denominator", i - 1)
            coef = QQ(num, den)
            i = skip_ws(i)
            if i < n and text[i] == "*":
                i = skip_ws(i + 1)
                if i >= n or text[i] != "t":
                    raise PolyParseError("expected t after '*'", i)
        power = 0
        if i < n and text[i] == "t":
            i += 1
            power = 1
            if i < n and (text[i] == "^" or text.startswith("**", i)):
                i += 1 if text[i] == "^" else 2
                i = skip_ws(i)
                power, i = read_int(i)
        elif coef is None:
            raise PolyParseError("expected a coefficient or t", i)
        if coef is None:
            coef = R_ONE
        coeffs[power] = coeffs.get(power, R_ZERO) + sign * coef
        i = skip_ws(i)
    out = [R_ZERO] * (max(coeffs) + 1)
    for k, v in coeffs.items():
        out[k] = v
    return Poly(out)


#: convenience constants
P_ZERO = Poly()
P_ONE = Poly([1])
P_T = Poly([0, 1])
