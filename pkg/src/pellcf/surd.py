"""Continued fraction expansion of sqrt(D) for polynomials D over Q.

For a non-square D of even degree 2d with square leading coefficient,
sqrt(D) lives in Q((1/t)) and has a continued fraction with polynomial
partial quotients a_n.  The classical surd recursion drives everything:
the n-th complete quotient is (P_n + sqrt(D)) / Q_n with P_0 = 0,
Q_0 = 1, and

    a_n     = polynomial part of (P_n + a_0) / Q_n
    P_{n+1} = a_n Q_n - P_n
    Q_{n+1} = (D - P_{n+1}^2) / Q_n   (exact; Q_n | D - P_n^2 throughout)

with a_0 the polynomial part of sqrt(D).  Convergents follow
p_{n+1} = a_n p_n + p_{n-1} starting from (p_0, q_0) = (1, 0),
(p_{-1}, q_{-1}) = (0, 1).

Exact coefficients of the raw sequences grow cubically in n: every
P_n stays small, but Q_n, a_n, p_n, q_n each carry a scalar factor of
cubic height that cancels out of all ratios and roots.  The engine
therefore iterates a rescaled form in which every operand has
quadratic-height coefficients:

    Qhat_n = Q_n / ell_n            (monic; ell_n = lead Q_n)
    atil_n = a_n * ell_n            (= quotient of (P_n + a_0) by Qhat_n)
    u_n    = p_n * mu_n,  v_n = q_n * mu_n   (mu_n = prod_{m<n} ell_m)

which turns the convergent recurrence into

    (u, v)_{n+1} = atil_n (u, v)_n + beta_n (u, v)_{n-1},

where beta_n = ell_{n-1} ell_n equals the leading coefficient of the
previous step's exact division (D - P_n^2) / Qhat_{n-1}, so no
cubic-height scalar is ever touched unless a raw record is requested.
Raw records divide the bookkeeping product back out, reproducing the
canonical sequences exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import (
    DegreeTooSmallError,
    InternalInvariantError,
    PerfectSquareError,
    ThinRecordError,
)
from .poly import NEG_INF, Poly, divrem, exact_div
from .rationals import (
    QQ,
    R_ONE,
    R_ZERO,
    affine_height,
    projective_height,
)
from .series import TailSeries, sqrt_series

FORMAT_VERSION = 1


def validate_expansion_input(D: Poly) -> Poly:
    """Check D is expandable and return a_0, the polynomial part of sqrt(D).

    Raises the typed input errors: zero or constant D, odd degree,
    non-square leading coefficient, or D a perfect square.
    """
    if D.is_zero():
        raise DegreeTooSmallError("cannot expand the zero polynomial")
    if D.degree == 0:
        raise DegreeTooSmallError("cannot expand a constant polynomial")
    a0 = sqrt_series(D).polynomial_part()
    if a0 * a0 == D:
        raise PerfectSquareError(
            f"{D.to_text()} is the square of {a0.to_text()}; its expansion terminates"
        )
    return a0


@dataclass(frozen=True)
class StepRecord:
    """One fully materialized expansion step, in raw canonical values."""

    n: int
    a: Poly
    P: Poly
    Q: Poly
    p: Poly
    q: Poly
    R: Poly
    S: Poly

    @property
    def deg_a(self) -> int:
        return self.a.degree

    @property
    def thin(self) -> bool:
        return False


@dataclass(frozen=True)
class ThinRecord:
    """A thinned step: degrees, heights and hashes survive, polynomials do not."""

    n: int
    deg_a: int
    degrees: dict
    heights: dict
    affine_heights: dict
    hashes: dict

    @property
    def thin(self) -> bool:
        return True


def poly_hash(f: Poly) -> str:
    return hashlib.sha256(",".join(f.to_json()).encode()).hexdigest()


def _poly_h(f: Poly) -> float:
    # the zero polynomial has empty support; report height 0 for tabulation
    if f.is_zero():
        return 0.0
    return projective_height(f.coeffs)


def _poly_ha(f: Poly) -> float:
    return affine_height(f.coeffs)


def thin_record_from(rec: StepRecord) -> ThinRecord:
    polys = {"a": rec.a, "P": rec.P, "Q": rec.Q, "p": rec.p, "q": rec.q,
             "R": rec.R, "S": rec.S}
    return ThinRecord(
        n=rec.n,
        deg_a=rec.deg_a,
        degrees={k: (v.degree if v.degree != NEG_INF else None) for k, v in polys.items()},
        heights={k: _poly_h(v) for k, v in polys.items()},
        affine_heights={k: _poly_ha(v) for k, v in polys.items()},
        hashes={k: poly_hash(v) for k, v in polys.items()},
    )


@dataclass
class Transcript:
    """An expansion prefix: records 0..N plus the raw resume cursor."""

    D: Poly
    records: list
    cursor: dict
    meta: dict = field(default_factory=dict)

    @property
    def last_n(self) -> int:
        return self.cursor["n"]

    def record(self, n: int):
        rec = self.records[n]
        if rec.n != n:
            raise InternalInvariantError(f"record index mismatch at {n}")
        return rec

    def degree_sequence(self) -> list[int]:
        return [rec.deg_a for rec in self.records]

    def require_full(self, lo: int, hi: int, what: str) -> None:
        for n in range(lo, hi + 1):
            if self.records[n].thin:
                raise ThinRecordError(
                    f"{what} needs full polynomials at step {n}, but the record is "
                    f"thinned; re-run the expansion with --thin-window 0 or pin the "
                    f"needed indices with --pin"
                )


class _Core:
    """Normalized-state iterator; raw bookkeeping is optional."""

    __slots__ = (
        "D", "a0", "d", "n", "P", "Qhat", "beta", "ell", "mu",
        "u", "v", "u_prev", "v_prev", "track_pairs", "track_raw",
    )

    def __init__(self, D: Poly, a0: Poly, *, track_pairs: bool, track_raw: bool):
        self.D = D
        self.a0 = a0
        self.d = D.degree // 2
        self.n = 0
        self.P = Poly()
        self.Qhat = Poly([R_ONE])
        self.beta = R_ONE          # ell_{n-1} * ell_n, with ell_{-1} = 1
        self.ell = R_ONE           # lead(Q_n); maintained when track_raw
        self.mu = R_ONE            # prod of ell_m for m < n; maintained when track_raw
        self.track_pairs = track_pairs
        self.track_raw = track_raw
        if track_pairs:
            self.u_prev, self.v_prev = Poly([R_ZERO]), Poly([R_ONE])
            self.u, self.v = Poly([R_ONE]), Poly()
        else:
            self.u = self.v = self.u_prev = self.v_prev = None

    @classmethod
    def fresh(cls, D: Poly, *, track_pairs=True, track_raw=True) -> "_Core":
        a0 = validate_expansion_input(D)
        return cls(D, a0, track_pairs=track_pairs, track_raw=track_raw)

    @classmethod
    def from_cursor(cls, D: Poly, cursor: dict, *, track_pairs=True, track_raw=True) -> "_Core":
        """Rebuild an engine at step cursor['n'] from raw cursor polynomials.

        The rescaled bookkeeping restarts at the cursor (mu = 1,
        ell_{N-1} treated as 1), which changes nothing observable: raw
        records produced after a resume are exactly what a fresh run
        would produce.
        """
        a0 = validate_expansion_input(D)
        core = cls(D, a0, track_pairs=track_pairs, track_raw=track_raw)
        Q = cursor["Q"]
        core.n = cursor["n"]
        core.P = cursor["P"]
        core.ell = Q.lead
        core.Qhat = Q.monic()
        core.beta = core.ell        # ell'_{N-1} := 1
        core.mu = R_ONE
        if track_pairs:
            core.u, core.v = cursor["p"], cursor["q"]
            core.u_prev, core.v_prev = cursor["p_prev"], cursor["q_prev"]
        return core

    def step(self):
        """Advance one step; returns (atil_n, P_next) for the step just taken."""
        num = self.P + self.a0
        atil, _ = divrem(num, self.Qhat)
        if self.n >= 1 and atil.degree < 1:
            raise InternalInvariantError(
                f"partial quotient degree dropped below 1 at step {self.n}"
            )
        if self.track_pairs:
            u_next = atil * self.u + self.beta * self.u_prev
            v_next = atil * self.v + self.beta * self.v_prev
            self.u_prev, self.u = self.u, u_next
            self.v_prev, self.v = self.v, v_next
        P_next = atil * self.Qhat - self.P
        try:
            W = exact_div(self.D - P_next * P_next, self.Qhat)
        except ValueError as exc:
            raise InternalInvariantError(
                f"state division failed at step {self.n}: {exc}"
            ) from exc
        lw = W.lead
        if self.track_raw:
            self.mu = self.mu * self.ell
            self.ell = lw / self.ell
        self.P = P_next
        self.Qhat = W.monic()
        self.beta = lw
        self.n += 1
        return atil, P_next

    # raw views of the state *before* the next step() call

    def raw_Q(self) -> Poly:
        return self.Qhat * self.ell

    def raw_R(self) -> Poly:
        sign = R_ONE if self.n % 2 == 0 else -R_ONE
        return self.raw_Q() * sign

    def raw_pair(self) -> tuple[Poly, Poly]:
        inv = 1 / self.mu
        return self.u * inv, self.v * inv

    def raw_prev_pair(self) -> tuple[Poly, Poly]:
        # mu_{n-1} = mu_n / ell_{n-1}; recover via beta = ell_{n-1} * ell_n
        ell_prev = self.beta / self.ell
        inv = ell_prev / self.mu
        return self.u_prev * inv, self.v_prev * inv


def expand(
    D: Poly,
    N: int,
    *,
    thin_window: int | None = None,
    pins=(),
) -> Transcript:
    """Expand sqrt(D) through step N, producing records 0..N.

    With thin_window = w, records below N - w keep only degrees,
    heights and hashes (pinned indices stay full).  The cursor always
    carries the raw polynomials needed to resume.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    pins = frozenset(pins)
    core = _Core.fresh(D, track_pairs=True, track_raw=True)
    records: list = []
    prev_raw: tuple[Poly, Poly] | None = None
    for n in range(N + 1):
        p_n, q_n = core.raw_pair()
        P_n = core.P
        Q_n = core.raw_Q()
        R_n = core.raw_R()
        ell_n = core.ell
        if n == N:
            # capture before step(): afterwards the prev slot holds index n
            prev_raw = core.raw_prev_pair()
        atil, P_next = core.step()
        a_n = atil * (1 / ell_n)
        sign = R_ONE if n % 2 == 0 else -R_ONE
        S_n = P_next * sign
        rec = StepRecord(n=n, a=a_n, P=P_n, Q=Q_n, p=p_n, q=q_n, R=R_n, S=S_n)
        records.append(rec)
    # after the loop the core sits at n = N + 1; the cursor wants step N
    p_prev, q_prev = prev_raw
    last = records[N]
    cursor = {
        "n": N,
        "P": last.P,
        "Q": last.Q,
        "p": last.p,
        "q": last.q,
        "p_prev": p_prev,
        "q_prev": q_prev,
    }
    if thin_window is not None:
        lo_keep = N - thin_window
        records = [
            rec if (rec.n >= lo_keep or rec.n in pins) else thin_record_from(rec)
            for rec in records
        ]
    meta = {
        "version": FORMAT_VERSION,
        "steps": N,
        "thin_window": thin_window,
        "pins": sorted(pins),
    }
    return Transcript(D=D, records=records, cursor=cursor, meta=meta)


def resume(tr: Transcript, extra: int) -> Transcript:
    """Extend a transcript by `extra` steps from its cursor.

    Records produced after the cursor are byte-identical to what a
    fresh expansion of the same total length yields.
    """
    if extra < 1:
        raise ValueError("extra must be >= 1")
    N0 = tr.last_n
    core = _Core.from_cursor(tr.D, tr.cursor, track_pairs=True, track_raw=True)
    # re-run the cursor step to regain the normalized state at N0 + 1
    atil0, P_next0 = core.step()
    records = list(tr.records)
    N = N0 + extra
    prev_raw = None
    for n in range(N0 + 1, N + 1):
        p_n, q_n = core.raw_pair()
        P_n = core.P
        Q_n = core.raw_Q()
        R_n = core.raw_R()
        ell_n = core.ell
        if n == N:
            prev_raw = core.raw_prev_pair()
        atil, P_next = core.step()
        a_n = atil * (1 / ell_n)
        sign = R_ONE if n % 2 == 0 else -R_ONE
        S_n = P_next * sign
        records.append(StepRecord(n=n, a=a_n, P=P_n, Q=Q_n, p=p_n, q=q_n, R=R_n, S=S_n))
    p_prev, q_prev = prev_raw
    last = records[N]
    cursor = {
        "n": N,
        "P": last.P,
        "Q": last.Q,
        "p": last.p,
        "q": last.q,
        "p_prev": p_prev,
        "q_prev": q_prev,
    }
    thin_window = tr.meta.get("thin_window")
    pins = frozenset(tr.meta.get("pins", ()))
    if thin_window is not None:
        lo_keep = N - thin_window
        records = [
            rec
            if rec.thin or rec.n >= lo_keep or rec.n in pins
            else thin_record_from(rec)
            for rec in records
        ]
    meta = dict(tr.meta)
    meta["steps"] = N
    return Transcript(D=tr.D, records=records, cursor=cursor, meta=meta)


def scan_degrees(D: Poly, N: int) -> list[int]:
    """Degrees of a_0..a_N via the normalized state only (no convergents)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    core = _Core.fresh(D, track_pairs=False, track_raw=False)
    degs = []
    for _ in range(N + 1):
        atil, _ = core.step()
        degs.append(atil.degree)
    return degs


def scaled_q_jets(D: Poly, N: int, rho, order: int = 4) -> list[list]:
    """Taylor jets of the rescaled q_n at t = rho, for n = 0..N.

    Entry n is the list of the first `order` Taylor coefficients of
    v_n = mu_n * q_n at rho.  Since mu_n is a nonzero scalar, q_n and
    v_n have the same vanishing order at rho, so this is the right
    object for exact zero counting without cubic-height arithmetic.
    """
    rho = QQ(rho)
    core = _Core.fresh(D, track_pairs=False, track_raw=False)
    jv_prev = [R_ONE] + [R_ZERO] * (order - 1)   # q_{-1} = 1
    jv = [R_ZERO] * order                        # q_0 = 0
    out = [list(jv)]
    for n in range(N):
        num = core.P + core.a0
        atil, _ = divrem(num, core.Qhat)
        ja = atil.taylor_at(rho, order)
        beta = core.beta
        jv_next = [R_ZERO] * order
        for k in range(order):
            acc = beta * jv_prev[k]
            for i in range(k + 1):
                if ja[i] != 0 and jv[k - i] != 0:
                    acc = acc + ja[i] * jv[k - i]
            jv_next[k] = acc
        jv_prev, jv = jv, jv_next
        core.step()
        out.append(list(jv))
    return out


# -- order of contact at infinity -------------------------------------------


def ord_at_infinity(p: Poly, q: Poly, D: Poly, sq: TailSeries | None = None):
    """First nonzero term of p - q*sqrt(D): returns (k, c) with the series
    equal to c*t^-k + lower order terms.

    The scan window is provably sufficient: with R = p^2 - D q^2 and
    M = max(deg p, deg q + d), the conjugate p + q*sqrt(D) has its first
    nonzero term at exponent <= M, so the difference has one at exponent
    >= deg R - M.
    """
    if sq is None:
        sq = sqrt_series(D)
    if q.is_zero():
        if p.is_zero():
            raise ValueError("ord_at_infinity(0, 0) is undefined")
        return -p.degree, p.lead
    R = p * p - D * (q * q)
    if R.is_zero():
        raise InternalInvariantError(
            "p^2 - D q^2 vanished; D admits a rational square root"
        )
    d = D.degree // 2
    M = max(p.degree if not p.is_zero() else NEG_INF, q.degree + d)
    M = int(M)
    floor_exp = int(R.degree) - M
    f = TailSeries.from_poly(p) - TailSeries.from_poly(q) * sq
    hit = f.first_nonzero(floor_exp)
    if hit is None:
        raise InternalInvariantError("contact order scan window was exhausted")
    e, c = hit
    return -e, c


# -- identity verification ---------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    ok: bool
    first_fail: int | None
    n_checked: int


@dataclass
class IdentityReport:
    checks: list

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failed(self) -> list:
        return [c for c in self.checks if not c.ok]


def verify_identities(tr: Transcript, *, max_n: int | None = None) -> IdentityReport:
    """Exactly re-derive every structural identity of a transcript.

    The record fields R_n and S_n are produced from the state recursion;
    here they are recomputed from the convergents (p, q), so agreement
    is a genuine two-route consistency check, not an echo.
    """
    N = tr.last_n if max_n is None else max_n
    tr.require_full(0, N, "identity verification")
    D = tr.D
    d = D.degree // 2
    sq = sqrt_series(D)
    recs = [tr.record(n) for n in range(N + 1)]
    checks: list[IdentityCheck] = []

    def run(name, lo, hi, pred):
        first_fail = None
        count = 0
        for n in range(lo, hi + 1):
            count += 1
            if not pred(n):
                first_fail = n
                break
        checks.append(IdentityCheck(name, first_fail is None, first_fail, count))

    sign = lambda n: R_ONE if n % 2 == 0 else -R_ONE

    run("state_division", 0, N,
        lambda n: divrem(D - recs[n].P * recs[n].P, recs[n].Q)[1].is_zero())
    run("determinant", 0, N - 1,
        lambda n: (recs[n].p * recs[n + 1].q - recs[n + 1].p * recs[n].q)
        == Poly([sign(n)]))
    run("degree_sum", 1, N, lambda n: recs[n].p.degree == recs[n].q.degree + d)
    run("degree_step", 1, N - 1,
        lambda n: recs[n + 1].q.degree == recs[n].q.degree + recs[n].deg_a)
    run("partial_quotient_bounds", 1, N, lambda n: 1 <= recs[n].deg_a <= d)
    run("leading_quotient_degree", 0, 0, lambda n: recs[0].deg_a == d)
    run("r_via_convergents", 0, N,
        lambda n: recs[n].p * recs[n].p - D * recs[n].q * recs[n].q == recs[n].R)
    run("s_via_convergents", 0, N - 1,
        lambda n: recs[n].p * recs[n + 1].p - D * recs[n].q * recs[n + 1].q
        == recs[n].S)
    run("s_anchor", 0, 0, lambda n: recs[0].S == recs[0].a)
    run("r_alternation", 0, N,
        lambda n: recs[n].R == (recs[n].Q if n % 2 == 0 else -recs[n].Q)
        and (n != 0 or recs[0].R == Poly([R_ONE])))
    run("s_alternation", 0, N - 1,
        lambda n: recs[n].S == recs[n + 1].P * sign(n))
    run("s_step", 1, N,
        lambda n: recs[n].S - recs[n - 1].S == recs[n].a * recs[n].R)
    run("s_squared", 0, N - 1,
        lambda n: recs[n].S * recs[n].S - D == recs[n].R * recs[n + 1].R)
    run("r_degree", 0, N, lambda n: recs[n].R.degree == d - recs[n].deg_a)

    def approx_order(n):
        k, c = ord_at_infinity(recs[n].p, recs[n].q, D, sq)
        if k != recs[n].q.degree + recs[n].deg_a:
            return False
        return 2 * c * recs[n].p.lead == recs[n].R.lead

    run("approximation_order", 1, N, approx_order)

    def quotient_resurrection(n):
        rn = recs[n].R
        series = sq.scale(2 * sign(n)) * TailSeries.from_poly(rn).inverse()
        return series.polynomial_part() == recs[n].a

    run("quotient_resurrection", 1, N, quotient_resurrection)

    return IdentityReport(checks=checks)
