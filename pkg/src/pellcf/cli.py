"""Command-line surface: expansions, analyses, sweeps.

Every output embeds the run configuration and a format version, so a
result file alone identifies how it was produced.  Exit codes: 0 ok,
2 parse/usage error, 3 invalid input, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from . import __version__
from .analysis import (
    degree_bound_check,
    denominator_degrees,
    detect_degree_period,
    elliptic_identities,
    fit_degq_formula,
    height_series,
    mcmullen_experiment,
    pell_check,
    zero_occurrences,
    zero_occurrences_fast,
)
from .errors import (
    InternalInvariantError,
    InvalidPolynomialError,
    PellcfError,
    ThinRecordError,
    TranscriptFormatError,
)
from .factor import rn_factor_ledger
from .poly import Poly, PolyParseError, parse_poly
from .rationals import QQ, parse_rat, rat_str
from .series import hankel_nonzero_set, sqrt_series
from .surd import expand, scan_degrees, verify_identities
from .transcript import load_transcript, resume_file, write_transcript

FORMAT_VERSION = 1

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_INTERNAL = 4


@dataclass
class RunConfig:
    """Everything needed to reproduce a run, echoed into every output."""

    command: str
    subcommand: str | None = None
    poly: str | None = None
    steps: int | None = None
    thin_window: int | None = None
    pins: tuple = ()
    probes: tuple = ()
    rho: str | None = None
    out: str | None = None
    transcript: str | None = None
    resume: str | None = None
    fmt: str = "table"
    window: str | None = None
    max_m: int | None = None
    precision: int | None = None
    min_confirm: int | None = None
    family: str | None = None
    grid: str | None = None
    store: str | None = None
    parallelism: int | None = None
    seed: int | None = None

    def echo(self) -> dict:
        raw = asdict(self)
        return {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in raw.items()
            if v is not None and v != () and k != "out"
        }

    def instance_hash(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


class _HankelMismatch(InternalInvariantError):
    pass


# -- output plumbing -----------------------------------------------------------


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _json_payload(config: RunConfig, report: dict) -> str:
    return json.dumps({
        "format_version": FORMAT_VERSION,
        "tool": f"pellcf {__version__}",
        "config": config.echo(),
        "report": report,
    }, indent=2)


def _config_comment(config: RunConfig) -> str:
    blob = json.dumps(config.echo(), sort_keys=True, separators=(",", ":"))
    return f"# pellcf {__version__} format={FORMAT_VERSION} config={blob}"


def _render(config: RunConfig, report: dict, table: str,
            csv_rows: list | None = None, gnuplot_rows: list | None = None) -> str:
    if config.fmt == "json":
        return _json_payload(config, report)
    if config.fmt == "csv":
        if csv_rows is None:
            raise ValueError(f"csv output is not defined for {config.command}")
        lines = [_config_comment(config)]
        lines += [",".join(str(c) for c in row) for row in csv_rows]
        return "\n".join(lines)
    if config.fmt == "gnuplot":
        if gnuplot_rows is None:
            raise ValueError(f"gnuplot output is not defined for {config.command}")
        lines = [_config_comment(config)]
        lines += [" ".join(str(c) for c in row) for row in gnuplot_rows]
        return "\n".join(lines)
    return _config_comment(config) + "\n" + table


# -- polynomial / rational argument handling ------------------------------------


def _poly_from_config(config: RunConfig) -> Poly:
    if config.poly is None:
        raise ValueError("a polynomial is required; pass --poly")
    text = config.poly
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read().strip()
    return parse_poly(text)


def _transcript_for(config: RunConfig, default_steps: int = 100):
    """Transcript from file when given, else a fresh in-memory expansion."""
    if config.transcript:
        return load_transcript(config.transcript)
    D = _poly_from_config(config)
    return expand(D, config.steps or default_steps,
                  thin_window=config.thin_window, pins=config.pins)


def _parse_window(text: str) -> tuple:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise ValueError("window must look like LO:HI")
    return int(lo), int(hi)


# -- expand ----------------------------------------------------------------------


def cmd_expand(config: RunConfig) -> int:
    t0 = time.monotonic()
    if config.resume:
        extra = config.steps or 100
        tr = resume_file(config.resume, extra)
        path = config.resume
    else:
        D = _poly_from_config(config)
        steps = config.steps or 100
        tr = expand(D, steps, thin_window=config.thin_window, pins=config.pins)
        path = config.out or "transcript.jsonl"
        write_transcript(tr, path)
    elapsed = time.monotonic() - t0
    degs = tr.degree_sequence()
    d = tr.D.degree // 2
    witness = next((n for n in range(1, len(degs)) if degs[n] == d), None)
    report = {
        "transcript": path,
        "steps": tr.last_n,
        "degree_sequence": degs,
        "pell_witness": witness,
        "wall_time_s": round(elapsed, 3),
    }
    table = "\n".join([
        f"D = {tr.D.to_text()}",
        f"transcript: {path} ({tr.last_n} steps)",
        f"degrees: {' '.join(str(x) for x in degs)}",
        f"pell witness: {witness if witness is not None else 'none observed'}",
        f"wall time: {elapsed:.3f} s",
    ])
    out = config.out if config.fmt == "json" and config.out != path else None
    _emit(_render(config, report, table), out)
    return EXIT_OK


# -- analyze subcommands ----------------------------------------------------------


def _analyze_pell(config: RunConfig) -> tuple:
    D = _poly_from_config(config)
    rep = pell_check(D, config.steps or 100)
    report = {
        "D": D.to_text(),
        "bound": rep.bound,
        "verdict": rep.verdict,
        "witness_index": rep.witness_index,
        "constant": None if rep.constant is None else rat_str(rep.constant),
        "solution": None if rep.solution is None else {
            "x": rep.solution[0].to_text(),
            "y": rep.solution[1].to_text(),
        },
    }
    lines = [f"D = {D.to_text()}", f"verdict: {rep.verdict}"]
    if rep.pellian:
        x, y = rep.solution
        lines += [
            f"witness index: {rep.witness_index}",
            f"norm constant: {rat_str(rep.constant)}",
            f"solution x = {x.to_text()}",
            f"         y = {y.to_text()}",
        ]
    return report, "\n".join(lines), None, None


def _analyze_degseq(config: RunConfig) -> tuple:
    D = _poly_from_config(config)
    steps = config.steps or 100
    degs = scan_degrees(D, steps)
    rep = detect_degree_period(degs, min_confirm=config.min_confirm or 3)
    report = {
        "D": D.to_text(),
        "steps": steps,
        "degrees": list(degs),
        "preperiod": rep.preperiod,
        "period": rep.period,
        "pattern": None if rep.pattern is None else list(rep.pattern),
        "repetend": None if rep.repetend is None else list(rep.repetend),
        "confirmations": rep.confirmations,
    }
    lines = [
        f"D = {D.to_text()}",
        f"degrees: {' '.join(str(x) for x in degs)}",
    ]
    if rep.found:
        fit = fit_degq_formula(rep)
        report["degq_slope"] = rat_str(fit.slope)
        report["degq_residues"] = [rat_str(r) for r in fit.residues]
        report["degq_valid_from"] = fit.valid_from
        lines += [
            f"preperiod: {rep.preperiod}   period: {rep.period}   "
            f"confirmations: {rep.confirmations}",
            f"pattern (canonical rotation): {','.join(str(x) for x in rep.pattern)}",
            f"repetend as observed: {','.join(str(x) for x in rep.repetend)}",
            f"deg q_n = {rat_str(fit.slope)}*n + r(n mod {rep.period}), "
            f"r = ({', '.join(rat_str(r) for r in fit.residues)}) "
            f"for n >= {fit.valid_from}",
        ]
    else:
        lines.append("no period confirmed at the requested confidence")
    gnuplot = [(n, deg) for n, deg in enumerate(degs)]
    csv = [("n", "deg_a")] + gnuplot
    return report, "\n".join(lines), csv, gnuplot


def _analyze_heights(config: RunConfig) -> tuple:
    tr = _transcript_for(config)
    hs = height_series(tr)
    report = {
        "D": tr.D.to_text(),
        "steps": tr.last_n,
        "rows": [
            {
                "n": r.n,
                "deg_q": r.deg_q,
                "h_a_n": r.part_h,
                "ha_a_n": r.part_ha,
                "h_q_n": r.den_h,
                "ha_q_n": r.den_ha,
            }
            for r in hs.rows
        ],
        "doubling": [
            {"n": n, "2n": m, "ratio": ratio} for n, m, ratio in hs.doubling
        ],
    }
    lines = [f"D = {tr.D.to_text()}",
             f"{'n':>4} {'deg q':>6} {'h(a_n)':>12} {'h_a(a_n)':>12} "
             f"{'h(q_n)':>12} {'h_a(q_n)':>12}"]
    for r in hs.rows:
        dq = "-" if r.deg_q is None else r.deg_q
        lines.append(f"{r.n:>4} {dq:>6} {r.part_h:>12.6f} {r.part_ha:>12.6f} "
                     f"{r.den_h:>12.6f} {r.den_ha:>12.6f}")
    lines.append("doubling ratios h(q_2n)/h(q_n):")
    for n, m, ratio in hs.doubling:
        lines.append(f"  n={n:<4} 2n={m:<4} ratio={ratio:.4f}")
    csv = [("n", "deg_q", "h_a_n", "ha_a_n", "h_q_n", "ha_q_n")]
    csv += [(r.n, r.deg_q if r.deg_q is not None else "",
             r.part_h, r.part_ha, r.den_h, r.den_ha) for r in hs.rows]
    gnuplot = [(r.n, r.den_h) for r in hs.rows]
    return report, "\n".join(lines), csv, gnuplot


def _analyze_zeros(config: RunConfig) -> tuple:
    probes = tuple(parse_rat(p) for p in config.probes) or (QQ(0),)
    if config.transcript:
        tr = load_transcript(config.transcript)
        occ = zero_occurrences(tr, probes)
        D = tr.D
    else:
        D = _poly_from_config(config)
        occ = zero_occurrences_fast(D, probes, config.steps or 100)
    report = {
        "D": D.to_text(),
        "bound": occ.bound,
        "route": occ.route,
        "occurrences": {
            rat_str(rho): [{"n": n, "multiplicity": m}
                           for n, m in occ.occurrences[rho]]
            for rho in occ.probes
        },
    }
    lines = [f"D = {D.to_text()}  (n = 1..{occ.bound}, route: {occ.route})"]
    for rho in occ.probes:
        hits = occ.occurrences[rho]
        if hits:
            desc = ", ".join(
                f"{n}" + (f" (mult {m})" if m > 1 else "") for n, m in hits
            )
        else:
            desc = "none"
        lines.append(f"q_n({rat_str(rho)}) = 0 at n = {desc}")
    return report, "\n".join(lines), None, None


def _analyze_mcmullen(config: RunConfig) -> tuple:
    D = _poly_from_config(config)
    rho = parse_rat(config.rho if config.rho is not None else "0")
    rep = mcmullen_experiment(D, rho, config.steps or 100)
    return _crossref_output(rep)


def _crossref_output(rep) -> tuple:
    report = {
        "D": rep.D.to_text(),
        "rho": rat_str(rep.rho),
        "modified": rep.modified.to_text(),
        "bound": rep.bound,
        "zeros": [{"n": n, "multiplicity": m} for n, m in rep.zeros],
        "degree_events": [{"m": m, "deg_a": d} for m, d in rep.events],
        "matches": [
            {
                "zero_index": m.zero_index,
                "deg_q": m.deg_q,
                "expected_deg": m.expected_deg,
                "event_index": m.event_index,
                "event_degree": m.event_degree,
                "matched": m.matched,
            }
            for m in rep.matches
        ],
        "consistent": rep.consistent,
    }
    lines = [
        f"D = {rep.D.to_text()}, probe {rat_str(rep.rho)}, n <= {rep.bound}",
        f"modified root of: {rep.modified.to_text()}",
        f"zeros of q_n at probe: "
        f"{[n for n, _ in rep.zeros] if rep.zeros else 'none'}",
        f"degree->=2 steps in modified expansion: "
        f"{[m for m, _ in rep.events] if rep.events else 'none'}",
    ]
    for m in rep.matches:
        lines.append(
            f"  zero at n={m.zero_index} (deg q = {m.deg_q}) -> "
            f"event m={m.event_index} (deg a = {m.event_degree})"
            if m.matched else
            f"  zero at n={m.zero_index}: NO matching degree event"
        )
    lines.append(f"cross-reference consistent: {rep.consistent}")
    return report, "\n".join(lines), None, None


def _analyze_elliptic(config: RunConfig) -> tuple:
    tr = _transcript_for(config)
    rep = elliptic_identities(tr)
    report = {
        "D": tr.D.to_text(),
        "n_max": rep.n_max,
        "gamma0_ok": rep.gamma0_ok,
        "normalized_quartic": rep.normalized,
        "summary": {
            name: {"passed": p, "applicable": a, "first_fail": f}
            for name, (p, a, f) in rep.summary.items()
        },
        "rows": [
            {
                "n": r.n,
                "applicable": r.applicable,
                "c": None if r.c is None else rat_str(r.c),
                "z": None if r.z is None else rat_str(r.z),
                "gamma": None if r.gamma is None else rat_str(r.gamma),
                "checks": r.checks,
            }
            for r in rep.rows
        ],
    }
    lines = [f"D = {tr.D.to_text()}  (1 <= n <= {rep.n_max})",
             f"gamma_0 = 0: {rep.gamma0_ok}"]
    for name, (p, a, f) in rep.summary.items():
        status = f"{p}/{a} pass" + ("" if f is None else f", first fail n={f}")
        lines.append(f"  {name:<16} {status}")
    return report, "\n".join(lines), None, None


def _analyze_rfactors(config: RunConfig) -> tuple:
    if config.window is None:
        raise ValueError("rfactors needs --window LO:HI")
    lo, hi = _parse_window(config.window)
    if config.transcript:
        tr = load_transcript(config.transcript)
    else:
        D = _poly_from_config(config)
        tr = expand(D, max(hi, config.steps or hi))
    ledger = rn_factor_ledger(tr, lo, hi, seed=config.seed or 0)
    report = {"D": tr.D.to_text(), **ledger.to_json()}
    lines = [f"D = {tr.D.to_text()}  R_n factor ledger, {lo} <= n <= {hi}",
             f"recurring pool: "
             f"{[f.to_text() for f in ledger.recurring_pool] or 'empty'}"]
    for row in ledger.rows:
        new_desc = "; ".join(
            f"{f.to_text()}" + (f" ^{m}" if m > 1 else "")
            for f, m in row.new
        ) or "none"
        rec_desc = "; ".join(
            f"{f.to_text()}" + (f" ^{m}" if m > 1 else "")
            for f, m in row.recurring
        ) or "-"
        lines.append(f"  n={row.n:<3} new: {new_desc}   recurring: {rec_desc}")
    return report, "\n".join(lines), None, None


def _analyze_hankel(config: RunConfig) -> tuple:
    D = _poly_from_config(config)
    max_m = config.max_m or 20
    sq = sqrt_series(D)
    hset = hankel_nonzero_set(sq, max_m)
    degs = scan_degrees(D, max_m + 2)
    dq = denominator_degrees(degs)
    attained = sorted({v for v in dq[1:] if v is not None and v <= max_m})
    report = {
        "D": D.to_text(),
        "max_m": max_m,
        "hankel_nonzero": sorted(hset),
        "denominator_degrees": attained,
        "match": sorted(hset) == attained,
    }
    lines = [
        f"D = {D.to_text()}  (m <= {max_m})",
        f"{{m : H_m != 0}}   = {sorted(hset)}",
        f"{{deg q_n}} <= {max_m} = {attained}",
        f"match: {report['match']}",
    ]
    if not report["match"]:
        raise _HankelMismatch(
            "Hankel nonvanishing set disagrees with attained denominator "
            f"degrees: {sorted(hset)} vs {attained}"
        )
    return report, "\n".join(lines), None, None


def _analyze_degbound(config: RunConfig) -> tuple:
    D = _poly_from_config(config)
    rep = degree_bound_check(D, config.steps or 100,
                             min_confirm=config.min_confirm or 3)
    report = {
        "D": D.to_text(),
        "d": rep.d,
        "bound": rat_str(rep.bound),
        "tail_range": rep.tail_range,
        "tail_max": rep.tail_max,
        "tail_pass": rep.tail_pass,
        "period": rep.period.period,
        "preperiod": rep.period.preperiod,
        "exception_found": rep.exception_found,
        "square_divisor_probes": [
            {
                "r": p.r.to_text(),
                "d_star": p.d_star.to_text(),
                "deg_d_star": p.deg_d_star,
                "above_threshold": p.above_threshold,
                "outcome": p.outcome,
                "witness_index": p.witness_index,
            }
            for p in rep.probes
        ],
    }
    lines = [f"D = {D.to_text()}: tail degree bound d/2 = {rat_str(rep.bound)}"]
    if rep.tail_max is None:
        lines.append("no confirmed period; tail check unavailable")
    else:
        lines.append(
            f"max deg a_n over last period (n in {rep.tail_range}): "
            f"{rep.tail_max} -> {'pass' if rep.tail_pass else 'FAIL'}"
        )
    lines.append("square divisor scan:")
    for p in rep.probes:
        lines.append(
            f"  r = {p.r.to_text():<12} D* deg {p.deg_d_star}: {p.outcome}"
        )
    return report, "\n".join(lines), None, None


_ANALYZE = {
    "pell": _analyze_pell,
    "degseq": _analyze_degseq,
    "heights": _analyze_heights,
    "zeros": _analyze_zeros,
    "mcmullen": _analyze_mcmullen,
    "elliptic": _analyze_elliptic,
    "rfactors": _analyze_rfactors,
    "hankel": _analyze_hankel,
    "degbound": _analyze_degbound,
}


def cmd_analyze(config: RunConfig) -> int:
    handler = _ANALYZE[config.subcommand]
    report, table, csv_rows, gnuplot_rows = handler(config)
    _emit(_render(config, report, table, csv_rows, gnuplot_rows), config.out)
    return EXIT_OK


# -- series ------------------------------------------------------------------------


def cmd_series(config: RunConfig) -> int:
    D = _poly_from_config(config)
    K = config.precision or 10
    sq = sqrt_series(D)
    a0 = sq.polynomial_part()
    tail = [(j, sq.tail_coefficient(j)) for j in range(1, K + 1)]
    report = {
        "D": D.to_text(),
        "polynomial_part": a0.to_text(),
        "tail": [{"exponent": -j, "coefficient": rat_str(c)} for j, c in tail],
    }
    terms = [a0.to_text()]
    for j, c in tail:
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = rat_str(abs(c))
        terms.append(f"{sign} {mag}*t^-{j}")
    table = (f"sqrt({D.to_text()}) = " + " ".join(terms)
             + f" + O(t^-{K + 1})")
    _emit(_render(config, report, table), config.out)
    return EXIT_OK


# -- sweep ---------------------------------------------------------------------------


def _parse_grid(text: str) -> tuple:
    """Grid syntax: name=A..B (integer range) or name=v1,v2,v3 (rationals)."""
    name, sep, rest = text.partition("=")
    name = name.strip()
    if not sep or not name.isidentifier():
        raise ValueError("grid must look like name=1..20 or name=1,2,3/2")
    rest = rest.strip()
    if ".." in rest:
        lo_s, _, hi_s = rest.partition("..")
        lo, hi = int(lo_s), int(hi_s)
        values = [QQ(v) for v in range(lo, hi + 1)]
    else:
        values = [parse_rat(v.strip()) for v in rest.split(",") if v.strip()]
    return name, values


def _sweep_instance(args) -> dict:
    family, name, value_text, steps = args
    value = parse_rat(value_text)
    text = family.replace("{" + name + "}", f"({value_text})")
    record = {"family": family, name: value_text, "steps": steps}
    try:
        D = parse_poly(text)
        tr = expand(D, steps)
        degs = tr.degree_sequence()
        d = D.degree // 2
        witness = next((n for n in range(1, len(degs)) if degs[n] == d), None)
        hs = height_series(tr)
        ratios = {
            f"{n}->{2*n}": round(r, 6)
            for n, m, r in hs.doubling
            if n in (steps // 4, steps // 2)
            for r in (hs.doubling and [r2 for a, b, r2 in hs.doubling if a == n][:1] or [])
        }
        record["result"] = {
            "D": D.to_text(),
            "degrees": degs,
            "pell_verdict": "Pellian" if witness is not None
                            else f"NoWitnessWithin({steps})",
            "witness_index": witness,
            "height_doubling": ratios,
        }
    except PellcfError as exc:
        record["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except PolyParseError as exc:
        record["error"] = {"type": "PolyParseError", "message": str(exc)}
    return record


def cmd_sweep(config: RunConfig) -> int:
    if not config.family or not config.grid:
        raise ValueError("sweep needs --family and --grid")
    name, values = _parse_grid(config.grid)
    if "{" + name + "}" not in config.family:
        raise ValueError(f"family template does not mention {{{name}}}")
    steps = config.steps or 60
    store_path = config.store or os.path.join(
        os.environ.get("PELLCF_CACHE_DIR", "."), "sweep.jsonl"
    )
    done = set()
    if os.path.exists(store_path):
        with open(store_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    done.add(json.loads(line).get("hash"))
    jobs = []
    for v in values:
        inst = RunConfig(command="sweep", family=config.family,
                         grid=f"{name}={rat_str(v)}", steps=steps)
        h = inst.instance_hash()
        if h not in done:
            jobs.append((h, (config.family, name, rat_str(v), steps)))
    parallelism = config.parallelism or int(
        os.environ.get("PELLCF_PARALLELISM", "0")
    ) or (os.cpu_count() or 1)
    results = []
    if jobs:
        if parallelism > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=parallelism) as pool:
                for (h, _), rec in zip(jobs, pool.map(_sweep_instance,
                                                      [j for _, j in jobs])):
                    rec["hash"] = h
                    results.append(rec)
        else:
            for h, job in jobs:
                rec = _sweep_instance(job)
                rec["hash"] = h
                results.append(rec)
    with open(store_path, "a", newline="\n") as fh:
        for rec in results:
            fh.write(json.dumps(rec, separators=(",", ":"), sort_keys=True))
            fh.write("\n")
    skipped = len(values) - len(jobs)
    print(f"sweep: {len(results)} instances computed, {skipped} already in "
          f"{store_path}")
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------------

_GRAMMAR = """polynomial grammar:
  one variable t; terms joined by + or -; each term is an optional
  rational coefficient (like 3, -1/2, 7/4), an optional '*', and an
  optional power of t written t, t^k, or t**k.
  examples: "t^4 + t^2 + t", "t^6 - 3/4*t^2 + 1", "2*t^2 - 1/2"
"""


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pellcf",
        description="Exact continued fractions of square roots of "
                    "polynomials over Q.",
        epilog=_GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("--version", action="version",
                    version=f"pellcf {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, steps_default=None):
        p.add_argument("--poly", help="polynomial text, or @file")
        p.add_argument("--steps", type=int, default=steps_default,
                       help="expansion step bound N (records 0..N)")
        p.add_argument("--format", dest="fmt", default="table",
                       choices=["table", "json", "csv", "gnuplot"])
        p.add_argument("--out", help="write output to this file")

    pe = sub.add_parser("expand", help="run the expansion, write a transcript")
    common(pe)
    pe.add_argument("--resume", help="existing transcript to extend in place")
    pe.add_argument("--thin-window", type=int, dest="thin_window",
                    help="keep full polynomials only for the last W records")
    pe.add_argument("--pin", type=int, action="append", dest="pins",
                    default=[], help="index to keep full despite thinning")

    pa = sub.add_parser("analyze", help="run one analysis")
    asub = pa.add_subparsers(dest="subcommand", required=True)
    for name, help_text in [
        ("pell", "Pell witness scan and solution"),
        ("degseq", "degree sequence periodicity"),
        ("heights", "height growth tables"),
        ("zeros", "probe-point zeros of q_n"),
        ("mcmullen", "modified-surd degree cross reference"),
        ("elliptic", "quartic identity chain"),
        ("rfactors", "R_n factor ledger"),
        ("hankel", "Hankel determinants vs attained degrees"),
        ("degbound", "tail degree bound and square-divisor scan"),
    ]:
        p = asub.add_parser(name, help=help_text)
        common(p)
        p.add_argument("--transcript", help="read records from this file")
        if name == "zeros":
            p.add_argument("--probe", action="append", dest="probes",
                           default=[], help="rational probe point, repeatable")
        if name == "mcmullen":
            p.add_argument("--rho", help="rational probe point")
        if name == "rfactors":
            p.add_argument("--window", help="index window LO:HI")
            p.add_argument("--seed", type=int, default=0)
        if name == "hankel":
            p.add_argument("--max-m", type=int, dest="max_m", default=20)
        if name in ("degseq", "degbound"):
            p.add_argument("--min-confirm", type=int, dest="min_confirm",
                           default=3)

    ps = sub.add_parser("series", help="print the square root series")
    common(ps)
    ps.add_argument("--precision", type=int, default=10,
                    help="tail coefficients through t^-K")

    pw = sub.add_parser("sweep", help="run a family of expansions")
    pw.add_argument("--family", required=True,
                    help="polynomial template, e.g. 't^6+t+{lam}'")
    pw.add_argument("--grid", required=True,
                    help="grid like lam=1..20 or lam=1,3/2,2")
    pw.add_argument("--steps", type=int, default=60)
    pw.add_argument("--store", help="append-only JSONL result store")
    pw.add_argument("--parallelism", type=int,
                    help="worker count (or PELLCF_PARALLELISM)")
    pw.add_argument("--format", dest="fmt", default="table")
    return ap


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    kwargs = {}
    for k, v in vars(ns).items():
        if k in fields and v is not None:
            kwargs[k] = tuple(v) if isinstance(v, list) else v
    return RunConfig(**kwargs)


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 0
        return EXIT_PARSE if code != 0 else EXIT_OK
    config = _config_from_args(ns)
    try:
        if config.command == "expand":
            return cmd_expand(config)
        if config.command == "analyze":
            return cmd_analyze(config)
        if config.command == "series":
            return cmd_series(config)
        if config.command == "sweep":
            return cmd_sweep(config)
        raise ValueError(f"unknown command {config.command}")
    except PolyParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _HankelMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except InternalInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InvalidPolynomialError, ThinRecordError,
            TranscriptFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
