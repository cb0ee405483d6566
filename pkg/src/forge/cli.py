"""Command-line entry point ``forge``.

Exit codes: 0 completed, 1 failed or incomplete run, 2 counterexample
candidate, 3 integrity error, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import asymptotics, collatz, gilbreath, goldbach, partitions, runner
from .errors import (
    CheckpointParseError,
    CollatzOverflowError,
    CounterexampleFound,
    DomainError,
    IntegrityError,
    OutOfRangeError,
)
from .primes import build_table

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_COUNTEREXAMPLE = 2
EXIT_INTEGRITY = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which would read as a counterexample
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int(text: str) -> int:
    """Integers, also written as 1e6 or 10**6."""
    text = text.strip().replace("_", "")
    try:
        if "**" in text:
            base, exp = text.split("**")
            return int(base) ** int(exp)
        if "e" in text.lower():
            mant, exp = text.lower().split("e")
            return int(mant) * 10 ** int(exp)
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _out(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows([repr(v) if isinstance(v, float) else v for v in r] for r in rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# runner commands


def _job_status_code(report: runner.JobReport) -> int:
    if report.status == runner.HALTED:
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK if report.status == runner.COMPLETED else EXIT_FAILED


def _print_job(report: runner.JobReport) -> None:
    print(f"job {report.job_id} [{report.spec.task}] {report.status}: "
          f"{len(report.checkpoints)}/{len(report.spec.chunks())} chunks")
    print(json.dumps(report.aggregate, default=str))
    if report.witness is not None:
        print(f"witness: {report.witness}")
    if report.rechecked:
        print(f"rechecked {len(report.rechecked)} chunk(s), digests matched")


def cmd_run(a) -> int:
    params = {}
    if a.budget is not None:
        params["step_budget"] = a.budget
    if a.method is not None:
        params["method"] = a.method
    if a.delta is not None:
        params["delta"] = a.delta
    if a.no_auto_delta:
        params["auto_delta"] = False
    if a.checkpoints:
        params["checkpoints"] = a.checkpoints
    if a.step is not None:
        params["step"] = a.step
    spec = runner.JobSpec(
        a.task, a.lo, a.hi, a.chunk,
        a.workers if a.workers is not None else runner.default_workers(),
        params, a.out,
    ).validate()
    report = runner.run_job(spec)
    _print_job(report)
    return _job_status_code(report)


def cmd_resume(a) -> int:
    report = runner.resume_job(a.path, recheck_fraction=a.recheck, seed=a.seed)
    _print_job(report)
    return _job_status_code(report)


def cmd_report(a) -> int:
    report = runner.load_report(a.path)
    _out(runner.emit_report(report, a.format), a.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# collatz


def cmd_collatz_verify(a) -> int:
    res = collatz.verify_interval(a.lo, a.hi, a.budget)
    print(f"[{a.lo}, {a.hi}] {res.status}: worst stopping time {res.worst_stopping_time}, "
          f"worst excursion {res.worst_excursion}")
    if res.status == collatz.CANDIDATE:
        print(f"witness: {res.witness}")
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK if res.verified else EXIT_FAILED


def cmd_collatz_stats(a) -> int:
    stats = collatz.batch_stats(a.lo, a.hi, a.budget)
    print(f"seeds {stats.size}; max total steps {int(stats['total_steps'].max())} "
          f"at {int(stats['seed'][stats['total_steps'].argmax()])}")
    try:
        print(f"odd-step ratio {collatz.odd_ratio_estimate(a.lo, a.hi):.6f}")
    except DomainError as exc:
        print(f"odd-step ratio: {exc}")
    for law in (collatz.EXCURSION_VS_N2, collatz.STOPPING_VS_LOGN):
        try:
            fit = collatz.scaling_fit(stats, law)
            print(f"{law}: slope {fit.slope:.4f}, intercept {fit.intercept:.4f}, blocks {fit.blocks}")
        except DomainError as exc:
            print(f"{law}: {exc}")
    return EXIT_OK


def cmd_collatz_trajectory(a) -> int:
    rec = collatz.trajectory(a.n, a.budget)
    print(f"seed {rec.seed}: {rec.total_steps} steps, stopping time {rec.stopping_time}, "
          f"excursion {rec.excursion}, mean log odd ratio {rec.odd_ratio_log_mean:.6f}")
    if a.show:
        print(" ".join(map(str, collatz.iterates(a.n, a.budget))))
    return EXIT_OK


# ---------------------------------------------------------------------------
# primes-based commands


def cmd_gilbreath(a) -> int:
    table = build_table(max(3, a.prime_bound - 1))
    v = gilbreath.verify_prime_bound(table, a.prime_bound)
    print(f"primes < {v.prime_bound}: N={v.base_count}, K={v.K}, width at K={v.N}, "
          f"depth_guaranteed={v.depth_guaranteed}, {v.status}")
    if v.status == gilbreath.COUNTEREXAMPLE:
        print(f"first column breaks at row {v.offending_k}")
        return EXIT_COUNTEREXAMPLE
    return EXIT_OK if v.status == gilbreath.CERTIFIED else EXIT_FAILED


def cmd_goldbach_verify(a) -> int:
    cfg = goldbach.MethodConfig(a.method, a.delta, a.lo, a.hi)
    reach = (a.hi - a.lo if a.method == 1 else 0) + (goldbach.DELTA_CAP if a.auto else a.delta)
    table = build_table(max(a.hi, reach))
    rep = goldbach.verify_interval(cfg, table, auto_delta=a.auto)
    print(f"method {a.method} on [{a.lo}, {a.hi}]: {rep.status} with delta {rep.delta_used} "
          f"(tried {rep.delta_history}); {rep.evens_checked} evens")
    if rep.max_p_min is not None:
        print(f"max p_min {rep.max_p_min}")
    if rep.uncovered:
        print(f"uncovered: {rep.uncovered[:20]}{' ...' if len(rep.uncovered) > 20 else ''}")
        return EXIT_FAILED
    return EXIT_OK


def cmd_goldbach_minimal(a) -> int:
    table = build_table(max(4, a.n))
    part = goldbach.minimal_partition(a.n, table, with_count=True)
    print(f"{part.even_n} = {part.p_min} + {part.q_min}  (g = {part.count_g})")
    return EXIT_OK


def cmd_goldbach_sail(a) -> int:
    table = build_table(max(6, a.to))
    scan = goldbach.s_of_p_scan(table, a.to)
    _out(_csv_text(["even_n", "p_min"], zip(scan.evens.tolist(), scan.p_min.tolist())), a.out)
    if a.out:
        last = scan.records[-1]
        print(f"{scan.evens.size} evens, {len(scan.records)} distinct p_min; largest p={last.p} first at {last.S_p}")
    return EXIT_OK


def cmd_goldbach_hl(a) -> int:
    lo = a.lo if a.lo is not None else max(6, a.to - 10**4)
    table = build_table(max(6, a.to))
    cmp = goldbach.hl_comparison(lo, a.to, table)
    ratio = cmp.ratio
    print(f"evens {cmp.n.size} in [{int(cmp.n[0])}, {int(cmp.n[-1])}]: r(n)/estimate mean {ratio.mean():.4f}, "
          f"min {ratio.min():.4f}, max {ratio.max():.4f}")
    if a.out:
        rows = zip(cmp.n.tolist(), cmp.r.tolist(), cmp.estimate.tolist(), ratio.tolist())
        _out(_csv_text(["n", "r", "estimate", "ratio"], rows), a.out)
    return EXIT_OK


def cmd_pnt_table(a) -> int:
    table = build_table(max(a.checkpoints))
    rows = asymptotics.pnt_table(table, a.checkpoints)
    cols = ["n", "pi", "n_over_logn", "li", "li_error", "legendre", "legendre_error"]
    _out(_csv_text(cols, ([getattr(r, c) for c in cols] for r in rows)), a.out)
    return EXIT_OK


def cmd_pnt_theta(a) -> int:
    table = build_table(max(2, a.x))
    theta = asymptotics.chebyshev_theta(table, a.x)
    print(f"theta({a.x}) = {theta!r}; theta/x = {theta / a.x:.8f}")
    return EXIT_OK


def cmd_gaps_stats(a) -> int:
    table = build_table(max(3, a.to))
    g = asymptotics.gap_statistics(table, a.to)
    print(f"bound {g.bound}: {g.total} gaps, twins {g.twin_count}, champion gap {g.champion_gap}, "
          f"cramer max {g.cramer_max:.6f} at p={g.cramer_argmax}")
    if a.out:
        _out(_csv_text(["gap", "count"], sorted(g.histogram.items())), a.out)
    return EXIT_OK


def cmd_gaps_bands(a) -> int:
    rows = asymptotics.gap_champion_bands(a.kmax)
    _out(_csv_text(["k", "log10_E", "log10_h"], ((b.k, b.log10_primorial, b.log10_h) for b in rows)), None)
    return EXIT_OK


def cmd_partitions_exact(a) -> int:
    print(partitions.partition_exact(a.n))
    return EXIT_OK


def cmd_partitions_compare(a) -> int:
    values = partitions.compare(range(a.lo, a.to + 1, a.step))
    rows = ([v.n, v.exact, v.principal_term, v.crude, v.principal_ratio, v.crude_ratio] for v in values)
    _out(_csv_text(runner.PARTITION_COLUMNS, rows), a.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="forge", description="Verification and estimation engine for experimental number theory.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a chunked job with checkpoints")
    run.add_argument("--task", required=True, choices=sorted(runner.SCHEMAS))
    run.add_argument("--from", dest="lo", type=_int, required=True)
    run.add_argument("--to", dest="hi", type=_int, required=True)
    run.add_argument("--chunk", type=_int, required=True)
    run.add_argument("--workers", type=int, help=f"default: ${runner.WORKERS_ENV} or the CPU count")
    run.add_argument("--out", required=True, help="checkpoint file")
    run.add_argument("--budget", type=_int, help="collatz step budget")
    run.add_argument("--method", type=int, choices=(1, 2))
    run.add_argument("--delta", type=_int)
    run.add_argument("--no-auto-delta", action="store_true")
    run.add_argument("--checkpoints", type=_int, nargs="+")
    run.add_argument("--step", type=_int)
    run.set_defaults(func=cmd_run)

    res = sub.add_parser("resume", help="finish a job from its checkpoint file")
    res.add_argument("path")
    res.add_argument("--recheck", type=float, default=0.01, help="fraction of chunks to recompute")
    res.add_argument("--seed", type=int, default=0)
    res.set_defaults(func=cmd_resume)

    rep = sub.add_parser("report", help="emit a CSV or JSON report from a checkpoint file")
    rep.add_argument("path")
    rep.add_argument("--format", choices=("csv", "json"), default="csv")
    rep.add_argument("--out")
    rep.set_defaults(func=cmd_report)

    col = sub.add_parser("collatz").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    c = col.add_parser("verify")
    c.add_argument("--from", dest="lo", type=_int, required=True)
    c.add_argument("--to", dest="hi", type=_int, required=True)
    c.add_argument("--budget", type=_int, default=collatz.DEFAULT_BUDGET)
    c.set_defaults(func=cmd_collatz_verify)
    c = col.add_parser("stats")
    c.add_argument("--from", dest="lo", type=_int, required=True)
    c.add_argument("--to", dest="hi", type=_int, required=True)
    c.add_argument("--budget", type=_int, default=collatz.DEFAULT_BUDGET)
    c.set_defaults(func=cmd_collatz_stats)
    c = col.add_parser("trajectory")
    c.add_argument("n", type=_int)
    c.add_argument("--budget", type=_int, default=collatz.DEFAULT_BUDGET)
    c.add_argument("--show", action="store_true", help="print every iterate")
    c.set_defaults(func=cmd_collatz_trajectory)

    gil = sub.add_parser("gilbreath").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    g = gil.add_parser("verify")
    g.add_argument("--prime-bound", type=_int, required=True, help="use all primes below this bound")
    g.set_defaults(func=cmd_gilbreath)

    gb = sub.add_parser("goldbach").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    g = gb.add_parser("verify")
    g.add_argument("--from", dest="lo", type=_int, required=True)
    g.add_argument("--to", dest="hi", type=_int, required=True)
    g.add_argument("--method", type=int, choices=(1, 2), default=2)
    g.add_argument("--delta", type=_int, default=64)
    g.add_argument("--auto", action="store_true", help="double delta until covered (cap 10^4)")
    g.set_defaults(func=cmd_goldbach_verify)
    g = gb.add_parser("minimal")
    g.add_argument("n", type=_int)
    g.set_defaults(func=cmd_goldbach_minimal)
    g = gb.add_parser("sail")
    g.add_argument("--to", type=_int, required=True)
    g.add_argument("--out")
    g.set_defaults(func=cmd_goldbach_sail)
    g = gb.add_parser("hl")
    g.add_argument("--to", type=_int, required=True)
    g.add_argument("--from", dest="lo", type=_int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_goldbach_hl)

    pnt = sub.add_parser("pnt").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    q = pnt.add_parser("table")
    q.add_argument("--checkpoints", type=_int, nargs="+", required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_pnt_table)
    q = pnt.add_parser("theta")
    q.add_argument("--x", type=_int, required=True)
    q.set_defaults(func=cmd_pnt_theta)

    gaps = sub.add_parser("gaps").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    q = gaps.add_parser("stats")
    q.add_argument("--to", type=_int, required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_gaps_stats)
    q = gaps.add_parser("bands")
    q.add_argument("--kmax", type=int, required=True)
    q.set_defaults(func=cmd_gaps_bands)

    par = sub.add_parser("partitions").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    q = par.add_parser("exact")
    q.add_argument("n", type=_int)
    q.set_defaults(func=cmd_partitions_exact)
    q = par.add_parser("compare")
    q.add_argument("--to", type=_int, required=True)
    q.add_argument("--from", dest="lo", type=_int, default=1)
    q.add_argument("--step", type=_int, default=1)
    q.add_argument("--out")
    q.set_defaults(func=cmd_partitions_compare)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        code = args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        code = EXIT_USAGE
    except CounterexampleFound as exc:
        print(f"COUNTEREXAMPLE {exc}", file=sys.stderr)
        code = EXIT_COUNTEREXAMPLE
    except (IntegrityError, CheckpointParseError) as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        code = EXIT_INTEGRITY
    except (DomainError, OutOfRangeError) as exc:
        print(f"forge: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except CollatzOverflowError as exc:
        print(f"forge: {exc}", file=sys.stderr)
        code = EXIT_FAILED
    except SystemExit as exc:  # --help
        code = exc.code if isinstance(exc.code, int) else EXIT_OK
    return code


if __name__ == "__main__":
    sys.exit(main())
