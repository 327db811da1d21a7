"""Command-line front end.

Commands: dict, sequence, check, suite, bench.  Flag precedence is
flags > environment (QCARTIER_*) > defaults.  Exit codes: 0 when nothing
failed, 1 when any check failed, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import __version__
from .cache import CacheStore, default_cache_dir
from .checks import CheckEnv, plan_suite, run_check, run_suite
from .modforms import build_dictionary, verify_sturm_identification
from .report import (
    CHECK_IDS,
    CheckSpec,
    RunConfig,
    SuiteReport,
    emit_report,
)
from .rings import ExactIntegers, PrimeContext, RingError
from .sequences import build_sequence_cache

_ENV_PREFIX = "QCARTIER_"


class UsageError(Exception):
    pass


def _env_default(name: str, fallback):
    raw = os.environ.get(_ENV_PREFIX + name.upper())
    if raw is None:
        return fallback
    return raw


def _parse_int_list(text: str) -> tuple:
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcartier",
        description="Exact q-series laboratory and supercongruence verifier.",
    )
    parser.add_argument("--version", action="version", version=f"qcartier {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--precision", type=int, default=None, help="q-precision override (>= p+1)")
        p.add_argument(
            "--backend",
            choices=("residue", "exact"),
            default=_env_default("backend", "residue"),
        )
        p.add_argument("--cache-dir", default=_env_default("cache_dir", None))
        p.add_argument("--no-cache", action="store_true", help="skip the on-disk cache")
        p.add_argument(
            "--format",
            dest="report_format",
            choices=("human", "json", "tsv"),
            default=_env_default("format", "human"),
        )
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=int(_env_default("seed", 0)))
        p.add_argument("--jobs", type=int, default=int(_env_default("jobs", 1)))
        p.add_argument("--ell", default="1,2,3", help="layer subset, e.g. 1,2")
        p.add_argument("--m-max", type=int, default=3)
        p.add_argument("--r-max", type=int, default=2)
        p.add_argument("--timings", action="store_true", help="include wall-clock columns")

    p_dict = sub.add_parser("dict", help="build the modular dictionary and print a summary")
    common(p_dict)
    p_dict.add_argument("--prime", type=int, default=7, help="prime for the residue backend")

    p_seq = sub.add_parser("sequence", help="print or export the integer sequence tables")
    common(p_seq)
    p_seq.add_argument("--n-max", type=int, default=50)

    p_check = sub.add_parser("check", help="run a single named check")
    common(p_check)
    p_check.add_argument("--id", required=True, choices=CHECK_IDS)
    p_check.add_argument("--prime", type=int, default=None)

    p_suite = sub.add_parser("suite", help="run the full verification protocol")
    common(p_suite)
    p_suite.add_argument(
        "--primes",
        default=_env_default("primes", "7,13"),
        help="comma-separated primes, e.g. 7,13,19,31,5,11",
    )
    p_suite.add_argument(
        "--diagnostics",
        action="store_true",
        help="include the report-only transport diagnostic",
    )

    p_bench = sub.add_parser("bench", help="time dictionary and defect construction")
    common(p_bench)
    p_bench.add_argument("--primes", default="7,13")
    return parser


def _config_from_args(args) -> RunConfig:
    primes = _parse_int_list(getattr(args, "primes", "")) or (
        (args.prime,) if getattr(args, "prime", None) else ()
    )
    cache_dir = None if args.no_cache else (args.cache_dir or str(default_cache_dir()))
    return RunConfig(
        command=args.command,
        primes=primes,
        ell=_parse_int_list(args.ell) or (1, 2, 3),
        m_max=args.m_max,
        r_max=args.r_max,
        precision=args.precision,
        backend=args.backend,
        cache_dir=cache_dir,
        report_format=args.report_format,
        out=args.out,
        seed=args.seed,
        jobs=args.jobs,
        diagnostics=getattr(args, "diagnostics", False),
        timings=args.timings,
    )


def _deliver(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_dict(args, config: RunConfig) -> int:
    ctx = PrimeContext(args.prime, precision=config.precision)
    n_max = config.precision or min(ctx.default_precision, 200)
    ring = ctx.residue_ring() if config.backend == "residue" else ExactIntegers()
    d = build_dictionary(n_max, ring)
    lines = [f"modular dictionary at precision {n_max} over {ring!r}"]
    for name in d.names():
        s = d.series(name)
        head = ", ".join(str(s.coefficient(n)) for n in range(s.lowest, min(s.lowest + 5, s.precision)))
        lines.append(f"  {name:8s} q^{s.lowest}*({head}, ...)  [{d.constructions.get(name, '?')}]")
    lines.append(f"  sturm identification: {'ok' if verify_sturm_identification(n_max, d) else 'MISMATCH'}")
    _deliver("\n".join(lines) + "\n", config.out)
    return 0


def _cmd_sequence(args, config: RunConfig) -> int:
    cache = build_sequence_cache(args.n_max)
    if config.report_format == "json":
        import json

        _deliver(json.dumps(cache.to_json_dict(), sort_keys=True, indent=2) + "\n", config.out)
    else:
        rows = ["n\tA_n\ts(n)\tbeta(n)\tc_n"]
        for n in range(args.n_max + 1):
            s_n = cache.s_vals[n] if n >= 1 else "-"
            b_n = cache.beta_vals[n] if n >= 1 else "-"
            rows.append(f"{n}\t{cache.a_mix[n]}\t{s_n}\t{b_n}\t{cache.c_mix[n]}")
        _deliver("\n".join(rows) + "\n", config.out)
    return 0


def _cmd_check(args, config: RunConfig) -> int:
    spec = CheckSpec(
        id=args.id,
        prime=args.prime,
        ell=config.ell,
        m_max=config.m_max,
        r_max=config.r_max,
        precision_override=config.precision,
    )
    env = CheckEnv(config, cache=_store_for(config))
    t0 = time.perf_counter()
    report = run_check(spec, env)
    suite = SuiteReport(
        config=config,
        reports=[report],
        total_elapsed_ms=(time.perf_counter() - t0) * 1000.0,
    )
    _deliver(emit_report(suite), config.out)
    return 1 if suite.aggregate == "Fail" else 0


def _cmd_suite(args, config: RunConfig) -> int:
    env = CheckEnv(config, cache=_store_for(config))
    suite = run_suite(config, env)
    _deliver(emit_report(suite), config.out)
    return 1 if suite.aggregate == "Fail" else 0


def _cmd_bench(args, config: RunConfig) -> int:
    from .operators import build_defects

    rows = ["p\tbackend\tN\tdict_ms\tdefects_ms"]
    for p in config.primes:
        ctx = PrimeContext(p, precision=config.precision)
        n_max = config.precision or (5 * p * p + 2 * p + 1)
        ring = ctx.residue_ring() if config.backend == "residue" else ExactIntegers()
        t0 = time.perf_counter()
        d = build_dictionary(n_max, ring)
        t1 = time.perf_counter()
        if ctx.split:
            build_defects(d, ctx)
        t2 = time.perf_counter()
        rows.append(
            f"{p}\t{config.backend}\t{n_max}\t{(t1 - t0) * 1000:.1f}\t"
            + (f"{(t2 - t1) * 1000:.1f}" if ctx.split else "-")
        )
    _deliver("\n".join(rows) + "\n", config.out)
    return 0


def _store_for(config: RunConfig) -> CacheStore | None:
    return CacheStore(config.cache_dir) if config.cache_dir else CacheStore(None)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        config = _config_from_args(args)
        handler = {
            "dict": _cmd_dict,
            "sequence": _cmd_sequence,
            "check": _cmd_check,
            "suite": _cmd_suite,
            "bench": _cmd_bench,
        }[args.command]
        return handler(args, config)
    except (UsageError, RingError, ValueError) as exc:
        print(f"qcartier: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
