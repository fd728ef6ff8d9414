"""``gradrecon`` command line.

Exit codes: 0 success, 2 usage error, 3 unreadable/unwritable file,
4 malformed CSV, 5 invalid value, 6 diverged reconstruction.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import io as csvio
from .engine import DecaySchedule, DivergenceError, GradientConfig, reconstruct
from .experiments import (
    CASES,
    DEFAULT_COMPONENTS,
    NoiseSweepSpec,
    SweepSpec,
    emit_case_study,
    run_noise_sweep,
    run_parameter_sweep,
    table1_spec,
    table2_spec,
)
from .signal import NoiseSpec, add_noise, generate_test_signal, random_mask

PROG = "gradrecon"
EXIT_USAGE, EXIT_IO, EXIT_CSV, EXIT_VALUE, EXIT_DIVERGED = 2, 3, 4, 5, 6

log = logging.getLogger(PROG)


class UsageError(Exception):
    pass


def _component(text: str) -> tuple[float, int]:
    try:
        amp, cycles = text.split(":")
        return float(amp), int(cycles)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected AMPLITUDE:CYCLES, got {text!r}")


def _pair(text: str) -> tuple[float, float]:
    try:
        d0, mu0 = text.split(":")
        return float(d0), float(mu0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected D0:MU0, got {text!r}")


def _add_signal_flags(p):
    p.add_argument("--n", type=int, default=128,
                   help="number of samples N of the test signal (default 128)")
    p.add_argument("--component", type=_component, action="append", metavar="AMP:CYCLES",
                   help="add AMP*sin(2*pi*CYCLES*t/N) to the test signal; repeatable "
                        "(default 3:10 and 1:15, the two-tone benchmark signal)")


def _add_engine_flags(p, iterations=320):
    g = p.add_argument_group("gradient engine")
    g.add_argument("--d0", type=float, default=10.0,
                   help="initial step d used to probe each missing sample at +d and -d "
                        "for the finite-difference gradient (default 10)")
    g.add_argument("--mu", type=float, default=20.0,
                   help="initial gain mu of the update x <- x - mu*E applied to the "
                        "missing samples (default 20; mu = 2*d0 works best)")
    g.add_argument("--p", type=float, default=1.0,
                   help="norm order p of the concentration measure (1/N)*sum|S|^(1/p) (default 1)")
    g.add_argument("--iterations", type=int, default=iterations,
                   help=f"iteration budget (default {iterations} = 16 stages of 20)")
    g.add_argument("--stage-length", type=int, default=20,
                   help="iterations between step decays (default 20)")
    g.add_argument("--decay-factor", type=float, default=10.0,
                   help="d and mu are divided by this after each stage (default 10)")
    g.add_argument("--constant", action="store_true",
                   help="keep d and mu fixed for every iteration (no decay)")
    g.add_argument("--min-d", type=float, default=None,
                   help="stop early once d falls below this value (default: never)")


def _schedule(args) -> DecaySchedule:
    return DecaySchedule(stage_length=args.stage_length, decay_factor=args.decay_factor,
                         enabled=not args.constant)


def _config(args) -> GradientConfig:
    return GradientConfig(d0=args.d0, mu0=args.mu, order=args.p, max_iterations=args.iterations,
                          schedule=_schedule(args), min_d=args.min_d)


def _seeds(args) -> tuple[int, ...]:
    if args.seeds < 1:
        raise ValueError("--seeds must be at least 1")
    return tuple(range(args.first_seed, args.first_seed + args.seeds))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Recover missing samples of DFT-sparse signals by gradient descent "
                    "on a spectral concentration measure.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="log progress to stderr")

    p = sub.add_parser("generate", parents=[common], help="write a sum-of-sinusoids test signal as CSV")
    _add_signal_flags(p)
    p.add_argument("--noise-variance", type=float, default=0.0,
                   help="variance of additive white Gaussian noise (default 0)")
    p.add_argument("--seed", type=int, help="noise seed; required when --noise-variance > 0")
    p.add_argument("--out", help="output CSV (index,value); default stdout")

    p = sub.add_parser("mask", parents=[common], help="write a random sampling mask as CSV")
    p.add_argument("--n", type=int, default=128, help="signal length N (default 128)")
    p.add_argument("--num-missing", "--missing", dest="num_missing", type=int, required=True,
                   help="number of missing positions, drawn uniformly without replacement")
    p.add_argument("--seed", type=int, required=True, help="mask seed")
    p.add_argument("--out", help="output CSV (index,available); default stdout")

    p = sub.add_parser("reconstruct", parents=[common], help="reconstruct missing samples of one signal")
    _add_signal_flags(p)
    p.add_argument("--signal", help="observed signal CSV; default: generate the test signal")
    p.add_argument("--mask", help="mask CSV (index,available); overrides --num-missing")
    p.add_argument("--num-missing", "--missing", dest="num_missing", type=int, default=None,
                   help="draw a random mask with this many missing samples")
    p.add_argument("--noise-variance", type=float, default=0.0,
                   help="corrupt the generated signal with Gaussian noise before masking "
                        "(only without --signal)")
    p.add_argument("--seed", type=int, help="seed for the random mask and noise; required when "
                                            "either is drawn")
    p.add_argument("--reference", help="clean reference CSV for the trace MAE column "
                                       "(default: the generated clean signal, if any)")
    p.add_argument("--out", help="reconstructed signal CSV; default stdout")
    p.add_argument("--trace", help="write the convergence trace CSV here")
    _add_engine_flags(p)

    for name, helptext in (("sweep-params", "sweep (d0, mu) pairs and missing counts"),
                           ("sweep-noise", "sweep noise variances and missing counts")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        preset = "table1" if name == "sweep-params" else "table2"
        p.add_argument("--preset", choices=[preset],
                       help=f"use the built-in {preset} grid for pairs and missing counts")
        p.add_argument("--pair", type=_pair, action="append", metavar="D0:MU0",
                       help="initial (d, mu) pair; repeatable")
        p.add_argument("--num-missing", dest="num_missing", type=int, action="append",
                       help="missing-sample count; repeatable")
        if name == "sweep-noise":
            p.add_argument("--variance", type=float, action="append",
                           help="noise variance; repeatable")
        p.add_argument("--seeds", type=int, required=True, help="number of seeds per tuple")
        p.add_argument("--first-seed", type=int, default=0, help="first seed (default 0)")
        p.add_argument("--out", help="per-seed CSV; default stdout")
        p.add_argument("--summary", help="write medians over seeds to this CSV")
        p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
        p.add_argument("--n", type=int, default=128, help="signal length N (default 128)")
        _add_engine_flags(p)

    p = sub.add_parser("case", parents=[common], help="reproduce one case study as trace + overlay CSVs")
    p.add_argument("--id", dest="case_id", choices=list(CASES), required=True,
                   help="case1_constant: d=0.5, mu=1 fixed, 64 missing; case1_adaptive: "
                        "d0=5, mu0=10, 64 missing; case2: d0=10, mu0=20, 94 missing; "
                        "case3: case2 parameters, 64 missing, noise variance 0.1")
    p.add_argument("--seed", type=int, required=True, help="mask and noise seed")
    p.add_argument("--num-missing", dest="num_missing", type=int, help="override the missing count")
    p.add_argument("--noise-variance", type=float, help="override the noise variance (case3)")
    p.add_argument("--trace", required=True, help="trace CSV path")
    p.add_argument("--signals", required=True,
                   help="overlay CSV path (index,original[,noisy],available,reconstructed)")
    return parser


def _cmd_generate(args):
    s = generate_test_signal(args.n, args.component or DEFAULT_COMPONENTS)
    if args.noise_variance:
        if args.seed is None:
            raise UsageError("--seed is required when --noise-variance > 0")
        s = add_noise(s, NoiseSpec(args.noise_variance, args.seed))
    csvio.write_signal(args.out, s)


def _cmd_mask(args):
    csvio.write_mask(args.out, random_mask(args.n, args.num_missing, args.seed))


def _cmd_reconstruct(args):
    reference = csvio.read_signal(args.reference) if args.reference else None
    if args.signal:
        if args.noise_variance:
            raise UsageError("--noise-variance only applies to the generated signal, not --signal")
        observed = csvio.read_signal(args.signal)
    else:
        clean = generate_test_signal(args.n, args.component or DEFAULT_COMPONENTS)
        observed = clean
        if args.noise_variance:
            if args.seed is None:
                raise UsageError("--seed is required when --noise-variance > 0")
            observed = add_noise(clean, NoiseSpec(args.noise_variance, args.seed))
        if reference is None:
            reference = clean

    if args.mask:
        mask = csvio.read_mask(args.mask)
    elif args.num_missing is not None:
        if args.num_missing > 0 and args.seed is None:
            raise UsageError("--seed is required to draw a random mask")
        mask = random_mask(observed.size, args.num_missing, args.seed or 0)
    else:
        raise UsageError("one of --mask or --num-missing is required")
    if mask.n != observed.size:
        raise ValueError(f"mask length {mask.n} does not match signal length {observed.size}")

    x, trace = reconstruct(observed, mask, _config(args), reference=reference)
    if reference is not None:
        best, at = trace.mae_min()
        log.info("mae_min=%.6g at iteration %d", best, at)
    csvio.write_signal(args.out, x)
    if args.trace:
        csvio.write_trace(args.trace, trace)


def _sweep_common(args):
    common = dict(seeds=_seeds(args), n=args.n, schedule=_schedule(args),
                  order=args.p, max_iterations=args.iterations)
    if args.pair:
        common["pairs"] = tuple(args.pair)
    if args.num_missing:
        common["missing_counts"] = tuple(args.num_missing)
    if getattr(args, "variance", None):
        common["variances"] = tuple(sorted(args.variance))
    return common


def _cmd_sweep_params(args):
    common = _sweep_common(args)
    if args.preset:
        spec = table1_spec(**common)
    elif "pairs" in common and "missing_counts" in common:
        spec = SweepSpec(**common)
    else:
        raise UsageError("give --preset table1 or both --pair and --num-missing")
    _write_sweep(args, run_parameter_sweep(spec, workers=args.workers))


def _cmd_sweep_noise(args):
    common = _sweep_common(args)
    if args.preset:
        spec = table2_spec(**common)
    elif "variances" in common and "missing_counts" in common:
        spec = NoiseSweepSpec(**common)
    else:
        raise UsageError("give --preset table2 or both --variance and --num-missing")
    _write_sweep(args, run_noise_sweep(spec, workers=args.workers))


def _write_sweep(args, result):
    result.write(args.out)
    if args.summary:
        result.write_summary(args.summary)
    failed = sum(r.failed for r in result.rows)
    if failed:
        log.warning("%d of %d sweep rows failed", failed, len(result.rows))


def _cmd_case(args):
    kwargs = {}
    if args.num_missing is not None:
        kwargs["num_missing"] = args.num_missing
    if args.noise_variance is not None:
        kwargs["variance"] = args.noise_variance
    study = emit_case_study(args.case_id, args.seed, args.trace, args.signals, **kwargs)
    best, at = study.trace.mae_min()
    log.info("%s: mae_min=%.6g at iteration %d", args.case_id, best, at)


COMMANDS = {
    "generate": _cmd_generate,
    "mask": _cmd_mask,
    "reconstruct": _cmd_reconstruct,
    "sweep-params": _cmd_sweep_params,
    "sweep-noise": _cmd_sweep_noise,
    "case": _cmd_case,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format=f"{PROG}: %(levelname)s: %(message)s", stream=sys.stderr)

    def fail(code, msg):
        print(f"{PROG}: error: {msg}", file=sys.stderr)
        return code

    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        return fail(EXIT_USAGE, exc)
    except csvio.CSVFormatError as exc:
        return fail(EXIT_CSV, f"malformed CSV: {exc}")
    except OSError as exc:
        return fail(EXIT_IO, exc)
    except DivergenceError as exc:
        return fail(EXIT_DIVERGED, exc)
    except (ValueError, IndexError) as exc:
        return fail(EXIT_VALUE, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
