"""Parameter sweeps, noise sweeps and single-realisation case studies.

Every sweep row is a pure function of its ``(d0, mu0, num_missing,
variance, seed)`` tuple plus the shared settings, so rows can be recomputed
one at a time or spread over worker processes without changing the output.
"""

from __future__ import annotations

import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Optional, Sequence

import numpy as np

from . import io as csvio
from .engine import ConvergenceTrace, DecaySchedule, GradientConfig, reconstruct
from .signal import (
    InfiniteSNRError,
    NoiseSpec,
    SamplingMask,
    add_noise,
    generate_test_signal,
    random_mask,
    snr_db,
)

log = logging.getLogger(__name__)

__all__ = [
    "CASES",
    "CaseStudy",
    "NoiseSweepSpec",
    "SweepResult",
    "SweepRow",
    "SweepSpec",
    "emit_case_study",
    "run_case_study",
    "run_noise_sweep",
    "run_parameter_sweep",
    "run_single",
    "table1_spec",
    "table2_spec",
]

DEFAULT_N = 128
DEFAULT_COMPONENTS = ((3.0, 10), (1.0, 15))
DEFAULT_SEEDS = tuple(range(10))

SWEEP_HEADER = ["d0", "mu0", "num_missing", "variance", "seed", "mae_min", "iter_of_min", "snr_db"]
SUMMARY_HEADER = [
    "d0", "mu0", "num_missing", "variance",
    "median_mae_min", "median_iter_of_min", "median_snr_db", "num_seeds", "num_failed",
]


@dataclass(frozen=True)
class SweepSpec:
    pairs: tuple[tuple[float, float], ...]
    missing_counts: tuple[int, ...]
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    n: int = DEFAULT_N
    components: tuple[tuple[float, int], ...] = DEFAULT_COMPONENTS
    schedule: DecaySchedule = field(default_factory=DecaySchedule)
    order: float = 1.0
    max_iterations: int = 320

    def __post_init__(self):
        _validate_common(self)

    def tuples(self):
        for (d0, mu0), m, seed in product(self.pairs, self.missing_counts, self.seeds):
            yield d0, mu0, m, 0.0, seed


@dataclass(frozen=True)
class NoiseSweepSpec:
    variances: tuple[float, ...]
    missing_counts: tuple[int, ...]
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    pairs: tuple[tuple[float, float], ...] = ((10.0, 20.0),)
    n: int = DEFAULT_N
    components: tuple[tuple[float, int], ...] = DEFAULT_COMPONENTS
    schedule: DecaySchedule = field(default_factory=DecaySchedule)
    order: float = 1.0
    max_iterations: int = 320

    def __post_init__(self):
        _validate_common(self)
        if any(v < 0 for v in self.variances):
            raise ValueError("noise variances must be non-negative")
        if list(self.variances) != sorted(self.variances):
            raise ValueError("noise variances must be sorted ascending")

    def tuples(self):
        for (d0, mu0), var, m, seed in product(self.pairs, self.variances, self.missing_counts, self.seeds):
            yield d0, mu0, m, var, seed


def _validate_common(spec):
    if not spec.seeds:
        raise ValueError("a sweep needs at least one seed")
    if not spec.pairs:
        raise ValueError("a sweep needs at least one (d0, mu0) pair")
    if any(not (d0 > 0 and mu0 > 0) for d0, mu0 in spec.pairs):
        raise ValueError("every (d0, mu0) pair must be positive")
    if any(not 0 <= m <= spec.n for m in spec.missing_counts):
        raise ValueError(f"missing counts must lie in [0, {spec.n}]")


@dataclass(frozen=True)
class SweepRow:
    d0: float
    mu0: float
    num_missing: int
    variance: float
    seed: int
    mae_min: Optional[float]
    iter_of_min: Optional[int]
    snr_db: Optional[float]
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def key(self):
        return (self.d0, self.mu0, self.num_missing, self.variance)

    def as_csv(self):
        return [self.d0, self.mu0, self.num_missing, self.variance, self.seed,
                self.mae_min, self.iter_of_min, self.snr_db]


@dataclass(frozen=True)
class SummaryRow:
    d0: float
    mu0: float
    num_missing: int
    variance: float
    median_mae_min: Optional[float]
    median_iter_of_min: Optional[float]
    median_snr_db: Optional[float]
    num_seeds: int
    num_failed: int


def _median(values):
    values = [v for v in values if v is not None]
    return statistics.median(values) if values else None


@dataclass
class SweepResult:
    rows: list[SweepRow]

    def summary(self) -> list[SummaryRow]:
        groups: dict[tuple, list[SweepRow]] = {}
        for r in self.rows:
            groups.setdefault(r.key, []).append(r)
        out = []
        for key, rows in groups.items():
            ok = [r for r in rows if not r.failed]
            out.append(SummaryRow(
                *key,
                median_mae_min=_median([r.mae_min for r in ok]),
                median_iter_of_min=_median([r.iter_of_min for r in ok]),
                median_snr_db=_median([r.snr_db for r in ok]),
                num_seeds=len(rows),
                num_failed=len(rows) - len(ok),
            ))
        return out

    def median_mae(self, d0, mu0, num_missing, variance=0.0) -> Optional[float]:
        for s in self.summary():
            if (s.d0, s.mu0, s.num_missing, s.variance) == (d0, mu0, num_missing, variance):
                return s.median_mae_min
        raise KeyError((d0, mu0, num_missing, variance))

    def write(self, path, stream=None):
        csvio.write_table(path, SWEEP_HEADER, (r.as_csv() for r in self.rows), stream)

    def write_summary(self, path, stream=None):
        csvio.write_table(path, SUMMARY_HEADER, (
            [s.d0, s.mu0, s.num_missing, s.variance, s.median_mae_min,
             s.median_iter_of_min, s.median_snr_db, s.num_seeds, s.num_failed]
            for s in self.summary()
        ), stream)


def run_single(d0, mu0, num_missing, variance, seed, *, n=DEFAULT_N, components=DEFAULT_COMPONENTS,
               schedule: Optional[DecaySchedule] = None, order=1.0, max_iterations=320,
               snr_of_observation=False) -> SweepRow:
    """Compute one sweep row.

    With ``snr_of_observation`` the ``snr_db`` field is the SNR of the noisy
    input against the clean signal; otherwise it is the SNR of the
    reconstruction.  An infinite SNR is reported as ``None``.
    """
    try:
        clean = generate_test_signal(n, components)
        observed = add_noise(clean, NoiseSpec(variance, seed))
        mask = random_mask(n, num_missing, seed)
        config = GradientConfig(d0=d0, mu0=mu0, order=order, max_iterations=max_iterations,
                                schedule=schedule or DecaySchedule())
        x, trace = reconstruct(observed, mask, config, reference=clean)
        best, at = trace.mae_min()
        try:
            snr = snr_db(clean, observed if snr_of_observation else x)
        except InfiniteSNRError:
            snr = None
        return SweepRow(d0, mu0, num_missing, variance, seed, best, at, snr)
    except (ArithmeticError, ValueError) as exc:
        log.warning("sweep row d0=%s mu0=%s missing=%s variance=%s seed=%s failed: %s",
                    d0, mu0, num_missing, variance, seed, exc)
        return SweepRow(d0, mu0, num_missing, variance, seed, None, None, None, error=str(exc))


def _run_row(args):
    tup, kwargs = args
    return run_single(*tup, **kwargs)


def _run_all(tuples, kwargs, workers: int) -> list[SweepRow]:
    jobs = [(t, kwargs) for t in tuples]
    if workers <= 1:
        return [_run_row(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() keeps submission order, so output order ignores completion order
        return list(pool.map(_run_row, jobs))


def _shared(spec) -> dict:
    return dict(n=spec.n, components=spec.components, schedule=spec.schedule,
                order=spec.order, max_iterations=spec.max_iterations)


def run_parameter_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Noise-free reconstructions over every ``(d0, mu0) x num_missing x seed`` tuple."""
    return SweepResult(_run_all(list(spec.tuples()), _shared(spec), workers))


def run_noise_sweep(spec: NoiseSweepSpec, workers: int = 1) -> SweepResult:
    """Noisy reconstructions; MAE is taken against the clean signal."""
    kwargs = _shared(spec) | {"snr_of_observation": True}
    return SweepResult(_run_all(list(spec.tuples()), kwargs, workers))


def table1_spec(seeds: Sequence[int] = DEFAULT_SEEDS, **overrides) -> SweepSpec:
    """The (d0, mu0) pairs and missing counts of the step-size study, as a full grid."""
    overrides.setdefault("pairs", ((20.0, 40.0), (10.0, 20.0), (10.0, 10.0), (20.0, 20.0)))
    overrides.setdefault("missing_counts", (35, 64, 94))
    return SweepSpec(seeds=tuple(seeds), **overrides)


def table2_spec(seeds: Sequence[int] = DEFAULT_SEEDS, **overrides) -> NoiseSweepSpec:
    """Noise variances 0.1..0.5 at 30, 50 and 64 missing samples."""
    overrides.setdefault("variances", tuple(round(0.1 + 0.05 * i, 2) for i in range(9)))
    overrides.setdefault("missing_counts", (30, 50, 64))
    overrides.setdefault("pairs", ((10.0, 20.0), (20.0, 40.0)))
    return NoiseSweepSpec(seeds=tuple(seeds), **overrides)


@dataclass(frozen=True)
class CaseSetup:
    num_missing: int
    config: GradientConfig
    variance: float = 0.0


CASES: dict[str, CaseSetup] = {
    "case1_constant": CaseSetup(64, GradientConfig(d0=0.5, mu0=1.0, max_iterations=500,
                                                   schedule=DecaySchedule.constant())),
    "case1_adaptive": CaseSetup(64, GradientConfig(d0=5.0, mu0=10.0)),
    "case2": CaseSetup(94, GradientConfig(d0=10.0, mu0=20.0)),
    "case3": CaseSetup(64, GradientConfig(d0=10.0, mu0=20.0), variance=0.1),
}


@dataclass
class CaseStudy:
    case_id: str
    original: np.ndarray
    noisy: Optional[np.ndarray]
    mask: SamplingMask
    reconstructed: np.ndarray
    trace: ConvergenceTrace

    def overlay_rows(self):
        observed = self.original if self.noisy is None else self.noisy
        avail = self.mask.available
        for i in range(self.original.size):
            row = [i, self.original[i]]
            if self.noisy is not None:
                row.append(self.noisy[i])
            row += [observed[i] if avail[i] else None, self.reconstructed[i]]
            yield row

    @property
    def overlay_header(self) -> list[str]:
        if self.noisy is None:
            return [c for c in csvio.OVERLAY_HEADER if c != "noisy"]
        return list(csvio.OVERLAY_HEADER)


def run_case_study(case_id: str, seed: int, *, num_missing: Optional[int] = None,
                   variance: Optional[float] = None, **config_overrides) -> CaseStudy:
    """Run one named case study on the default two-tone signal."""
    if case_id not in CASES:
        raise ValueError(f"unknown case {case_id!r}; choose from {', '.join(CASES)}")
    setup = CASES[case_id]
    m = setup.num_missing if num_missing is None else num_missing
    var = setup.variance if variance is None else variance
    config = replace(setup.config, **config_overrides)
    clean = generate_test_signal(DEFAULT_N, DEFAULT_COMPONENTS)
    noisy = add_noise(clean, NoiseSpec(var, seed)) if case_id == "case3" else None
    mask = random_mask(DEFAULT_N, m, seed)
    x, trace = reconstruct(clean if noisy is None else noisy, mask, config, reference=clean)
    return CaseStudy(case_id, clean, noisy, mask, x, trace)


def emit_case_study(case_id: str, seed: int, trace_path, signals_path, **kwargs) -> CaseStudy:
    """Run a case study and write its trace and overlay CSVs."""
    study = run_case_study(case_id, seed, **kwargs)
    csvio.write_trace(trace_path, study.trace)
    csvio.write_table(signals_path, study.overlay_header, study.overlay_rows())
    return study
