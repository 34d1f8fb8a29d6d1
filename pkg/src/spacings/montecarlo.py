"""Monte Carlo oracle for circle spacings.

Random numbers come from numpy's Philox4x64-10 counter-based generator keyed by
``seed + 2**64 * stream_id`` with the counter starting at zero.  A simulation
splits its trials into fixed-size chunks that depend only on ``n``; chunk ``i``
always uses stream ``i``, whichever worker runs it, and results are merged in
chunk order.  Summaries are therefore bit-identical for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import kstwobign

from .exactdist import cdf_array, kth_gap_mean, min_gap_survival

MAX_TRIALS = 1 << 40
MAX_SIM_MOMENT = 8
CHUNK_ELEMENTS = 1 << 21
SAMPLERS = ("expgap", "sort")
KS_CRITICAL_SCALED = 1.95  # Kolmogorov upper 0.1% point is 1.9495
DEFAULT_BINS = 48
DEFAULT_RANGE = (-3.0, 9.0)
MIN_GAP_TIMES = (0.0, 0.1, 0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 1 << 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not 0 <= self.stream_id < 1 << 64:
            raise ValueError(f"stream_id out of range: {self.stream_id}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.seed + (self.stream_id << 64)))


@dataclass(frozen=True)
class SpacingSample:
    n: int
    gaps: np.ndarray

    @property
    def d_max(self) -> float:
        return float(self.gaps.max())

    @property
    def d_min(self) -> float:
        return float(self.gaps.min())

    @property
    def sorted_gaps(self) -> np.ndarray:
        return np.sort(self.gaps)[::-1]


def _gaps_sort(gen: np.random.Generator, n: int, trials: int) -> np.ndarray:
    # one point pinned at 0 by rotation invariance
    u = gen.random((trials, n - 1))
    u.sort(axis=1)
    edges = np.concatenate([np.zeros((trials, 1)), u, np.ones((trials, 1))], axis=1)
    return np.diff(edges, axis=1)


def _exponentials(gen: np.random.Generator, shape) -> np.ndarray:
    u = gen.random(shape)
    return -np.log1p(-u)


def _gaps_expgap(gen: np.random.Generator, n: int, trials: int) -> np.ndarray:
    e = _exponentials(gen, (trials, n))
    return e / e.sum(axis=1, keepdims=True)


def sample_spacings_sort(n: int, stream: RngStream) -> SpacingSample:
    if n < 2:
        raise ValueError("need n >= 2")
    return SpacingSample(n, _gaps_sort(stream.generator(), n, 1)[0])


def sample_spacings_expgap(n: int, stream: RngStream) -> SpacingSample:
    if n < 2:
        raise ValueError("need n >= 2")
    return SpacingSample(n, _gaps_expgap(stream.generator(), n, 1)[0])


def chunk_trials(n: int) -> int:
    return max(1, CHUNK_ELEMENTS // n)


def chunk_schedule(n: int, trials: int) -> list[tuple[int, int]]:
    """(chunk_id, trials in chunk) pairs covering ``trials``."""
    size = chunk_trials(n)
    full, rest = divmod(trials, size)
    sched = [(i, size) for i in range(full)]
    if rest:
        sched.append((full, rest))
    return sched


def _chunk_stats(n, seed, sampler, chunk_id, count, kth):
    gen = RngStream(seed, chunk_id).generator()
    if sampler == "sort":
        gaps = _gaps_sort(gen, n, count)
        d_max, d_min = gaps.max(axis=1), gaps.min(axis=1)
    else:
        e = _exponentials(gen, (count, n))
        total = e.sum(axis=1)
        d_max, d_min = e.max(axis=1) / total, e.min(axis=1) / total
        gaps = e / total[:, None] if kth else None
    kth_vals = {}
    for k in kth:
        kth_vals[k] = -np.partition(-gaps, k - 1, axis=1)[:, k - 1]
    return chunk_id, d_max, d_min, kth_vals


def _run_chunks(args):
    n, seed, sampler, chunks, kth = args
    return [_chunk_stats(n, seed, sampler, cid, count, kth) for cid, count in chunks]


@dataclass
class SimulationDraws:
    d_max: np.ndarray
    d_min: np.ndarray
    kth: dict[int, np.ndarray] = field(default_factory=dict)


def draw(n: int, trials: int, seed: int, workers: int = 1, sampler: str = "expgap",
         kth: Sequence[int] = ()) -> SimulationDraws:
    """Per-trial d_max, d_min (and k-th largest gaps) in chunk order."""
    if n < 2:
        raise ValueError("need n >= 2")
    if not 1 <= trials <= MAX_TRIALS:
        raise ValueError(f"trials must be in [1, 2^40], got {trials}")
    if workers < 1:
        raise ValueError("workers must be positive")
    if sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}; choose from {SAMPLERS}")
    kth = tuple(sorted(set(kth)))
    if any(not 1 <= k <= n for k in kth):
        raise ValueError("k-th gap indices must lie in [1, n]")
    RngStream(seed)  # validates the seed
    sched = chunk_schedule(n, trials)
    if workers == 1 or len(sched) == 1:
        results = _run_chunks((n, seed, sampler, sched, kth))
    else:
        jobs = [(n, seed, sampler, sched[w::workers], kth) for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for batch in pool.map(_run_chunks, jobs) for r in batch]
    results.sort(key=lambda r: r[0])
    return SimulationDraws(
        d_max=np.concatenate([r[1] for r in results]),
        d_min=np.concatenate([r[2] for r in results]),
        kth={k: np.concatenate([r[3][k] for r in results]) for k in kth},
    )


def _mean_var(x: np.ndarray) -> tuple[float, float]:
    mean = math.fsum(x) / x.size
    var = math.fsum((x - mean) ** 2) / (x.size - 1) if x.size > 1 else 0.0
    return mean, var


def ks_statistic(samples, n: int) -> float:
    """sup |F_N - F| between the empirical cdf of d_max samples and the exact cdf."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("ks_statistic: no samples")
    return ks_against(x, cdf_array(n, x))


def ks_against(sorted_x: np.ndarray, f: np.ndarray) -> float:
    """Kolmogorov distance given sorted samples and reference cdf values at them."""
    size = sorted_x.size
    i = np.arange(1, size + 1)
    d_plus = np.max(i / size - f)
    d_minus = np.max(f - (i - 1) / size)
    return float(max(d_plus, d_minus, 0.0))


@dataclass(frozen=True)
class TwoSampleKS:
    statistic: float
    critical: float
    alpha: float

    @property
    def passed(self) -> bool:
        return self.statistic <= self.critical


def ks_two_sample(a, b, alpha: float = 1e-3) -> TwoSampleKS:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    stat = float(np.max(np.abs(fa - fb)))
    c_alpha = math.sqrt(-math.log(alpha / 2) / 2)
    critical = c_alpha * math.sqrt((a.size + b.size) / (a.size * b.size))
    return TwoSampleKS(stat, critical, alpha)


@dataclass
class SimulationSummary:
    n: int
    trials: int
    seed: int
    workers: int
    sampler: str
    moments: list[float]
    moment_stderr: list[float]
    dmax_mean: float
    dmax_var: float
    dmin_mean: float
    dmin_var: float
    ks: dict
    histogram: dict
    kth: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def summarize(draws: SimulationDraws, n: int, trials: int, seed: int, workers: int,
              sampler: str, max_moment: int, bins: int = DEFAULT_BINS,
              hist_range: tuple[float, float] = DEFAULT_RANGE) -> SimulationSummary:
    d = draws.d_max
    sums = [math.fsum(d**k) / d.size for k in range(1, 2 * max_moment + 1)]
    moments = sums[:max_moment]
    stderr = [math.sqrt(max(sums[2 * k - 1] - sums[k - 1] ** 2, 0.0) / d.size)
              for k in range(1, max_moment + 1)]
    dmax_mean, dmax_var = _mean_var(d)
    dmin_mean, dmin_var = _mean_var(draws.d_min)
    stat = ks_statistic(d, n)
    scaled = stat * math.sqrt(d.size)
    ks = {"stat": stat, "scaled": scaled, "pvalue": float(kstwobign.sf(scaled)),
          "critical_scaled": KS_CRITICAL_SCALED, "passed": scaled < KS_CRITICAL_SCALED}
    lo, hi = hist_range
    centred = n * d - math.log(n)
    counts, edges = np.histogram(centred, bins=bins, range=(lo, hi))
    histogram = {
        "edges": [float(e) for e in edges],
        "counts": [int(c) for c in counts],
        "underflow": int(np.count_nonzero(centred < lo)),
        "overflow": int(np.count_nonzero(centred > hi)),
    }
    kth = {}
    for k, vals in draws.kth.items():
        mean, var = _mean_var(vals)
        kth[str(k)] = {"mean": mean, "var": var, "exact_mean": float(kth_gap_mean(n, k))}
    return SimulationSummary(n, trials, seed, workers, sampler, moments, stderr,
                             dmax_mean, dmax_var, dmin_mean, dmin_var, ks, histogram, kth)


def simulate(n: int, trials: int, seed: int, workers: int = 1, max_moment: int = 4,
             sampler: str = "expgap", bins: int = DEFAULT_BINS,
             hist_range: tuple[float, float] = DEFAULT_RANGE,
             kth: Sequence[int] = ()) -> SimulationSummary:
    if not 1 <= max_moment <= MAX_SIM_MOMENT:
        raise ValueError(f"max_moment must be in [1, {MAX_SIM_MOMENT}]")
    if bins < 1 or not hist_range[0] < hist_range[1]:
        raise ValueError("histogram needs bins >= 1 and LO < HI")
    draws = draw(n, trials, seed, workers, sampler, kth)
    return summarize(draws, n, trials, seed, workers, sampler, max_moment, bins, hist_range)


@dataclass(frozen=True)
class MinGapRow:
    t: float
    empirical: float
    exponential: float
    finite_n: float
    sigma: float

    @property
    def z_exponential(self) -> float:
        return _z(self.empirical, self.exponential, self.sigma)

    @property
    def z_finite(self) -> float:
        return _z(self.empirical, self.finite_n, self.sigma)


def _z(observed: float, expected: float, sigma: float) -> float:
    if sigma == 0:
        return 0.0 if observed == expected else math.inf
    return (observed - expected) / sigma


def min_gap_limit_test(n: int, trials: int, seed: int, workers: int = 1,
                       ts: Sequence[float] = MIN_GAP_TIMES,
                       draws: SimulationDraws | None = None) -> list[MinGapRow]:
    """Survival of n^2 d_min against e^-t and the exact (1 - t/n)^(n-1).

    ``sigma`` is the binomial standard error under the finite-n reference.
    """
    if n < 10:
        raise ValueError("min_gap_limit_test: need n >= 10")
    if draws is None:
        draws = draw(n, trials, seed, workers)
    scaled = draws.d_min * n * n
    size = scaled.size
    rows = []
    for t in ts:
        empirical = np.count_nonzero(scaled > t) / size
        finite = float(min_gap_survival(n, t / (n * n)))
        sigma = math.sqrt(finite * (1 - finite) / size)
        rows.append(MinGapRow(float(t), empirical, math.exp(-t), finite, sigma))
    return rows


@dataclass(frozen=True)
class KthGapResult:
    n: int
    k: int
    empirical: float
    exact: float
    stderr: float

    @property
    def z(self) -> float:
        return _z(self.empirical, self.exact, self.stderr)


def kth_gap_mean_test(n: int, k: int, trials: int, seed: int, workers: int = 1,
                      sampler: str = "expgap") -> KthGapResult:
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    vals = draw(n, trials, seed, workers, sampler, kth=(k,)).kth[k]
    mean, var = _mean_var(vals)
    return KthGapResult(n, k, mean, float(kth_gap_mean(n, k)), math.sqrt(var / vals.size))


def sampler_equivalence(n: int, trials: int, seed: int, workers: int = 1,
                        alpha: float = 1e-3) -> TwoSampleKS:
    """Two-sample KS of d_max between the sort and exponential-gap samplers
    (independent streams: the exponential arm uses ``seed + 1``)."""
    a = draw(n, trials, seed, workers, "sort").d_max
    b = draw(n, trials, (seed + 1) % (1 << 64), workers, "expgap").d_max
    return ks_two_sample(a, b, alpha)
