"""Monte Carlo ground truth for the CC/CE meta distributions.

The typical user sits at the origin.  BS distances are drawn as the radial
arrival process of a PPP: pi*lambda*r_k**2 are the points of a unit-rate
Poisson process on [0, pi*lambda*R**2].  Enlarging the window therefore only
appends far-away BSs to the same realization.  Fading is averaged
analytically, so each realization maps to its exact conditional success
probability.

Every realization owns a counter-based Philox stream keyed by (seed, index),
which makes results independent of how realizations are spread over workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ClassMismatch, DegenerateRealization, DomainError, EmptySampleSet
from .model import DistancePair, NetworkParams, NomaConfig, UserClass, chi_c, chi_e, classify
from .analytic.metadist import CurveMethod, MetaCurve

__all__ = [
    "SimConfig",
    "NetworkRealization",
    "EmpiricalMeta",
    "default_window_radius",
    "sample_realization",
    "conditional_success_cc",
    "conditional_success_ce",
    "run_experiment",
    "run_batch",
    "empirical_ccdf",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 1000
WINDOW_POINTS = 2000.0
MIN_WINDOW_POINTS = 200.0
_MASK64 = (1 << 64) - 1


def default_window_radius(lambda_b: float) -> float:
    """Radius holding WINDOW_POINTS base stations on average."""
    return math.sqrt(WINDOW_POINTS / (math.pi * lambda_b))


def _default_grid():
    return np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class SimConfig:
    params: NetworkParams
    cfg: NomaConfig | None = None
    n_realizations: int = 100_000
    seed: int = 2019
    window_radius: float | None = None
    x_grid: np.ndarray = field(default_factory=_default_grid)

    def __post_init__(self):
        if int(self.n_realizations) < 1:
            raise DomainError("n_realizations must be >= 1")
        if self.window_radius is None:
            object.__setattr__(self, "window_radius", default_window_radius(self.params.lambda_b))
        if self.mean_points < MIN_WINDOW_POINTS:
            raise DomainError(
                f"window holds {self.mean_points:.1f} BSs on average; need >= {MIN_WINDOW_POINTS:g}"
            )
        if not (0 <= self.seed < 2 ** 64):
            raise DomainError("seed must be a 64-bit unsigned integer")

    @property
    def mean_points(self) -> float:
        return self.params.lambda_b * math.pi * self.window_radius ** 2


@dataclass(frozen=True)
class NetworkRealization:
    r_o: float
    r_d: float
    other_interferer_distances: np.ndarray
    user_class: UserClass

    def __post_init__(self):
        others = self.other_interferer_distances
        if not self.r_o <= self.r_d or (len(others) and others[0] < self.r_d):
            raise DomainError("distances must be ordered r_o <= r_d <= others")


def _stream(seed: int, index: int, attempt: int) -> np.random.Generator:
    key = (seed & _MASK64) | (index << 64) | (attempt << 112)
    return np.random.Generator(np.random.Philox(key=key))


def _radial_distances(rng: np.random.Generator, params: NetworkParams, radius: float) -> np.ndarray:
    mean = params.lambda_b * math.pi * radius ** 2
    arrivals = np.cumsum(rng.standard_exponential(int(mean + 6.0 * math.sqrt(mean) + 16)))
    while arrivals[-1] <= mean:
        extra = np.cumsum(rng.standard_exponential(int(math.sqrt(mean) + 16)))
        arrivals = np.concatenate([arrivals, arrivals[-1] + extra])
    arrivals = arrivals[: np.searchsorted(arrivals, mean, side="right")]
    return np.sqrt(arrivals / (math.pi * params.lambda_b))


def sample_realization(config: SimConfig, stream_index: int, attempt: int = 0) -> NetworkRealization:
    """One BS configuration around the typical user, classified CC or CE.

    Raises DegenerateRealization when fewer than two BSs fall in the window;
    callers retry with the next attempt number of the same stream index.
    """
    rng = _stream(config.seed, stream_index, attempt)
    r = _radial_distances(rng, config.params, config.window_radius)
    if len(r) < 2:
        raise DegenerateRealization(f"{len(r)} BS in window (stream {stream_index}, attempt {attempt})")
    cls = classify(DistancePair(float(r[0]), float(r[1])), config.params.tau)
    return NetworkRealization(float(r[0]), float(r[1]), r[2:], cls)


def _draw(config: SimConfig, index: int):
    attempt = 0
    while True:
        try:
            return sample_realization(config, index, attempt), attempt
        except DegenerateRealization:
            attempt += 1


def conditional_success_cc(real: NetworkRealization, chi_c: float, alpha: float) -> float:
    """prod over all interferers of 1 / (1 + r_o^alpha chi_c |x|^-alpha)."""
    if real.user_class is not UserClass.CC:
        raise ClassMismatch("conditional_success_cc needs a CC realization")
    d = np.concatenate([[real.r_d], real.other_interferer_distances])
    return float(np.exp(-np.sum(np.log1p(chi_c * (real.r_o / d) ** alpha))))


def conditional_success_ce(real: NetworkRealization, chi_e: float, alpha: float) -> float:
    """Dominant-interferer factor times the product over the remaining interferers."""
    if real.user_class is not UserClass.CE:
        raise ClassMismatch("conditional_success_ce needs a CE realization")
    dominant = 1.0 / (1.0 + (real.r_o / real.r_d) ** alpha * chi_e)
    rest = np.sum(np.log1p(chi_e * (real.r_o / real.other_interferer_distances) ** alpha))
    return float(dominant * np.exp(-rest))


@dataclass
class EmpiricalMeta:
    samples_cc: np.ndarray
    samples_ce: np.ndarray
    class_counts: tuple[int, int]
    n_degenerate: int = 0

    def __post_init__(self):
        for s in (self.samples_cc, self.samples_ce):
            if np.any((s < 0) | (s > 1)):
                raise DomainError("conditional success probabilities must lie in [0, 1]")

    def samples(self, user_class: UserClass) -> np.ndarray:
        return self.samples_cc if user_class is UserClass.CC else self.samples_ce

    def moment(self, b: float, user_class: UserClass) -> float:
        s = self.samples(user_class)
        if len(s) == 0:
            raise EmptySampleSet(f"no {user_class.value} samples")
        return float(np.mean(s ** b))

    def moment_se(self, b: float, user_class: UserClass) -> float:
        s = self.samples(user_class)
        if len(s) < 2:
            raise EmptySampleSet(f"need two {user_class.value} samples for a standard error")
        return float(np.std(s ** b, ddof=1) / math.sqrt(len(s)))

    def variance(self, user_class: UserClass) -> float:
        s = self.samples(user_class)
        return float(np.var(s, ddof=1))

    def variance_se(self, user_class: UserClass) -> float:
        """Delta-method standard error of the sample variance."""
        s = self.samples(user_class)
        n = len(s)
        c = s - s.mean()
        m2 = np.mean(c ** 2)
        m4 = np.mean(c ** 4)
        return float(math.sqrt(max(m4 - m2 * m2, 0.0) / n))

    def ccdf(self, x_grid, user_class: UserClass) -> MetaCurve:
        return empirical_ccdf(self.samples(user_class), x_grid)


def empirical_ccdf(samples, x_grid) -> MetaCurve:
    """Fraction of samples strictly above each reliability level."""
    s = np.sort(np.asarray(samples, dtype=float))
    if len(s) == 0:
        raise EmptySampleSet("empirical CCDF of an empty sample")
    x = np.asarray(x_grid, dtype=float)
    above = len(s) - np.searchsorted(s, x, side="right")
    return MetaCurve(x, above / len(s), CurveMethod.EMPIRICAL)


def _thresholds(cfg: NomaConfig) -> tuple[float, float] | None:
    if not cfg.feasible:
        return None
    return chi_c(cfg), chi_e(cfg)


def _run_block(args):
    config, start, stop, thresholds = args
    alpha = config.params.alpha
    n = stop - start
    r_o = np.empty(n)
    r_d = np.empty(n)
    is_cc = np.empty(n, dtype=bool)
    rest = []
    degenerate = 0
    for i in range(n):
        real, attempts = _draw(config, start + i)
        degenerate += attempts
        r_o[i], r_d[i] = real.r_o, real.r_d
        is_cc[i] = real.user_class is UserClass.CC
        rest.append(real.other_interferer_distances)
    width = max(len(o) for o in rest)
    others = np.full((n, width), np.inf)
    for i, o in enumerate(rest):
        others[i, : len(o)] = o
    q_dom = (r_o / r_d) ** alpha
    q_rest = (r_o[:, None] / others) ** alpha
    results = []
    for pair in thresholds:
        if pair is None:
            results.append(np.zeros(n))
            continue
        chi = np.where(is_cc, pair[0], pair[1])
        log_rest = np.sum(np.log1p(chi[:, None] * q_rest), axis=1)
        results.append(np.exp(-log_rest) / (1.0 + chi * q_dom))
    return is_cc, results, degenerate


def run_batch(config: SimConfig, thresholds, workers: int = 1) -> list[EmpiricalMeta]:
    """Simulate once and evaluate several (chi_c, chi_e) threshold pairs.

    `thresholds` entries are (chi_c, chi_e) tuples, NomaConfig objects (their
    effective thresholds; success is identically 0 when infeasible) or None
    (success identically 0).
    """
    pairs = [_thresholds(t) if isinstance(t, NomaConfig) else t for t in thresholds]
    n = int(config.n_realizations)
    jobs = [(config, s, min(s + BLOCK_SIZE, n), pairs) for s in range(0, n, BLOCK_SIZE)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_run_block, jobs))
    else:
        blocks = [_run_block(j) for j in jobs]
    is_cc = np.concatenate([b[0] for b in blocks])
    degenerate = sum(b[2] for b in blocks)
    n_cc = int(is_cc.sum())
    out = []
    for k in range(len(pairs)):
        p = np.concatenate([b[1][k] for b in blocks])
        out.append(EmpiricalMeta(p[is_cc], p[~is_cc], (n_cc, n - n_cc), degenerate))
    return out


def run_experiment(config: SimConfig, workers: int = 1) -> EmpiricalMeta:
    """Empirical NOMA meta distributions for `config.cfg`."""
    if config.cfg is None:
        raise DomainError("run_experiment needs a NomaConfig; use run_batch for OMA thresholds")
    return run_batch(config, [config.cfg], workers)[0]
