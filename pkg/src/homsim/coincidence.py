"""Coincidence rates: closed-form law, delay/phase scans, shot noise, multimode maps."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .elements import DEFAULT_COHERENCE, CoherenceModel, PhaseMask, relative_phase_map
from .interferometer import Circuit, check_split, run
from .state import BiphotonState, MomentumGrid


@dataclass(frozen=True)
class ImperfectionModel:
    """Beamsplitter split, residual mode overlap and count-rate settings.

    ``pair_rate`` (detected pairs/s) and ``integration_time`` (s/point)
    defaults are arbitrary desk-scale values.
    """

    T: float = 0.5
    R: float | None = None
    mu: float = 1.0
    accidental_rate: float = 0.0
    pair_rate: float = 1e4
    integration_time: float = 1.0

    def __post_init__(self):
        if self.R is None:
            object.__setattr__(self, "R", 1.0 - self.T)
        check_split(self.T, self.R)
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mode overlap mu must lie in [0, 1], got {self.mu}")
        if self.accidental_rate < 0:
            raise ValueError("accidental rate must be non-negative")
        if self.pair_rate <= 0 or self.integration_time <= 0:
            raise ValueError("pair rate and integration time must be positive")

    @property
    def split_visibility(self) -> float:
        """V = 2TR / (T^2 + R^2), the visibility ceiling of the beamsplitter."""
        return 2 * self.T * self.R / (self.T**2 + self.R**2)

    @property
    def alpha(self) -> float:
        return self.split_visibility * self.mu

    @property
    def beta(self) -> float:
        return 1.0 - self.alpha

    @property
    def baseline_probability(self) -> float:
        """Cross-port probability for distinguishable photons, T^2 + R^2."""
        return self.T**2 + self.R**2


IDEAL = ImperfectionModel()


def analytic_rate(phi, delay=0.0, model: ImperfectionModel = IDEAL,
                  coherence: CoherenceModel = DEFAULT_COHERENCE):
    """Normalized coincidence rate 1 - V mu gamma(dl) cos(phi)."""
    g = coherence.gamma(delay)
    c = 1.0 - model.alpha * g * np.cos(phi)
    return float(c) if np.ndim(c) == 0 else c


@dataclass(frozen=True, eq=False)
class ScanResult:
    axis: np.ndarray
    raw_counts: np.ndarray
    expected: np.ndarray
    normalized: np.ndarray
    stderr: np.ndarray
    kind: str = "delay"  # "delay" (axis in metres) or "phase" (radians)
    baseline: float = 1.0  # expected accidental-free counts for distinguishable photons
    accidentals: float = 0.0  # expected accidental counts per point

    def __post_init__(self):
        for name in ("axis", "raw_counts", "expected", "normalized", "stderr"):
            a = np.array(getattr(self, name), copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        n = len(self.axis)
        if any(len(getattr(self, f)) != n for f in ("raw_counts", "expected", "normalized", "stderr")):
            raise ValueError("scan columns must have equal length")
        if np.any(self.raw_counts < 0):
            raise ValueError("raw counts must be non-negative")

    def __len__(self):
        return len(self.axis)


def sample_counts(expected, seed: int) -> np.ndarray:
    """Independent Poisson draws, one substream per flat point index.

    The substream for point ``i`` depends only on ``(seed, i)``, so the result
    does not depend on evaluation order.
    """
    expected = np.asarray(expected, dtype=float)
    if np.any(~np.isfinite(expected)) or np.any(expected < 0):
        raise ValueError("expected counts must be finite and non-negative")
    flat = expected.ravel()
    out = np.empty(flat.shape, dtype=np.int64)
    root = np.random.SeedSequence(seed)
    for i, lam in enumerate(flat):
        rng = np.random.default_rng(np.random.SeedSequence(root.entropy, spawn_key=(i,)))
        out[i] = rng.poisson(lam)
    return out.reshape(expected.shape)


def _scan_from_probabilities(axis, p, p_base, model, seed, trials, kind):
    exposure = model.pair_rate * model.integration_time * trials
    acc = model.accidental_rate * model.integration_time * trials
    expected = exposure * np.asarray(p) + acc
    raw = sample_counts(expected, seed)
    baseline = exposure * p_base
    return ScanResult(
        axis=np.asarray(axis, dtype=float),
        raw_counts=raw,
        expected=expected,
        normalized=(raw - acc) / baseline,
        stderr=np.sqrt(raw) / baseline,
        kind=kind,
        baseline=baseline,
        accidentals=acc,
    )


def delay_scan(setup, phi, delays, *, source: BiphotonState | None = None,
               model: ImperfectionModel | None = None,
               coherence: CoherenceModel = DEFAULT_COHERENCE,
               seed: int = 0, trials: int = 1, workers: int = 1) -> ScanResult:
    """Coincidence counts versus idler delay.

    ``setup`` is either an :class:`ImperfectionModel` (closed-form rate at
    relative phase ``phi``) or a :class:`Circuit`, which is propagated in
    full at each delay; the phase then comes from the circuit's masks and
    ``phi`` must be None. Count-rate settings come from ``model``.
    """
    delays = np.asarray(delays, dtype=float)
    if delays.size == 0:
        raise ValueError("delay list is empty")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(setup, ImperfectionModel):
        model = setup if model is None else model
        c = analytic_rate(phi, delays, setup, coherence)
        p = setup.baseline_probability * np.asarray(c)
        p_base = setup.baseline_probability
    elif isinstance(setup, Circuit):
        if phi is not None:
            raise ValueError("a circuit carries its own phase mask; pass phi=None")
        model = model or ImperfectionModel(T=setup.T, R=setup.R, mu=setup.overlap)
        if source is None:
            raise ValueError("a circuit scan needs a source state")
        p, p_base = circuit_probabilities(setup, source, delays, workers)
    else:
        raise TypeError(f"expected ImperfectionModel or Circuit, got {type(setup).__name__}")
    return _scan_from_probabilities(delays, p, p_base, model, seed, trials, "delay")


def circuit_probabilities(circuit: Circuit, source: BiphotonState, delays, workers: int = 1):
    """p_cc at each idler delay and the gamma = 0 baseline."""
    def one(dl):
        return run(circuit.with_idler_delay(dl), source).p_cc

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            p = list(pool.map(one, delays))
    else:
        p = [one(dl) for dl in delays]
    p_base = run(replace(circuit, overlap=0.0), source).p_cc
    return np.array(p), p_base


def phase_scan(model: ImperfectionModel, phis, delay: float = 0.0, *,
               coherence: CoherenceModel = DEFAULT_COHERENCE,
               seed: int = 0, trials: int = 1) -> ScanResult:
    """Counts versus relative phase; normalized values follow alpha (1 - cos phi) + beta."""
    phis = np.asarray(phis, dtype=float)
    if phis.size == 0:
        raise ValueError("phase list is empty")
    p = model.baseline_probability * np.asarray(analytic_rate(phis, delay, model, coherence))
    return _scan_from_probabilities(phis, p, model.baseline_probability, model, seed, trials, "phase")


def synthetic_phase_scan(phis, alpha: float, beta: float, counts_per_point: float = 1e4,
                         seed: int = 0) -> ScanResult:
    """Poisson-sampled ``counts_per_point * (alpha (1 - cos phi) + beta)``.

    Unlike :func:`phase_scan`, alpha and beta are free here, so alpha + beta
    need not equal 1.
    """
    phis = np.asarray(phis, dtype=float)
    if phis.size == 0:
        raise ValueError("phase list is empty")
    expected = counts_per_point * (alpha * (1 - np.cos(phis)) + beta)
    raw = sample_counts(expected, seed)
    return ScanResult(phis, raw, expected, raw / counts_per_point,
                      np.sqrt(raw) / counts_per_point, kind="phase", baseline=counts_per_point)


@dataclass(frozen=True, eq=False)
class MultimodeMap:
    """Normalized coincidence per pair (k0, -k0).

    ``values`` and ``phase`` are ``(n, n)`` arrays indexed ``[iy + h, ix + h]``;
    entries outside the half-plane (kx > 0, or kx = 0 and ky > 0) are NaN.
    """

    grid: MomentumGrid
    values: np.ndarray
    phase: np.ndarray

    @property
    def half_plane(self) -> np.ndarray:
        return half_plane(self.grid)


def half_plane(grid: MomentumGrid) -> np.ndarray:
    r = np.arange(-grid.half, grid.half + 1)
    iy, ix = np.meshgrid(r, r, indexing="ij")
    return (ix > 0) | ((ix == 0) & (iy > 0))


def multimode_map(mask: PhaseMask, grid: MomentumGrid | None = None,
                  model: ImperfectionModel = IDEAL, delay: float = 0.0,
                  coherence: CoherenceModel = DEFAULT_COHERENCE) -> MultimodeMap:
    if grid is not None and grid != mask.grid:
        raise ValueError("mask and grid disagree")
    grid = mask.grid
    phase = relative_phase_map(mask)
    keep = half_plane(grid)
    c = 1.0 - model.alpha * coherence.gamma(delay) * np.cos(phase)
    return MultimodeMap(grid, np.where(keep, c, np.nan), np.where(keep, phase, np.nan))


