"""Single-arm optical elements: phase masks, mirrors, delay lines, coherence."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .state import BiphotonState, MomentumGrid, arm_index, as_label

# Gaussian-filter coherence constant: l_c = HOM_COHERENCE_CONSTANT * lambda0^2 / dlambda.
# Frozen from the numerical Fourier-transform oracle at 810 nm / 3 nm FWHM
# (scripts/freeze_coherence_constant.py); the Gaussian-in-frequency limit is
# sqrt(2 ln 2) / (2 pi) = 0.1873906...
HOM_COHERENCE_CONSTANT = 0.18739224752005954


def wrap_phase(x):
    """Reduce angles to the interval (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


@dataclass(frozen=True, eq=False)
class PhaseMask:
    """Per-pixel phase in radians, ``phase[iy + h, ix + h]``.

    Phases are kept unwrapped; only :func:`relative_phase` reduces modulo 2 pi.
    """

    grid: MomentumGrid
    phase: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        p = np.array(self.phase, dtype=float, copy=True)
        if p.size != n * n:
            raise ValueError(f"phase map has {p.size} values, grid needs {n * n}")
        p = p.reshape(n, n)
        if not np.all(np.isfinite(p)):
            raise ValueError("phase map contains non-finite values")
        p.setflags(write=False)
        object.__setattr__(self, "phase", p)

    def at(self, labels) -> np.ndarray:
        labels = np.asarray(labels)
        h = self.grid.half
        return self.phase[labels[..., 1] + h, labels[..., 0] + h]

    def __eq__(self, other):
        if not isinstance(other, PhaseMask):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.phase, other.phase)

    def __add__(self, other: PhaseMask) -> PhaseMask:
        _check_grid(self.grid, other.grid)
        return PhaseMask(self.grid, self.phase + other.phase)


def _check_grid(a: MomentumGrid, b: MomentumGrid):
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def step_mask(jump: float, grid: MomentumGrid) -> PhaseMask:
    """Phase ``jump`` for kx > 0, 0 for kx < 0 and ``jump / 2`` on the kx = 0 line."""
    if not np.isfinite(jump):
        raise ValueError(f"phase jump must be finite, got {jump}")
    ix = grid.labels()[:, 0].reshape(grid.n, grid.n)
    phase = np.where(ix > 0, jump, np.where(ix < 0, 0.0, jump / 2))
    return PhaseMask(grid, phase)


def pixel_mask(values, grid: MomentumGrid) -> PhaseMask:
    return PhaseMask(grid, values)


def zero_mask(grid: MomentumGrid) -> PhaseMask:
    return PhaseMask(grid, np.zeros((grid.n, grid.n)))


def relative_phase(mask: PhaseMask, k0) -> float:
    """phi(k0) - phi(-k0), wrapped to (-pi, pi]."""
    k0 = as_label(k0)
    if k0.is_origin():
        raise ValueError("relative phase is undefined at k0 = 0")
    if not mask.grid.contains(k0):
        raise ValueError(f"k0 = {tuple(k0)} is outside the grid")
    return float(wrap_phase(mask.at(np.asarray(k0)) - mask.at(-np.asarray(k0))))


def relative_phase_map(mask: PhaseMask) -> np.ndarray:
    """Wrapped relative phase for every grid mode (0 at the origin)."""
    return wrap_phase(mask.phase - mask.phase[::-1, ::-1])


def _labels(state: BiphotonState, arm: str) -> np.ndarray:
    return state.signal if arm_index(arm) == 0 else state.idler


def apply_mask(state: BiphotonState, mask: PhaseMask, arm: str) -> BiphotonState:
    _check_grid(state.grid, mask.grid)
    amp = state.amplitudes * np.exp(1j * mask.at(_labels(state, arm)))
    return replace(state, amplitudes=amp)


def apply_mirror(state: BiphotonState, arm: str) -> BiphotonState:
    """Reflect one arm: every label on that arm goes k -> -k."""
    flipped = -_labels(state, arm)
    if arm_index(arm) == 0:
        new = replace(state, signal=flipped)
    else:
        new = replace(state, idler=flipped)
    return new.with_arm(arm, mirror_count=state.arm(arm).mirror_count + 1)


def set_delay(state: BiphotonState, arm: str, delay: float) -> BiphotonState:
    if not np.isfinite(delay):
        raise ValueError(f"delay must be finite, got {delay}")
    return state.with_arm(arm, delay=float(delay))


@dataclass(frozen=True)
class CoherenceModel:
    """Gaussian two-photon overlap exp(-dl^2 / (2 l_c^2)); lengths in metres."""

    coherence_length: float

    def __post_init__(self):
        if not np.isfinite(self.coherence_length) or self.coherence_length <= 0:
            raise ValueError(
                f"coherence length must be positive, got {self.coherence_length}"
            )

    def gamma(self, delay):
        return gamma(self, delay)


def gamma(model: CoherenceModel, delay):
    g = np.exp(-np.square(delay) / (2 * model.coherence_length**2))
    return float(g) if np.ndim(g) == 0 else g


def coherence_from_filter(center_wavelength: float, bandwidth_fwhm: float) -> CoherenceModel:
    """Coherence model for photons behind a Gaussian bandpass filter."""
    if not (center_wavelength > 0 and bandwidth_fwhm > 0):
        raise ValueError("wavelength and bandwidth must be positive")
    if bandwidth_fwhm >= center_wavelength:
        raise ValueError("bandwidth must be smaller than the centre wavelength")
    return CoherenceModel(HOM_COHERENCE_CONSTANT * center_wavelength**2 / bandwidth_fwhm)


#: 810 nm degenerate photons behind a 3 nm bandpass filter.
DEFAULT_COHERENCE = coherence_from_filter(810e-9, 3e-9)
