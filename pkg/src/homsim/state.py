"""Discretized transverse-momentum biphoton states.

Momenta are integer labels ``(ix, iy)`` on an odd ``n x n`` grid centred on
k = 0, in units where ``k_max`` is the half-extent of the grid (measured in
SPDC cone radii). A :class:`BiphotonState` stores amplitudes sparsely as three
parallel arrays: the signal label, the idler label and the complex amplitude of
each ``|k_s>_s |k_i>_i`` term.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

ARMS = ("signal", "idler")
NORM_TOL = 1e-9


class MomentumLabel(NamedTuple):
    ix: int
    iy: int

    def __neg__(self) -> MomentumLabel:
        return MomentumLabel(-self.ix, -self.iy)

    def is_origin(self) -> bool:
        return self.ix == 0 and self.iy == 0


def as_label(k) -> MomentumLabel:
    ix, iy = k
    return MomentumLabel(int(ix), int(iy))


@dataclass(frozen=True)
class MomentumGrid:
    n: int
    k_max: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise TypeError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 3:
            raise ValueError(f"grid size must be at least 3, got {self.n}")
        if self.n % 2 == 0:
            raise ValueError(
                f"grid size must be odd so that k = 0 is a grid mode, got {self.n}"
            )
        if not np.isfinite(self.k_max) or self.k_max <= 0:
            raise ValueError(f"k_max must be a positive finite number, got {self.k_max}")

    @property
    def half(self) -> int:
        return (self.n - 1) // 2

    @property
    def size(self) -> int:
        return self.n * self.n

    @property
    def spacing(self) -> float:
        return self.k_max / self.half

    def labels(self) -> np.ndarray:
        """All grid labels as an ``(n*n, 2)`` int array, rows of ``(ix, iy)``.

        Ordering is row-major with ``iy`` as the slow index, matching
        :meth:`index`.
        """
        r = np.arange(-self.half, self.half + 1)
        iy, ix = np.meshgrid(r, r, indexing="ij")
        return np.stack([ix.ravel(), iy.ravel()], axis=1)

    def contains(self, k) -> bool:
        ix, iy = k
        return abs(ix) <= self.half and abs(iy) <= self.half

    def index(self, labels) -> np.ndarray:
        """Flat array index of each ``(ix, iy)`` row in ``labels``."""
        labels = np.asarray(labels)
        return (labels[..., 1] + self.half) * self.n + (labels[..., 0] + self.half)

    def physical(self, k) -> tuple[float, float]:
        ix, iy = k
        return ix * self.spacing, iy * self.spacing


def build_grid(n: int, k_max: float) -> MomentumGrid:
    return MomentumGrid(n, float(k_max))


@dataclass(frozen=True)
class ArmState:
    mirror_count: int = 0
    delay: float = 0.0


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BiphotonState:
    """Pure two-photon state over (signal momentum, idler momentum) pairs.

    Instances are immutable; every operation returns a new state. Arm
    metadata (mirror count, delay) rides along in ``arms``, keyed by the
    names in :data:`ARMS`.
    """

    grid: MomentumGrid
    signal: np.ndarray
    idler: np.ndarray
    amplitudes: np.ndarray
    arms: tuple[ArmState, ArmState] = field(default=(ArmState(), ArmState()))

    def __post_init__(self):
        object.__setattr__(self, "signal", _frozen(self.signal, np.int64).reshape(-1, 2))
        object.__setattr__(self, "idler", _frozen(self.idler, np.int64).reshape(-1, 2))
        object.__setattr__(self, "amplitudes", _frozen(self.amplitudes, np.complex128).ravel())
        m = len(self.amplitudes)
        if len(self.signal) != m or len(self.idler) != m:
            raise ValueError("signal, idler and amplitude arrays must have equal length")
        if not np.all(np.isfinite(self.amplitudes)):
            raise ValueError("amplitudes must be finite")
        h = self.grid.half
        if m and (np.abs(self.signal).max() > h or np.abs(self.idler).max() > h):
            raise ValueError("momentum label outside the grid")
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {self.norm():.12g})")

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def __len__(self):
        return len(self.amplitudes)

    def as_dict(self) -> dict[tuple[MomentumLabel, MomentumLabel], complex]:
        out = {}
        for s, i, a in zip(self.signal, self.idler, self.amplitudes):
            key = (as_label(s), as_label(i))
            out[key] = out.get(key, 0.0) + complex(a)
        return out

    def amplitude(self, k_signal, k_idler) -> complex:
        hit = np.all(self.signal == np.asarray(k_signal), axis=1) & np.all(
            self.idler == np.asarray(k_idler), axis=1
        )
        return complex(self.amplitudes[hit].sum())

    def arm(self, name: str) -> ArmState:
        return self.arms[arm_index(name)]

    def with_arm(self, name: str, **changes) -> BiphotonState:
        arms = list(self.arms)
        i = arm_index(name)
        arms[i] = replace(arms[i], **changes)
        return replace(self, arms=tuple(arms))

    def inner(self, other: BiphotonState) -> complex:
        """<self|other>, matching terms by their label pair."""
        mine = self.as_dict()
        return sum(
            (np.conj(mine.get(k, 0.0)) * v for k, v in other.as_dict().items()), 0j
        )

    def same_amplitudes(self, other: BiphotonState, atol: float = 0.0) -> bool:
        a, b = self.as_dict(), other.as_dict()
        keys = set(a) | set(b)
        return all(abs(a.get(k, 0) - b.get(k, 0)) <= atol for k in keys)

    def exchange(self) -> BiphotonState:
        return exchange(self)


def arm_index(name: str) -> int:
    try:
        return ARMS.index(name)
    except ValueError:
        raise ValueError(f"unknown arm {name!r}; expected one of {ARMS}") from None


def spdc_state(grid: MomentumGrid, envelope_width: float | None = None) -> BiphotonState:
    """Thin-crystal, collimated-pump SPDC state sum_k |k>_s |-k>_i.

    With ``envelope_width`` (in the same units as ``k_max``) the amplitudes
    carry a radial Gaussian envelope instead of being flat.
    """
    k = grid.labels()
    if envelope_width is None:
        amp = np.full(len(k), 1.0 / np.sqrt(len(k)), dtype=complex)
    else:
        if envelope_width <= 0:
            raise ValueError("envelope_width must be positive")
        r2 = np.sum((k * grid.spacing) ** 2, axis=1)
        amp = np.exp(-r2 / (4 * envelope_width**2)).astype(complex)
        amp /= np.sqrt(np.sum(np.abs(amp) ** 2))
    return BiphotonState(grid, k, -k, amp)


def exchange(state):
    """Swap signal and idler on every term (and swap the arm metadata)."""
    if isinstance(state, TwoModeState):
        return replace(state, c_plus=state.c_minus, c_minus=state.c_plus)
    return BiphotonState(
        state.grid, state.idler, state.signal, state.amplitudes, state.arms[::-1]
    )


def exchange_expectation(state) -> complex:
    """<psi| exchange |psi>."""
    if isinstance(state, TwoModeState):
        return complex(
            np.conj(state.c_plus) * state.c_minus + np.conj(state.c_minus) * state.c_plus
        )
    return state.inner(exchange(state))


@dataclass(frozen=True)
class TwoModeState:
    """c_plus |k0>_s |-k0>_i + c_minus |-k0>_s |k0>_i."""

    k0: MomentumLabel
    c_plus: complex
    c_minus: complex

    def __post_init__(self):
        n = abs(self.c_plus) ** 2 + abs(self.c_minus) ** 2
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"two-mode state is not normalized (norm^2 = {n:.15g})")

    @classmethod
    def from_phase(cls, k0, phi: float) -> TwoModeState:
        s = 1 / np.sqrt(2)
        return cls(as_label(k0), complex(s), complex(s * np.exp(1j * phi)))

    @property
    def relative_phase(self) -> float:
        return float(np.angle(self.c_minus / self.c_plus))

    def to_biphoton(self, grid: MomentumGrid) -> BiphotonState:
        k0 = np.asarray(self.k0)
        return BiphotonState(
            grid, [k0, -k0], [-k0, k0], [self.c_plus, self.c_minus]
        )


def post_select(state: BiphotonState, k0) -> TwoModeState:
    """Project onto the anti-correlated pair {(k0, -k0), (-k0, k0)} and renormalize.

    The global phase is removed so that ``c_plus`` is real and non-negative.
    """
    k0 = as_label(k0)
    if k0.is_origin():
        raise ValueError("k0 = 0 has no distinct partner mode; cannot post-select")
    if not state.grid.contains(k0):
        raise ValueError(f"k0 = {tuple(k0)} is outside the grid")
    c_plus = state.amplitude(k0, -k0)
    c_minus = state.amplitude(-k0, k0)
    weight = abs(c_plus) ** 2 + abs(c_minus) ** 2
    if weight == 0:
        raise ValueError(f"state has zero weight on the pair at k0 = {tuple(k0)}")
    scale = 1 / np.sqrt(weight)
    if c_plus != 0:
        scale *= np.conj(c_plus) / abs(c_plus)
    elif c_minus != 0:
        scale *= np.conj(c_minus) / abs(c_minus)
    return TwoModeState(k0, complex(c_plus * scale), complex(c_minus * scale))
