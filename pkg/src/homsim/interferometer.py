"""Two-arm HOM interferometer: arm elements, beamsplitter and fibre collection.

Conventions
-----------
* Beam-frame labels: the beamsplitter keeps the transverse label of a photon
  both on transmission and on reflection. Physical image flips are counted
  as arm mirrors instead.
* Beamsplitter: ``signal(k) -> sqrt(T) a(k) + i sqrt(R) b(k)`` and
  ``idler(k) -> i sqrt(R) a(k) + sqrt(T) b(k)``.
* Partial distinguishability: the output probability of every outcome is
  ``gamma * p_indistinguishable + (1 - gamma) * p_distinguishable``, so gamma
  scales exactly the two-photon interference terms.
* Collection: each :class:`CollectionMode` defines a momentum window (single
  pixel or truncated Gaussian). A coincidence is one photon in each port with
  the two photons in *different* windows; the mirror-image arrangement of the
  fibres is included, so ``p_cc`` at gamma = 0 is ``T**2 + R**2``. The
  distribution is conditioned on both photons landing in the windows.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Union

import numpy as np

from .elements import (
    DEFAULT_COHERENCE,
    CoherenceModel,
    PhaseMask,
    apply_mask,
    apply_mirror,
    set_delay,
    step_mask,
)
from .state import ARMS, BiphotonState, MomentumGrid, MomentumLabel, as_label

PORTS = ("a", "b")
WINDOW_RADIUS = 3.0  # Gaussian windows are truncated at this many widths


class CollectionError(ValueError):
    pass


@dataclass(frozen=True)
class Mirror:
    pass


@dataclass(frozen=True)
class Phase:
    mask: PhaseMask


@dataclass(frozen=True)
class Delay:
    length: float


Element = Union[Mirror, Phase, Delay]


@dataclass(frozen=True)
class CollectionMode:
    port: str
    center: MomentumLabel
    width: float = 0.0

    def __post_init__(self):
        if self.port not in PORTS:
            raise CollectionError(f"unknown port {self.port!r}; expected 'a' or 'b'")
        object.__setattr__(self, "center", as_label(self.center))
        if not np.isfinite(self.width) or self.width < 0:
            raise CollectionError(f"window width must be >= 0, got {self.width}")

    def window(self, grid: MomentumGrid) -> dict[MomentumLabel, float]:
        """Normalized (sum of squares = 1) real weights of the fibre mode."""
        if not grid.contains(self.center):
            raise CollectionError(f"collection centre {tuple(self.center)} is off the grid")
        if self.width == 0:
            return {self.center: 1.0}
        k = grid.labels()
        d2 = np.sum((k - np.asarray(self.center)) ** 2, axis=1)
        inside = d2 <= (WINDOW_RADIUS * self.width) ** 2
        w = np.exp(-d2[inside] / (2 * self.width**2))
        w /= np.sqrt(np.sum(w**2))
        return {as_label(kk): float(ww) for kk, ww in zip(k[inside], w)}


def default_collection(k0, width: float = 0.0) -> tuple[CollectionMode, CollectionMode]:
    k0 = as_label(k0)
    return CollectionMode("a", k0, width), CollectionMode("b", -k0, width)


@dataclass(frozen=True)
class Circuit:
    """Signal and idler element lists, beamsplitter and collection windows.

    ``overlap`` is a residual mode-overlap factor multiplying gamma.
    """

    signal_arm: tuple = ()
    idler_arm: tuple = ()
    T: float = 0.5
    R: float | None = None
    collection: tuple[CollectionMode, ...] = ()
    coherence: CoherenceModel = DEFAULT_COHERENCE
    overlap: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "signal_arm", tuple(self.signal_arm))
        object.__setattr__(self, "idler_arm", tuple(self.idler_arm))
        object.__setattr__(self, "collection", tuple(self.collection))
        if self.R is None:
            object.__setattr__(self, "R", 1.0 - self.T)
        check_split(self.T, self.R)
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError(f"mode overlap must lie in [0, 1], got {self.overlap}")
        for el in self.signal_arm + self.idler_arm:
            if not isinstance(el, (Mirror, Phase, Delay)):
                raise TypeError(f"unknown element {el!r}")

    def arm(self, name: str) -> tuple:
        return self.signal_arm if name == "signal" else self.idler_arm

    def with_idler_delay(self, delay: float) -> Circuit:
        arm = tuple(e for e in self.idler_arm if not isinstance(e, Delay))
        return replace(self, idler_arm=arm + (Delay(float(delay)),))

    def with_extra_mirrors(self, arm: str, count: int) -> Circuit:
        extra = (Mirror(),) * count
        if arm == "signal":
            return replace(self, signal_arm=self.signal_arm + extra)
        return replace(self, idler_arm=self.idler_arm + extra)


def check_split(T: float, R: float):
    if not (0.0 < T < 1.0 and 0.0 < R < 1.0):
        raise ValueError(f"beamsplitter T and R must lie in (0, 1), got T={T}, R={R}")
    if abs(T + R - 1.0) > 1e-12:
        raise ValueError(f"beamsplitter T + R must equal 1, got {T + R!r}")


def hom_circuit(
    grid: MomentumGrid,
    phi: float,
    k0=(1, 0),
    *,
    T: float = 0.5,
    delay: float = 0.0,
    mirrors: tuple[int, int] = (2, 2),
    width: float = 0.0,
    coherence: CoherenceModel = DEFAULT_COHERENCE,
    overlap: float = 1.0,
) -> Circuit:
    """The standard setup: mirrors on both arms, a step mask and delay on the idler."""
    return Circuit(
        signal_arm=(Mirror(),) * mirrors[0],
        idler_arm=(Mirror(),) * mirrors[1] + (Phase(step_mask(phi, grid)), Delay(delay)),
        T=T,
        collection=default_collection(k0, width),
        coherence=coherence,
        overlap=overlap,
    )


class Parity(NamedTuple):
    signal: int
    idler: int
    same_parity: bool


def reflection_parity(circuit: Circuit) -> Parity:
    s = sum(isinstance(e, Mirror) for e in circuit.signal_arm) % 2
    i = sum(isinstance(e, Mirror) for e in circuit.idler_arm) % 2
    return Parity(s, i, s == i)


@dataclass(frozen=True)
class DetectionDistribution:
    p_cc: float
    p_aa: float
    p_bb: float
    residual: float
    captured: float = 1.0  # unconditioned probability that both photons were collected

    def total(self) -> float:
        return self.p_cc + self.p_aa + self.p_bb + self.residual


@dataclass(frozen=True, eq=False)
class BeamsplitterOutput:
    """First-quantized output amplitudes: photon 1 entered as signal, photon 2 as idler.

    Each row is ``(port1, ix1, iy1, port2, ix2, iy2)`` with ports coded 0 = a,
    1 = b; ``amplitudes`` holds the matching complex amplitudes.
    """

    modes: np.ndarray
    amplitudes: np.ndarray
    gamma: float = 1.0

    def outcome_probabilities(self) -> dict[tuple, float]:
        keys = [(tuple(r[:3]), tuple(r[3:])) for r in self.modes.tolist()]
        return _outcome_probabilities(keys, self.amplitudes, self.gamma)

    def fock_amplitudes(self) -> dict[tuple, complex]:
        """Second-quantized amplitudes over unordered mode pairs.

        Doubly occupied modes carry the bosonic sqrt(2).
        """
        labelled = {}
        for r, a in zip(self.modes.tolist(), self.amplitudes):
            key = (tuple(r[:3]), tuple(r[3:]))
            labelled[key] = labelled.get(key, 0j) + a
        out = {}
        for (m1, m2), a in labelled.items():
            key = tuple(sorted((m1, m2)))
            out[key] = out.get(key, 0j) + (np.sqrt(2) * a if m1 == m2 else a)
        return out


def _outcome_probabilities(keys, amps, g) -> dict[tuple, float]:
    labelled: dict[tuple, complex] = {}
    for key, a in zip(keys, amps):
        labelled[key] = labelled.get(key, 0j) + a
    out: dict[tuple, float] = {}
    for (m1, m2), a in labelled.items():
        if m1 == m2:
            p = (1 + g) * abs(a) ** 2
            out[(m1, m1)] = out.get((m1, m1), 0.0) + p
            continue
        key = (m1, m2) if m1 < m2 else (m2, m1)
        if key in out:
            continue
        b = labelled.get((m2, m1), 0j)
        p_ind = abs(a + b) ** 2
        p_dist = abs(a) ** 2 + abs(b) ** 2
        out[key] = g * p_ind + (1 - g) * p_dist
    return out


_SPLIT_COMBOS = ((0, 0), (0, 1), (1, 0), (1, 1))


def _split_coefficients(T: float, R: float) -> np.ndarray:
    t, r = np.sqrt(T), 1j * np.sqrt(R)
    signal_out = (t, r)  # to a, to b
    idler_out = (r, t)
    return np.array([signal_out[p] * idler_out[q] for p, q in _SPLIT_COMBOS])


def _beamsplitter(signal, idler, amps, T, R, g) -> BeamsplitterOutput:
    m = len(amps)
    coeff = _split_coefficients(T, R)
    ports = np.array(_SPLIT_COMBOS)
    modes = np.empty((m, 4, 6), dtype=np.int64)
    modes[:, :, 0] = ports[:, 0]
    modes[:, :, 1:3] = signal[:, None, :]
    modes[:, :, 3] = ports[:, 1]
    modes[:, :, 4:6] = idler[:, None, :]
    out = (amps[:, None] * coeff[None, :]).ravel()
    return BeamsplitterOutput(modes.reshape(-1, 6), out, float(g))


def apply_beamsplitter(state: BiphotonState, T: float, R: float, gamma: float = 1.0):
    check_split(T, R)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"indistinguishability must lie in [0, 1], got {gamma}")
    return _beamsplitter(state.signal, state.idler, state.amplitudes, T, R, gamma)


def _windows(modes, grid: MomentumGrid) -> list[dict]:
    if len(modes) < 2:
        raise CollectionError("at least two collection modes are required")
    if {m.port for m in modes} != set(PORTS):
        raise CollectionError("collection modes must cover both ports a and b")
    windows = []
    seen: dict[MomentumLabel, int] = {}
    for j, mode in enumerate(modes):
        if mode.center.is_origin():
            raise CollectionError("collection window centred on k = 0 (self-paired mode)")
        w = mode.window(grid)
        for k in w:
            if k in seen:
                raise CollectionError(
                    f"collection windows {seen[k]} and {j} overlap at {tuple(k)}"
                )
            seen[k] = j
        windows.append(w)
    return windows


def couple_collection(output: BeamsplitterOutput, modes, grid: MomentumGrid) -> DetectionDistribution:
    """Project the output onto the fibre modes and classify the outcomes."""
    windows = _windows(modes, grid)
    keys, amps = _project(output, windows)
    probs = _outcome_probabilities(keys, amps, output.gamma)
    return _classify(probs)


def _project(output: BeamsplitterOutput, windows):
    # fibre mode (port, window index); amplitude weighted by both window functions
    lookup = {}
    for j, w in enumerate(windows):
        for k, weight in w.items():
            lookup[k] = (j, weight)
    acc: dict[tuple, complex] = {}
    for row, a in zip(output.modes.tolist(), output.amplitudes):
        h1 = lookup.get((row[1], row[2]))
        h2 = lookup.get((row[4], row[5]))
        if h1 is None or h2 is None:
            continue
        key = ((row[0], h1[0]), (row[3], h2[0]))
        acc[key] = acc.get(key, 0j) + a * h1[1] * h2[1]
    return list(acc), list(acc.values())


def _classify(probs) -> DetectionDistribution:
    cc = aa = bb = res = 0.0
    for ((p1, w1), (p2, w2)), p in probs.items():
        if w1 == w2:
            res += p
        elif p1 != p2:
            cc += p
        elif p1 == 0:
            aa += p
        else:
            bb += p
    captured = cc + aa + bb + res
    if captured <= 1e-300:
        raise CollectionError("collection modes capture zero probability")
    return DetectionDistribution(
        float(cc / captured),
        float(aa / captured),
        float(bb / captured),
        float(res / captured),
        float(captured),
    )


def propagate(circuit: Circuit, state: BiphotonState) -> BiphotonState:
    """Apply both arms' elements in order."""
    for arm in ARMS:
        for el in circuit.arm(arm):
            if isinstance(el, Mirror):
                state = apply_mirror(state, arm)
            elif isinstance(el, Phase):
                state = apply_mask(state, el.mask, arm)
            else:
                state = set_delay(state, arm, el.length)
    return state


def circuit_gamma(circuit: Circuit, state: BiphotonState) -> float:
    dl = state.arm("idler").delay - state.arm("signal").delay
    return circuit.overlap * circuit.coherence.gamma(dl)


def run(circuit: Circuit, source: BiphotonState, k0=None) -> DetectionDistribution:
    """Propagate ``source`` through ``circuit`` and return the detection distribution.

    If ``k0`` is given the collection windows are re-centred: the first mode
    at +k0 and the second at -k0, keeping ports and widths. Circuits without
    collection modes require ``k0``.
    """
    modes = circuit.collection
    if k0 is not None:
        k0 = as_label(k0)
        if len(modes) == 0:
            modes = default_collection(k0)
        else:
            centres = (k0, -k0)
            modes = tuple(replace(m, center=centres[j % 2]) for j, m in enumerate(modes))
    elif len(modes) == 0:
        raise CollectionError("circuit has no collection modes and no k0 was given")
    out = propagate(circuit, source)
    g = circuit_gamma(circuit, out)
    windows = _windows(modes, source.grid)
    # the beamsplitter keeps labels, so only terms already inside the windows matter
    covered = set().union(*windows)
    keep = np.array(
        [(s[0], s[1]) in covered and (i[0], i[1]) in covered for s, i in zip(out.signal.tolist(), out.idler.tolist())],
        dtype=bool,
    )
    bs = _beamsplitter(out.signal[keep], out.idler[keep], out.amplitudes[keep], circuit.T, circuit.R, g)
    keys, amps = _project(bs, windows)
    return _classify(_outcome_probabilities(keys, amps, g))
