"""Scan normalization, visibilities, cosine/Gaussian fits and phase retrieval."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from .coincidence import ScanResult

BASELINE_WIDTHS = 3.0  # baseline points satisfy |dl| > 3 l_c


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    params: dict
    errors: dict
    rss: float
    converged: bool
    message: str = ""
    dof: int = 0

    def __getitem__(self, name):
        return self.params[name]


@dataclass(frozen=True)
class VisibilityReport:
    v: float
    kind: str
    c_extremum: float
    c_baseline: float
    out_of_range: bool = False
    kind_mismatch: bool = False


def normalize_scan(scan: ScanResult, coherence_length: float,
                   accidentals: float | None = None) -> ScanResult:
    """Divide accidental-subtracted counts by the mean far-delay level.

    Points with ``|dl| > 3 l_c`` define the baseline. Works from
    ``raw_counts`` only, so repeated application is a no-op.
    """
    acc = scan.accidentals if accidentals is None else accidentals
    far = np.abs(scan.axis) > BASELINE_WIDTHS * coherence_length
    if far.sum() < 3:
        raise ValueError(
            f"need at least 3 points with |dl| > {BASELINE_WIDTHS:g} l_c for the baseline, "
            f"got {far.sum()}"
        )
    raw = scan.raw_counts.astype(float)
    base = np.mean(raw[far] - acc)
    if base <= 0:
        raise ValueError("baseline counts are not positive")
    base_err = np.sqrt(raw[far].sum()) / far.sum()
    norm = (raw - acc) / base
    err = np.sqrt(raw / base**2 + (norm * base_err / base) ** 2)
    return replace(scan, normalized=norm, stderr=err, baseline=base, accidentals=acc)


def _zero_index(axis) -> int:
    i = int(np.argmin(np.abs(axis)))
    scale = max(np.max(np.abs(axis)), 1e-300)
    if abs(axis[i]) > 1e-9 * scale:
        raise ValueError("scan has no point at zero delay")
    return i


def visibility(scan: ScanResult, kind: str) -> VisibilityReport:
    """Dip or peak visibility from the zero-delay sample of a normalized scan.

    The baseline is 1 by construction of the normalization.
    """
    c0 = float(scan.normalized[_zero_index(scan.axis)])
    if kind == "dip":
        v = 1.0 - c0
        mismatch = c0 > 1.0
    elif kind == "peak":
        v = c0 - 1.0
        mismatch = c0 < 1.0
    else:
        raise ValueError(f"kind must be 'dip' or 'peak', got {kind!r}")
    clamped = min(max(v, 0.0), 1.0)
    return VisibilityReport(clamped, kind, c0, 1.0, out_of_range=clamped != v,
                            kind_mismatch=mismatch)


def auto_visibility(scan: ScanResult) -> VisibilityReport:
    c0 = scan.normalized[_zero_index(scan.axis)]
    return visibility(scan, "peak" if c0 > 1.0 else "dip")


def fitted_visibility(fit: FitResult) -> float:
    """|amplitude| / offset of a Gaussian fit."""
    return abs(fit["amplitude"]) / fit["offset"]


def fit_cosine(phi, c, sigma=None) -> FitResult:
    """Linear least squares for c = alpha (1 - cos phi) + beta.

    Solved through the 2x2 normal equations; with ``sigma`` the rows are
    weighted by 1 / sigma^2. Uncertainties are scaled by the residual variance.
    """
    phi = np.asarray(phi, dtype=float)
    c = np.asarray(c, dtype=float)
    if sigma is None:
        w = np.ones_like(c)
    else:
        sigma = np.asarray(sigma, dtype=float)
        if np.any(sigma <= 0):
            raise FitError("sigma must be positive")
        w = 1.0 / sigma**2
    if phi.shape != c.shape:
        raise FitError("phi and c must have the same length")
    if len(np.unique(phi)) < 5:
        raise FitError("need at least 5 distinct phase values")
    if np.ptp(phi) < np.pi - 1e-12:
        raise FitError("phase values must span at least pi")
    x = 1.0 - np.cos(phi)
    design = np.column_stack([x, np.ones_like(x)])
    normal = design.T @ (w[:, None] * design)
    # relative determinant: zero when the regressor is constant
    if np.linalg.det(normal) <= 1e-12 * normal[0, 0] * normal[1, 1]:
        raise FitError("degenerate design: 1 - cos(phi) does not vary")
    coef = np.linalg.solve(normal, design.T @ (w * c))
    resid = c - design @ coef
    rss = float(resid @ (w * resid))
    dof = len(c) - 2
    cov = np.linalg.inv(normal) * (rss / dof if dof > 0 else np.nan)
    err = np.sqrt(np.diag(cov))
    return FitResult(
        {"alpha": float(coef[0]), "beta": float(coef[1])},
        {"alpha": float(err[0]), "beta": float(err[1])},
        rss, True, dof=dof,
    )


def gaussian(x, amplitude, center, sigma, offset):
    return offset + amplitude * np.exp(-((x - center) ** 2) / (2 * sigma**2))


def gaussian_initial_guess(x, y) -> np.ndarray:
    """offset = mean of the outer fifth on each side, centre = extremum,
    sigma = half the full width at half extremum."""
    order = np.argsort(x)
    x, y = x[order], y[order]
    edge = max(1, len(x) // 5)
    offset = np.mean(np.r_[y[:edge], y[-edge:]])
    i = int(np.argmax(np.abs(y - offset)))
    amplitude = y[i] - offset
    above = np.abs(y - offset) >= abs(amplitude) / 2
    lo = hi = i
    while lo > 0 and above[lo - 1]:
        lo -= 1
    while hi < len(x) - 1 and above[hi + 1]:
        hi += 1
    fwhm = x[hi] - x[lo]
    if fwhm <= 0:
        fwhm = np.min(np.diff(x)) if len(x) > 1 else 1.0
    return np.array([amplitude, x[i], fwhm / 2, offset])


def fit_gaussian(x, y, yerr=None) -> FitResult:
    """Levenberg-Marquardt fit of offset + amplitude exp(-(x - center)^2 / 2 sigma^2).

    Never raises on a failed fit: ``converged`` is False and ``message``
    says why (solver failure, a feature outside the scanned window, a width
    below half the sample spacing, or an amplitude lost in the noise).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 7:
        raise FitError("need at least 7 points for a Gaussian fit")
    w = np.ones_like(y) if yerr is None else 1.0 / np.where(np.asarray(yerr) > 0, yerr, np.inf)
    if yerr is not None and not np.any(w > 0):
        w = np.ones_like(y)
    p0 = gaussian_initial_guess(x, y)
    scale = np.ptp(x) or 1.0

    # fit in scaled x so LM step sizes are well conditioned for metre-scale delays
    def resid(p):
        a, c, s, o = p
        return w * (gaussian(x / scale, a, c, s, o) - y)

    q0 = p0.copy()
    q0[1] /= scale
    q0[2] /= scale
    sol = least_squares(resid, q0, method="lm", x_scale="jac", max_nfev=2000)
    a, c, s, o = sol.x
    params = {"amplitude": a, "center": c * scale, "sigma": abs(s) * scale, "offset": o}
    rss = float(np.sum(sol.fun**2))
    dof = len(x) - 4
    errors = dict.fromkeys(params, np.nan)
    try:
        cov = np.linalg.inv(sol.jac.T @ sol.jac) * (rss / dof)
        with np.errstate(invalid="ignore"):
            err = np.sqrt(np.diag(cov))
        errors = {"amplitude": err[0], "center": err[1] * scale,
                  "sigma": err[2] * scale, "offset": err[3]}
    except np.linalg.LinAlgError:
        pass
    problems = []
    x_ext = x[int(np.argmax(np.abs(y - p0[3])))]
    if x_ext in (x.min(), x.max()):
        problems.append("data extremum lies at the edge of the scan (not bracketed)")
    if not sol.success:
        problems.append(f"solver did not converge: {sol.message}")
    lo, hi = params["center"] - params["sigma"], params["center"] + params["sigma"]
    if not (x.min() <= lo and hi <= x.max()):
        problems.append(f"fitted feature [{lo:.6g}, {hi:.6g}] not inside scanned window "
                        f"[{x.min():.6g}, {x.max():.6g}]")
    spacing = np.median(np.diff(np.sort(x)))
    if not (spacing / 2 <= params["sigma"] < np.ptp(x)):
        problems.append(f"width {params['sigma']:.6g} not resolved by the scan")
    if not all(np.isfinite(v) for v in errors.values()):
        problems.append("parameter uncertainties undefined (singular covariance)")
    elif abs(params["amplitude"]) < 3 * errors["amplitude"]:
        problems.append("feature amplitude below 3 standard errors")
    if not all(np.isfinite(v) for v in params.values()):
        problems.append("non-finite parameters")
    params = {k: float(v) for k, v in params.items()}
    errors = {k: float(v) for k, v in errors.items()}
    return FitResult(params, errors, rss, not problems,
                     "; ".join(problems) or str(sol.message), dof=dof)


def retrieve_phase(c, alpha: float = 1.0, beta: float = 0.0, tol: float = 1e-6):
    """Invert c = alpha (1 - cos phi) + beta for phi in [0, pi]."""
    if alpha == 0:
        raise ValueError("alpha must be non-zero")
    x = (np.asarray(c, dtype=float) - beta) / alpha
    if np.any(x < -tol) or np.any(x > 2 + tol):
        raise ValueError(f"normalized rate outside the invertible range [0, 2]: {c}")
    phi = np.arccos(1.0 - np.clip(x, 0.0, 2.0))
    return float(phi) if np.ndim(phi) == 0 else phi
