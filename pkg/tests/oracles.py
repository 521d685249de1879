"""Independent oracles used to freeze expected values in the test suite.

Nothing here imports homsim; each routine recomputes its quantity from first
principles (symbolic operator algebra, numerical Fourier transforms).
"""

import numpy as np
import sympy as sp
from scipy.integrate import trapezoid
from scipy.optimize import curve_fit

SPEED_OF_LIGHT = 299_792_458.0


def filter_overlap(delays, center_wavelength, bandwidth_fwhm, samples=20001):
    """Two-photon overlap vs path difference for a Gaussian photon spectrum.

    The spectrum is Gaussian in *wavelength* and is resampled onto frequency
    numerically. For a CW pump the pair detunings are anti-correlated, so the
    interference term oscillates at twice the detuning.
    """
    sigma_lam = bandwidth_fwhm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
    lam = center_wavelength + np.linspace(-12, 12, samples) * sigma_lam
    s_lam = np.exp(-0.5 * ((lam - center_wavelength) / sigma_lam) ** 2)
    nu = SPEED_OF_LIGHT / lam
    s_nu = s_lam * lam**2 / SPEED_OF_LIGHT
    order = np.argsort(nu)
    nu, s_nu = nu[order], s_nu[order]
    nu0 = SPEED_OF_LIGHT / center_wavelength
    norm = trapezoid(s_nu, nu)
    out = []
    for dl in np.atleast_1d(delays):
        phase = 2.0 * 2.0 * np.pi * (nu - nu0) * dl / SPEED_OF_LIGHT
        out.append(abs(trapezoid(s_nu * np.exp(1j * phase), nu)) / norm)
    return np.array(out)


def fitted_coherence_length(center_wavelength, bandwidth_fwhm):
    """Fit the numerical overlap to exp(-dl^2 / (2 l^2)) and return l."""
    guess = center_wavelength**2 / bandwidth_fwhm
    delays = np.linspace(-1.0, 1.0, 201) * guess
    overlap = filter_overlap(delays, center_wavelength, bandwidth_fwhm)
    (ell,), _ = curve_fit(
        lambda x, l: np.exp(-x**2 / (2 * l**2)), delays, overlap, p0=[0.2 * guess]
    )
    return abs(ell)


def hom_constant(center_wavelength=810e-9, bandwidth_fwhm=3e-9):
    return fitted_coherence_length(center_wavelength, bandwidth_fwhm) / (
        center_wavelength**2 / bandwidth_fwhm
    )


# --- symbolic beamsplitter algebra -------------------------------------------

def beamsplitter_outcomes(terms, T, R, gamma):
    """Output probabilities for a two-photon input by expanding creation operators.

    ``terms`` maps (signal_mode, idler_mode) -> amplitude, where modes are any
    hashable labels. Bosonic creation operators commute, so the output state is
    a polynomial in commuting symbols a_k, b_k. The returned dict maps an
    unordered outcome (sorted tuple of (port, mode)) to its probability, using
    p = gamma * p_indistinguishable + (1 - gamma) * p_distinguishable.
    """
    T, R = sp.nsimplify(T), sp.nsimplify(R)
    t, r = sp.sqrt(T), sp.I * sp.sqrt(R)
    symbols = {}

    def sym(port, mode):
        key = (port, mode)
        if key not in symbols:
            symbols[key] = sp.Symbol(f"{port}_{len(symbols)}", commutative=True)
        return symbols[key]

    poly = 0
    labelled = {}
    for (ms, mi), amp in terms.items():
        amp = sp.nsimplify(amp) if not isinstance(amp, sp.Basic) else amp
        s_out = {("a", ms): t, ("b", ms): r}
        i_out = {("a", mi): r, ("b", mi): t}
        for m1, c1 in s_out.items():
            for m2, c2 in i_out.items():
                poly += amp * c1 * c2 * sym(*m1) * sym(*m2)
                labelled[(m1, m2)] = labelled.get((m1, m2), 0) + amp * c1 * c2
    poly = sp.expand(poly)
    inv = {v: k for k, v in symbols.items()}
    p_ind = {}
    for monomial, coeff in sp.Poly(poly, *symbols.values()).terms():
        modes = []
        for sym_, power in zip(symbols.values(), monomial):
            modes += [inv[sym_]] * power
        key = tuple(sorted(modes))
        weight = 2 if modes[0] == modes[1] else 1  # |sqrt(2)|^2 for a double occupancy
        p_ind[key] = complex(sp.N(coeff)) * complex(sp.N(sp.conjugate(coeff))) * weight
    p_dist = {}
    for (m1, m2), amp in labelled.items():
        key = tuple(sorted((m1, m2)))
        p_dist[key] = p_dist.get(key, 0) + abs(complex(sp.N(amp))) ** 2
    keys = set(p_ind) | set(p_dist)
    return {
        k: float(np.real(gamma * p_ind.get(k, 0) + (1 - gamma) * p_dist.get(k, 0)))
        for k in keys
    }


def exchange_expectation_symbolic():
    """<Psi_phi| exchange |Psi_phi> for the post-selected two-mode state."""
    phi = sp.Symbol("phi", real=True)
    plus, minus = sp.Rational(1), sp.exp(sp.I * phi)
    # exchange swaps the roles of the two product kets
    value = (sp.conjugate(plus) * minus + sp.conjugate(minus) * plus) / 2
    return phi, sp.simplify(sp.expand_complex(value).rewrite(sp.cos))
