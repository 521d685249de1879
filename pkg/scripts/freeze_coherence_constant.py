"""Recompute the coherence-length constant l_c * dl / lambda0^2 from the
numerical filter-overlap model in tests/oracles.py and compare it with the
value stored in homsim.elements."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

import numpy as np  # noqa: E402
from oracles import fitted_coherence_length, hom_constant  # noqa: E402

from homsim.elements import HOM_COHERENCE_CONSTANT, coherence_from_filter  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--wavelength", type=float, default=810e-9, help="centre wavelength, m")
    ap.add_argument("--bandwidth", type=float, default=3e-9, help="filter FWHM, m")
    args = ap.parse_args()

    k = float(hom_constant(args.wavelength, args.bandwidth))
    analytic = float(np.sqrt(2 * np.log(2)) / (2 * np.pi))
    ell = fitted_coherence_length(args.wavelength, args.bandwidth)
    model = coherence_from_filter(args.wavelength, args.bandwidth).coherence_length
    print(f"numerical constant   {k!r}")
    print(f"narrow-band limit    {analytic!r}")
    print(f"stored constant      {HOM_COHERENCE_CONSTANT!r}")
    print(f"l_c (oracle)         {ell:.9e} m")
    print(f"l_c (homsim)         {model:.9e} m")
    return 0 if abs(k - HOM_COHERENCE_CONSTANT) < 1e-9 * k else 1


if __name__ == "__main__":
    raise SystemExit(main())
