"""Precausal amplitude of the two-atom problem against omega0*r.

Prints |A(rho r)|/|A(2r)| for each window ratio rho and wave number, the
power-law slope per rho, and the slope of the RMS envelope over rho.
"""

import argparse

import numpy as np

from causal_lab.fermi import AtomPairConfig, power_law_fit, precausal_fraction, tail_envelope_exponent


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--wave-numbers", default="10,20,40,80", help="comma-separated omega0*r values")
    parser.add_argument("--ratios", default="0.2,0.35,0.5,0.65,0.8", help="comma-separated dtau/r values")
    args = parser.parse_args()
    xs = [float(v) for v in args.wave_numbers.split(",")]
    ratios = [float(v) for v in args.ratios.split(",")]
    configs = [AtomPairConfig(1.0, x) for x in xs]

    print("rho    " + "  ".join(f"x={x:<9g}" for x in xs) + "  slope    resid")
    for rho in ratios:
        fr = [precausal_fraction(c, rho) for c in configs]
        slope, resid = power_law_fit(xs, fr)
        print(f"{rho:<5g}  " + "  ".join(f"{v:.3e}  " for v in fr) + f"{slope:7.3f}  {resid:.3f}")
    slope, resid = tail_envelope_exponent(configs, np.linspace(0.2, 0.8, 13))
    print(f"RMS envelope over rho in [0.2, 0.8]: slope {slope:.3f}, residual {resid:.3f}")


if __name__ == "__main__":
    main()
