"""Fitted width and shift of the discrete-level decay against the golden rule.

Sweeps the number of continuum levels at fixed band and coupling.
"""

import argparse

from causal_lab.decay import ContinuumSpec, default_fit_window, energy_shift, evolve_amplitudes, fit_decay
from causal_lab.decay import golden_rule_width
from causal_lab.propagators import CausalPrescription


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-states", default="101,201,401,801")
    parser.add_argument("--coupling", type=float, default=0.01)
    parser.add_argument("--band-low", type=float, default=-1.0)
    parser.add_argument("--t-max", type=float, default=60.0)
    args = parser.parse_args()
    print("N      Gamma_fit/golden  DeltaE_fit/PV   window")
    for n in (int(v) for v in args.n_states.split(",")):
        spec = ContinuumSpec(n_states=n, coupling=args.coupling, band_low=args.band_low)
        start, end = default_fit_window(spec)
        window = (start, min(end, args.t_max))
        fit = fit_decay(evolve_amplitudes(spec, CausalPrescription.PLUS, args.t_max), window)
        print(
            f"{n:<6d} {fit.Gamma_fit / golden_rule_width(spec):<17.5f} "
            f"{fit.DeltaE_fit / energy_shift(spec):<15.5f} [{window[0]:.2f}, {window[1]:.2f}]"
        )


if __name__ == "__main__":
    main()
