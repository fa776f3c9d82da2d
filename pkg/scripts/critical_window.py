"""Critical damping window of a shrinking string and an empirical check.

For each speed v < 0 the window roots (eta1, eta2) are printed together with
the observed oracle energy trend just inside and just outside the window.
"""
import argparse

import numpy as np

from moving_string import energy as en
from moving_string.characteristics import build_table
from moving_string.profiles import gaussian_velocity_bump, make_damping, make_profile


def observed_trend(profile, eta, samples=48):
    tab = build_table(gaussian_velocity_bump(profile.L), profile, make_damping(eta))
    E = np.array([en.energy_at(tab, profile, t) for t in np.linspace(0, profile.T, samples)])
    d = np.diff(E)
    noise = 1e-12 * E[0]
    if np.all(d <= noise):
        return "decay"
    if np.all(d >= -noise):
        return "growth"
    return "mixed"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--speeds", type=float, nargs="+", default=[-0.2, -0.4, -0.6, -0.8])
    args = ap.parse_args(argv)
    print("v,eta1,eta2,inside,below,above")
    for v in args.speeds:
        w = en.critical_damping(v)
        # keep l(T) >= 0.2 L
        profile = make_profile("linear", 1.0, v, 0.8 / abs(v))
        mid = float(np.sqrt(w.eta1 * w.eta2))
        cells = [observed_trend(profile, eta) for eta in (mid, 0.5 * w.eta1, 2.0 * w.eta2)]
        print(f"{v:g},{w.eta1:.12g},{w.eta2:.12g}," + ",".join(cells))


if __name__ == "__main__":
    main()
