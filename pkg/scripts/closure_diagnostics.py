"""How far the three-state closure is from the exact small-bath dynamics.

Two numbers per coupling strength, both at small M = N:

* closure error -- the untruncated Hamiltonian also reaches states two flips
  away from the seed; max |rho_full - rho_closure| over t in [0, 5];
* cross-coherence leak -- the closed-form map omits coherence-to-coherence
  terms between seeds one flip apart; max |rho_map - rho_exact_trace| for a
  generic initial state (zero for |11>, |10>, Bell and diagonal states).

    python3 scripts/closure_diagnostics.py [--size 4]
"""

import argparse
from dataclasses import replace

import numpy as np

from centralspins.dynmap import evolve, map_coefficients
from centralspins.model import ModelParams
from centralspins.oracle import SmallBathModel, full_hp_deviation
from centralspins.states import basis_state, random_density_matrix


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=4)
    ap.add_argument("--delta", type=float, default=2.5)
    args = ap.parse_args()
    base = ModelParams(2.0, 1.9, args.delta, 1.1, 1.2, 2.6, 2.5, args.size, args.size, 1.0)
    rho_generic = random_density_matrix(np.random.default_rng(0))
    times = np.linspace(0.0, 5.0, 21)
    print(f"{'scale':>6} {'eps1':>6} {'eps2':>6} {'closure error':>14} {'coherence leak':>15}")
    for scale in (0.02, 0.05, 0.1, 0.2, 0.5, 1.0):
        p = replace(base, eps1=2.6 * scale, eps2=2.5 * scale)
        closure = full_hp_deviation(p, basis_state("11"), times)
        model = SmallBathModel(p)
        leak = max(np.abs(evolve(map_coefficients(p, t), rho_generic) - model.evolve(rho_generic, t)).max()
                   for t in times)
        print(f"{scale:6.2f} {p.eps1:6.3f} {p.eps2:6.3f} {closure.max_abs_deviation:14.3e} {leak:15.3e}")


if __name__ == "__main__":
    main()
