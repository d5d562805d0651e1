"""How far the colored-noise ensemble mean sits from the white-noise limit.

For each OU bandwidth the mean reconstructed effect is compared with the
identity; the deviation should shrink roughly as 1/gamma_ou if it is the
finite-correlation-time (Wong-Zakai) correction rather than a bug.
"""

import argparse

import numpy as np

from dynepovm.dynamics import Physics, Scheme, SchemeSpec
from dynepovm.hilbert import CavityState
from dynepovm.integrate import EnsembleConfig, IntegratorConfig
from dynepovm.noise import NoiseParams
from dynepovm.povm import reconstruct_ensemble


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", type=int, default=2000)
    ap.add_argument("--scheme", default="hom_x")
    ap.add_argument("--t-end", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    kind = Scheme(args.scheme)
    print(f"{'gamma_ou':>9} {'dt':>8} {'t':>6} {'mean mu - 1':>12} {'stderr':>9}")
    for gamma in (15.0, 30.0, 60.0):
        dt = min(1 / 150, 0.1 / gamma)
        cfg = IntegratorConfig(dt, args.t_end)
        ens = reconstruct_ensemble(SchemeSpec(kind, Physics()), CavityState(), EnsembleConfig(args.M, args.seed),
                                   NoiseParams(1.0, gamma, dt, args.t_end, args.seed), cfg, check=False)
        mean, se = ens.mean()[:, 0] - 1, ens.stderr()[:, 0]
        for t in (0.25, 0.5, 1.0):
            k = int(np.argmin(np.abs(ens.times - t)))
            print(f"{gamma:9.0f} {dt:8.5f} {ens.times[k]:6.2f} {mean[k]:12.5f} {se[k]:9.5f}")


if __name__ == "__main__":
    main()
