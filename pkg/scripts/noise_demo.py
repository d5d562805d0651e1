"""Empirical OU statistics against the exact covariance, plus one sample path as CSV."""

import argparse

import numpy as np

from dynepovm.noise import NoiseParams, generate_complex_path, generate_xi_batch, ou_covariance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kappa", type=float, default=1.0)
    ap.add_argument("--gamma-ou", type=float, default=15.0)
    ap.add_argument("--paths", type=int, default=5000)
    ap.add_argument("--csv")
    args = ap.parse_args()
    p = NoiseParams(args.kappa, args.gamma_ou, 1 / 150, 2.0, seed=1)
    x = generate_xi_batch(p, range(args.paths))
    t = p.times
    print(f"stationary variance kappa*gamma/4 = {p.stationary_variance:.4f}")
    print(f"{'t':>6} {'lag':>6} {'empirical':>10} {'exact':>10}")
    for i, lag in [(150, 0), (150, 3), (300, 0), (300, 15)]:
        emp = np.mean(x[:, i].real * x[:, i - lag].real)
        print(f"{t[i]:6.2f} {t[lag]:6.3f} {emp:10.4f} {ou_covariance(t[i], t[i - lag], p.kappa, p.gamma_ou):10.4f}")
    if args.csv:
        generate_complex_path(p).to_csv(args.csv)
        print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
