"""Compare the numeric quantizers against the closed forms over a parameter grid.

s-ordered: radial quadrature vs the geometric closed form, error relative to
max(1, |entry|).  gamma-ordered: Hermiticity defect and truncated trace of
the dense Weyl quantization at lambda = 1/2.
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

import numpy as np

from qphase import (
    ClassicalGaussian,
    cg_gaussian_closed,
    cg_quantize_numeric,
    gaussian_transform,
    hermiticity_defect,
    weyl_gamma_quantize_numeric,
)


@dataclass
class SweepConfig:
    lambdas: list = field(default_factory=lambda: [0.1, 0.5, 1.0, 2.0, 5.0])
    orderings: list = field(default_factory=lambda: [-1.0, -0.5, 0.0, 0.5, 1.0])
    gammas: list = field(default_factory=lambda: [-1.0, -0.5, 0.0, 0.5, 1.0])
    dim: int = 24
    weyl_dim: int = 8
    rel_tol: float = 1e-10


def s_sweep(cfg: SweepConfig):
    print(f"{'lambda':>8} {'s':>6} {'max rel err':>12} {'max |entry|':>12} {'seconds':>8}")
    worst = 0.0
    for lam in cfg.lambdas:
        g = ClassicalGaussian(lam)
        for s in cfg.orderings:
            t0 = time.perf_counter()
            num = cg_quantize_numeric(gaussian_transform(g), s, cfg.dim, cfg.rel_tol).entries
            ref = cg_gaussian_closed(g, s, cfg.dim).entries
            err = float(np.max(np.abs(num - ref) / np.maximum(1.0, np.abs(ref))))
            worst = max(worst, err)
            print(f"{lam:8.3g} {s:6.2f} {err:12.3e} {np.abs(ref).max():12.3e} {time.perf_counter() - t0:8.3f}")
    return worst


def gamma_sweep(cfg: SweepConfig):
    g = ClassicalGaussian(0.5)
    print(f"\n{'gamma':>6} {'defect':>12} {'trace':>14}  (lambda = 1/2, dim {cfg.weyl_dim})")
    for gamma in cfg.gammas:
        op = weyl_gamma_quantize_numeric(g, gamma, cfg.weyl_dim, cfg.rel_tol)
        print(f"{gamma:6.2f} {hermiticity_defect(op):12.3e} {np.trace(op.entries).real:14.10f}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dim", type=int, default=SweepConfig.dim)
    parser.add_argument("--rel-tol", type=float, default=SweepConfig.rel_tol)
    args = parser.parse_args(argv)
    cfg = SweepConfig(dim=args.dim, rel_tol=args.rel_tol)
    worst = s_sweep(cfg)
    print(f"worst relative deviation: {worst:.3e}")
    gamma_sweep(cfg)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
