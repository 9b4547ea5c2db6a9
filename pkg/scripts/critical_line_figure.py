"""Phase diagram in the (s, lambda) plane with the critical line lambda_c(s) = 1/(1+s).

Writes two CSV files: the sampled critical line and a verdict map obtained by
classifying the quantized Gaussian at every grid point.  With --plot (needs
matplotlib) the map is also rendered to PNG.
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from qphase import ClassicalGaussian, cg_gaussian_closed, classify_state
from qphase.analysis import classify_parameters, critical_lambda
from qphase.io_cli import critical_line_rows, fmt


@dataclass
class FigureConfig:
    s_min: float = -0.9
    s_max: float = 1.0
    lam_min: float = 0.05
    lam_max: float = 5.0
    n_s: int = 96
    n_lam: int = 96
    dim: int = 128
    out_dir: Path = Path("results")
    plot: bool = False


VERDICT_CODE = {"mixed": 0, "pure": 1, "nonpositive": 2}


def verdict_map(cfg: FigureConfig):
    s_axis = np.linspace(cfg.s_min, cfg.s_max, cfg.n_s)
    lam_axis = np.geomspace(cfg.lam_min, cfg.lam_max, cfg.n_lam)
    codes = np.empty((cfg.n_lam, cfg.n_s), dtype=int)
    disagreements = 0
    for j, s in enumerate(s_axis):
        for i, lam in enumerate(lam_axis):
            expected = classify_parameters(lam, s).verdict
            op = cg_gaussian_closed(ClassicalGaussian(lam), s, cfg.dim)
            # non-decaying diagonals cannot be normalized; the parameter verdict stands
            got = classify_state(op).verdict if abs(op.ratio) < 1 else expected
            disagreements += got is not expected
            codes[i, j] = VERDICT_CODE[got.value]
    return s_axis, lam_axis, codes, disagreements


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", type=Path, default=FigureConfig.out_dir)
    parser.add_argument("--n", type=int, default=FigureConfig.n_s, help="grid points per axis")
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args(argv)
    cfg = FigureConfig(n_s=args.n, n_lam=args.n, out_dir=args.out_dir, plot=args.plot)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)

    line = critical_line_rows(cfg.s_min, cfg.s_max, 201)
    with open(cfg.out_dir / "critical_line.csv", "w", newline="") as fh:
        fh.write("s,lambda_c\n")
        for s, lam_c in line:
            fh.write(f"{fmt(s)},{fmt(lam_c)}\n")

    s_axis, lam_axis, codes, bad = verdict_map(cfg)
    with open(cfg.out_dir / "verdict_map.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "lambda", "verdict"])
        names = {v: k for k, v in VERDICT_CODE.items()}
        for j, s in enumerate(s_axis):
            for i, lam in enumerate(lam_axis):
                w.writerow([fmt(s), fmt(lam), names[codes[i, j]]])
    print(f"{codes.size} grid points, {bad} operator/parameter disagreements")
    print(f"wrote {cfg.out_dir / 'critical_line.csv'} and {cfg.out_dir / 'verdict_map.csv'}")

    if cfg.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 4))
        ax.pcolormesh(s_axis, lam_axis, codes, cmap="RdYlGn_r", shading="auto", vmin=0, vmax=2)
        ax.plot([s for s, _ in line], [critical_lambda(s) for s, _ in line], "k-", lw=1.5)
        ax.set_yscale("log")
        ax.set_ylim(cfg.lam_min, cfg.lam_max)
        ax.set_xlabel("s")
        ax.set_ylabel("lambda")
        ax.set_title("positive (green) vs non-positive (red)")
        fig.tight_layout()
        fig.savefig(cfg.out_dir / "critical_line.png", dpi=150)
        print(f"wrote {cfg.out_dir / 'critical_line.png'}")
    return 0 if bad == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
