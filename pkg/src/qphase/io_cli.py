"""Command-line front end: ``quantize``, ``critical-line`` and ``check-density``.

Exit codes: 0 analysis completed (a non-positive verdict is a result, not a
failure), 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, fock_core, quantizers
from .errors import QPhaseError

log = logging.getLogger("qphase")

DEFAULT_DIM = 64
DEFAULT_MAX_DIM = 4096
AUTO_TAIL_TARGET = 1e-12
REPORT_KEYS = (
    "lambda", "s", "gamma", "dim", "diagonal", "tail_bound",
    "verdict", "var_q", "beta", "hermiticity_defect",
)


class InputError(Exception):
    """User-supplied input is invalid (exit code 2)."""


@dataclass
class QuantizeReport:
    lam: float
    s: float
    dim: int
    diagonal: list
    tail_bound: float
    verdict: str
    var_q: float
    beta: float
    gamma: Optional[float] = None
    hermiticity_defect: Optional[float] = None

    def __post_init__(self):
        if self.verdict not in {v.value for v in fock_core.Verdict}:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if len(self.diagonal) != self.dim:
            raise ValueError("diagonal length must equal dim")

    def to_dict(self) -> dict:
        raw = asdict(self)
        raw["lambda"] = raw.pop("lam")
        return {k: raw[k] for k in REPORT_KEYS if raw.get(k) is not None}

    @classmethod
    def from_dict(cls, data: dict) -> "QuantizeReport":
        data = dict(data)
        data["lam"] = data.pop("lambda")
        return cls(**data)


def fmt(x: float) -> str:
    """Full-precision text for CSV output; ``inf`` for divergent values."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def max_dim() -> int:
    raw = os.environ.get("QPHASE_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"QPHASE_MAX_DIM must be an integer, got {raw!r}") from None
    if value < 1:
        raise InputError("QPHASE_MAX_DIM must be >= 1")
    return value


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# quantize
# ---------------------------------------------------------------------------


def _auto_closed(g, ordering, cap: int) -> fock_core.FockDiagonal:
    dim = min(DEFAULT_DIM, cap)
    op = quantizers.cg_gaussian_closed(g, ordering, dim)
    # enlarging only helps a convergent geometric tail
    while op.tail_bound >= AUTO_TAIL_TARGET and abs(op.ratio) < 1 and dim < cap:
        dim = min(2 * dim, cap)
        op = quantizers.cg_gaussian_closed(g, ordering, dim)
    return op


def build_quantize_report(args) -> QuantizeReport:
    if not (args.lam > 0 and math.isfinite(args.lam)):
        raise InputError(f"--lambda must be positive and finite, got {args.lam}")
    if args.dim is not None and args.dim < 1:
        raise InputError(f"--dim must be >= 1, got {args.dim}")
    if not args.rel_tol > 0:
        raise InputError("--rel-tol must be positive")
    try:
        ordering = quantizers.OrderingParams(
            gamma=0.0 if args.gamma is None else args.gamma,
            s=args.s,
            extended_s=args.extended_s,
        )
    except QPhaseError as exc:
        raise InputError(str(exc)) from None
    g = quantizers.ClassicalGaussian(args.lam)
    beta = analysis.beta_from_lambda(args.lam, args.s)

    if args.gamma is not None:
        dim = 8 if args.dim is None else args.dim
        if dim > 64:
            raise InputError("--dim must be <= 64 with --gamma")
        dense = quantizers.weyl_gamma_quantize_numeric(g, args.gamma, dim, args.rel_tol)
        cls = fock_core.classify_dense(dense)
        return QuantizeReport(
            lam=args.lam, s=args.s, gamma=args.gamma, dim=dim,
            diagonal=[float(v) for v in dense.diagonal().real],
            tail_bound=max(0.0, 1.0 - float(np.trace(dense.entries).real)),
            verdict=cls.verdict.value,
            var_q=fock_core.dense_position_variance(dense),
            beta=beta,
            hermiticity_defect=quantizers.hermiticity_defect(dense),
        )

    cap = max_dim()
    if args.dim is None:
        op = _auto_closed(g, ordering, cap)
    else:
        if args.dim > cap:
            raise InputError(f"--dim {args.dim} exceeds the cap {cap} (QPHASE_MAX_DIM)")
        op = quantizers.cg_gaussian_closed(g, ordering, args.dim)
    cls = fock_core.classify_state(op)
    report = QuantizeReport(
        lam=args.lam, s=args.s, dim=op.dim,
        diagonal=[float(v) for v in op.entries],
        tail_bound=op.tail_bound,
        verdict=cls.verdict.value,
        var_q=float(analysis.quantum_moments(args.lam, args.s).var_q),
        beta=beta,
    )
    if args.oracle:
        n = min(op.dim, 64)
        numeric = quantizers.cg_quantize_numeric(
            quantizers.gaussian_transform(g), ordering, n, args.rel_tol
        )
        closed = op.entries[:n]
        dev = np.max(np.abs(numeric.entries - closed) / np.maximum(1.0, np.abs(closed)))
        log.warning("oracle: max deviation over %d entries = %.3e", n, dev)
        # the s-ordered numeric output is real-diagonal by construction
        report.hermiticity_defect = 0.0
    return report


def render_report(report: QuantizeReport, form: str) -> str:
    data = report.to_dict()
    if form == "json":
        return json.dumps(data, indent=2) + "\n"
    buf = io.StringIO()
    for key in REPORT_KEYS:
        if key in data and key != "diagonal":
            value = data[key]
            buf.write(f"# {key}={fmt(value) if isinstance(value, float) else value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "diagonal"])
    for n, v in enumerate(data["diagonal"]):
        writer.writerow([n, fmt(v)])
    return buf.getvalue()


def cmd_quantize(args) -> int:
    report = build_quantize_report(args)
    _emit(render_report(report, args.format), args.out)
    return 0


# ---------------------------------------------------------------------------
# critical-line
# ---------------------------------------------------------------------------


def critical_line_rows(s_min: float, s_max: float, steps: int) -> list[tuple[float, float]]:
    if steps < 2:
        raise InputError(f"--steps must be >= 2, got {steps}")
    if s_max < s_min:
        raise InputError("--s-max must not be below --s-min")
    return [(float(s), float(analysis.critical_lambda(float(s))))
            for s in np.linspace(s_min, s_max, steps)]


def cmd_critical_line(args) -> int:
    rows = critical_line_rows(args.s_min, args.s_max, args.steps)
    if args.format == "json":
        text = json.dumps([{"s": s, "lambda_c": "inf" if math.isinf(l) else l} for s, l in rows]) + "\n"
    else:
        text = "s,lambda_c\n" + "".join(f"{fmt(s)},{fmt(l)}\n" for s, l in rows)
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------
# check-density
# ---------------------------------------------------------------------------


def read_grid_csv(path: Path) -> analysis.GridDensity:
    """Parse a ``q,p,rho`` file with rows ordered q-major (p varies fastest)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    header_seen = False
    qs, ps, rhos = [], [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = [f.strip() for f in stripped.split(",")]
        if not header_seen:
            if fields != ["q", "p", "rho"]:
                raise InputError(f"{path}:{lineno}: expected header 'q,p,rho', got {stripped!r}")
            header_seen = True
            continue
        if len(fields) != 3:
            raise InputError(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
        try:
            q, p, rho = (float(f) for f in fields)
        except ValueError:
            raise InputError(f"{path}:{lineno}: non-numeric field in {stripped!r}") from None
        qs.append(q)
        ps.append(p)
        rhos.append(rho)
    if not header_seen:
        raise InputError(f"{path}: missing 'q,p,rho' header")
    if not qs:
        raise InputError(f"{path}: no data rows")

    q_arr = np.array(qs)
    n_p = int(np.argmax(q_arr != q_arr[0])) if np.any(q_arr != q_arr[0]) else len(qs)
    if n_p < 2 or len(qs) % n_p:
        raise InputError(f"{path}: rows do not form a rectangular q-major grid")
    n_q = len(qs) // n_p
    Q = q_arr.reshape(n_q, n_p)
    P = np.array(ps).reshape(n_q, n_p)
    for i in range(n_q):
        if np.any(Q[i] != Q[i, 0]) or (i and not np.allclose(P[i], P[0], rtol=1e-12, atol=1e-12)):
            bad = _first_bad_row(Q, P, i)
            raise InputError(f"{path}: grid structure broken at data row {bad} (q block {i})")
    q_axis, p_axis = Q[:, 0], P[0]
    for name, axis in (("q", q_axis), ("p", p_axis)):
        steps = np.diff(axis)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6, atol=0):
            raise InputError(f"{path}: {name} values must be increasing and uniformly spaced")
    try:
        return analysis.GridDensity(
            q_axis[0], q_axis[-1], p_axis[0], p_axis[-1], np.array(rhos).reshape(n_q, n_p)
        )
    except QPhaseError as exc:
        if "normalizable" in str(exc):
            raise
        raise InputError(f"{path}: {exc}") from None


def _first_bad_row(Q, P, i):
    n_p = Q.shape[1]
    for j in range(n_p):
        if Q[i, j] != Q[i, 0] or P[i, j] != P[0, j]:
            return i * n_p + j + 1
    return i * n_p + 1


def write_grid_csv(path: Path, grid: analysis.GridDensity) -> None:
    q, p = grid.q_axis(), grid.p_axis()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("q,p,rho\n")
        for i, qi in enumerate(q):
            for j, pj in enumerate(p):
                fh.write(f"{fmt(qi)},{fmt(pj)},{fmt(grid.values[i, j])}\n")


def check_density_report(grid: analysis.GridDensity, s_values) -> dict:
    u = analysis.classical_moments_from_grid(grid)
    conditions = []
    for s in s_values:
        res = analysis.uncertainty_condition(u, s)
        cov = analysis.quantized_covariance(u, s)
        conditions.append({
            "s": s,
            "passes": res.passes,
            "margin": res.margin,
            "gaussification_vqq": cov.vqq,
            "gaussification_positive": analysis.gaussification_positive(cov),
        })
    return {
        "mean_q": u.mean_q,
        "mean_p": u.mean_p,
        "var_q": u.var_q,
        "var_p": u.var_p,
        "sum_vars": u.sum_vars,
        "product": u.product,
        "renormalized": grid.renormalized,
        "conditions": conditions,
    }


def cmd_check_density(args) -> int:
    grid = read_grid_csv(args.file)
    report = check_density_report(grid, args.s or [0.0])
    if args.format == "json":
        text = json.dumps(report, indent=2) + "\n"
    else:
        buf = io.StringIO()
        for key in ("mean_q", "mean_p", "var_q", "var_p", "sum_vars", "product"):
            buf.write(f"# {key}={fmt(report[key])}\n")
        buf.write(f"# renormalized={report['renormalized']}\n")
        buf.write("s,passes,margin,gaussification_vqq,gaussification_positive\n")
        for c in report["conditions"]:
            buf.write(f"{fmt(c['s'])},{c['passes']},{fmt(c['margin'])},"
                      f"{fmt(c['gaussification_vqq'])},{c['gaussification_positive']}\n")
        text = buf.getvalue()
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qphase", description="Quantize phase-space Gaussians under s- and gamma-orderings."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("quantize", help="quantize the Gaussian of width parameter lambda")
    q.add_argument("--lambda", dest="lam", type=float, required=True)
    q.add_argument("--s", type=float, default=0.0)
    q.add_argument("--gamma", type=float, default=None,
                   help="use the gamma-ordered Weyl map (numeric, dense)")
    q.add_argument("--dim", type=int, default=None)
    q.add_argument("--format", choices=["json", "csv"], default="json")
    q.add_argument("--out", type=Path, default=None)
    q.add_argument("--oracle", action="store_true",
                   help="cross-check against radial quadrature")
    q.add_argument("--extended-s", action="store_true")
    q.add_argument("--rel-tol", type=float, default=1e-10)
    q.set_defaults(func=cmd_quantize)

    c = sub.add_parser("critical-line", help="emit lambda_c(s) = 1/(1+s) samples")
    c.add_argument("--s-min", type=float, default=-0.9)
    c.add_argument("--s-max", type=float, default=1.0)
    c.add_argument("--steps", type=int, default=101)
    c.add_argument("--format", choices=["csv", "json"], default="csv")
    c.add_argument("--out", type=Path, default=None)
    c.set_defaults(func=cmd_critical_line)

    d = sub.add_parser("check-density", help="moment conditions for a tabulated density")
    d.add_argument("file", type=Path)
    d.add_argument("--s", type=float, action="append",
                   help="ordering parameter; repeat for several values (default 0)")
    d.add_argument("--format", choices=["json", "csv"], default="json")
    d.add_argument("--out", type=Path, default=None)
    d.set_defaults(func=cmd_check_density)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        parser.print_usage(sys.stderr)
        print(f"qphase: error: {exc}", file=sys.stderr)
        return 2
    except QPhaseError as exc:
        print(f"qphase: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
