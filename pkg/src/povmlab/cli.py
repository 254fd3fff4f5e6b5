"""Command-line front end: parameter sweeps, coexistence reports and
statistics export in diff-friendly CSV or JSON.

Exit codes: 0 on success, 2 on a --verify failure, 64 on usage or I/O
errors. The environment variable POVMLAB_TOL overrides the default verify
tolerance of 1e-9. Identical configuration and seed produce byte-identical
output files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import kerrqnd, mzi, spin
from .povm import vector_state

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.15g}"
    return str(value)


def _emit(config: dict, header: list[str], rows: list[list], checks: dict,
          fmt: str, out_path: str | None):
    if fmt == "csv":
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        text = "\n".join(lines) + "\n"
    else:
        payload = {
            "config": config,
            "rows": [dict(zip(header, row)) for row in rows],
            "checks": checks,
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)


def _verify_tol() -> float:
    raw = os.environ.get("POVMLAB_TOL")
    if raw is None:
        return 1e-9
    try:
        return float(raw)
    except ValueError:
        raise SystemExit(EXIT_USAGE)


def _parse_vec(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated components, got {text!r}")
    return np.array([float(p) for p in parts])


def _parse_floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip() != ""]


def _parse_intervals(text: str) -> list[tuple[float, float]]:
    out = []
    for chunk in text.split(";"):
        u, v = chunk.split(":")
        out.append((float(u), float(v)))
    return out


def cmd_mzi_scan(args) -> int:
    deltas = np.linspace(args.delta_min, args.delta_max, args.delta_steps)
    space = mzi.FockSpace(max(1, args.nmax))
    one = np.zeros(space.dim, dtype=complex)
    one[1] = 1.0
    vac = np.zeros(space.dim, dtype=complex)
    vac[0] = 1.0
    rows = []
    worst = 0.0
    for delta in deltas:
        params = mzi.MZIParams(
            mzi.BSParams(args.eps1, args.theta1),
            mzi.BSParams(args.eps2, args.theta2),
            float(delta),
        )
        w = mzi.mzi_output_state(vector_state(one), vector_state(vac), params, space)
        probs = mzi.detection_probabilities(w)
        p10 = probs[(1, 0)]
        p01 = probs[(0, 1)]
        other = sum(p for (n1, n2), p in probs.items() if n1 + n2 != 1)
        eps = mzi.effective_transparency(params)
        err = abs(p10 - eps)
        worst = max(worst, err)
        rows.append([float(delta), p10, p01, other, eps, err, p10 + p01 + other])
    header = ["delta", "p10", "p01", "sum_other", "eps_analytic", "abs_err", "prob_sum"]
    config = _config_dict(args, ["eps1", "eps2", "theta1", "theta2", "delta_min",
                                 "delta_max", "delta_steps", "nmax", "seed"])
    tol = _verify_tol()
    checks = {"max_abs_err": worst, "tolerance": tol,
              "row_sums_ok": all(abs(r[-1] - 1.0) < 1e-9 for r in rows)}
    _emit(config, header, rows, checks, args.format, args.out)
    if args.verify and (worst > tol or not checks["row_sums_ok"]):
        return EXIT_VERIFY
    return EXIT_OK


def cmd_kerr_tradeoff(args) -> int:
    amps = _parse_floats(args.amp)
    eps2_values = _parse_floats(args.eps2)
    rows_raw = kerrqnd.tradeoff_scan(
        amps, args.lam, eps2_values, probe_kind=args.probe
    )
    rows = []
    for r in rows_raw:
        probe_dim = kerrqnd.coherent_dim(r["amp"])
        rows.append([r["amp"], r["lam"], r["eps2"], r["visibility"],
                     r["path_confidence"], probe_dim])
    header = ["amp", "lambda", "eps2", "visibility", "path_confidence", "probe_dim"]
    # monotone tradeoff along increasing amplitude at fixed eps2
    monotone = True
    for eps2 in eps2_values:
        series = [r for r in rows_raw if r["eps2"] == eps2]
        series.sort(key=lambda r: r["amp"])
        for a, b in zip(series, series[1:]):
            if b["visibility"] > a["visibility"] + 1e-9:
                monotone = False
            if b["path_confidence"] < a["path_confidence"] - 1e-9:
                monotone = False
    config = _config_dict(args, ["amp", "lam", "eps2", "probe", "seed"])
    checks = {"tradeoff_monotone": monotone}
    _emit(config, header, rows, checks, args.format, args.out)
    if args.verify and not monotone:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_spin(args) -> int:
    a1 = _parse_vec(args.a1)
    a2 = _parse_vec(args.a2)
    for v in (a1, a2):
        if np.linalg.norm(v) > 1.0 + 1e-12:
            raise ValueError(f"Bloch vector norm {np.linalg.norm(v)} exceeds 1")
    value = spin.criterion_value(a1, a2)
    decision = spin.coexist_criterion(a1, a2)
    oracle = spin.coexist_oracle(a1, a2)
    rows = []
    min_eig_overall = math.inf
    if decision:
        joint = spin.joint_spin_observable(a1, a2)
        for (s1, s2), e in joint:
            w = np.linalg.eigvalsh(e.op.mat)
            min_eig_overall = min(min_eig_overall, float(w.min()))
            m = e.op.mat
            rows.append([s1, s2, m[0, 0].real, m[0, 1].real, m[0, 1].imag,
                         m[1, 1].real, float(w.min())])
    header = ["outcome1", "outcome2", "g00", "g01_re", "g01_im", "g11", "min_eig"]
    config = _config_dict(args, ["a1", "a2", "seed"])
    checks = {
        "criterion_value": value,
        "coexistent": decision,
        "oracle_agrees": oracle == decision,
        "joint_min_eig": None if not rows else min_eig_overall,
    }
    _emit(config, header, rows, checks, args.format, args.out)
    if args.verify and not checks["oracle_agrees"]:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_spin_phase(args) -> int:
    space = spin.SpinPhaseSpace(args.spin)
    if args.intervals:
        intervals = _parse_intervals(args.intervals)
    else:
        edges = np.linspace(0.0, 2 * np.pi, args.bins + 1)
        intervals = [(float(edges[i]), float(edges[i + 1])) for i in range(args.bins)]
    rng = np.random.default_rng(args.seed)
    rows = []
    matrices = []
    worst_cov = 0.0
    worst_uniform = 0.0
    for (u, v) in intervals:
        e = spin.spin_phase_effect(space, (u, v))
        w = np.linalg.eigvalsh(e.op.mat)
        alpha = float(rng.uniform(0.0, 2 * np.pi))
        cov = spin.spin_phase_covariance_residual(space, (u, v), alpha)
        uniform = float(
            np.max(np.abs(np.diag(e.op.mat).real - (v - u) / (2 * np.pi)))
        )
        worst_cov = max(worst_cov, cov)
        worst_uniform = max(worst_uniform, uniform)
        rows.append([u, v, float(w.min()), float(w.max()), alpha, cov, uniform])
        matrices.append([[(c.real, c.imag) for c in row] for row in e.op.mat])
    header = ["u", "v", "eig_min", "eig_max", "alpha", "covariance_residual",
              "uniformity_residual"]
    config = _config_dict(args, ["spin", "intervals", "bins", "seed"])
    checks = {
        "max_covariance_residual": worst_cov,
        "max_uniformity_residual": worst_uniform,
        "effect_matrices": matrices if args.format == "json" else "json only",
    }
    _emit(config, header, rows, checks, args.format, args.out)
    if args.verify and (worst_cov > 1e-10 or worst_uniform > 1e-12):
        return EXIT_VERIFY
    return EXIT_OK


def _config_dict(args, keys) -> dict:
    return {"subcommand": args.command,
            **{k: getattr(args, k) for k in keys},
            "format": args.format}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--verify", action="store_true",
                   help="exit 2 when the command's self-checks fail")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="povmlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mzi-scan", help="single-photon interference sweep")
    p.add_argument("--eps1", type=float, default=0.5)
    p.add_argument("--eps2", type=float, default=0.5)
    p.add_argument("--theta1", type=float, default=0.0)
    p.add_argument("--theta2", type=float, default=0.0)
    p.add_argument("--delta-min", dest="delta_min", type=float, default=0.0)
    p.add_argument("--delta-max", dest="delta_max", type=float, default=2 * math.pi)
    p.add_argument("--delta-steps", dest="delta_steps", type=int, default=33)
    p.add_argument("--nmax", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_mzi_scan)

    p = sub.add_parser("kerr-tradeoff", help="path confidence vs visibility scan")
    p.add_argument("--amp", default="0,1,2,3",
                   help="comma-separated coherent amplitudes")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--eps2", default="0.5", help="comma-separated transparencies")
    p.add_argument("--probe", choices=["coherent", "number"], default="coherent")
    _add_common(p)
    p.set_defaults(func=cmd_kerr_tradeoff)

    p = sub.add_parser("spin", help="coexistence report for two Bloch vectors")
    p.add_argument("--a1", required=True, help="x,y,z")
    p.add_argument("--a2", required=True, help="x,y,z")
    _add_common(p)
    p.set_defaults(func=cmd_spin)

    p = sub.add_parser("spin-phase", help="covariant phase effect report")
    p.add_argument("--spin", type=float, default=0.5)
    p.add_argument("--intervals", default=None,
                   help="semicolon-separated u:v pairs in radians")
    p.add_argument("--bins", type=int, default=8)
    _add_common(p)
    p.set_defaults(func=cmd_spin_phase)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"povmlab: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
