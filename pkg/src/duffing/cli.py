"""Command line entry point: eigen, solve, branch, check, relax.

Exit codes: 0 success, 1 config or IO error, 2 numerical non-convergence,
3 hypothesis failure. Error messages are one line starting with "error:".
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .eigen import EigenParams, lambda_n, pi_p
from .hypotheses import compile_report
from .multimap import GrowthWitness
from .relaxation import RelaxConfig, relax_experiment
from .solver import ConvergenceError, ShootingError, solve_branch, solve_duffing

log = logging.getLogger("duffing")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_HYPOTHESIS = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


# output helpers -------------------------------------------------------------------


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return "%.17g" % float(x)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return None if not math.isfinite(obj) else float(obj)
    return obj


def json_text(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_atomic(path, text: str):
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    if not path.parent.is_dir():
        raise CliError(f"error: output directory {path.parent} does not exist")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        Path(tmp).unlink(missing_ok=True)
        raise CliError(f"error: cannot write {path}: {exc.strerror}") from None


def svg_plot(xs, ys, xlabel, ylabel, log_y=True, width=480, height=320) -> str:
    """A minimal line plot; no plotting dependency."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    ok = np.isfinite(ys) & ((ys > 0) if log_y else True)
    xs, ys = xs[ok], ys[ok]
    pad = 50
    if xs.size == 0:
        pts = ""
    else:
        yv = np.log10(ys) if log_y else ys
        x0, x1 = xs.min(), xs.max() if xs.max() > xs.min() else xs.min() + 1
        y0, y1 = yv.min(), yv.max() if yv.max() > yv.min() else yv.min() + 1
        px = pad + (xs - x0) / (x1 - x0) * (width - 2 * pad)
        py = height - pad - (yv - y0) / (y1 - y0) * (height - 2 * pad)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{pts}"/>\n'
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>\n'
        f'<text x="15" y="{height / 2}" transform="rotate(-90 15 {height / 2})" text-anchor="middle">'
        f'{ylabel}{" (log10)" if log_y else ""}</text>\n'
        "</svg>\n"
    )


def _load(path):
    try:
        return cfgmod.load(path)
    except cfgmod.ConfigError as exc:
        raise CliError(f"error: {exc}") from None


def _report(cfg, need=False):
    if cfg.witness is None:
        if need:
            raise CliError("error: config needs problem.growth_witness for hypothesis checks")
        return None
    witness = cfg.witness
    k = cfg.relax.k_eta if cfg.relax is not None and cfg.relax.k_eta is not None else None
    if k is not None and witness.k_eta is None:
        witness = GrowthWitness(witness.theta, witness.a_eta, k)
    eta = cfg.relax.eta if cfg.relax is not None else cfg.check.eta
    return compile_report(cfg.problem, witness, eta, cfg.check.sample_radii, cfg.check.trials, cfg.solver.seed)


def _trajectory_rows(rep):
    n = rep.u.dim
    header = ["t"] + [f"u_{i + 1}" for i in range(n)] + [f"du_{i + 1}" for i in range(n)] \
        + [f"f_{i + 1}" for i in range(n)]
    rows = np.column_stack([rep.u.t, rep.u.values, rep.du.values, rep.f.values])
    return header, rows


def _report_meta(rep, p):
    return {
        "converged": rep.converged, "iterations": rep.iterations, "residual_sup": rep.residual_sup,
        "c": rep.c, "lambda": rep.lam, "c1_norm": rep.c1_norm, "w1p_norm": rep.w1p_norm(p),
        "boundary_error": rep.boundary_error(), "selection_gap": rep.selection_gap,
        "apriori_bound": rep.apriori_bound, "within_bound": rep.within_bound,
    }


# subcommands ----------------------------------------------------------------------


def cmd_eigen(args):
    try:
        params = EigenParams(args.p, args.b)
    except ValueError as exc:
        raise CliError(f"error: {exc}") from None
    if args.n < 1:
        raise CliError("error: n must be >= 1")
    pp = pi_p(args.p)
    rows = [(n, lambda_n(params, n), pp) for n in range(1, args.n + 1)]
    text = csv_text(["n", "lambda_n", "pi_p"], rows)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_solve(args):
    cfg = _load(args.config)
    report = _report(cfg)
    bound = report.apriori if report is not None else None
    s = cfg.solver
    code = EXIT_OK
    try:
        rep = solve_duffing(cfg.problem, s.strategy, s.damping, s.tol, s.max_iter, bound=bound)
    except ConvergenceError as exc:
        rep = exc.report
        code = EXIT_NUMERIC
        print("error: fixed point did not converge; try smaller damping or the branch subcommand",
              file=sys.stderr)
    except ShootingError as exc:
        raise CliError(f"error: {exc}", EXIT_NUMERIC) from None
    header, rows = _trajectory_rows(rep)
    meta = _report_meta(rep, cfg.problem.p)
    if report is not None:
        meta["theorems"] = report.theorem_applicability
        meta["theorem_details"] = report.theorem_details
    write_atomic(args.out, csv_text(header, rows))
    write_atomic(Path(args.out).with_suffix(".json"), json_text(meta))
    return code


def cmd_branch(args):
    cfg = _load(args.config)
    if cfg.lambdas is None:
        raise CliError("error: config has no branch block")
    report = _report(cfg)
    bound = report.apriori if report is not None else None
    s = cfg.solver
    try:
        reps = solve_branch(cfg.problem, cfg.lambdas, s.strategy, s.tol, s.damping, s.max_iter, bound)
        code = EXIT_OK
    except ConvergenceError as exc:
        raise CliError(f"error: {exc}", EXIT_NUMERIC) from None
    rows = [(r.lam, r.c1_norm, r.w1p_norm(cfg.problem.p), r.iterations, r.residual_sup, r.apriori_bound,
             r.within_bound) for r in reps]
    write_atomic(args.out, csv_text(
        ["lambda", "c1_norm", "w1p_norm", "iterations", "residual_sup", "apriori_bound", "within_bound"], rows))
    return code


def cmd_check(args):
    cfg = _load(args.config)
    report = _report(cfg, need=True)
    text = json_text(report.to_json())
    if args.out:
        write_atomic(args.out, text)
    sys.stdout.write(text)
    require = cfg.check.require
    if require is None:
        require = ("thm6",) if cfg.problem.F.convex else ("thm7",)
    failed = [k for k in require if not report.theorem_applicability.get(k, False)]
    if failed:
        print(f"error: hypotheses fail for {', '.join(failed)}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_relax(args):
    cfg = _load(args.config)
    if cfg.relax is None:
        raise CliError("error: config has no relax block")
    out = Path(args.out)
    if not out.parent.is_dir():
        raise CliError(f"error: output directory {out.parent} does not exist")
    rx, s = cfg.relax, cfg.solver
    k = rx.k_eta if rx.k_eta is not None else (cfg.witness.k_eta if cfg.witness and cfg.witness.k_eta else 0.0)
    try:
        rc = RelaxConfig(cfg.problem, rx.levels, rx.eps0, rx.eta, k, rx.target, s.strategy, s.tol, s.damping,
                         s.max_iter, rx.probes, s.seed)
    except ValueError as exc:
        raise CliError(f"error: {exc}") from None
    try:
        rows = relax_experiment(rc)
    except ValueError as exc:
        raise CliError(f"error: {exc}", EXIT_HYPOTHESIS) from None
    except (ConvergenceError, ShootingError) as exc:
        raise CliError(f"error: convexified solve failed: {exc}", EXIT_NUMERIC) from None
    header = ["level", "c1_distance", "residual_sup", "weak_diag", "eps_n", "status"]
    write_atomic(out, csv_text(header, [[r[h] for h in header] for r in rows]))
    if args.svg:
        write_atomic(args.svg, svg_plot([r["level"] for r in rows], [r["c1_distance"] for r in rows],
                                        "level", "C1 distance"))
    if any(r["status"] != "ok" for r in rows):
        print("error: some levels failed", file=sys.stderr)
        return EXIT_NUMERIC
    final = rows[-1]["c1_distance"]
    if not final <= rx.target:
        print(f"error: final distance {final:.3g} above target {rx.target:g}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="duffing", description="Quasilinear Duffing inclusions on an interval.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eigen", help="Dirichlet eigenvalues of the scalar p-Laplacian")
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--b", type=float, default=1.0)
    e.add_argument("--n", type=int, default=5, help="number of eigenvalues")
    e.add_argument("--out", help="CSV path (default: stdout)")
    e.set_defaults(func=cmd_eigen)

    s = sub.add_parser("solve", help="solve the inclusion; writes CSV and a JSON sidecar")
    s.add_argument("config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("branch", help="continuation in lambda of u = lambda K(N(u))")
    b.add_argument("config")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_branch)

    c = sub.add_parser("check", help="sampled hypothesis report as JSON")
    c.add_argument("config")
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("relax", help="nonconvex vs convexified C1 distance per oscillation level")
    r.add_argument("config")
    r.add_argument("--out", required=True)
    r.add_argument("--svg", help="optional plot of distance against level")
    r.set_defaults(func=cmd_relax)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
