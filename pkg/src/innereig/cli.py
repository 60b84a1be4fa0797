"""Experiment runner: one matrix, a sweep of (method, accuracy) cells.

Each cell writes a whitespace-delimited history file (one record per outer
iteration), three plot-ready data files (first-cycle residuals, residual
per restart, inner iterations per restart), and contributes one row to the
sweep summary. Failed cells are valid outcomes and keep the exit code at
zero; only configuration and load errors exit nonzero.
"""

import argparse
import cmath
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .driver import METHOD_NAMES, MethodSpec, SolveConfig, solve
from .sparse import MatrixMarketError, load_matrix_market

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ("cycle", "m", "rho_re", "rho_im", "resnorm", "eps",
                   "cprime", "inner_iters", "capped", "inner_achieved",
                   "inner_converged")
SUMMARY_COLUMNS = ("method", "accuracy", "converged", "i_restart", "i_outer",
                   "i_inner", "p_01", "lambda_re", "lambda_im")


def parse_complex(text):
    """Parse scalars like '-24', '0.05+0.5i' or '0.4+1.3i' (also 'j')."""
    s = "".join(str(text).split()).lower().replace("i", "j")
    try:
        z = complex(s)
    except ValueError:
        raise ValueError(f"invalid complex literal {text!r}") from None
    if not (cmath.isfinite(z)):
        raise ValueError(f"non-finite target {text!r}")
    return z


def format_complex(z):
    return f"{z.real:.17g}{z.imag:+.17g}i"


@dataclass
class ExperimentConfig:
    matrix: str
    sigma: complex
    methods: list = field(default_factory=lambda: list(METHOD_NAMES))
    eps_tilde: list = field(default_factory=lambda: [1e-3])
    exact: bool = False
    fixed_eps: list = field(default_factory=list)
    m_max: int = 30
    max_restarts: int = 500
    ilu_drop_tol: float = 1e-3
    gmres_restart: int = 30
    gmres_cap: int = 1000
    tol_factor: float = 1e-12
    refined_approach: str = "I"
    out: str = "results"
    seed: int = 0

    def cells(self):
        """(method, accuracy-label, governor mode, value) for the sweep."""
        accuracies = [(f"{v:.0e}", "adaptive", v) for v in self.eps_tilde]
        if self.exact:
            accuracies.append(("exact", "exact", None))
        accuracies.extend((f"fixed{v:.0e}", "fixed", v)
                          for v in self.fixed_eps)
        for method in self.methods:
            for label, mode, value in accuracies:
                yield method, label, mode, value


def config_from_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if "sigma" in raw:
        raw["sigma"] = parse_complex(raw["sigma"])
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**raw)


def _fmt(x):
    return f"{x:.17g}"


def write_history(path, report):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# " + " ".join(HISTORY_COLUMNS) + "\n")
        for rec in report.history:
            fh.write(" ".join([
                str(rec.cycle), str(rec.m),
                _fmt(rec.rho.real), _fmt(rec.rho.imag),
                _fmt(rec.residual_norm), _fmt(rec.eps_used),
                _fmt(rec.c_prime), str(rec.inner_iters),
                str(int(rec.capped)), _fmt(rec.inner_achieved),
                str(int(rec.inner_converged)),
            ]) + "\n")


def read_history(path):
    """History rows back as a list of dicts (numbers parsed)."""
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            parts = line.split()
            rows.append({
                "cycle": int(parts[0]), "m": int(parts[1]),
                "rho_re": float(parts[2]), "rho_im": float(parts[3]),
                "resnorm": float(parts[4]), "eps": float(parts[5]),
                "cprime": float(parts[6]), "inner_iters": int(parts[7]),
                "capped": bool(int(parts[8])),
                "inner_achieved": float(parts[9]),
                "inner_converged": bool(int(parts[10])),
            })
    return rows


def plot_data_from_history(rows):
    """Three column sets: first-cycle residuals, per-restart residuals,
    per-restart inner iteration totals."""
    cycle1 = [(i + 1, r["resnorm"]) for i, r in enumerate(rows)
              if r["cycle"] == 1]
    per_cycle = {}
    inner = {}
    for r in rows:
        per_cycle[r["cycle"]] = r["resnorm"]          # last record wins
        inner[r["cycle"]] = inner.get(r["cycle"], 0) + r["inner_iters"]
    restarts = sorted(per_cycle)
    return (cycle1,
            [(c, per_cycle[c]) for c in restarts],
            [(c, inner[c]) for c in restarts])


def _write_pairs(path, header, pairs):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# {header}\n")
        for a, b in pairs:
            bs = _fmt(b) if isinstance(b, float) else str(b)
            fh.write(f"{a} {bs}\n")


def write_plot_data(prefix, rows):
    cycle1, per_restart, inner = plot_data_from_history(rows)
    _write_pairs(f"{prefix}.cycle1.dat", "outer_iteration resnorm", cycle1)
    _write_pairs(f"{prefix}.restarts.dat", "restart resnorm", per_restart)
    _write_pairs(f"{prefix}.inner.dat", "restart inner_iters", inner)


def run_experiment(cfg):
    """Execute the sweep; returns a process exit code."""
    try:
        A = load_matrix_market(cfg.matrix)
    except FileNotFoundError:
        logger.error("matrix file not found: %s", cfg.matrix)
        return 2
    except MatrixMarketError as exc:
        logger.error("cannot load %s: %s", cfg.matrix, exc)
        return 2
    try:
        for name in cfg.methods:
            MethodSpec.from_name(name)
    except ValueError as exc:
        logger.error("%s", exc)
        return 2

    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    summary_rows = []
    for method, label, mode, value in cfg.cells():
        solve_cfg = SolveConfig(
            sigma=cfg.sigma,
            m_max=cfg.m_max,
            max_restarts=cfg.max_restarts,
            tol_factor=cfg.tol_factor,
            governor_mode=mode,
            eps_tilde=value if mode == "adaptive" else 1e-3,
            fixed_eps=value if mode == "fixed" else None,
            ilu_drop_tol=cfg.ilu_drop_tol,
            gmres_restart=cfg.gmres_restart,
            gmres_max_iters=cfg.gmres_cap,
            refined_approach=cfg.refined_approach,
            seed=cfg.seed,
        )
        logger.info("cell %s / %s", method, label)
        report = solve(A, MethodSpec.from_name(method), solve_cfg)
        cell = f"{method}_{label}"
        write_history(outdir / f"{cell}.history", report)
        write_plot_data(str(outdir / cell), read_history(outdir / f"{cell}.history"))
        p01 = _fmt(report.p_01) if mode == "adaptive" else "nan"
        summary_rows.append(" ".join([
            method, label, str(int(report.converged)),
            str(report.i_restart), str(report.i_outer), str(report.i_inner),
            p01, _fmt(report.eigenvalue.real), _fmt(report.eigenvalue.imag),
        ]))
        logger.info("  converged=%s i_restart=%d i_inner=%d lambda=%s",
                    report.converged, report.i_restart, report.i_inner,
                    format_complex(report.eigenvalue))
    with open(outdir / "summary.txt", "w", encoding="ascii") as fh:
        fh.write("# " + " ".join(SUMMARY_COLUMNS) + "\n")
        for row in summary_rows:
            fh.write(row + "\n")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="innereig",
        description="Interior eigenvalue experiments with restarted "
                    "SIRA/JD type solvers")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a (method x accuracy) sweep")
    run.add_argument("--config", help="JSON experiment file; flags override")
    run.add_argument("--matrix", help="Matrix Market coordinate file")
    run.add_argument("--sigma", help="target, e.g. '-24' or '0.05+0.5i'")
    run.add_argument("--method", "--methods", dest="methods",
                     help="comma-separated subset of: " + ",".join(METHOD_NAMES))
    run.add_argument("--eps-tilde", dest="eps_tilde",
                     help="comma-separated expansion accuracies, e.g. 1e-3,1e-4")
    run.add_argument("--exact", action="store_true", default=None,
                     help="add an exact-solve (eps=1e-14) column")
    run.add_argument("--fixed-eps", dest="fixed_eps",
                     help="comma-separated fixed inner tolerances")
    run.add_argument("--m-max", type=int, dest="m_max")
    run.add_argument("--max-restarts", type=int, dest="max_restarts")
    run.add_argument("--ilu-droptol", type=float, dest="ilu_drop_tol")
    run.add_argument("--gmres-restart", type=int, dest="gmres_restart")
    run.add_argument("--gmres-cap", type=int, dest="gmres_cap")
    run.add_argument("--tol-factor", type=float, dest="tol_factor")
    run.add_argument("--refined-approach", choices=("I", "II"),
                     dest="refined_approach")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="output directory")

    plot = sub.add_parser("plotdata",
                          help="re-emit plot columns from a history file")
    plot.add_argument("history", help="a *.history file produced by run")
    plot.add_argument("--out", help="output prefix (default: history path "
                                    "without extension)")
    return parser


def _experiment_from_args(args):
    if args.config:
        cfg = config_from_file(args.config)
    else:
        if not (args.matrix and args.sigma):
            raise ValueError("--matrix and --sigma are required without --config")
        cfg = ExperimentConfig(matrix=args.matrix,
                               sigma=parse_complex(args.sigma))
    if args.matrix:
        cfg.matrix = args.matrix
    if args.sigma:
        cfg.sigma = parse_complex(args.sigma)
    if args.methods:
        cfg.methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if args.eps_tilde:
        cfg.eps_tilde = [float(v) for v in args.eps_tilde.split(",")]
    if args.exact is not None:
        cfg.exact = args.exact
    if args.fixed_eps:
        cfg.fixed_eps = [float(v) for v in args.fixed_eps.split(",")]
    for name in ("m_max", "max_restarts", "ilu_drop_tol", "gmres_restart",
                 "gmres_cap", "tol_factor", "refined_approach", "seed", "out"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    return cfg


def main(argv=None):
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        try:
            cfg = _experiment_from_args(args)
        except (ValueError, OSError, json.JSONDecodeError) as exc:
            logger.error("%s", exc)
            return 2
        return run_experiment(cfg)
    if args.command == "plotdata":
        try:
            rows = read_history(args.history)
        except OSError as exc:
            logger.error("%s", exc)
            return 2
        prefix = args.out or str(Path(args.history).with_suffix(""))
        write_plot_data(prefix, rows)
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
