"""Command-line front end.

Subcommands: symbol, ground, spectrum, stability-scan, perturb.  Each writes
CSV/JSON artifacts into --out-dir and prints a one-line summary; --plot
additionally renders matplotlib figures next to the data files.  Options may
come from flags or from a plain key=value config file (flags win).

Exit codes: 0 success, 1 invalid configuration, 2 solver non-convergence
(partial artifacts are still written, marked converged:false).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import perturb as pt
from . import spectrum as sp
from .artifacts import read_profile_csv, write_csv, write_json, write_profile_csv
from .efgrid import EFGrid, ProblemParams, default_half_length, make_grid
from .groundstate import ConvergenceError, PositivityError, solve_ground
from .specfun import symbol_values

__all__ = ["main", "RunConfig", "run"]

_COMMANDS = ("symbol", "ground", "spectrum", "stability-scan", "perturb")


@dataclass
class RunConfig:
    command: str
    n: int = 3
    s: float = 0.75
    q: float = 3.0
    lam: float = 0.0
    L: float | None = None
    N: int = 2048
    tol: float = 1e-10
    max_iter: int = 2000
    allow_critical: bool = False
    out_dir: str = "frachs_out"
    plot: bool = False
    # symbol
    ell_max: int = 3
    tau_max: float = 10.0
    tau_points: int = 101
    # spectrum
    m: int = 4
    # stability-scan
    lambdas: str = ""
    bisect_tol: float = 1e-6
    # perturb
    eps: float = 0.01
    weight: str = "gaussian:center=0,width=1,height=0.5"
    t_log_min: float = -3.0
    t_log_max: float = 3.0
    t_log_points: int = 13
    resolved_L: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise ValueError(f"unknown command {self.command!r}; expected one of {_COMMANDS}")
        self.resolved_L = self.L if self.L is not None else default_half_length(self.n, self.s)

    def params(self) -> ProblemParams:
        return ProblemParams(n=self.n, s=self.s, q=self.q, lam=self.lam,
                             allow_critical=self.allow_critical)

    def grid(self) -> EFGrid:
        return make_grid(self.resolved_L, self.N)

    def echo(self) -> dict:
        keys = ("command", "n", "s", "q", "lam", "N", "tol", "max_iter", "allow_critical",
                "out_dir", "plot", "ell_max", "tau_max", "tau_points", "m", "lambdas",
                "bisect_tol", "eps", "weight", "t_log_min", "t_log_max", "t_log_points")
        out = {k: getattr(self, k) for k in keys}
        out["L"] = self.resolved_L
        return out


def _thread_cap() -> int:
    raw = os.environ.get("FRACHS_THREADS", "")
    try:
        cap = int(raw) if raw else (os.cpu_count() or 1)
    except ValueError:
        raise ValueError(f"FRACHS_THREADS must be an integer, got {raw!r}")
    return max(1, cap)


def _parse_lambda_list(text: str, params: ProblemParams) -> np.ndarray:
    """Either comma-separated values or start:stop:count; default scan window."""
    from .specfun import hardy_constant

    if not text:
        lo = -0.9 * hardy_constant(params.n, params.s)
        return np.linspace(lo, 20.0, 12)
    if ":" in text:
        pieces = text.split(":")
        if len(pieces) != 3:
            raise ValueError(f"lambda range must be start:stop:count, got {text!r}")
        lo, hi, cnt = float(pieces[0]), float(pieces[1]), int(pieces[2])
        if cnt < 2:
            raise ValueError("lambda range needs count >= 2")
        return np.linspace(lo, hi, cnt)
    return np.array([float(x) for x in text.split(",")], dtype=float)


def _parse_weight(text: str, grid: EFGrid) -> pt.PerturbationWeight:
    """Builtin 'gaussian:center=..,width=..,height=..' or a zeta,kappa CSV path."""
    if text.startswith("gaussian"):
        opts = {"center": 0.0, "width": 1.0, "height": 1.0}
        _, _, tail = text.partition(":")
        if tail:
            for item in tail.split(","):
                key, _, val = item.partition("=")
                key = key.strip()
                if key not in opts:
                    raise ValueError(f"unknown gaussian weight option {key!r}")
                opts[key] = float(val)
        return pt.gaussian_bump(grid, **opts)
    path = Path(text)
    if not path.exists():
        raise ValueError(f"weight {text!r} is neither a builtin family nor an existing CSV file")
    return pt.PerturbationWeight(read_profile_csv(path, grid))


def _run_symbol(cfg: RunConfig, out: Path) -> str:
    taus = np.linspace(0.0, cfg.tau_max, cfg.tau_points)
    rows = []
    for ell in range(cfg.ell_max + 1):
        vals = symbol_values(ell, taus, cfg.n, cfg.s)
        rows.extend((ell, t, v) for t, v in zip(taus, vals))
    write_csv(out / "symbol.csv", ("ell", "tau", "lambda"), rows)
    write_json(out / "symbol_summary.json", {"config": cfg.echo()})
    if cfg.plot:
        from .plots import plot_symbol

        plot_symbol(out / "symbol.csv", out / "symbol.png")
    return f"symbol table: ell <= {cfg.ell_max}, tau <= {cfg.tau_max} -> {out / 'symbol.csv'}"


def _ground_artifacts(cfg: RunConfig, out: Path):
    params = cfg.params()
    grid = cfg.grid()
    summary = {"config": cfg.echo(), "params": {"n": params.n, "s": params.s, "q": params.q,
                                                "b": params.b, "lambda": params.lam},
               "grid": {"L": grid.L, "N": grid.N}, "converged": False}
    try:
        ground = solve_ground(params, grid, tol=cfg.tol, max_iter=cfg.max_iter)
    except (ConvergenceError, PositivityError) as err:
        summary["error"] = str(err)
        if isinstance(err, ConvergenceError):
            summary["residual"] = err.residual
            summary["iterations"] = err.iterations
        write_json(out / "ground_summary.json", summary)
        return None, summary
    summary.update(
        converged=True,
        best_constant=ground.best_constant,
        residual=ground.residual,
        # strict-JSON friendly: the decay fit degrades to NaN when the tail
        # sits below double resolution
        decay_rate=ground.decay_rate if math.isfinite(ground.decay_rate) else None,
        iterations=ground.iterations,
    )
    write_profile_csv(out / "ground_profile.csv", ground.v)
    write_json(out / "ground_summary.json", summary)
    return ground, summary


def _run_ground(cfg: RunConfig, out: Path) -> str:
    ground, summary = _ground_artifacts(cfg, out)
    if ground is None:
        raise ConvergenceError(summary.get("error", "ground solve failed"),
                               residual=summary.get("residual", math.nan),
                               iterations=summary.get("iterations", 0))
    if cfg.plot:
        from .plots import plot_ground

        plot_ground(out / "ground_profile.csv", out / "ground_summary.json", out / "ground.png")
    return (f"ground state: residual {ground.residual:.3e}, "
            f"best constant {ground.best_constant:.12g}, decay {ground.decay_rate:.6g}")


def _run_spectrum(cfg: RunConfig, out: Path) -> str:
    ground, summary = _ground_artifacts(cfg, out)
    if ground is None:
        raise ConvergenceError(summary.get("error", "ground solve failed"),
                               residual=summary.get("residual", math.nan),
                               iterations=summary.get("iterations", 0))
    cap = _thread_cap()
    sectors = list(range(cfg.ell_max + 1))
    if cap > 1 and len(sectors) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=cap) as pool:
            spectra = list(pool.map(lambda ell: sp.sector_spectrum(ground, ell, cfg.m), sectors))
    else:
        spectra = [sp.sector_spectrum(ground, ell, cfg.m) for ell in sectors]
    rows = []
    for sector in spectra:
        rows.extend(
            (sector.ell, i + 1, mu, mu - (cfg.q - 1.0)) for i, mu in enumerate(sector.eigenvalues)
        )
    write_csv(out / "spectrum.csv", ("ell", "index", "mu", "gap_to_qminus1"), rows)

    payload = {"config": cfg.echo(),
               "sectors": [{"ell": s.ell, "multiplicity": s.multiplicity,
                            "eigenvalues": list(s.eigenvalues),
                            # None when no returned radial eigenvalue clears q-1
                            # (request more eigenvalues to resolve the gap)
                            "gap_to_qminus1": s.gap_to_qminus1
                            if math.isfinite(s.gap_to_qminus1) else None}
                           for s in spectra]}
    if cfg.lam == 0.0:
        report = sp.nondegeneracy_report(ground, ell_max=max(cfg.ell_max, 1), m=cfg.m)
        payload["nondegeneracy"] = {
            "passed": report.passed,
            "unit_eigenvalue_error": report.unit_eigenvalue_error,
            "qminus1_eigenvalue_error": report.qminus1_eigenvalue_error,
            "qminus1_simple": report.qminus1_simple,
            "qminus1_eigenfunction_odd": report.qminus1_eigenfunction_odd,
            "sector_margins": {str(k): v for k, v in report.sector_margins.items()},
            "kappa_margin": report.kappa_margin,
            "failures": report.failures,
        }
    write_json(out / "spectrum_summary.json", payload)
    if cfg.plot:
        from .plots import plot_spectrum

        plot_spectrum(out / "spectrum.csv", cfg.q, out / "spectrum.png")
    head = ", ".join(f"{mu:.9g}" for mu in spectra[0].eigenvalues[:3])
    return f"spectrum: sector-0 eigenvalues [{head} ...] -> {out / 'spectrum.csv'}"


def _run_scan(cfg: RunConfig, out: Path) -> str:
    params = cfg.params()
    grid = cfg.grid()
    lams = _parse_lambda_list(cfg.lambdas, params)
    scan = sp.stability_scan(params, lams, grid, tol=cfg.bisect_tol, solver_tol=cfg.tol,
                             max_iter=cfg.max_iter, max_workers=_thread_cap())
    write_csv(
        out / "scan.csv",
        ("lambda", "best_constant", "nu1", "indicator", "converged"),
        ((r.lam, r.best_constant, r.nu1, r.indicator, r.converged) for r in scan.rows),
    )
    payload = {"config": cfg.echo(),
               "threshold": scan.threshold,
               "threshold_indicator": scan.threshold_indicator,
               "rows_converged": sum(r.converged for r in scan.rows),
               "rows_total": len(scan.rows)}
    write_json(out / "scan_summary.json", payload)
    if cfg.plot:
        from .plots import plot_scan

        plot_scan(out / "scan.csv", out / "scan.png", threshold=scan.threshold)
    where = (f"threshold near lambda = {scan.threshold:.9g}" if scan.threshold is not None
             else "no sign change in the scanned window")
    if not all(r.converged for r in scan.rows):
        raise ConvergenceError(f"{payload['rows_total'] - payload['rows_converged']} scan rows "
                               "failed to converge", residual=math.nan, iterations=0)
    return f"stability scan over {len(scan.rows)} lambda values: {where}"


def _run_perturb(cfg: RunConfig, out: Path) -> str:
    if cfg.lam != 0.0:
        raise ValueError("perturb requires lambda = 0")
    ground, summary = _ground_artifacts(cfg, out)
    if ground is None:
        raise ConvergenceError(summary.get("error", "ground solve failed"),
                               residual=summary.get("residual", math.nan),
                               iterations=summary.get("iterations", 0))
    grid = cfg.grid()
    weight_raw = _parse_weight(cfg.weight, grid)
    weight, amplitude = pt.gauge_weight(weight_raw, cfg.eps, ground.params)
    tgrid = np.linspace(cfg.t_log_min, cfg.t_log_max, cfg.t_log_points)
    curve = pt.reduced_curve(ground, cfg.eps, weight, tgrid, tol=cfg.tol)
    write_csv(
        out / "curve.csv",
        ("t_log", "energy", "gamma", "eta_norm", "residual", "converged"),
        ((p.t_log, p.energy, p.gamma, p.eta_norm, p.residual, p.converged)
         for p in curve.points),
    )
    verified, spurious = pt.find_solutions(curve, ground, weight, tol=cfg.tol)
    records = []
    for i, rec in enumerate(verified):
        write_profile_csv(out / f"solution_{i}.csv", rec.profile)
        info = {"eps": rec.eps, "t_log_star": rec.t_log_star, "residual": rec.residual,
                "gamma": rec.gamma, "energy": rec.energy, "positive": rec.positive,
                "degenerate_family": rec.degenerate_family,
                "gauge_amplitude_factor": amplitude}
        write_json(out / f"solution_{i}.json", info)
        records.append(info)
    payload = {"config": cfg.echo(),
               "degenerate_family": curve.degenerate_family,
               "critical_points": [{"t_log": t, "energy": e, "kind": k}
                                   for t, e, k in curve.critical_points],
               "solutions": records,
               "spurious": [{"t_log_star": r.t_log_star, "residual": r.residual,
                             "gamma": r.gamma, "positive": r.positive} for r in spurious],
               "points_converged": sum(p.converged for p in curve.points),
               "points_total": len(curve.points)}
    write_json(out / "perturb_summary.json", payload)
    if cfg.plot:
        from .plots import plot_curve

        plot_curve(out / "curve.csv", out / "curve.png")
    if not all(p.converged for p in curve.points):
        raise ConvergenceError("some curve points failed to converge",
                               residual=math.nan, iterations=0)
    return (f"reduced curve: {len(curve.points)} points, "
            f"{len(verified)} verified solution(s), degenerate={curve.degenerate_family}")


_RUNNERS = {
    "symbol": _run_symbol,
    "ground": _run_ground,
    "spectrum": _run_spectrum,
    "stability-scan": _run_scan,
    "perturb": _run_perturb,
}


def run(cfg: RunConfig) -> int:
    """Execute a command; returns the process exit status."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        message = _RUNNERS[cfg.command](cfg, out)
    except (ConvergenceError, PositivityError, pt.NewtonError) as err:
        print(f"frachs {cfg.command}: solver failure: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"frachs {cfg.command}: invalid configuration: {err}", file=sys.stderr)
        return 1
    print(f"frachs {cfg.command}: {message}")
    return 0


def _read_config_file(path: str) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, _, val = stripped.partition("=")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


_FIELD_TYPES = {
    "n": int, "s": float, "q": float, "lam": float, "L": float, "N": int,
    "tol": float, "max_iter": int, "allow_critical": bool, "out_dir": str, "plot": bool,
    "ell_max": int, "tau_max": float, "tau_points": int, "m": int,
    "lambdas": str, "bisect_tol": float, "eps": float, "weight": str,
    "t_log_min": float, "t_log_max": float, "t_log_points": int,
}


def _coerce(key: str, raw: str):
    typ = _FIELD_TYPES[key]
    if typ is bool:
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {raw!r}")
    return typ(raw)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frachs",
        description="Ground states, linearized spectra and perturbed solutions of the "
                    "weighted fractional problem in log-radial coordinates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", default=None, help="key=value config file; flags override")
        p.add_argument("--n", type=int, default=None, help="space dimension (>= 2)")
        p.add_argument("--s", type=float, default=None, help="operator order in (0,1)")
        p.add_argument("--out-dir", dest="out_dir", default=None)
        p.add_argument("--plot", action="store_true", default=None,
                       help="render figures next to the CSV output")

    def add_problem(p):
        p.add_argument("--q", type=float, default=None, help="nonlinearity exponent")
        p.add_argument("--lam", "--lambda", dest="lam", type=float, default=None,
                       help="Hardy-term coefficient (> -hardy_constant)")
        p.add_argument("--L", type=float, default=None,
                       help="grid half-length (default max(30, 60/(n-2s)))")
        p.add_argument("--N", type=int, default=None, help="grid size, power of two")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
        p.add_argument("--allow-critical", dest="allow_critical", action="store_true",
                       default=None, help="permit q = 2n/(n-2s) (validation mode)")

    p = sub.add_parser("symbol", help="tabulate the sector multiplier")
    add_common(p)
    p.add_argument("--ell-max", dest="ell_max", type=int, default=None)
    p.add_argument("--tau-max", dest="tau_max", type=float, default=None)
    p.add_argument("--tau-points", dest="tau_points", type=int, default=None)

    p = sub.add_parser("ground", help="solve for the ground-state profile")
    add_common(p)
    add_problem(p)

    p = sub.add_parser("spectrum", help="sector spectra of the linearization")
    add_common(p)
    add_problem(p)
    p.add_argument("--ell-max", dest="ell_max", type=int, default=None)
    p.add_argument("-m", type=int, default=None, help="eigenvalues per sector")

    p = sub.add_parser("stability-scan", help="degree-1 stability indicator along lambda")
    add_common(p)
    add_problem(p)
    p.add_argument("--lambdas", default=None,
                   help="comma list or start:stop:count (default -0.9*H_s .. 20, 12 points)")
    p.add_argument("--bisect-tol", dest="bisect_tol", type=float, default=None)

    p = sub.add_parser("perturb", help="dimension reduction for a weighted perturbation")
    add_common(p)
    add_problem(p)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--weight", default=None,
                   help="gaussian:center=..,width=..,height=.. or a zeta,kappa CSV path")
    p.add_argument("--t-log-min", dest="t_log_min", type=float, default=None)
    p.add_argument("--t-log-max", dest="t_log_max", type=float, default=None)
    p.add_argument("--t-log-points", dest="t_log_points", type=int, default=None)
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    """Merge flags over config-file values over defaults into a validated RunConfig."""
    args = _build_parser().parse_args(argv)
    merged: dict = {}
    if args.config:
        for key, raw in _read_config_file(args.config).items():
            if key not in _FIELD_TYPES:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, raw)
    for key in _FIELD_TYPES:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return RunConfig(command=args.command, **merged)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        _thread_cap()
    except (ValueError, OSError) as err:
        print(f"frachs: invalid configuration: {err}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
