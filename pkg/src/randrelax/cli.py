"""Command-line experiment runner.

Writes CSV traces (one row per sweep, scheme and norm), per-run CSV
traces and a JSON file of bound reports into the ``--out`` directory.
Exit status: 0 on success, 2 on configuration or I/O errors, 3 on
numerical failure.
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from . import bounds as bd
from . import multigrid as mg
from .problems import ProblemSpec, build_system, dominance_report
from .solvers import DivergenceError, PickRule, RunConfig, run_ensemble
from .sparse_core import as_csr, diagonal, read_matrix_market
from .spectral import ConvergenceError, h_matrix_certificate, lambda_min_hpd, left_perron_vector
from .splittings import JacobiSplitting, iteration_matrix

__all__ = ["ExperimentConfig", "ConfigError", "run_experiment", "emit_csv", "build_parser", "main"]

EXPERIMENTS = ("hpd_diffusion", "hmatrix_convection", "kaczmarz_compare", "multigrid_study", "audit")
PICKS = ("cyclic", "uniform", "optimal", "greedy-std", "greedy-opt")
CSV_COLUMNS = ("sweep", "scheme", "norm_kind", "mean", "min", "max", "bound")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs.  `pick` and `scheme` hold
    comma-separated selections; None means the experiment's default set.
    n defaults to 100 for the relaxation experiments and to the grid
    sizes 31, 63, 127 for the multigrid study."""

    experiment: str
    n: int | None = None
    sigma: float = 1.0
    diffusion: str = "const"
    omega: float = 1.0
    scheme: str | None = None
    pick: str | None = None
    runs: int = 10
    sweeps: int = 100
    seed: int = 0
    rtol: float = 1e-12
    out: str = "results"
    matrix: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.sweeps < 1:
            raise ConfigError("sweeps must be at least 1")
        if self.n is not None and self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.diffusion not in ("const", "var"):
            raise ConfigError("diffusion must be 'const' or 'var'")
        if not self.rtol > 0:
            raise ConfigError("rtol must be positive")
        for p in self.picks or ():
            if p not in PICKS:
                raise ConfigError(f"unknown pick {p!r}; choose from {PICKS}")

    @property
    def picks(self):
        return None if self.pick is None else tuple(self.pick.split(","))

    @property
    def schemes(self):
        return None if self.scheme is None else tuple(self.scheme.split(","))


# ---------------------------------------------------------------- output


def _fmt(v):
    return "" if v is None else f"{v:.17g}"


def emit_csv(traces, bound_curves, path):
    """One row per (scheme, norm, sweep): mean/min/max over runs and the bound.

    traces: {scheme: [RunTrace, ...]}; bound_curves: {(scheme, norm): array}
    indexed by sweep, or missing when no bound applies.  Runs are
    truncated to the shortest one so every row aggregates all runs.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for scheme, runs in traces.items():
            if not runs:
                continue
            for kind in runs[0].norms:
                m = min(len(t.norms[kind]) for t in runs)
                vals = np.array([t.norms[kind][:m] for t in runs])
                curve = bound_curves.get((scheme, kind))
                for k in range(m):
                    col = vals[:, k]
                    b = None if curve is None or k >= len(curve) else float(curve[k])
                    w.writerow([k, scheme, kind, _fmt(float(col.mean())), _fmt(float(col.min())),
                                _fmt(float(col.max())), _fmt(b)])


def _emit_runs(traces, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("scheme", "run", "seed", "sweep", "norm_kind", "value"))
        for scheme, runs in traces.items():
            for r, t in enumerate(runs):
                for kind, vals in t.norms.items():
                    for k, v in enumerate(vals):
                        w.writerow([scheme, r, t.seed, k, kind, _fmt(float(v))])


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------- problems


def _load_problem(cfg, convection):
    if cfg.matrix is not None:
        A = as_csr(read_matrix_market(cfg.matrix), square=True)
        z = np.ones(A.shape[0])
        return A, z, A @ z
    spec = ProblemSpec(cfg.n or 100, cfg.sigma if convection else 0.0, cfg.diffusion,
                       convection_on=convection)
    return build_system(spec)


def _is_symmetric(A):
    d = abs(A - A.T)
    return d.nnz == 0 or d.max() <= 1e-14 * abs(A).max()


def _curve(report, norm0, sweeps, power):
    return norm0 * report.decay(np.arange(sweeps + 1), power)


# ---------------------------------------------------------------- experiments


def _relaxation_experiment(cfg, hpd):
    A, z, b = _load_problem(cfg, convection=not hpd)
    n = A.shape[0]
    d = diagonal(A)
    picks = cfg.picks or PICKS
    traced = ("energy_error", "l2_residual") if hpd else ("l1w_residual", "l2_residual")
    main_norm = traced[0]
    power = 0.5 if hpd else 1.0
    base = RunConfig(omega=cfg.omega, max_sweeps=cfg.sweeps, rtol=cfg.rtol, seed=cfg.seed,
                     trace_norms=traced, x_star=z)
    notes = {}

    if hpd:
        if not _is_symmetric(A):
            raise ConfigError("hpd_diffusion needs a symmetric matrix")
        lam = lambda_min_hpd(A)
        rules = {
            "cyclic": (PickRule.cyclic(), None),
            "uniform": (PickRule.uniform(n), dict(p=np.full(n, 1.0 / n))),
            "optimal": (PickRule.random(bd.hpd_optimal_probabilities(d)),
                        dict(p=bd.hpd_optimal_probabilities(d))),
            "greedy-std": (PickRule.greedy_raw(np.ones(n)), dict(beta=np.ones(n))),
            "greedy-opt": (PickRule.greedy_raw(bd.hpd_optimal_betas(d)),
                           dict(beta=bd.hpd_optimal_betas(d))),
        }
        report = lambda kw: bd.hpd_alpha(cfg.omega, lam, d, **kw)
        notes["lambda_min"] = lam
    else:
        u = np.ones(n)
        if not dominance_report(A).dominant_e:
            cert = h_matrix_certificate(A)
            if not cert.is_h_matrix:
                raise bd.BoundInapplicableError("matrix is not an H-matrix")
            u = cert.u
        base = replace(base, weights=u)
        hb = bd.h_matrix_bounds(A, u, residual_kind="original")
        rules = {
            "cyclic": (PickRule.cyclic(), None),
            "uniform": (PickRule.uniform(n), dict(p=np.full(n, 1.0 / n))),
            "optimal": (PickRule.random(hb.p_opt), dict(p=hb.p_opt)),
            "greedy-std": (PickRule.greedy_raw(np.ones(n)), dict(beta=np.ones(n))),
            "greedy-opt": (PickRule.greedy_raw(hb.beta_opt), dict(beta=hb.beta_opt)),
        }
        report = lambda kw: bd.h_matrix_bounds(A, u, residual_kind="original", **kw)
        notes["weights_are_ones"] = bool(np.all(u == 1.0))
        if cfg.omega != 1.0:
            notes["bounds"] = "bounds in the u-norm are reported for omega = 1 only"

    traces, curves, reports = {}, {}, {}
    for name in picks:
        rule, kw = rules[name]
        runs = cfg.runs if rule.is_random else 1
        traces[name] = run_ensemble(A, b, None, replace(base, pick=rule), runs, cfg.seed)
        rep = None
        if kw is not None and (hpd or cfg.omega == 1.0):
            rep = report(kw)
            norm0 = traces[name][0].norms[main_norm][0]
            curves[(name, main_norm)] = _curve(rep, norm0, cfg.sweeps, power)
        reports[name] = None if rep is None else rep.to_dict()
    return traces, curves, {"schemes": reports, "notes": notes}


def _kaczmarz_experiment(cfg):
    A, z, b = _load_problem(cfg, convection=True)
    n = A.shape[0]
    families = cfg.schemes or ("gauss-seidel", "kaczmarz")
    for f in families:
        if f not in ("gauss-seidel", "kaczmarz"):
            raise ConfigError(f"kaczmarz_compare schemes are gauss-seidel and kaczmarz, not {f!r}")
    base = RunConfig(max_sweeps=cfg.sweeps, rtol=cfg.rtol, seed=cfg.seed,
                     trace_norms=("l2_error", "l2_residual"), x_star=z)
    traces, curves, reports = {}, {}, {}
    if "gauss-seidel" in families:
        p = bd.h_matrix_bounds(A, np.ones(n), residual_kind="original").p_opt if dominance_report(A).dominant_e \
            else np.full(n, 1.0 / n)
        traces["gs-cyclic"] = run_ensemble(A, b, None, base, 1)
        traces["gs-randomized"] = run_ensemble(A, b, None, replace(base, pick=PickRule.random(p)),
                                               cfg.runs)
        reports["gs-cyclic"] = reports["gs-randomized"] = None
    if "kaczmarz" in families:
        traces["kaczmarz-cyclic"] = run_ensemble(A, b, None, base, 1, kaczmarz="cyclic")
        traces["kaczmarz-randomized"] = run_ensemble(A, b, None, base, cfg.runs,
                                                     kaczmarz="randomized")
        rep = bd.kaczmarz_alpha(A)
        norm0 = traces["kaczmarz-randomized"][0].norms["l2_error"][0]
        curves[("kaczmarz-randomized", "l2_error")] = _curve(rep, norm0, cfg.sweeps, 0.5)
        reports["kaczmarz-cyclic"] = None
        reports["kaczmarz-randomized"] = rep.to_dict()
    return traces, curves, {"schemes": reports, "notes": {}}


def _multigrid_experiment(cfg):
    schemes = cfg.schemes or ("cyclic", "greedy", "randomized")
    sizes = (31, 63, 127) if cfg.n is None else (cfg.n,)
    smoothers = []
    for s in schemes:
        if s not in ("cyclic", "greedy", "randomized"):
            raise ConfigError(f"unknown smoother {s!r}")
        smoothers.append(mg.SmootherConfig(s, 1, cfg.seed))
        if s == "randomized":
            smoothers += [mg.SmootherConfig(s, 1.5, cfg.seed), mg.SmootherConfig(s, 2, cfg.seed)]
    try:
        for N in sizes:
            mg._check_grid(N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return mg.multigrid_study(sizes, smoothers, seed=cfg.seed)


def audit(A):
    """Structural and spectral facts relevant to the convergence bounds."""
    A = as_csr(A, square=True)
    n = A.shape[0]
    d = diagonal(A, require_nonzero=False)
    info = dict(n=n, nnz=int(A.nnz), symmetric=bool(_is_symmetric(A)),
                nonzero_diagonal=bool(np.all(d != 0)))
    dom = dominance_report(A)
    info["column_dominance_e"] = asdict(dom)
    hpd = info["symmetric"] and bool(np.all(d > 0))
    if hpd:
        try:
            lam = lambda_min_hpd(A)
        except ConvergenceError:
            hpd = False
        else:
            info["lambda_min"] = lam
            info["alpha_opt_hpd"] = bd.hpd_alpha(1.0, lam, d, p=d / d.sum()).alpha_opt
    info["hpd"] = hpd
    if info["nonzero_diagonal"]:
        cert = h_matrix_certificate(A)
        info["h_matrix"] = cert.is_h_matrix
        if cert.is_h_matrix:
            info["alpha_opt_hmatrix"] = bd.h_matrix_bounds(A, cert.u, residual_kind="original").alpha_opt
            H = iteration_matrix(JacobiSplitting.from_matrix(A))
            try:
                info["rho_abs_jacobi"] = left_perron_vector(abs(H)).rho
            except ConvergenceError as exc:
                info["rho_abs_jacobi"] = None
                info["perron_note"] = str(exc)
    return info


def run_experiment(cfg):
    """Run one experiment and write its artifacts; returns {name: path}."""
    os.makedirs(cfg.out, exist_ok=True)
    paths = {}
    if cfg.experiment == "audit":
        A = read_matrix_market(cfg.matrix) if cfg.matrix else _load_problem(cfg, True)[0]
        paths["audit"] = os.path.join(cfg.out, "audit.json")
        _write_json(audit(A), paths["audit"])
        return paths
    if cfg.experiment == "multigrid_study":
        paths["multigrid"] = os.path.join(cfg.out, "multigrid.csv")
        mg.write_study_csv(_multigrid_experiment(cfg), paths["multigrid"])
        return paths
    if cfg.experiment == "kaczmarz_compare":
        traces, curves, meta = _kaczmarz_experiment(cfg)
    else:
        traces, curves, meta = _relaxation_experiment(cfg, cfg.experiment == "hpd_diffusion")
    paths["traces"] = os.path.join(cfg.out, f"{cfg.experiment}.csv")
    paths["runs"] = os.path.join(cfg.out, f"{cfg.experiment}_runs.csv")
    paths["bounds"] = os.path.join(cfg.out, f"{cfg.experiment}_bounds.json")
    emit_csv(traces, curves, paths["traces"])
    _emit_runs(traces, paths["runs"])
    meta["config"] = asdict(cfg)
    _write_json(meta, paths["bounds"])
    return paths


# ---------------------------------------------------------------- entry point


def build_parser():
    p = argparse.ArgumentParser(prog="randrelax", description=__doc__.splitlines()[0])
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--n", type=int, help="interior grid points per direction")
    p.add_argument("--sigma", type=float, help="convection strength")
    p.add_argument("--diffusion", choices=("const", "var"))
    p.add_argument("--omega", type=float, help="relaxation parameter")
    p.add_argument("--scheme", help="comma list: gauss-seidel/kaczmarz or cyclic/greedy/randomized")
    p.add_argument("--pick", help=f"comma list from {', '.join(PICKS)}")
    p.add_argument("--runs", type=int, help="seeded runs per randomized scheme (default 10)")
    p.add_argument("--sweeps", type=int, help="maximum sweeps per run")
    p.add_argument("--seed", type=int, help="seed of run 0; run r uses seed + r")
    p.add_argument("--rtol", type=float, help="relative stopping tolerance")
    p.add_argument("--out", help="output directory")
    p.add_argument("--matrix", help="Matrix Market file replacing the generated system")
    p.add_argument("--config", help="JSON file with the same keys as the flags")
    return p


def config_from_args(args):
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(ExperimentConfig)}
        for key, val in data.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = val
    for key, val in vars(args).items():
        if key != "config" and val is not None:
            values[key] = val
    if "experiment" not in values:
        raise ConfigError("no experiment given")
    for key in ("pick", "scheme"):
        if isinstance(values.get(key), list):
            values[key] = ",".join(values[key])
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        paths = run_experiment(cfg)
    except (DivergenceError, ConvergenceError, bd.BoundInapplicableError) as exc:
        print(f"randrelax: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"randrelax: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name, path in paths.items():
        print(f"{name}: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
