"""Config-driven command line interface.

Subcommands: featurize, cluster, score, sweep, synth, runtime. Settings come
from an INI-style config file (see docs/formats.md); the ``--seed`` and
``--out`` flags override the file, which overrides built-in defaults. All
outputs are deterministic for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import baselines, bench, dictlearn, features, graphclust, msm, tempreg, trajio
from .errors import MoscitoError

METHODS = ("moscito", "pca_kmeans", "tica_kmeans", "ssc")


class ConfigError(MoscitoError):
    """Invalid or missing configuration; exits with status 2."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass(frozen=True)
class PipelineConfig:
    topology: str | None = None
    trajectory: str | None = None
    synth: bench.SynthSpec | None = None
    selection: tuple = ("backbone",)
    scaling: str = "minmax01"
    angles: str = "cossin"
    sasa_probe_radius: float = 1.4
    sasa_sphere_points: int = 960
    tempreg: tempreg.TemporalWeightConfig = tempreg.TemporalWeightConfig(s=3)
    solver: dictlearn.SolverConfig = dictlearn.SolverConfig()
    k_list: tuple = (5,)
    tau_list: tuple = (1,)
    m: int = 5
    r: int = 2
    methods: tuple = ("moscito",)
    pca_dims: int | None = None
    tica_lag: int = 10
    tica_dims: int | None = None
    ssc_lambda: float | None = None
    output_dir: str = "out"
    seed: int = 0

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2)


# ---------------------------------------------------------------------------
# config file parsing

_SCHEMA = {
    "input": {"topology", "trajectory"},
    "synth": {
        "n_states", "stay_prob", "n_frames", "d_feat",
        "state_separation", "smoothing_window",
    },
    "features": {
        "selection", "scaling", "angles", "sasa_probe_radius", "sasa_sphere_points",
    },
    "tempreg": {"s", "mode", "gaussian_sigma", "exp_theta"},
    "solver": {
        "d", "lambda1", "lambda2", "alpha", "beta", "nu", "max_iters", "tol",
        "cg_tol", "cg_max_iters", "multiplier_pairing",
    },
    "clustering": {"k"},
    "msm": {"tau", "m", "r"},
    "baselines": {"pca_dims", "tica_lag", "tica_dims", "ssc_lambda"},
    "run": {"methods", "output_dir", "seed"},
}


def _convert(section, key, raw, kind):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{section}.{key}", f"cannot parse '{raw}' as {kind.__name__}") from None


def _int_list(section, key, raw):
    return tuple(_convert(section, key, item.strip(), int) for item in raw.split(",") if item.strip())


def resolve_config(path=None, seed=None, out=None) -> PipelineConfig:
    """Merge defaults, the config file, and CLI overrides (highest wins)."""
    raw: dict[str, dict[str, str]] = {}
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError("config", f"config file '{path}' does not exist")
        parser = configparser.ConfigParser()
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as e:
            raise ConfigError("config", f"cannot parse '{path}': {e}") from None
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigError(section, "unknown config section")
            for key in parser[section]:
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"{section}.{key}", "unknown config key")
            raw[section] = dict(parser[section])

    def get(section, key, kind=str, default=None):
        if section in raw and key in raw[section]:
            value = raw[section][key].strip()
            if value == "":  # empty value means "use the default"
                return default
            return _convert(section, key, value, kind)
        return default

    run_seed = seed if seed is not None else get("run", "seed", int, 0)

    synth_spec = None
    if "synth" in raw:
        try:
            synth_spec = bench.SynthSpec(
                n_states=get("synth", "n_states", int, 3),
                stay_prob=get("synth", "stay_prob", float, 0.99),
                n_frames=get("synth", "n_frames", int, 1000),
                d_feat=get("synth", "d_feat", int, 10),
                state_separation=get("synth", "state_separation", float, 4.0),
                smoothing_window=get("synth", "smoothing_window", int, 0),
                seed=run_seed,
            )
        except MoscitoError as e:
            raise ConfigError("synth", str(e)) from None

    selection = tuple(
        item.strip() for item in get("features", "selection", str, "backbone").split(",") if item.strip()
    )
    for name in selection:
        if name not in features.CANONICAL_ORDER:
            raise ConfigError("features.selection", f"unknown featurizer '{name}'")
    scaling = get("features", "scaling", str, "minmax01")
    if scaling not in features.SCALINGS:
        raise ConfigError("features.scaling", f"unknown scaling '{scaling}'")
    angles = get("features", "angles", str, "cossin")
    if angles not in ("cossin", "raw"):
        raise ConfigError("features.angles", f"must be 'cossin' or 'raw', got '{angles}'")

    try:
        temp_cfg = tempreg.TemporalWeightConfig(
            s=get("tempreg", "s", int, 3),
            mode=get("tempreg", "mode", str, "binary"),
            gaussian_sigma=get("tempreg", "gaussian_sigma", float, None),
            exp_theta=get("tempreg", "exp_theta", float, 1.0),
        )
    except MoscitoError as e:
        raise ConfigError("tempreg", str(e)) from None

    try:
        solver_cfg = dictlearn.SolverConfig(
            d=get("solver", "d", int, 60),
            lambda1=get("solver", "lambda1", float, 0.01),
            lambda2=get("solver", "lambda2", float, 15.0),
            alpha=get("solver", "alpha", float, 0.1),
            beta=get("solver", "beta", float, 0.1),
            nu=get("solver", "nu", float, 1.0),
            max_iters=get("solver", "max_iters", int, 20),
            tol=get("solver", "tol", float, 1e-4),
            seed=run_seed,
            cg_tol=get("solver", "cg_tol", float, 1e-8),
            cg_max_iters=get("solver", "cg_max_iters", int, 2000),
            multiplier_pairing=get("solver", "multiplier_pairing", str, "lagrangian"),
        )
    except MoscitoError as e:
        raise ConfigError("solver", str(e)) from None

    methods = tuple(
        item.strip() for item in get("run", "methods", str, "moscito").split(",") if item.strip()
    )
    for method in methods:
        if method not in METHODS:
            raise ConfigError("run.methods", f"unknown method '{method}' (one of {METHODS})")

    k_raw = raw.get("clustering", {}).get("k")
    tau_raw = raw.get("msm", {}).get("tau")
    return PipelineConfig(
        topology=get("input", "topology"),
        trajectory=get("input", "trajectory"),
        synth=synth_spec,
        selection=selection,
        scaling=scaling,
        angles=angles,
        sasa_probe_radius=get("features", "sasa_probe_radius", float, 1.4),
        sasa_sphere_points=get("features", "sasa_sphere_points", int, 960),
        tempreg=temp_cfg,
        solver=solver_cfg,
        k_list=_int_list("clustering", "k", k_raw) if k_raw else (5,),
        tau_list=_int_list("msm", "tau", tau_raw) if tau_raw else (1,),
        m=get("msm", "m", int, 5),
        r=get("msm", "r", int, 2),
        methods=methods,
        pca_dims=get("baselines", "pca_dims", int, None),
        tica_lag=get("baselines", "tica_lag", int, 10),
        tica_dims=get("baselines", "tica_dims", int, None),
        ssc_lambda=get("baselines", "ssc_lambda", float, None),
        output_dir=out if out is not None else get("run", "output_dir", str, "out"),
        seed=run_seed,
    )


# ---------------------------------------------------------------------------
# pipeline pieces

def _atomic_write_text(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _atomic_write_with(writer, target, *args):
    tmp = f"{target}.tmp"
    writer(*args, tmp)
    os.replace(tmp, target)


def compute_features(cfg: PipelineConfig):
    """Input features plus planted labels when the input is synthetic."""
    if cfg.synth is not None:
        fm, planted = bench.synth_trajectory(cfg.synth)
        if cfg.scaling == "minmax01":
            fm = features.FeatureMatrix(
                features.scale_minmax01(fm.values), fm.feature_labels, "minmax01"
            )
        return fm, planted
    if not cfg.topology:
        raise ConfigError("input.topology", "required when no [synth] section is given")
    if not cfg.trajectory:
        raise ConfigError("input.trajectory", "required when no [synth] section is given")
    topo = trajio.load_topology(cfg.topology)
    traj = trajio.load_trajectory(cfg.trajectory, topo)
    fm = features.assemble_features(
        traj,
        cfg.selection,
        scaling=cfg.scaling,
        angles=cfg.angles,
        probe_radius=cfg.sasa_probe_radius,
        sphere_points=cfg.sasa_sphere_points,
    )
    return fm, None


def _load_or_compute_features(cfg: PipelineConfig):
    path = os.path.join(cfg.output_dir, "features.csv")
    if os.path.exists(path):
        return features.read_feature_csv(path, scaling=cfg.scaling), None
    fm, planted = compute_features(cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)
    _atomic_write_with(features.write_feature_csv, path, fm)
    if planted is not None:
        _atomic_write_with(
            graphclust.write_dtraj_csv, os.path.join(cfg.output_dir, "planted.csv"), planted
        )
    return fm, planted


def _dims_for_fraction(eigvals, fraction, kinetic=False):
    w = np.maximum(np.asarray(eigvals, dtype=np.float64), 0.0)
    if kinetic:
        w = w**2
    total = w.sum()
    if total <= 0:
        return 1
    cum = np.cumsum(w) / total
    return int(np.searchsorted(cum, fraction) + 1)


def run_method(method: str, fm, cfg: PipelineConfig):
    """Discrete trajectories for every k in the config.

    Returns (dict k -> DiscreteTrajectory, extra artifacts dict).
    """
    extras = {}
    if method == "moscito":
        n = fm.n
        W = tempreg.weight_matrix(n, cfg.tempreg)
        L_T = tempreg.temporal_laplacian(W)
        _, Z, diag = dictlearn.fit(fm, L_T, cfg.solver)
        extras["diagnostics"] = diag.to_json()
        G = graphclust.affinity(Z)
        dtrajs = {k: graphclust.spectral_clustering(G, k, cfg.seed) for k in cfg.k_list}
    elif method == "pca_kmeans":
        w, _, _ = baselines.pca_full(fm)
        dims = cfg.pca_dims or _dims_for_fraction(w, 0.95)
        Y = baselines.pca_project(fm, dims)
        dtrajs = {k: baselines.kmeans(Y, k, cfg.seed) for k in cfg.k_list}
    elif method == "tica_kmeans":
        w, _, _ = baselines.tica_full(fm, cfg.tica_lag)
        dims = cfg.tica_dims or _dims_for_fraction(w, 0.95, kinetic=True)
        Y = baselines.tica_project(fm, cfg.tica_lag, dims)
        dtrajs = {k: baselines.kmeans(Y, k, cfg.seed) for k in cfg.k_list}
    elif method == "ssc":
        model = baselines.ssc_self_expression(fm, cfg.ssc_lambda)
        A = np.abs(model.C) + np.abs(model.C).T
        dtrajs = {k: graphclust.spectral_clustering(A, k, cfg.seed) for k in cfg.k_list}
    else:
        raise ConfigError("run.methods", f"unknown method '{method}'")
    return dtrajs, extras


# ---------------------------------------------------------------------------
# subcommands

def cmd_featurize(cfg: PipelineConfig) -> int:
    fm, planted = compute_features(cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "features.csv")
    _atomic_write_with(features.write_feature_csv, path, fm)
    print(f"wrote {path} ({fm.d_feat} features x {fm.n} steps)")
    if planted is not None:
        ppath = os.path.join(cfg.output_dir, "planted.csv")
        _atomic_write_with(graphclust.write_dtraj_csv, ppath, planted)
        print(f"wrote {ppath}")
    return 0


def cmd_synth(cfg: PipelineConfig) -> int:
    if cfg.synth is None:
        raise ConfigError("synth", "the synth command needs a [synth] config section")
    return cmd_featurize(cfg)


def cmd_cluster(cfg: PipelineConfig) -> int:
    fm, _ = _load_or_compute_features(cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)
    for method in cfg.methods:
        dtrajs, extras = run_method(method, fm, cfg)
        if "diagnostics" in extras:
            _atomic_write_text(
                os.path.join(cfg.output_dir, f"diagnostics_{method}.json"),
                extras["diagnostics"],
            )
        for k, dtraj in dtrajs.items():
            base = os.path.join(cfg.output_dir, f"dtraj_{method}_k{k}")
            _atomic_write_with(graphclust.write_dtraj_csv, base + ".csv", dtraj)
            _atomic_write_with(graphclust.write_segmentation_svg, base + ".svg", dtraj)
            print(f"wrote {base}.csv and {base}.svg")
    return 0


def cmd_score(cfg: PipelineConfig) -> int:
    cells = []
    missing = []
    for method in cfg.methods:
        for k in cfg.k_list:
            path = os.path.join(cfg.output_dir, f"dtraj_{method}_k{k}.csv")
            if not os.path.exists(path):
                missing.append(path)
                continue
            dtraj = graphclust.read_dtraj_csv(path, k=k)
            for tau in cfg.tau_list:
                cells.append((method, k, tau, dtraj))
    for path in missing:
        print(f"missing dtraj, skipped: {path}", file=sys.stderr)

    def score_cell(cell):
        method, k, tau, dtraj = cell
        return (method, k, tau, cfg.m, cfg.r, msm.vamp_r(dtraj, tau, cfg.m, cfg.r))

    with ThreadPoolExecutor(max_workers=min(8, max(1, len(cells)))) as pool:
        rows = list(pool.map(score_cell, cells))

    os.makedirs(cfg.output_dir, exist_ok=True)
    spath = os.path.join(cfg.output_dir, "scores.csv")
    rpath = os.path.join(cfg.output_dir, "rankings.csv")
    _atomic_write_with(msm.write_score_csv, spath, rows)
    _atomic_write_with(msm.write_ranking_csv, rpath, rows)
    print(f"wrote {spath} ({len(rows)} rows) and {rpath}")
    return 0


_SWEEP_AXES = {
    "d": ("solver", "d", int),
    "lambda1": ("solver", "lambda1", float),
    "lambda2": ("solver", "lambda2", float),
    "alpha": ("solver", "alpha", float),
    "beta": ("solver", "beta", float),
    "nu": ("solver", "nu", float),
    "s": ("tempreg", "s", int),
    "weight_mode": ("tempreg", "mode", str),
    "gaussian_sigma": ("tempreg", "gaussian_sigma", float),
    "exp_theta": ("tempreg", "exp_theta", float),
    "scaling": (None, "scaling", str),
    "angles": (None, "angles", str),
}


def _with_axis(cfg: PipelineConfig, axis: str, value: str) -> PipelineConfig:
    group, key, kind = _SWEEP_AXES[axis]
    try:
        typed = kind(value)
    except ValueError:
        raise ConfigError(f"sweep.{axis}", f"cannot parse '{value}' as {kind.__name__}") from None
    try:
        if group is None:
            return dataclasses.replace(cfg, **{key: typed})
        return dataclasses.replace(
            cfg, **{group: dataclasses.replace(getattr(cfg, group), **{key: typed})}
        )
    except MoscitoError as e:
        raise ConfigError(f"sweep.{axis}", str(e)) from None


def cmd_sweep(cfg: PipelineConfig, axis: str, values) -> int:
    if axis not in _SWEEP_AXES:
        raise ConfigError("sweep.axis", f"unknown axis '{axis}' (one of {sorted(_SWEEP_AXES)})")
    k = cfg.k_list[0]
    tau = cfg.tau_list[0]

    def run_cell(value):
        local = _with_axis(cfg, axis, value)
        fm, _ = compute_features(local)
        dtrajs, _ = run_method("moscito", fm, dataclasses.replace(local, k_list=(k,)))
        score = msm.vamp_r(dtrajs[k], tau, local.m, local.r)
        return (axis, value, "moscito", k, tau, local.m, local.r, score)

    with ThreadPoolExecutor(max_workers=min(4, max(1, len(values)))) as pool:
        rows = list(pool.map(run_cell, values))

    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "sweep.csv")
    lines = ["axis,value,method,k,tau,m,r,score"]
    for axis_name, value, method, kk, tt, m, r, score in rows:
        lines.append(f"{axis_name},{value},{method},{kk},{tt},{m},{r},{float(score)!r}")
    _atomic_write_text(path, "\n".join(lines) + "\n")
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_runtime(cfg: PipelineConfig) -> int:
    timings = {}
    t0 = time.perf_counter()
    fm, _ = compute_features(cfg)
    timings["featurize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    W = tempreg.weight_matrix(fm.n, cfg.tempreg)
    L_T = tempreg.temporal_laplacian(W)
    _, Z, _ = dictlearn.fit(fm, L_T, cfg.solver)
    timings["solve"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    G = graphclust.affinity(Z)
    dtraj = graphclust.spectral_clustering(G, cfg.k_list[0], cfg.seed)
    timings["cluster"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    msm.vamp_r(dtraj, cfg.tau_list[0], cfg.m, cfg.r)
    timings["score"] = time.perf_counter() - t0
    timings["total"] = sum(timings.values())

    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "runtime.json")
    _atomic_write_text(path, json.dumps(timings, indent=2) + "\n")
    print(json.dumps(timings, indent=2))
    return 0


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moscito",
        description="Temporal subspace clustering pipeline for trajectory data.",
    )
    parser.add_argument("--config", default=None, help="path to the INI config file")
    parser.add_argument("--seed", type=int, default=None, help="override the run seed")
    parser.add_argument("--out", default=None, help="override the output directory")
    parser.add_argument(
        "--json-errors", action="store_true", help="emit errors as JSON records on stderr"
    )
    parser.add_argument(
        "--dump-config", action="store_true", help="print the resolved config as JSON and exit"
    )
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("featurize", help="write the feature matrix CSV")
    sub.add_parser("cluster", help="write discrete trajectories and segmentation strips")
    sub.add_parser("score", help="VAMP-score existing discrete trajectories")
    sweep = sub.add_parser("sweep", help="rerun the pipeline along one parameter axis")
    sweep.add_argument("--axis", required=True, help=f"one of {sorted(_SWEEP_AXES)}")
    sweep.add_argument("--values", required=True, help="comma-separated values")
    sub.add_parser("synth", help="generate synthetic features and planted labels")
    sub.add_parser("runtime", help="report wall time per pipeline stage")
    return parser


def _report_error(exc, code, json_errors):
    if json_errors:
        record = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError):
            record["field"] = exc.field
        print(json.dumps(record), file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.config, seed=args.seed, out=args.out)
        if args.dump_config:
            print(cfg.to_json())
            return 0
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        if args.command == "featurize":
            return cmd_featurize(cfg)
        if args.command == "cluster":
            return cmd_cluster(cfg)
        if args.command == "score":
            return cmd_score(cfg)
        if args.command == "sweep":
            values = [v.strip() for v in args.values.split(",") if v.strip()]
            return cmd_sweep(cfg, args.axis, values)
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "runtime":
            return cmd_runtime(cfg)
        parser.print_usage(sys.stderr)
        return 2
    except ConfigError as e:
        return _report_error(e, 2, args.json_errors)
    except MoscitoError as e:
        return _report_error(e, 1, args.json_errors)
    except OSError as e:
        return _report_error(e, 1, args.json_errors)


if __name__ == "__main__":
    sys.exit(main())
