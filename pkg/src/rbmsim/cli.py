"""Command line interface: ``rbmsim {lattice,simulate,estimate,compare,accept}``.

Exit codes: 0 success, 1 failed criterion or simulation failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import OUTPUT_ENV, SCHEMES, ConfigError, RunConfig, load_config
from .domains import DomainError, parse_domain
from .estimators import (
    EstimatorError,
    Grid,
    OccupationHistogram,
    Report,
    energy_trend,
    lebesgue_cell_masses,
    occupation_histogram,
    oscillation,
    spectral_inequality_check,
    compare_schemes,
    tv_distance,
)
from .lattice import LatticeError, build_lattice, transition_matrix
from .myopic import MyopicConfig, RejectionBudgetError, estimate_survival, simulate_myopic_ensemble
from .trajectory import Trajectory
from .walks import covariation, interpolate, simulate_ctrw, simulate_discrete_walks

log = logging.getLogger("rbmsim")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CHUNK = 256
RUN_LOCAL = ("output", "workers")  # do not affect path contents


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# simulation backend shared by subcommands


def myopic_config(cfg: RunConfig) -> MyopicConfig:
    return MyopicConfig(k=cfg.k, substeps=cfg.substeps, bridge=cfg.bridge, max_attempts=cfg.max_attempts,
                        horizon=cfg.horizon, seed=cfg.seed)


def _walk_start(lattice, cfg: RunConfig):
    if cfg.start == "stationary":
        return "stationary"
    try:
        return lattice.nearest_vertex(cfg.start)
    except LatticeError as exc:
        raise ConfigError(f"start point {cfg.start} has no lattice vertex: {exc}") from exc


def simulate_paths(cfg: RunConfig, ids) -> list[tuple[int, Trajectory, object]]:
    """Trajectories for the given path ids; each depends only on (config, id)."""
    domain = cfg.build_domain()
    ids = np.asarray(ids, dtype=np.int64)
    out = []
    if cfg.scheme.startswith("walk"):
        lat = build_lattice(domain, cfg.k)
        start = _walk_start(lat, cfg)
        if cfg.scheme == "walk-ct":
            for i in ids:
                tr = simulate_ctrw(lat, start, cfg.horizon, cfg.seed, path_id=int(i))
                out.append((int(i), tr, None))
            return out
        ens = simulate_discrete_walks(lat, start, cfg.horizon, cfg.seed, path_ids=ids)
        mode = "linear" if cfg.scheme == "walk-discrete" else "step"
        for j, i in enumerate(ids):
            chain = ens.path(j)
            out.append((int(i), interpolate(chain, mode), chain))
        return out
    view = "full" if cfg.scheme == "myopic-full" else "linear"
    ens = simulate_myopic_ensemble(domain, cfg.start, myopic_config(cfg), path_ids=ids, view=view)
    return [(int(i), ens.trajectory(j), None) for j, i in enumerate(ids)]


def final_positions(cfg: RunConfig) -> tuple[np.ndarray, float]:
    """Final positions of all paths and the scheme's speed tag."""
    domain = cfg.build_domain()
    if cfg.scheme.startswith("walk"):
        lat = build_lattice(domain, cfg.k)
        start = _walk_start(lat, cfg)
        if cfg.scheme == "walk-ct":
            pts = [simulate_ctrw(lat, start, cfg.horizon, cfg.seed, i).positions[-1] for i in range(cfg.paths)]
            return np.array(pts), 1.0 / domain.dim
        v = simulate_discrete_walks(lat, start, cfg.horizon, cfg.seed, n_paths=cfg.paths, record="final")
        return lat.positions[v], 1.0 / domain.dim
    pts = simulate_myopic_ensemble(domain, cfg.start, myopic_config(cfg), n_paths=cfg.paths, record="final")
    return pts, 1.0


def _chunk_worker(args):
    cfg_dict, ids = args
    cfg = RunConfig(**cfg_dict).validate()
    return [(i, tr.to_csv(), chain.to_csv() if chain is not None else None)
            for i, tr, chain in simulate_paths(cfg, ids)]


def run_batches(cfg: RunConfig):
    """Yield (path id, trajectory CSV, chain CSV or None) in path order."""
    size = max(1, min(CHUNK, -(-cfg.paths // cfg.workers)))
    chunks = [list(range(lo, min(lo + size, cfg.paths))) for lo in range(0, cfg.paths, size)]
    jobs = [(cfg.to_dict(), c) for c in chunks]
    if cfg.workers == 1:
        for job in jobs:
            yield from _chunk_worker(job)
        return
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        for result in pool.map(_chunk_worker, jobs):
            yield from result


# ---------------------------------------------------------------------------
# subcommands


def cmd_lattice(args) -> int:
    cfg = _config(args)
    lat = build_lattice(cfg.build_domain(), cfg.k)
    out = cfg.output_dir
    vpath, epath = lat.export(out)
    mass = float(lat.measure.sum())
    frac = lat.non_interior_mass() / mass
    print(f"{lat.size} vertices, {len(lat.edges())} edges, mass {mass:.6g}, non-interior mass fraction {frac:.6g}")
    print(f"wrote {vpath} and {epath}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = cfg.output_dir
    (out / "paths").mkdir(parents=True, exist_ok=True)
    files = {}
    for i, traj_csv, chain_csv in run_batches(cfg):
        name = f"paths/path_{i:06d}.csv"
        (out / name).write_text(traj_csv)
        files[name] = hashlib.sha256(traj_csv.encode()).hexdigest()
        if chain_csv is not None:
            cname = f"paths/chain_{i:06d}.csv"
            (out / cname).write_text(chain_csv)
            files[cname] = hashlib.sha256(chain_csv.encode()).hexdigest()
    manifest = {
        "version": __version__,
        "config": {k: v for k, v in cfg.to_dict().items() if k not in RUN_LOCAL},
        "run": {k: str(getattr(cfg, k)) for k in RUN_LOCAL},
        "seeding": "Philox4x32-10 keyed by (seed, stream label); counters carry (step, attempt, path id)",
        "speed": 1.0 if cfg.scheme.startswith("myopic") else 1.0 / cfg.build_domain().dim,
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    print(f"wrote {cfg.paths} paths to {out}")
    return EXIT_OK


def parse_statistic(spec: list[str]) -> tuple[str, dict]:
    """``["covariation", "t=1"]`` -> ("covariation", {"t": "1"}); accepts ``j<=32`` and ``k=3..7``."""
    tokens = " ".join(spec).split()
    if not tokens:
        raise UsageError("missing statistic name")
    name, params = tokens[0], {}
    for tok in tokens[1:]:
        m = re.fullmatch(r"([A-Za-z_]\w*)\s*(<=|=)\s*(\S+)", tok)
        if not m:
            raise UsageError(f"cannot parse statistic parameter {tok!r}")
        params[m.group(1)] = m.group(3)
    return name, params


def _int_range(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",")]


TEST_FUNCTIONS = {
    "x1": (lambda p: p[:, 0], 1.0),
    "x1+x2": (lambda p: p[:, 0] + p[:, 1], 2.0),
    "const": (lambda p: np.ones(len(p)), 0.0),
}


def estimate(name: str, params: dict, cfg: RunConfig):
    """Run one named estimator; returns a Report or a covariation report."""
    domain = cfg.build_domain()
    if name == "covariation":
        if not cfg.scheme.startswith("walk") or cfg.scheme == "walk-ct":
            raise UsageError("covariation needs a discrete walk scheme")
        t = float(params.get("t", cfg.horizon))
        lat = build_lattice(domain, cfg.k)
        ens = simulate_discrete_walks(lat, _walk_start(lat, cfg), max(t, cfg.horizon), cfg.seed, n_paths=cfg.paths)
        return covariation(ens, t, compensated=params.get("compensated", "true") != "false")
    if name == "energy-trend":
        key = params.get("f", "x1")
        if key not in TEST_FUNCTIONS:
            raise UsageError(f"unknown test function {key!r}; choose from {', '.join(TEST_FUNCTIONS)}")
        f, grad2 = TEST_FUNCTIONS[key]
        area, _ = domain.area()
        target = grad2 * area / (2 * domain.dim)
        return energy_trend(domain, f, _int_range(params.get("k", "3..7")), target,
                            float(params.get("tol", 0.006)))
    if name == "spectral":
        lat = build_lattice(domain, cfg.k)
        F = np.random.default_rng(cfg.seed).standard_normal((lat.size, int(params.get("n", 100))))
        return spectral_inequality_check(transition_matrix(lat), F, int(params.get("j", 32)),
                                         params.get("mode", "even"))
    if name == "survival":
        x = [float(v) for v in params.get("x", ",".join(map(str, domain.anchor))).split(",")]
        rep = estimate_survival(domain, x, float(params.get("dt", 2.0 ** -cfg.k)), int(params.get("n", 100_000)),
                                MyopicConfig(substeps=cfg.substeps, bridge=cfg.bridge, seed=cfg.seed))
        return Report("survival", rep.p_hat, rep.p_hat, 0.0, "abs", stderr=rep.stderr, config=json.loads(rep.to_json()))
    if name == "occupation":
        grid = Grid.over(domain, int(params.get("cells", 8)))
        hist = occupation_histogram((tr for _, tr, _ in simulate_paths(cfg, range(cfg.paths))), grid)
        tv = tv_distance(hist.mass, lebesgue_cell_masses(domain, grid))
        if "csv" in params:
            Path(params["csv"]).write_text(hist.to_csv())
        return Report("TV(occupation, Lebesgue)", tv, 0.0, float(params.get("tol", 0.05)), "upper",
                      speed=hist.speed, details={"total_time": hist.total_time})
    if name == "oscillation":
        rho = float(params.get("rho", 0.01))
        vals = [oscillation(tr, rho) for _, tr, _ in simulate_paths(cfg, range(cfg.paths))]
        return Report("mean oscillation", float(np.mean(vals)), 0.0, float("inf"), "upper",
                      stderr=float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else None,
                      details={"rho": rho, "values": vals})
    raise UsageError(f"unknown statistic {name!r}")


def cmd_estimate(args) -> int:
    cfg = _config(args)
    name, params = parse_statistic(args.statistic)
    result = estimate(name, params, cfg)
    print(result.to_json())
    return EXIT_OK if getattr(result, "passed", True) else EXIT_FAIL


def cmd_compare(args) -> int:
    if len(args.configs) != 2:
        raise UsageError("compare takes exactly two --config files")
    cfgs = [load_config(c) for c in args.configs]
    samples, speeds, times = [], [], []
    for c in cfgs:
        pts, speed = final_positions(c)
        samples.append(pts)
        speeds.append(speed)
        times.append(c.horizon)
    rep = compare_schemes(samples, speeds, times, alpha=args.alpha)
    rep.config = {"a": cfgs[0].to_dict(), "b": cfgs[1].to_dict()}
    print(rep.to_json())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_accept(args) -> int:
    from . import acceptance

    names = acceptance.suites() if args.suite == "all" else [args.suite]
    unknown = [n for n in names if n not in acceptance.CATALOG]
    if unknown:
        raise UsageError(f"unknown suite {unknown[0]!r}; available: all, {', '.join(acceptance.suites())}")
    ok = True
    lines = []
    for n in names:
        res = acceptance.run(n)
        print(res.summary())
        ok &= res.passed
        lines.extend(json.dumps({"suite": n, **r.as_dict()}, default=str) for r in res.reports)
    if args.json:
        Path(args.json).write_text("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


def _start_arg(text: str):
    if text == "stationary":
        return text
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("start must be 'stationary' or comma-separated coordinates") from exc


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML or JSON run configuration")
    p.add_argument("--domain", help="shorthand (square, interval, disk, lshape, snowflake:D, comb[:K]) or file")
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--k", type=int)
    p.add_argument("--horizon", type=float)
    p.add_argument("--paths", type=int)
    p.add_argument("--start", type=_start_arg)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--output", help=f"output directory (default ${OUTPUT_ENV} or ./rbmsim_out)")
    p.add_argument("--substeps", type=int)
    p.add_argument("--no-bridge", dest="bridge", action="store_false", default=None)


def _config(args) -> RunConfig:
    keys = ("domain", "scheme", "k", "horizon", "paths", "start", "seed", "workers", "output", "substeps", "bridge")
    return load_config(args.config, **{k: getattr(args, k, None) for k in keys})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbmsim", description="Discrete approximations of reflected Brownian motion")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice", help="build and export the level-k lattice")
    _add_run_options(p)
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("simulate", help="simulate paths and write trajectories with a manifest")
    _add_run_options(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="run a named estimator, e.g. 'covariation t=1'")
    p.add_argument("statistic", nargs="+")
    _add_run_options(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compare", help="two-sample comparison of final marginals of two configs")
    p.add_argument("--config", dest="configs", action="append", required=True)
    p.add_argument("--alpha", type=float, default=0.01)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("accept", help="run an acceptance suite ('all' for every criterion)")
    p.add_argument("suite")
    p.add_argument("--json", help="write reports as JSON lines")
    p.set_defaults(func=cmd_accept)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, DomainError, LatticeError, EstimatorError) as exc:
        print(f"rbmsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RejectionBudgetError as exc:
        print(f"rbmsim: simulation failed for path ids {list(exc.path_ids)[:10]}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
