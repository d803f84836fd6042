"""Configuration-driven experiment runner.

Subcommands: sample, clusters, cutsets, renorm, resist, walk, sweep,
classify, plus `run` which chains the full pipeline.  Exit codes: 0 success,
2 config error, 3 capacity error, 4 partial-failure threshold exceeded.
Reruns with identical configuration produce byte-identical outputs.
"""

import argparse
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, charts, clusters, electrical, kernels, model
from . import renorm as renorm_mod
from . import sampler, tables, walks
from .config import ExperimentConfig, config_lines, load_config
from .errors import (CapacityError, ConfigError, CouplingOrderError,
                     HierpercError, InvalidInputError, PartialFailureError)

FAILURE_THRESHOLD = 0.10


# ---------------------------------------------------------------- classifier

@dataclass
class Classification:
    label: str
    mean_ratio: float
    min_window_increment: float
    floor: float
    increments: list
    ratios: list


def classify_resistance_growth(series, window: int = 4,
                               ratio_threshold: float = 0.9,
                               floor_frac: float = 0.05) -> Classification:
    """Heuristic finite-depth label from a nondecreasing resistance series.

    Transient-like when the mean ratio of successive increments over the last
    `window` pairs falls below `ratio_threshold` (increment decay);
    recurrent-like when every increment in the window stays above
    `floor_frac` times the first increment; inconclusive otherwise.  The
    label is evidence, not a verdict: the underlying dichotomy is asymptotic
    and this sees a finite window.
    """
    series = sorted((int(k), float(r)) for k, r in series)
    if len(series) < window + 2:
        raise InvalidInputError(f"need at least {window + 2} points")
    values = [r for _, r in series]
    for a, b in zip(values, values[1:]):
        if b < a - 1e-12:
            raise InvalidInputError("series must be nondecreasing")
    inc = [b - a for a, b in zip(values, values[1:])]
    ratios = []
    for d0, d1 in zip(inc, inc[1:]):
        if d0 <= 0.0:
            ratios.append(0.0 if d1 <= 0.0 else float("inf"))
        else:
            ratios.append(d1 / d0)
    win_ratios = ratios[-window:]
    win_inc = inc[-window:]
    floor = floor_frac * inc[0]
    mean_ratio = float(np.mean(win_ratios))
    if mean_ratio < ratio_threshold:
        label = "transient-like"
    elif min(win_inc) > floor and min(win_inc) > 0.0:
        label = "recurrent-like"
    else:
        label = "inconclusive"
    return Classification(label=label, mean_ratio=mean_ratio,
                          min_window_increment=float(min(win_inc)),
                          floor=float(floor), increments=inc, ratios=ratios)


# -------------------------------------------------------------- alpha sweep

@dataclass
class SweepBranch:
    alpha: float
    graph: "sampler.PercolationGraph"
    shell_rows: list          # (k, resistance, residual)
    nw_partial: dict          # k -> partial NW sum over contained cutsets
    label: str


def alpha_sweep(cfg: ExperimentConfig, alphas=None, shared_seed=None):
    """Coupled sweep over alpha values on one probability space.

    The largest alpha is sampled; every smaller alpha is produced by thinning
    with the same seed, which reuses one uniform per source edge and makes
    the whole family nested.  Subgraph and resistance monotonicity are
    asserted exactly (up to solver tolerance for the resistances).
    """
    alphas = sorted(float(a) for a in (alphas or cfg.alphas))
    if not alphas:
        raise ConfigError("alpha sweep needs at least one alpha")
    shared_seed = cfg.seed if shared_seed is None else shared_seed
    base_profile = cfg.profile().replace_alpha(alphas[-1])
    scfg = sampler.SampleConfig(cfg.N, cfg.depth, base_profile, shared_seed,
                                vertex_budget=cfg.vertex_budget)
    g_top = sampler.sample_graph(scfg)
    sched = cfg.schedule()
    branches = []
    for a in alphas:
        if a == alphas[-1]:
            g = g_top
        else:
            g = sampler.thin_graph(g_top, base_profile.replace_alpha(a),
                                   shared_seed)
        results, _ = electrical.resistance_profile(
            g, cfg.effective_shells(), tol=cfg.resist_tol,
            method=cfg.resist_method)
        rows = [(r.k, r.estimate.value, r.estimate.residual) for r in results]
        labels = kernels.union_labels(g.n_vertices, g.edges_u, g.edges_v)
        cluster = np.flatnonzero(labels == labels[0])
        js = [j for j in cfg.j_list
              if model.schedule_k_n(sched, 2 * (j + 2)) <= cfg.depth]
        nw_partial = {}
        if js:
            report = clusters.cutsets(g, sched, cluster, js)
            for k in cfg.effective_shells():
                acc = 0.0
                for e in report.entries:
                    outer = model.schedule_k_n(sched, 2 * (e.j + 2))
                    if outer <= k and e.size > 0:
                        acc += 1.0 / e.size
                nw_partial[k] = acc
        try:
            label = classify_resistance_growth(
                [(k, v) for k, v, _ in rows], window=cfg.classify_window,
                ratio_threshold=cfg.classify_ratio_threshold,
                floor_frac=cfg.classify_floor_frac).label
        except InvalidInputError:
            label = "inconclusive"
        branches.append(SweepBranch(alpha=a, graph=g, shell_rows=rows,
                                    nw_partial=nw_partial, label=label))
    _assert_coupled(branches)
    return branches


def _assert_coupled(branches):
    n = branches[0].graph.n_vertices
    for lo, hi in zip(branches, branches[1:]):
        lo_keys = set((lo.graph.edges_u * n + lo.graph.edges_v).tolist())
        hi_keys = set((hi.graph.edges_u * n + hi.graph.edges_v).tolist())
        if not lo_keys <= hi_keys:
            raise CouplingOrderError(
                f"alpha={lo.alpha} graph is not a subgraph of alpha={hi.alpha}"
            )
        lo_r = dict((k, v) for k, v, _ in lo.shell_rows)
        hi_r = dict((k, v) for k, v, _ in hi.shell_rows)
        for k in sorted(set(lo_r) & set(hi_r)):
            if lo_r[k] < hi_r[k] - 1e-9:
                raise CouplingOrderError(
                    f"resistance not monotone at shell {k}: "
                    f"R({lo.alpha})={lo_r[k]} < R({hi.alpha})={hi_r[k]}"
                )


# ----------------------------------------------------------------- pipeline

def _emit_charts(out_dir: Path, csv_paths):
    chart_dir = out_dir / "charts"
    chart_dir.mkdir(parents=True, exist_ok=True)
    for p in csv_paths:
        rel = p.relative_to(out_dir)
        name = "_".join(rel.parts).rsplit(".", 1)[0] + ".svg"
        charts.chart_from_csv(p, chart_dir / name)


def _write_manifest(out_dir: Path, cfg: ExperimentConfig, notes=()):
    files = sorted(
        p for p in out_dir.rglob("*")
        if p.is_file() and p.name != "manifest.txt"
    )
    lines = [f"hierperc-version = {__version__}",
             f"kernels = {kernels.IMPLEMENTATION}"]
    lines += [f"config.{l}" for l in config_lines(cfg)]
    lines += [f"note = {n}" for n in notes]
    lines += [
        f"file.{p.relative_to(out_dir).as_posix()} = {tables.sha256_file(p)}"
        for p in files
    ]
    path = out_dir / "manifest.txt"
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _replica_dir(out_dir: Path, r: int) -> Path:
    d = out_dir / f"r{r:03d}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def _sample_replica(cfg: ExperimentConfig, r: int):
    scfg = cfg.sample_config(cfg.replica_seed(r))
    return sampler.sample_graph(scfg)


def _map_replicas(cfg: ExperimentConfig, fn):
    """Run fn(r) for each replica, collecting (index, result-or-error)."""
    results = [None] * cfg.replicas
    errors = [None] * cfg.replicas

    def runner(r):
        try:
            results[r] = fn(r)
        except Exception as exc:  # noqa: BLE001 - partial-failure policy
            errors[r] = exc

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            list(pool.map(runner, range(cfg.replicas)))
    else:
        for r in range(cfg.replicas):
            runner(r)
    return results, errors


def _finish(out_dir: Path, cfg: ExperimentConfig, errors, notes=()):
    failed = [(r, e) for r, e in enumerate(errors or []) if e is not None]
    if failed:
        with open(out_dir / "errors.log", "w", newline="\n") as fh:
            for r, e in failed:
                fh.write(f"replica {r}: {type(e).__name__}: {e}\n")
    _write_manifest(out_dir, cfg, notes=notes)
    if failed and len(failed) > FAILURE_THRESHOLD * cfg.replicas:
        raise PartialFailureError(
            f"{len(failed)}/{cfg.replicas} replicas failed"
        )
    return failed


# ------------------------------------------------------------- subcommands

def cmd_sample(cfg: ExperimentConfig, out_dir: Path):
    cfg.sample_config().check_budget()

    def work(r):
        g = _sample_replica(cfg, r)
        gdir = out_dir / "graphs"
        gdir.mkdir(parents=True, exist_ok=True)
        sampler.save_graph(g, gdir / f"r{r:03d}.hpg")
        return g.edge_count

    _, errors = _map_replicas(cfg, work)
    return _finish(out_dir, cfg, errors)


def cmd_clusters(cfg: ExperimentConfig, out_dir: Path):
    cfg.sample_config().check_budget()
    csvs = []

    def work(r):
        g = _sample_replica(cfg, r)
        rows = clusters.density_rows(g, cfg.effective_levels())
        path = _replica_dir(out_dir, r) / "densities.csv"
        tables.write_csv(path, ["level", "ball_id", "density"], rows)
        csvs.append(path)
        return len(rows)

    _, errors = _map_replicas(cfg, work)
    if cfg.charts:
        _emit_charts(out_dir, sorted(csvs))
    return _finish(out_dir, cfg, errors)


def cmd_cutsets(cfg: ExperimentConfig, out_dir: Path):
    sched = cfg.schedule()
    if cfg.cutset_mode == "law":
        sizes = clusters.simulate_cutset_sizes(
            cfg.profile(), sched, cfg.j_list, cfg.seed, cfg.law_replicas)
        mean_sizes = sizes.mean(axis=0)
        rows = [
            (int(j), float(m),
             model.kappa_j(sched.a, cfg.alpha, int(j)) / cfg.N)
            for j, m in zip(cfg.j_list, mean_sizes)
        ]
        tables.write_csv(out_dir / "cutsets.csv",
                         ["j", "size", "kappa_over_N"], rows)
        nw = electrical.nash_williams_rows(
            cfg.j_list, [float(m) for m in mean_sizes])
        tables.write_csv(out_dir / "nw.csv",
                         ["j", "cutset_size", "partial_nw_sum"], nw)
        return _finish(out_dir, cfg, [], notes=("cutset_mode=law",))

    cfg.sample_config().check_budget()
    js = [j for j in cfg.j_list
          if model.schedule_k_n(sched, 2 * (j + 1)) < cfg.depth]
    if not js:
        raise ConfigError(
            f"no cutset index in {cfg.j_list} fits inside depth {cfg.depth}"
        )

    def work(r):
        g = _sample_replica(cfg, r)
        labels = kernels.union_labels(g.n_vertices, g.edges_u, g.edges_v)
        cluster = np.flatnonzero(labels == labels[0])
        report = clusters.cutsets(g, sched, cluster, js)
        rdir = _replica_dir(out_dir, r)
        tables.write_csv(rdir / "cutsets.csv", ["j", "size", "kappa_over_N"],
                         clusters.cutset_rows(report))
        tables.write_csv(
            rdir / "nw.csv", ["j", "cutset_size", "partial_nw_sum"],
            electrical.nash_williams_rows(js, report.sizes()))
        return report

    _, errors = _map_replicas(cfg, work)
    return _finish(out_dir, cfg, errors)


def cmd_renorm(cfg: ExperimentConfig, out_dir: Path):
    diags, _ = renorm_mod.run_recursion(cfg.profile(), cfg.renorm_levels,
                                        cfg.renorm_pop, cfg.seed,
                                        params=cfg.analysis())
    path = out_dir / "renorm.csv"
    tables.write_csv(path, ["level", "mean", "var", "z_eps", "r_teps",
                            "pop_size"], renorm_mod.diagnostics_rows(diags))
    cert = renorm_mod.percolation_certificate(diags, cfg.certificate_a)
    tables.write_csv(
        out_dir / "certificate.csv",
        ["a", "n0", "min_lower_bound", "origin_bound", "certified"],
        [(cert.a, cert.n0, cert.min_lower_bound, cert.origin_bound,
          cert.certified)],
    )
    if cfg.charts:
        _emit_charts(out_dir, [path])
    return _finish(out_dir, cfg, [])


def cmd_resist(cfg: ExperimentConfig, out_dir: Path):
    cfg.sample_config().check_budget()
    csvs = []

    def work(r):
        g = _sample_replica(cfg, r)
        results, skipped = electrical.resistance_profile(
            g, cfg.effective_shells(), tol=cfg.resist_tol,
            method=cfg.resist_method)
        path = _replica_dir(out_dir, r) / "resistance.csv"
        tables.write_csv(path, ["k", "resistance", "method", "residual"],
                         electrical.resistance_rows(results))
        csvs.append(path)
        return skipped

    _, errors = _map_replicas(cfg, work)
    if cfg.charts:
        _emit_charts(out_dir, sorted(csvs))
    return _finish(out_dir, cfg, errors)


def cmd_walk(cfg: ExperimentConfig, out_dir: Path):
    cfg.sample_config().check_budget()

    def work(r):
        g = _sample_replica(cfg, r)
        wcfg = walks.WalkConfig(start=0, max_steps=cfg.walk_max_steps,
                                replicas=cfg.walk_replicas,
                                seed=cfg.replica_seed(r))
        stats = walks.return_statistics(g, wcfg)
        path = _replica_dir(out_dir, r) / "walks.csv"
        tables.write_csv(path, ["replica", "outcome", "steps", "returns"],
                         walks.walk_rows(stats))
        return stats.outcome_counts()

    _, errors = _map_replicas(cfg, work)
    return _finish(out_dir, cfg, errors)


def cmd_sweep(cfg: ExperimentConfig, out_dir: Path):
    cfg.sample_config().check_budget()
    branches = alpha_sweep(cfg)
    rows = []
    for b in branches:
        for k, value, residual in b.shell_rows:
            rows.append((b.alpha, k, value, residual,
                         b.nw_partial.get(k, 0.0)))
    tables.write_csv(out_dir / "sweep.csv",
                     ["alpha", "k", "resistance", "residual",
                      "nw_partial_sum"], rows)
    tables.write_csv(out_dir / "sweep_labels.csv", ["alpha", "label"],
                     [(b.alpha, b.label) for b in branches])
    return _finish(out_dir, cfg, [])


def cmd_classify(cfg: ExperimentConfig, out_dir: Path):
    if not cfg.series:
        raise ConfigError("classify needs `series = <csv path>` in the config")
    header, rows = tables.read_csv(cfg.series)
    if not rows:
        raise ConfigError(f"no rows in {cfg.series}")
    try:
        series = [(int(row[0]), float(row[1])) for row in rows]
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"bad series file: {exc}") from None
    try:
        cls = classify_resistance_growth(
            series, window=cfg.classify_window,
            ratio_threshold=cfg.classify_ratio_threshold,
            floor_frac=cfg.classify_floor_frac)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None
    tables.write_csv(
        out_dir / "classification.csv",
        ["label", "mean_ratio", "min_window_increment", "floor", "heuristic"],
        [(cls.label, cls.mean_ratio, cls.min_window_increment, cls.floor,
          "finite-depth-evidence")],
    )
    evid = [(series[i + 1][0], cls.increments[i])
            for i in range(len(cls.increments))]
    tables.write_csv(out_dir / "classification_evidence.csv",
                     ["k", "increment"], evid)
    _finish(out_dir, cfg, [])
    return cls.label


def cmd_run(cfg: ExperimentConfig, out_dir: Path):
    """Full pipeline: sample, clusters, cutsets, resistance, walks, renorm."""
    cfg.sample_config().check_budget()
    sched = cfg.schedule()

    def work(r):
        g = _sample_replica(cfg, r)
        rdir = _replica_dir(out_dir, r)
        gdir = out_dir / "graphs"
        gdir.mkdir(parents=True, exist_ok=True)
        sampler.save_graph(g, gdir / f"r{r:03d}.hpg")
        tables.write_csv(rdir / "densities.csv",
                         ["level", "ball_id", "density"],
                         clusters.density_rows(g, cfg.effective_levels()))
        labels = kernels.union_labels(g.n_vertices, g.edges_u, g.edges_v)
        cluster = np.flatnonzero(labels == labels[0])
        js = [j for j in cfg.j_list
              if model.schedule_k_n(sched, 2 * (j + 1)) < cfg.depth]
        if js:
            report = clusters.cutsets(g, sched, cluster, js)
            tables.write_csv(rdir / "cutsets.csv",
                             ["j", "size", "kappa_over_N"],
                             clusters.cutset_rows(report))
            tables.write_csv(
                rdir / "nw.csv", ["j", "cutset_size", "partial_nw_sum"],
                electrical.nash_williams_rows(js, report.sizes()))
        results, _ = electrical.resistance_profile(
            g, cfg.effective_shells(), tol=cfg.resist_tol,
            method=cfg.resist_method)
        tables.write_csv(rdir / "resistance.csv",
                         ["k", "resistance", "method", "residual"],
                         electrical.resistance_rows(results))
        wcfg = walks.WalkConfig(start=0, max_steps=cfg.walk_max_steps,
                                replicas=cfg.walk_replicas,
                                seed=cfg.replica_seed(r))
        stats = walks.return_statistics(g, wcfg)
        tables.write_csv(rdir / "walks.csv",
                         ["replica", "outcome", "steps", "returns"],
                         walks.walk_rows(stats))
        if results:
            series = [(res.k, res.estimate.value) for res in results]
            try:
                label = classify_resistance_growth(
                    series, window=cfg.classify_window,
                    ratio_threshold=cfg.classify_ratio_threshold,
                    floor_frac=cfg.classify_floor_frac).label
            except InvalidInputError:
                label = "inconclusive"
            tables.write_csv(rdir / "classification.csv",
                             ["label", "heuristic"],
                             [(label, "finite-depth-evidence")])
        return True

    _, errors = _map_replicas(cfg, work)
    diags, _ = renorm_mod.run_recursion(cfg.profile(), cfg.renorm_levels,
                                        cfg.renorm_pop, cfg.seed,
                                        params=cfg.analysis())
    tables.write_csv(out_dir / "renorm.csv",
                     ["level", "mean", "var", "z_eps", "r_teps", "pop_size"],
                     renorm_mod.diagnostics_rows(diags))
    if cfg.charts:
        _emit_charts(out_dir, sorted(out_dir.rglob("*.csv")))
    return _finish(out_dir, cfg, errors)


COMMANDS = {
    "sample": cmd_sample,
    "clusters": cmd_clusters,
    "cutsets": cmd_cutsets,
    "renorm": cmd_renorm,
    "resist": cmd_resist,
    "walk": cmd_walk,
    "sweep": cmd_sweep,
    "classify": cmd_classify,
    "run": cmd_run,
}

_CONFIG_HELP = """configuration keys (key = value per line, # comments):
  N, depth, delta, C0, C1, C2, alpha      lattice and coupling law
  schedule_K, schedule_C, schedule_a, schedule_b
                                          annulus schedule
  seed, replicas, threads, out            run control
  vertex_budget, charts                   limits and optional SVG charts
  levels, j_list, j_min                   density levels / cutset indices
  cutset_mode (graph|law), law_replicas   cutset measurement mode
  renorm_levels, renorm_pop               density recursion size
  eps, beta, gamma, s, certificate_a      analysis thresholds
  walk_replicas, walk_max_steps, walk_shell
  shells, resist_tol, resist_method       resistance profile
  alphas                                  sweep values
  classify_window, classify_ratio_threshold, classify_floor_frac, series
"""


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hierperc",
        description="Hierarchical-lattice percolation experiments",
        epilog=_CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("series", nargs="?", default=None,
                        help="input CSV for `classify` (overrides config)")
    parser.add_argument("--config", default=None, help="config file path")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {"seed": args.seed, "out": args.out,
                     "threads": args.threads}
        if args.series is not None:
            overrides["series"] = args.series
        cfg = load_config(args.config, overrides)
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        result = COMMANDS[args.command](cfg, out_dir)
        if isinstance(result, str):
            print(result)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except PartialFailureError as exc:
        print(f"partial failure: {exc}", file=sys.stderr)
        return 4
    except HierpercError as exc:
        print(f"error: {exc}", file=sys.stderr)
        traceback.print_exc()
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
