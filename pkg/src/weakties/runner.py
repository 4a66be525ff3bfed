"""Experiment configuration, orchestration and aggregation."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .diffusion import (ModelParams, f_local_profile, mean_stderr, pool_profiles,
                        remove_then_diffuse, run_replications)
from .errors import ConfigError, DataError, WeakTiesError
from .graph import (Graph, IdMap, connected_components, generate_community_graph,
                    generate_scale_free, load_edge_list, write_edge_list)
from .percolation import fraction_grid, percolation_sweep, removal_order
from .report import body_digest, fmt, write_csv
from .strength import all_strengths, degree_strength_correlation, strength_cdf

log = logging.getLogger(__name__)

COMMANDS = ("load-stats", "strength", "cdf", "correlate", "percolate", "diffuse", "remove-diffuse", "gen")
ORDERS = ("weak", "strong")


def _floats(value) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),)
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    return tuple(float(v) for v in str(value).split(",") if v.strip())


def _range_grid(value) -> tuple[float, ...]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    text = str(value)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected start:stop:step, got {text!r}")
        start, stop, step = map(float, parts)
        return tuple(fraction_grid(step, start, stop).tolist())
    return _floats(text)


def _tmax(value):
    if value is None or str(value).strip().lower() == "auto":
        return None
    return int(value)


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _orders(value) -> tuple[str, ...]:
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    out: list[str] = []
    for item in items:
        item = item.strip()
        if item == "both":
            out.extend(ORDERS)
        elif item in ORDERS:
            out.append(item)
        else:
            raise ValueError(f"order must be weak, strong or both; got {item!r}")
    return tuple(dict.fromkeys(out))


def _opt_str(value):
    return None if value in (None, "") else str(value)


# config key -> (attribute, converter)
KEYS = {
    "input": ("input", _opt_str),
    "generator": ("generator", _opt_str),
    "comment": ("comment", str),
    "delimiter": ("delimiter", _opt_str),
    "seed": ("seed", int),
    "threads": ("threads", int),
    "out-dir": ("out_dir", str),
    "alpha": ("alpha", _floats),
    "beta": ("beta", _floats),
    "runs": ("runs", int),
    "tmax": ("tmax", _tmax),
    "epsilon": ("epsilon", float),
    "order": ("order", _orders),
    "grid-step": ("grid_step", float),
    "collapse-threshold": ("collapse_threshold", float),
    "fr-grid": ("fr_grid", _range_grid),
    "cdf-grid": ("cdf_grid", _range_grid),
    "paired-seeds": ("paired_seeds", _bool),
    "per-run": ("per_run", _bool),
    "resume": ("resume", _bool),
}


@dataclass
class ExperimentConfig:
    command: str
    input: str | None = None
    generator: str | None = None
    comment: str = "#"
    delimiter: str | None = None
    seed: int = 0
    threads: int = 1
    out_dir: str = "out"
    alpha: tuple[float, ...] = (0.0,)
    beta: tuple[float, ...] = (0.01,)
    runs: int = 20
    tmax: int | None = None
    epsilon: float = 1e-6
    order: tuple[str, ...] = ("weak",)
    grid_step: float = 0.01
    collapse_threshold: float = 0.01
    fr_grid: tuple[float, ...] = (0.0, 0.2, 0.4, 0.6, 0.8)
    cdf_grid: tuple[float, ...] = field(default_factory=lambda: tuple(fraction_grid(0.01).tolist()))
    paired_seeds: bool = True
    per_run: bool = False
    resume: bool = False

    def validate(self) -> "ExperimentConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.command == "gen":
            if not self.generator:
                raise ConfigError("gen needs --generator")
        elif (self.input is None) == (self.generator is None):
            raise ConfigError("exactly one of --input or --generator is required")
        if self.input is not None and not Path(self.input).is_file():
            raise ConfigError(f"input file not found: {self.input}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        for b in self.beta:
            if not 0.0 <= b <= 1.0:
                raise ConfigError(f"beta must lie in [0, 1], got {b}")
        for a in self.alpha:
            if not math.isfinite(a):
                raise ConfigError("alpha must be finite")
        if not self.alpha or not self.beta:
            raise ConfigError("alpha and beta lists must be non-empty")
        if self.tmax is not None and self.tmax < 1:
            raise ConfigError("tmax must be >= 1 or 'auto'")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if not 0 < self.grid_step <= 1:
            raise ConfigError("grid-step must lie in (0, 1]")
        if not 0 <= self.collapse_threshold <= 1:
            raise ConfigError("collapse-threshold must lie in [0, 1]")
        for f in self.fr_grid:
            if not 0 <= f <= 1:
                raise ConfigError(f"fraction {f} outside [0, 1]")
        if not self.fr_grid or list(self.fr_grid) != sorted(set(self.fr_grid)):
            raise ConfigError("fr-grid must be non-empty and strictly increasing")
        if not self.cdf_grid or list(self.cdf_grid) != sorted(self.cdf_grid):
            raise ConfigError("cdf-grid must be non-empty and sorted")
        if self.command == "remove-diffuse" and (len(self.alpha) != 1 or len(self.beta) != 1):
            raise ConfigError("remove-diffuse takes a single alpha and beta")
        return self

    def as_dict(self) -> dict:
        out = {}
        for key, (attr, _) in KEYS.items():
            value = getattr(self, attr)
            out[key] = list(value) if isinstance(value, tuple) else value
        out["command"] = self.command
        return out


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; lines starting with ``#`` are comments."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        values[key.strip()] = value.strip()
    return values


def parse_config(command: str, flags: dict | None = None, config_path=None) -> ExperimentConfig:
    """Merge defaults, config-file values and flags (flags win) into a validated config.

    ``flags`` maps config keys (flag names without ``--``) to raw values.
    """
    merged: dict = {}
    if config_path is not None:
        merged.update(read_config_file(config_path))
    merged.update({k: v for k, v in (flags or {}).items() if v is not None})
    unknown = sorted(set(merged) - set(KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    kwargs = {}
    for key, value in merged.items():
        attr, conv = KEYS[key]
        try:
            kwargs[attr] = conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    return ExperimentConfig(command=command, **kwargs).validate()


# --------------------------------------------------------------------------
# Aggregation


@dataclass(frozen=True, eq=False)
class AggregateSeries:
    T: np.ndarray
    mean_coverage: np.ndarray
    stderr_coverage: np.ndarray
    mean_f_pub: np.ndarray
    stderr_f_pub: np.ndarray
    runs: int


def _padded(arrays, length):
    out = np.empty((len(arrays), length))
    for r, a in enumerate(arrays):
        out[r, :len(a)] = a
        out[r, len(a):] = a[-1]
    return out


def aggregate_replications(series) -> AggregateSeries:
    """Pointwise mean and standard error over runs, aligned on ``T``.

    Runs that ended before the longest one carry their final values forward.
    """
    series = list(series)
    if not series:
        raise ValueError("no series to aggregate")
    length = max(s.events for s in series)
    cov = _padded([s.coverage for s in series], length)
    pub = _padded([s.f_pub for s in series], length)
    n = len(series)

    def se(a):
        return a.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(length)

    return AggregateSeries(np.arange(1, length + 1), cov.mean(axis=0), se(cov),
                           pub.mean(axis=0), se(pub), n)


# --------------------------------------------------------------------------
# Orchestration


@dataclass
class RunManifest:
    config: dict
    dataset: dict
    tool_version: str
    files: dict = field(default_factory=dict)

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n")

    @classmethod
    def read(cls, path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text()))


def dataset_fingerprint(graph: Graph) -> dict:
    raw = np.ascontiguousarray(graph.id_map.to_raw(graph.edges), dtype="<i8")
    return {
        "nodes": graph.node_count,
        "edges": graph.edge_count,
        "sha256": hashlib.sha256(raw.tobytes()).hexdigest(),
    }


def parse_generator(spec: str, default_seed: int) -> Graph:
    """``community:c=50,s=20,p_in=0.6,k_out=120`` or ``scale-free:n=1000,m=3``
    (an optional ``seed=`` overrides the global seed)."""
    kind, _, args = spec.partition(":")
    params = {}
    for item in filter(None, (a.strip() for a in args.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"generator parameter {item!r} is not key=value")
        params[key.strip()] = value.strip()
    seed = int(params.pop("seed", default_seed))
    required = {"community": ("c", "s", "p_in", "k_out"), "scale-free": ("n", "m")}.get(kind)
    if required is None:
        raise ConfigError(f"unknown generator {kind!r}; use community or scale-free")
    missing = [k for k in required if k not in params]
    extra = [k for k in params if k not in required]
    if missing or extra:
        raise ConfigError(f"generator {kind!r} needs exactly {', '.join(required)} (+ optional seed)")
    try:
        if kind == "community":
            return generate_community_graph(int(params["c"]), int(params["s"]), float(params["p_in"]),
                                            int(params["k_out"]), seed)
        return generate_scale_free(int(params["n"]), int(params["m"]), seed)
    except ValueError as exc:
        raise ConfigError(f"bad generator parameters: {exc}") from None


def load_input(cfg: ExperimentConfig):
    """Returns ``(graph, load_stats_or_None)``."""
    if cfg.input is not None:
        graph, _, stats = load_edge_list(cfg.input, comment=cfg.comment, delimiter=cfg.delimiter)
        return graph, stats
    return parse_generator(cfg.generator, cfg.seed), None


def _tag(x: float) -> str:
    return format(x, "g")


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Run the pipeline for ``cfg.command`` and write CSVs plus ``manifest.json``."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    graph, stats = load_input(cfg)
    fingerprint = dataset_fingerprint(graph)
    manifest_path = out / "manifest.json"
    if cfg.resume and manifest_path.exists():
        previous = RunManifest.read(manifest_path)
        if previous.dataset != fingerprint:
            raise DataError(f"dataset does not match {manifest_path}: "
                            f"{previous.dataset} != {fingerprint}")
    try:
        files = _PIPELINES[cfg.command](cfg, graph, stats, out)
    except WeakTiesError:
        raise
    except ValueError as exc:
        raise DataError(f"{cfg.command}: {exc}") from exc
    config = cfg.as_dict()
    manifest = RunManifest(config, fingerprint, __version__,
                           {p.relative_to(out).as_posix(): body_digest(p) for p in sorted(files)})
    manifest.write(manifest_path)
    return manifest


def _load_stats(cfg, graph, stats, out):
    comps = connected_components(graph)
    deg = graph.degrees
    rows = [("nodes", graph.node_count), ("edges", graph.edge_count)]
    if stats is not None:
        rows += [("lines", stats.lines), ("comment_lines", stats.comment_lines),
                 ("edge_lines", stats.edge_lines), ("self_loops", stats.self_loops),
                 ("duplicates", stats.duplicates)]
    rows += [("components", comps.count), ("largest_component", comps.largest),
             ("max_degree", int(deg.max())), ("mean_degree", float(deg.mean()))]
    return [write_csv(out / "load_stats.csv", ("key", "value"), rows)]


def _strength(cfg, graph, stats, out):
    t = all_strengths(graph)
    raw = graph.id_map.to_raw(graph.edges)
    rows = zip(raw[:, 0].tolist(), raw[:, 1].tolist(), t.common.tolist(), t.strength.tolist(),
               t.degenerate.tolist())
    return [write_csv(out / "strength.csv", ("raw_u", "raw_v", "common_neighbors", "strength", "degenerate"),
                      rows, {"edges": graph.edge_count, "degenerate_edges": int(t.degenerate.sum())})]


def _cdf(cfg, graph, stats, out):
    t = all_strengths(graph)
    cdf = strength_cdf(t, cfg.cdf_grid)
    return [write_csv(out / "cdf.csv", ("threshold", "cdf"), zip(cfg.cdf_grid, cdf.tolist()),
                      {"edges": graph.edge_count})]


def _correlate(cfg, graph, stats, out):
    t = all_strengths(graph)
    tau = degree_strength_correlation(graph, t)
    return [write_csv(out / "correlation.csv", ("statistic", "value", "observations"),
                      [("kendall_tau_b", tau, 2 * graph.edge_count)])]


def _percolate(cfg, graph, stats, out):
    t = all_strengths(graph)
    grid = fraction_grid(cfg.grid_step)
    files = []
    for direction in cfg.order:
        order = removal_order(t, direction, cfg.seed)
        sweep = percolation_sweep(graph, order, grid, cfg.collapse_threshold)
        meta = {"direction": direction, "tie-break-seed": cfg.seed, "grid-step": cfg.grid_step,
                "collapse-threshold": cfg.collapse_threshold, "f_c_sbar": sweep.f_c_sbar,
                "f_c_gcc": sweep.f_c_gcc}
        files.append(write_csv(out / f"percolation_{direction}.csv", ("f_r", "s_bar", "f_gcc"),
                               zip(sweep.f_r.tolist(), sweep.s_bar.tolist(), sweep.f_gcc.tolist()), meta))
    return files


def _diffuse(cfg, graph, stats, out):
    t = all_strengths(graph) if any(a != 0 for a in cfg.alpha) else None
    files = []
    summary = []
    for alpha in cfg.alpha:
        for beta in cfg.beta:
            params = ModelParams(alpha, beta, cfg.tmax, cfg.epsilon)
            runs = run_replications(graph, t, params, cfg.runs, cfg.seed, cfg.threads,
                                    paired_seeds=cfg.paired_seeds)
            agg = aggregate_replications(runs)
            tag = f"alpha{_tag(alpha)}_beta{_tag(beta)}"
            meta = {"alpha": alpha, "beta": beta, "tmax": cfg.tmax or "auto", "runs": cfg.runs,
                    "base-seed": cfg.seed, "epsilon": cfg.epsilon, "paired-seeds": cfg.paired_seeds}
            files.append(write_csv(
                out / f"coverage_{tag}.csv", ("T", "C", "stderr_C", "f_pub", "stderr_f_pub", "runs"),
                zip(agg.T.tolist(), agg.mean_coverage.tolist(), agg.stderr_coverage.tolist(),
                    agg.mean_f_pub.tolist(), agg.stderr_f_pub.tolist(), [agg.runs] * len(agg.T)), meta))
            prof = pool_profiles(f_local_profile(graph, r) for r in runs)
            files.append(write_csv(
                out / f"local_{tag}.csv", ("hop", "ring_size", "published", "known", "f_local"),
                zip(prof.hops.tolist(), prof.ring_size.tolist(), prof.published.tolist(),
                    prof.known.tolist(), prof.f_local.tolist()), meta))
            if cfg.per_run:
                for r, run in enumerate(runs):
                    files.append(write_csv(
                        out / "runs" / f"coverage_{tag}_run{r:04d}.csv", ("T", "round", "C", "f_pub"),
                        zip(range(1, run.events + 1), run.rounds.tolist(), run.coverage.tolist(),
                            run.f_pub.tolist()),
                        {**meta, "replication": r, "seed-node": int(graph.id_map.to_raw(run.seed_node))}))
            mean, se = mean_stderr([r.final_coverage for r in runs])
            summary.append((alpha, beta, mean, se, cfg.runs))
    files.append(write_csv(out / "final_coverage.csv", ("alpha", "beta", "mean_C", "stderr_C", "runs"),
                           summary, {"tmax": cfg.tmax or "auto", "base-seed": cfg.seed}))
    return files


def _remove_diffuse(cfg, graph, stats, out):
    t = all_strengths(graph)
    params = ModelParams(cfg.alpha[0], cfg.beta[0], cfg.tmax or graph.node_count, cfg.epsilon)
    rows = []
    for direction in cfg.order:
        order = removal_order(t, direction, cfg.seed)
        for f in cfg.fr_grid:
            p = remove_then_diffuse(graph, t, order, f, params, cfg.runs, cfg.seed, cfg.threads)
            rows.append((p.f_r, p.direction, p.mean_coverage, p.stderr_coverage, p.runs))
    meta = {"alpha": params.alpha, "beta": params.beta, "tmax": params.t_max, "base-seed": cfg.seed}
    return [write_csv(out / "remove_diffuse.csv", ("f_r", "order", "mean_C", "stderr_C", "runs"), rows, meta)]


def _gen(cfg, graph, stats, out):
    path = out / "graph.edgelist"
    write_edge_list(graph, path)
    return [path]


_PIPELINES = {
    "load-stats": _load_stats,
    "strength": _strength,
    "cdf": _cdf,
    "correlate": _correlate,
    "percolate": _percolate,
    "diffuse": _diffuse,
    "remove-diffuse": _remove_diffuse,
    "gen": _gen,
}
