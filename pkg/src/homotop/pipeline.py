"""End-to-end workflow: channels to delay clouds to reduced clouds to diagrams to tests.

Artifacts are written under ``out_dir``::

    <set>/<channel>/<method>.embedding.csv   (+ .json sidecar)
    <set>/<channel>/<method>.diagram.csv
    <set>/<channel>/<method>.barcode.svg
    <set>/<channel>/distances_H<k>.csv
    <set>/distance_series.csv, <set>/distance_series.svg
    <set>/median_H<k>.csv, <set>/median_H<k>.txt
    tests/wmw_H<k>.csv, tests/wmw_H<k>.txt
    tests/permutation_H<k>.csv, tests/permutation_*.json   (optional)
    manifest.json
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist

from ._version import __version__
from ._validation import ComputeError, ValidationError, check_positive_int
from .complexes import maxmin_subsample, rips_filtration, distance_matrix
from .dimreduce import METHODS, Embedding, MethodParams, reduce
from .embedding import DelayParams, takens_embed
from .ingest import ChannelSet, load_bonn_segment, load_csv_matrix, select_channels
from .metrics import DistanceTable, pairwise_table
from .persistence import persistence_diagram
from .render import render
from .stats import between_set_tests, median_bottleneck_summary, permutation_test

__all__ = [
    "PipelineConfig",
    "RunManifest",
    "StageError",
    "run",
    "takens3_view",
    "sub_seed",
    "load_channel_set",
    "make_synthetic_sets",
    "process_channel",
    "DEFAULT_METHODS",
    "MAX_POINTS_ENV",
]

DEFAULT_METHODS = ("takens3",) + METHODS
MAX_POINTS_ENV = "HOMOTOP_MAX_POINTS"


class StageError(ComputeError):
    """A pipeline stage failed; carries where it happened."""

    def __init__(self, stage, set_label="", channel="", method="", cause=None):
        self.stage, self.set_label, self.channel, self.method = stage, set_label, channel, method
        where = "/".join(x for x in (set_label, channel, method) if x)
        super().__init__(f"stage {stage!r} failed at {where or 'top level'}: {cause}")


@dataclass
class PipelineConfig:
    """Every knob of :func:`run`; JSON configs use these field names verbatim."""

    inputs: dict = field(default_factory=dict)  # set label -> directory of segments or CSV file
    set_labels: list | None = None
    n_channels: int = 15
    seed: int = 0
    delay_dim: int = 12
    delay_lag: int = 1
    methods: list = field(default_factory=lambda: list(DEFAULT_METHODS))
    method_params: dict = field(default_factory=dict)  # "default" or method name -> overrides
    reduce_points: int | None = 400
    normalize: bool = True
    max_dim: int = 3
    max_points: int = 200
    max_scale: float = 0.5
    keep_zero: bool = False
    distance_dims: list = field(default_factory=lambda: [1, 2])
    metric: str = "bottleneck"
    wasserstein_p: float = 2.0
    wasserstein_root: bool = False
    wmw: bool = True
    permutation: bool = False
    perm_method: str = "takens3"
    perm_dims: list = field(default_factory=lambda: [1])
    n_perm: int = 999
    csv_orientation: str = "columns"
    sample_rate: float | None = None
    out_dir: str = "homotop_out"
    threads: int = 1

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ValidationError(f"unknown config field(s): {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self):
        return dataclasses.asdict(self)

    @property
    def labels(self):
        return list(self.set_labels) if self.set_labels is not None else list(self.inputs)

    def effective_max_points(self):
        raw = os.environ.get(MAX_POINTS_ENV)
        if raw is None or raw == "":
            return self.max_points
        try:
            return check_positive_int(int(raw), MAX_POINTS_ENV)
        except ValueError:
            raise ValidationError(f"{MAX_POINTS_ENV} must be a positive integer, got {raw!r}") from None

    def params_for(self, method):
        merged = dict(self.method_params.get("default", {}))
        merged.update(self.method_params.get(method, {}))
        merged.setdefault("n_components", 3)
        if method == "fastica":
            # periodic delay clouds contain rotation-symmetric planes where no
            # ICA direction is identifiable; keep the last iterate there
            merged.setdefault("strict", False)
        try:
            return MethodParams(**merged)
        except TypeError as exc:
            raise ValidationError(f"method params for {method}: {exc}") from None

    def validate(self):
        """Raise :class:`ValidationError` on any bad field; touches the filesystem only to stat inputs."""
        labels = self.labels
        if not labels:
            raise ValidationError("config names no input sets")
        for label in labels:
            if label not in self.inputs:
                raise ValidationError(f"set {label!r} has no input path")
            if not Path(self.inputs[label]).exists():
                raise ValidationError(f"input path for set {label!r} does not exist: "
                                      f"{self.inputs[label]}")
        check_positive_int(self.n_channels, "n_channels")
        DelayParams(self.delay_dim, self.delay_lag)
        if not self.methods:
            raise ValidationError("methods must not be empty")
        for m in self.methods:
            if m not in DEFAULT_METHODS:
                raise ValidationError(f"unknown method {m!r}; choose from {DEFAULT_METHODS}")
            self.params_for(m)
        for key in self.method_params:
            if key != "default" and key not in DEFAULT_METHODS:
                raise ValidationError(f"method_params names unknown method {key!r}")
        if len(set(self.methods)) != len(self.methods):
            raise ValidationError("methods must be unique")
        if self.reduce_points is not None:
            check_positive_int(self.reduce_points, "reduce_points", minimum=4)
        if self.max_dim not in (1, 2, 3):
            raise ValidationError("max_dim must be 1, 2 or 3")
        check_positive_int(self.effective_max_points(), "max_points", minimum=2)
        if not self.max_scale > 0:
            raise ValidationError("max_scale must be > 0")
        for k in list(self.distance_dims) + list(self.perm_dims):
            if not 0 <= int(k) <= self.max_dim - 1:
                raise ValidationError(f"homology dimension {k} outside 0..{self.max_dim - 1}")
        if self.metric not in ("bottleneck", "wasserstein"):
            raise ValidationError(f"unknown metric {self.metric!r}")
        if self.metric == "wasserstein" and not self.wasserstein_p >= 1:
            raise ValidationError("wasserstein_p must be >= 1")
        if self.permutation:
            check_positive_int(self.n_perm, "n_perm")
            if self.perm_method not in self.methods:
                raise ValidationError(f"perm_method {self.perm_method!r} is not in methods")
        if len(self.methods) < 2:
            raise ValidationError("need >= 2 methods for distance tables")
        check_positive_int(self.threads, "threads")
        return self


@dataclass
class RunManifest:
    """What a run produced; ``artifacts`` maps relative paths to sha256 digests."""

    config: dict
    version: str
    sub_seeds: dict
    artifacts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    status: str = "ok"
    error: str | None = None

    def to_json(self):
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True, default=str) + "\n"

    def verify(self, root):
        """True when every artifact exists and hashes to its recorded digest."""
        root = Path(root)
        return all((root / rel).is_file() and _sha256(root / rel) == digest
                   for rel, digest in self.artifacts.items())


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def sub_seed(master, *names):
    """Deterministic 63-bit seed for a named stream under ``master``."""
    blob = json.dumps([int(master)] + [str(n) for n in names]).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") >> 1


def takens3_view(series, lag=1):
    """The raw first-three-delay-coordinates view ``(x(t), x(t-lag), x(t-2 lag))``."""
    coords = takens_embed(series, DelayParams(3, lag))
    if coords.shape[0] > 1 and np.ptp(coords, axis=0).max() == 0:
        warnings.warn("delay cloud is a single repeated point (degenerate for Rips)",
                      RuntimeWarning, stacklevel=2)
    return Embedding(coords, "takens3", {"dim": 3, "lag": int(lag)})


def load_channel_set(path, label, orientation="columns", rate=None):
    """A directory of single-channel text segments, or one CSV matrix."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.is_file() and p.suffix.lower() == ".txt")
        if not files:
            raise ValidationError(f"{path}: no .txt segments found")
        kwargs = {} if rate is None else {"rate": rate}
        return ChannelSet(tuple(load_bonn_segment(f, **kwargs) for f in files), set_label=label)
    return load_csv_matrix(path, orientation, rate or 1.0, set_label=label)


def _unit_diameter(coords):
    if coords.shape[0] < 2:
        return coords
    diam = float(pdist(coords).max())
    if diam == 0:
        warnings.warn("embedding collapsed to a point; left unscaled", RuntimeWarning, stacklevel=3)
        return coords
    return coords / diam


def _diagram(coords, cfg, max_points):
    X = coords
    if X.shape[0] > max_points:
        X = X[maxmin_subsample(X, max_points)]
    fc = rips_filtration(distance_matrix(X), cfg.max_dim, cfg.max_scale)
    dgm = persistence_diagram(fc, cfg.max_dim - 1, cfg.keep_zero)
    # classes alive at the cut-off are known only to outlive it
    return dgm.cap_essential(cfg.max_scale)


def _channel_clouds(series, cfg):
    """Delay cloud rows fed to the reducers and the matching 3-D delay view.

    Both are restricted to the same time points: 12-D row ``k`` and 3-D
    row ``k + (dim - 3) lag`` end at the same sample.
    """
    cloud = takens_embed(series, DelayParams(cfg.delay_dim, cfg.delay_lag))
    rows = np.arange(cloud.shape[0])
    if cfg.reduce_points is not None and cloud.shape[0] > cfg.reduce_points:
        rows = maxmin_subsample(cloud, cfg.reduce_points)
    view = takens3_view(series, cfg.delay_lag)
    shift = (cfg.delay_dim - 3) * cfg.delay_lag
    return cloud[rows], Embedding(view.coords[rows + shift], "takens3", view.params)


def process_channel(series, cfg, set_label, out_dir, max_points):
    """All methods for one channel; writes embedding, diagram and barcode files.

    Returns ``{method: PersistenceDiagram}`` and per-method timings.
    """
    folder = Path(out_dir) / set_label / series.label
    folder.mkdir(parents=True, exist_ok=True)
    diagrams, timings = {}, {}
    stage, method = "embed", ""
    try:
        cloud, view = _channel_clouds(series, cfg)
        for method in cfg.methods:
            t0 = time.perf_counter()
            stage = "reduce"
            if method == "takens3":
                emb = view
            else:
                emb = reduce(cloud, method, cfg.params_for(method),
                             sub_seed(cfg.seed, method, set_label, series.label))
            emb.to_csv(folder / f"{method}.embedding.csv")
            stage = "persist"
            coords = _unit_diameter(emb.coords) if cfg.normalize else emb.coords
            dgm = _diagram(coords, cfg, max_points)
            dgm.to_csv(folder / f"{method}.diagram.csv")
            stage = "plot"
            render("barcode", dgm, folder / f"{method}.barcode.svg", cap=cfg.max_scale,
                   title=f"{set_label} {series.label} {method}")
            diagrams[method] = dgm
            timings[method] = time.perf_counter() - t0
    except Exception as exc:  # noqa: BLE001 - rewrapped with context
        raise StageError(stage, set_label, series.label, method, exc) from exc
    return diagrams, timings


def _channel_task(args):
    series, cfg, set_label, out_dir, max_points = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return process_channel(series, cfg, set_label, out_dir, max_points)


def _write_text(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _series_csv(per_channel):
    """Long-format CSV of every channel's table cells plus the plotted per-channel median."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["channel_index", "channel", "dim", "row", "col", "distance"])
    for idx, (channel, tables) in enumerate(per_channel, start=1):
        for table in tables:
            for a, b, v in table.cells():
                writer.writerow([idx, channel, table.dim, a, b, repr(v)])
            writer.writerow([idx, channel, table.dim, "median", "median",
                             repr(float(np.median([v for _, _, v in table.cells()])))])
    return buf.getvalue()


def make_synthetic_sets(out_dir, n_sets=5, n_channels=15, n_samples=300, seed=0):
    """Write ``n_sets`` CSV matrices of sine-plus-noise channels; returns ``{label: path}``.

    Set ``k`` mixes two sines whose frequency ratio and noise level depend on ``k``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = [chr(ord("A") + k) for k in range(n_sets)]
    t = np.arange(n_samples)
    paths = {}
    for k, label in enumerate(labels):
        rng = np.random.default_rng(sub_seed(seed, "synthetic", label))
        cols = []
        for _ in range(n_channels):
            f1 = 2 * np.pi / (25 + 3 * k + rng.uniform(-1, 1))
            phase = rng.uniform(0, 2 * np.pi)
            x = np.sin(f1 * t + phase) + 0.3 * k / n_sets * np.sin(2.7 * f1 * t)
            cols.append(x + (0.05 + 0.05 * k) * rng.standard_normal(n_samples))
        M = np.column_stack(cols)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"ch{j:02d}" for j in range(n_channels)])
        for row in M:
            writer.writerow([repr(float(v)) for v in row])
        paths[label] = str(out_dir / f"set_{label}.csv")
        Path(paths[label]).write_text(buf.getvalue(), encoding="utf-8")
    return paths


def run(config):
    """Execute the whole workflow; returns the :class:`RunManifest` (also written to disk)."""
    cfg = config if isinstance(config, PipelineConfig) else PipelineConfig.from_dict(dict(config))
    cfg.validate()
    max_points = cfg.effective_max_points()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = cfg.labels
    echo = cfg.to_dict()
    echo["max_points_effective"] = max_points
    seeds = {f"channels:{s}": sub_seed(cfg.seed, "channels", s) for s in labels}
    manifest = RunManifest(echo, __version__, seeds)
    written = []

    def emit(rel, text):
        _write_text(out / rel, text)
        written.append(rel)

    try:
        t0 = time.perf_counter()
        sets = {}
        for s in labels:
            try:
                full = load_channel_set(cfg.inputs[s], s, cfg.csv_orientation, cfg.sample_rate)
                sets[s] = select_channels(full, cfg.n_channels, seeds[f"channels:{s}"])
            except ValidationError:
                raise
            except Exception as exc:  # noqa: BLE001
                raise StageError("ingest", s, cause=exc) from exc
        manifest.timings["ingest"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        tasks = [(series, cfg, s, str(out), max_points) for s in labels for series in sets[s]]
        for s in labels:
            for series in sets[s]:
                for m in cfg.methods:
                    if m not in ("takens3", "krr"):
                        manifest.sub_seeds[f"{m}:{s}:{series.label}"] = sub_seed(
                            cfg.seed, m, s, series.label)
        if cfg.threads > 1:
            with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
                results = ex.map(_channel_task, tasks)
        else:
            results = map(_channel_task, tasks)
        diagrams = {}
        for (series, _, s, _, _), (dgms, times) in zip(tasks, results):
            diagrams[(s, series.label)] = dgms
            folder = f"{s}/{series.label}"
            for m in cfg.methods:
                written.extend([f"{folder}/{m}.embedding.csv", f"{folder}/{m}.embedding.json",
                                f"{folder}/{m}.diagram.csv", f"{folder}/{m}.barcode.svg"])
        manifest.timings["channels"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        per_set_tables = {s: {k: [] for k in cfg.distance_dims} for s in labels}
        for s in labels:
            per_channel = []
            for series in sets[s]:
                dgms = diagrams[(s, series.label)]
                labelled = [(m, dgms[m]) for m in cfg.methods]
                tables = []
                for k in cfg.distance_dims:
                    try:
                        table = pairwise_table(labelled, k, cfg.metric, cfg.wasserstein_p,
                                               cfg.wasserstein_root)
                    except Exception as exc:  # noqa: BLE001
                        raise StageError("dist", s, series.label, cause=exc) from exc
                    emit(f"{s}/{series.label}/distances_H{k}.csv", table.to_csv())
                    tables.append(table)
                    per_set_tables[s][k].append(table)
                per_channel.append((series.label, tables))
            emit(f"{s}/distance_series.csv", _series_csv(per_channel))
            medians_by_dim = {k: [float(np.median([v for _, _, v in t.cells()]))
                                  for _, ts in per_channel for t in ts if t.dim == k]
                              for k in cfg.distance_dims}
            emit(f"{s}/distance_series.svg",
                 render("distance_series", medians_by_dim, title=f"set {s}: median distance"))
            for k in cfg.distance_dims:
                med = median_bottleneck_summary(per_set_tables[s][k])
                emit(f"{s}/median_H{k}.csv", med.to_csv())
                emit(f"{s}/median_H{k}.txt", med.pretty())
        manifest.timings["distances"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        if cfg.wmw and len(labels) >= 2:
            for k in cfg.distance_dims:
                ptable, _ = between_set_tests({s: per_set_tables[s][k] for s in labels})
                emit(f"tests/wmw_H{k}.csv", ptable.to_csv())
                emit(f"tests/wmw_H{k}.txt", ptable.pretty(digits=4))
        if cfg.permutation and len(labels) >= 2:
            for k in cfg.perm_dims:
                P = np.zeros((len(labels), len(labels)))
                for i, a in enumerate(labels):
                    for j, b in enumerate(labels[:i]):
                        name = f"perm:{k}:{a}:{b}"
                        manifest.sub_seeds[name] = sub_seed(cfg.seed, "perm", k, a, b)
                        rep = permutation_test(
                            [diagrams[(a, x.label)][cfg.perm_method] for x in sets[a]],
                            [diagrams[(b, x.label)][cfg.perm_method] for x in sets[b]],
                            k, cfg.n_perm, manifest.sub_seeds[name], labels=(a, b),
                            n_jobs=cfg.threads)
                        P[i, j] = P[j, i] = rep.p_value
                        emit(f"tests/permutation_H{k}_{a}_{b}.json", rep.to_json())
                table = DistanceTable(tuple(labels), P, k, "permutation-p-value")
                emit(f"tests/permutation_H{k}.csv", table.to_csv())
        manifest.timings["tests"] = time.perf_counter() - t0
    except Exception as exc:
        manifest.status, manifest.error = "failed", str(exc)
        raise
    finally:
        if manifest.status == "failed":
            # keep whatever partial output exists, flagged by the failed status
            written = sorted({*written, *(p.relative_to(out).as_posix() for p in out.rglob("*")
                                          if p.is_file() and p.name != "manifest.json")})
        for rel in written:
            if (out / rel).is_file():
                manifest.artifacts[rel] = _sha256(out / rel)
        (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest
