"""End-to-end embedding pipeline and its on-disk artifact bundle."""

from __future__ import annotations

import dataclasses
import json
import platform
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from ._errors import IsumapError, InvalidParameterError
from .cluster import Linkage, SeparationConfig, linkage_clusters, medoids, separate_clusters
from .datasets import generate_dataset
from .embed import Embedding, classical_mds, metric_mds_sgd, raw_stress, repair_infinite
from .fuzzy import get_tconorm
from .geodesic import t_combine
from .io import (
    read_labels_csv,
    read_points_csv,
    write_distance_binary,
    write_distance_csv,
    write_embedding_csv,
    write_json,
    write_labels_csv,
    write_points_csv,
)
from .metric import Fill, Mode, RhoMode, SigmaMode, knn_graph, local_metrics
from .plots import paths_svg, scatter_svg

__all__ = ["PipelineConfig", "PipelineResult", "StageError", "load_config", "embed_points", "run_pipeline"]


class StageError(IsumapError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    """Resolved run parameters.  Defaults reproduce the uniformizing preset
    (no offset, k-th neighbour scale, max t-conorm, classical MDS)."""

    input: Optional[str] = None
    generate: Optional[str] = None
    n: int = 1000
    k: int = 15
    tconorm: str = "max"
    rho: str = "zero"
    sigma: str = "knn"
    fill: str = "none"
    mode: str = "um"
    dim: int = 2
    mds: str = "cmds"
    epochs: int = 50
    batch_size: int = 256
    mds_lr: float = 0.5
    clusters: int = 0
    linkage: str = "average"
    labels: Optional[str] = None
    alpha: float = 1.0
    beta: float = 0.0
    iters: int = 200
    lr: float = 0.05
    sample_fraction: float = 1.0
    rotation: bool = False
    seed: int = 0
    metric: str = "euclidean"
    out: str = "isumap_out"
    generator_params: dict = field(default_factory=dict)

    def validate(self):
        try:
            get_tconorm(self.tconorm)
            RhoMode(self.rho)
            SigmaMode(self.sigma)
            Fill(self.fill)
            Mode(self.mode)
            Linkage(self.linkage)
        except ValueError as exc:
            raise InvalidParameterError(str(exc)) from None
        if self.mds not in ("cmds", "cmds+sgd"):
            raise InvalidParameterError(f"mds must be 'cmds' or 'cmds+sgd', got {self.mds!r}")
        if (self.input is None) == (self.generate is None):
            raise InvalidParameterError("exactly one of input or generate is required")
        if self.k < 1 or self.dim < 1 or self.clusters < 0 or self.iters < 0:
            raise InvalidParameterError("k and dim must be positive; clusters and iters non-negative")
        if self.generate is not None and self.k >= self.n:
            raise InvalidParameterError(f"k={self.k} must be below n={self.n}")
        if self.cluster_step and self.dim != 2:
            raise InvalidParameterError("the cluster step needs dim = 2")
        return self

    @property
    def cluster_step(self):
        return self.clusters > 0 or self.labels is not None

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, values):
        names = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, val in values.items():
            key = key.replace("-", "_")
            if key not in names:
                raise InvalidParameterError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(names[key], val)
        return cls(**kwargs)


def _coerce(f, val):
    if isinstance(val, str):
        default = f.default if f.default is not dataclasses.MISSING else None
        if val.lower() in ("none", "") and default is None:
            return None
        if isinstance(default, bool):
            return val.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(val)
        if isinstance(default, float):
            return float(val)
        if f.name == "generator_params":
            return json.loads(val)
    return val


def load_config(path):
    """Read a ``key = value`` config file, or the config stored in a run manifest."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        return PipelineConfig.from_dict(obj.get("config", obj))
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key] = val
    return PipelineConfig.from_dict(values)


@dataclass
class PipelineResult:
    points: np.ndarray
    color: Optional[np.ndarray]
    distances: np.ndarray
    embedding: Embedding
    stress_history: list
    labels: Optional[np.ndarray] = None
    state: object = None
    warnings: list = field(default_factory=list)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # noqa: BLE001 - re-raised with stage context
        raise StageError(name, exc) from exc


def embed_points(points, config: PipelineConfig, *, labels=None, color=None, progress=None) -> PipelineResult:
    """Run every stage on an in-memory point cloud."""
    cfg = config
    log = progress or (lambda *_: None)
    partial = {}
    try:
        return _embed(points, cfg, labels, color, log, partial)
    except StageError as exc:
        exc.partial = partial
        raise


def _embed(points, cfg, labels, color, log, partial):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        log("knn")
        nb = _stage("knn", knn_graph, points, cfg.k, cfg.metric)
        fam = _stage(
            "local_metrics", local_metrics, nb, cfg.rho, cfg.sigma, cfg.fill,
            points if Fill(cfg.fill) is Fill.AMBIENT else None,
        )
        log("t_combine")
        space = _stage("t_combine", t_combine, fam, get_tconorm(cfg.tconorm), cfg.mode)
        partial["distances"] = space.dist
        table, _ = repair_infinite(space.dist)
        log("cmds")
        emb = _stage("cmds", classical_mds, table, cfg.dim, seed=cfg.seed)
        history = [raw_stress(table, emb.coords)]
        partial["embedding"] = emb
        if cfg.mds == "cmds+sgd":
            log("mmds")
            emb = _stage(
                "mmds", metric_mds_sgd, table, emb, cfg.epochs, cfg.batch_size, cfg.mds_lr, cfg.seed
            )
            history = emb.diagnostics["stress_history"]
        state = None
        if cfg.cluster_step or labels is not None:
            log("cluster")
            if labels is None:
                labels = _stage("linkage", linkage_clusters, table, cfg.clusters, cfg.linkage)
            model = _stage("medoids", medoids, table, labels)
            sep_cfg = SeparationConfig(
                iterations=cfg.iters,
                learning_rate=cfg.lr,
                alpha=cfg.alpha,
                beta=cfg.beta,
                sample_fraction=cfg.sample_fraction,
                use_rotation=cfg.rotation,
                seed=cfg.seed,
            )
            emb, state = _stage("separate", separate_clusters, emb, model, sep_cfg)
    return PipelineResult(
        points=np.asarray(points),
        color=color,
        distances=space.dist,
        embedding=emb,
        stress_history=[float(v) for v in history],
        labels=None if labels is None else np.asarray(labels),
        state=state,
        warnings=[str(w.message) for w in caught],
    )


def _load_points(cfg):
    if cfg.generate is not None:
        x, color = generate_dataset(cfg.generate, cfg.n, seed=cfg.seed, **cfg.generator_params)
        return x, color
    x, _ = read_points_csv(cfg.input)
    return x, None


def run_pipeline(config: PipelineConfig, *, progress=None) -> PipelineResult:
    """Execute the pipeline and write the artifact bundle to ``config.out``.

    Written files: ``distances.csv``, ``distances.isud``, ``embedding.csv``,
    ``stress.json``, ``manifest.json``, ``scatter.svg`` and, with the
    cluster step, ``trace.json``, ``labels.csv`` and ``paths.svg``.  On a
    stage failure the manifest records ``status: FAILED`` and the stage
    name, and the :class:`StageError` propagates.  A neighbour count not
    below the number of loaded points raises :class:`InvalidParameterError`.
    """
    cfg = config.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "status": "RUNNING",
        "config": cfg.to_dict(),
        "versions": _versions(),
    }
    if cfg.generate is not None:
        manifest["generator"] = {"name": cfg.generate, "n": cfg.n, "seed": cfg.seed, **_generator_defaults(cfg)}
    try:
        x, color = _stage("load", _load_points, cfg)
        if cfg.generate is not None:
            write_points_csv(out / "points.csv", x, color)
        labels = None
        if cfg.labels is not None:
            labels = _stage("labels", read_labels_csv, cfg.labels)
            if labels.shape[0] != x.shape[0]:
                raise StageError("labels", f"{labels.shape[0]} labels for {x.shape[0]} points")
        if cfg.k >= x.shape[0]:
            raise InvalidParameterError(f"k={cfg.k} must be below n={x.shape[0]}")
        res = embed_points(x, cfg, labels=labels, color=color, progress=progress)
    except InvalidParameterError as exc:
        manifest.update(status="FAILED", failed_stage="load", error=str(exc))
        write_json(out / "manifest.json", manifest)
        raise
    except StageError as exc:
        partial = getattr(exc, "partial", {})
        if "distances" in partial:
            write_distance_csv(out / "distances.csv", partial["distances"])
            write_distance_binary(out / "distances.isud", partial["distances"])
        if "embedding" in partial:
            write_embedding_csv(out / "embedding.csv", partial["embedding"].coords)
        manifest.update(status="FAILED", failed_stage=exc.stage, error=str(exc.cause))
        write_json(out / "manifest.json", manifest)
        raise
    write_distance_csv(out / "distances.csv", res.distances)
    write_distance_binary(out / "distances.isud", res.distances)
    write_embedding_csv(out / "embedding.csv", res.embedding.coords, res.labels)
    write_json(out / "stress.json", res.stress_history)
    plot_color = res.labels if res.labels is not None else color
    scatter_svg(out / "scatter.svg", res.embedding.coords, plot_color, title="embedding")
    if res.state is not None:
        write_json(out / "trace.json", res.state.trace)
        write_labels_csv(out / "labels.csv", res.labels)
        paths_svg(
            out / "paths.svg", res.embedding.coords, res.labels, res.state.trace,
            hulls=res.state.hulls, title="Cluster separation paths",
        )
    manifest.update(
        status="OK",
        n_points=int(x.shape[0]),
        warnings=res.warnings,
        embedding_diagnostics=_jsonable(res.embedding.diagnostics),
    )
    write_json(out / "manifest.json", manifest)
    return res


def _generator_defaults(cfg):
    from .datasets import SWISS_HEIGHT, SWISS_HOLE_HEIGHT, SWISS_HOLE_T, SWISS_T

    name = cfg.generate.lower()
    params = dict(cfg.generator_params)
    if name in ("swisshole", "swiss_hole"):
        params.setdefault("t_range", list(SWISS_T))
        params.setdefault("height_range", list(SWISS_HEIGHT))
        params.setdefault("hole_t", list(SWISS_HOLE_T))
        params.setdefault("hole_height", list(SWISS_HOLE_HEIGHT))
    elif name == "torus":
        params.setdefault("R", 2.0)
        params.setdefault("r", 0.7)
    return {"params": params}


def _versions():
    import numba
    import scipy

    return {
        "isumap": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "python": platform.python_version(),
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items() if k != "stress_history"}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj
