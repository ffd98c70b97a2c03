"""Run configuration: one TOML schema covering every pipeline stage.

Unknown keys are rejected and all constraint violations are reported in a
single error. The same structure round-trips through serialize_config, so
a run's manifest can be replayed verbatim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import tomli

from .augmentation import MODES, POSITIONS, ViewConfig
from .engine import TrainConfig
from .evaluation import EvalConfig

SCORERS = ("gcl", "variance-stub")


class ConfigError(ValueError):
    """Aggregated configuration problems, one line per violation."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__(
            "invalid configuration:\n  " + "\n  ".join(self.problems)
        )


@dataclass(frozen=True)
class DatasetPaths:
    edges: str
    features: str
    labels: str | None = None
    ranking: str | None = None


@dataclass(frozen=True)
class RankingSettings:
    epochs: int = 150
    rounds: int = 3
    scorer: str = "gcl"


@dataclass(frozen=True)
class SweepSettings:
    ratios: tuple = (0.25, 0.5)
    probabilities: tuple = (0.5, 1.0)
    positions: tuple = ("L", "M")
    runs_per_cell: int = 1


@dataclass(frozen=True)
class RunConfig:
    seed: int
    dataset: DatasetPaths
    train: TrainConfig
    ranking: RankingSettings
    evaluation: EvalConfig
    sweep: SweepSettings


def _check_keys(section: str, data: dict, allowed: tuple, problems: list[str]):
    for key in data:
        if key not in allowed:
            problems.append(f"{section}: unknown key {key!r}")


def _get(data, key, kind, problems, section, default=None, required=False):
    if key not in data:
        if required:
            problems.append(f"{section}.{key}: required key missing")
        return default
    value = data[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        problems.append(f"{section}.{key}: expected {kind.__name__}, got {value!r}")
        return default
    return value


def _parse_view(section: str, data: dict, problems: list[str]) -> ViewConfig:
    allowed = (
        "selection_mode",
        "feature_masking_ratio",
        "feature_masking_probability",
        "starting_position",
        "edge_drop_probability",
        "rng_seed",
    )
    _check_keys(section, data, allowed, problems)
    mode = _get(data, "selection_mode", str, problems, section, default="all_features")
    ratio = _get(data, "feature_masking_ratio", float, problems, section, default=1.0)
    prob = _get(
        data, "feature_masking_probability", float, problems, section, default=0.0
    )
    pos = _get(data, "starting_position", str, problems, section, default=None)
    p_e = _get(data, "edge_drop_probability", float, problems, section, default=0.0)
    rng_seed = _get(data, "rng_seed", int, problems, section, default=0)

    if mode not in MODES:
        problems.append(f"{section}.selection_mode: must be one of {MODES}, got {mode!r}")
        mode = "all_features"
        pos = None
    for name, value in (
        ("feature_masking_ratio", ratio),
        ("feature_masking_probability", prob),
        ("edge_drop_probability", p_e),
    ):
        if not 0.0 <= value <= 1.0:
            problems.append(f"{section}.{name}: must be in [0, 1], got {value}")
    if mode == "influential" and pos not in POSITIONS:
        problems.append(
            f"{section}.starting_position: required ('L' or 'M') for influential mode"
        )
    if mode != "influential" and pos is not None:
        problems.append(
            f"{section}.starting_position: only valid for influential mode"
        )
    try:
        return ViewConfig(
            selection_mode=mode,
            feature_masking_ratio=min(max(ratio, 0.0), 1.0),
            feature_masking_probability=min(max(prob, 0.0), 1.0),
            starting_position=pos if mode == "influential" else None,
            edge_drop_probability=min(max(p_e, 0.0), 1.0),
            rng_seed=max(rng_seed, 0),
        )
    except ValueError:
        return ViewConfig()


def parse_config(path: str | Path) -> RunConfig:
    """Load, validate, and resolve a run configuration file."""
    path = Path(path)
    with open(path, "rb") as f:
        try:
            data = tomli.load(f)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError([f"{path}: {exc}"]) from None
    return config_from_dict(data)


def config_from_dict(data: dict) -> RunConfig:
    problems: list[str] = []
    _check_keys(
        "config",
        data,
        ("seed", "dataset", "view1", "view2", "train", "ranking", "eval", "sweep"),
        problems,
    )

    seed = _get(data, "seed", int, problems, "config", default=0)
    if seed < 0:
        problems.append(f"config.seed: must be non-negative, got {seed}")
        seed = 0

    ds = data.get("dataset", {})
    _check_keys("dataset", ds, ("edges", "features", "labels", "ranking"), problems)
    dataset = DatasetPaths(
        edges=_get(ds, "edges", str, problems, "dataset", default="", required=True),
        features=_get(
            ds, "features", str, problems, "dataset", default="", required=True
        ),
        labels=_get(ds, "labels", str, problems, "dataset"),
        ranking=_get(ds, "ranking", str, problems, "dataset"),
    )

    view1 = _parse_view("view1", data.get("view1", {}), problems)
    view2 = _parse_view("view2", data.get("view2", {}), problems)

    tr = data.get("train", {})
    allowed = (
        "epochs",
        "learning_rate",
        "weight_decay",
        "hidden_size",
        "output_size",
        "temperature",
    )
    _check_keys("train", tr, allowed, problems)
    epochs = _get(tr, "epochs", int, problems, "train", default=200)
    lr = _get(tr, "learning_rate", float, problems, "train", default=0.01)
    wd = _get(tr, "weight_decay", float, problems, "train", default=1e-5)
    hidden = _get(tr, "hidden_size", int, problems, "train", default=64)
    out_size = _get(tr, "output_size", int, problems, "train", default=32)
    temp = _get(tr, "temperature", float, problems, "train", default=0.5)
    if epochs < 1:
        problems.append(f"train.epochs: must be >= 1, got {epochs}")
    if lr <= 0:
        problems.append(f"train.learning_rate: must be positive, got {lr}")
    if wd < 0:
        problems.append(f"train.weight_decay: must be non-negative, got {wd}")
    if hidden < 1 or out_size < 1:
        problems.append("train.hidden_size / train.output_size: must be >= 1")
    if temp <= 0:
        problems.append(f"train.temperature: must be positive, got {temp}")

    rk = data.get("ranking", {})
    _check_keys("ranking", rk, ("epochs", "rounds", "scorer"), problems)
    rank_epochs = _get(rk, "epochs", int, problems, "ranking", default=150)
    rank_rounds = _get(rk, "rounds", int, problems, "ranking", default=3)
    scorer = _get(rk, "scorer", str, problems, "ranking", default="gcl")
    if rank_epochs < 1 or rank_rounds < 1:
        problems.append("ranking.epochs / ranking.rounds: must be >= 1")
    if scorer not in SCORERS:
        problems.append(f"ranking.scorer: must be one of {SCORERS}, got {scorer!r}")

    ev = data.get("eval", {})
    _check_keys(
        "eval",
        ev,
        ("n_splits", "train_fraction", "l2", "iters", "learning_rate"),
        problems,
    )
    n_splits = _get(ev, "n_splits", int, problems, "eval", default=20)
    train_fraction = _get(ev, "train_fraction", float, problems, "eval", default=0.1)
    l2 = _get(ev, "l2", float, problems, "eval", default=1e-2)
    eval_iters = _get(ev, "iters", int, problems, "eval", default=500)
    eval_lr = _get(ev, "learning_rate", float, problems, "eval", default=0.5)
    if n_splits < 1:
        problems.append(f"eval.n_splits: must be >= 1, got {n_splits}")
    if not 0.0 < train_fraction < 1.0:
        problems.append(
            f"eval.train_fraction: must be in (0, 1), got {train_fraction}"
        )
    if l2 < 0:
        problems.append(f"eval.l2: must be non-negative, got {l2}")
    if eval_iters < 1 or eval_lr <= 0:
        problems.append("eval.iters must be >= 1 and eval.learning_rate positive")

    sw = data.get("sweep", {})
    _check_keys(
        "sweep", sw, ("ratios", "probabilities", "positions", "runs_per_cell"), problems
    )
    ratios = tuple(sw.get("ratios", (0.25, 0.5)))
    probabilities = tuple(sw.get("probabilities", (0.5, 1.0)))
    positions = tuple(sw.get("positions", ("L", "M")))
    runs_per_cell = _get(sw, "runs_per_cell", int, problems, "sweep", default=1)
    for name, values in (("ratios", ratios), ("probabilities", probabilities)):
        if not values:
            problems.append(f"sweep.{name}: must be non-empty")
        for v in values:
            if not isinstance(v, (int, float)) or not 0.0 <= float(v) <= 1.0:
                problems.append(f"sweep.{name}: values must be in [0, 1], got {v!r}")
    if not positions or any(p not in POSITIONS for p in positions):
        problems.append(f"sweep.positions: must be drawn from {POSITIONS}")
    if runs_per_cell < 1:
        problems.append(f"sweep.runs_per_cell: must be >= 1, got {runs_per_cell}")

    influential = [
        name
        for name, v in (("view1", view1), ("view2", view2))
        if v.selection_mode == "influential"
    ]
    if influential and dataset.ranking is None:
        problems.append(
            f"dataset.ranking: ranking required ({' and '.join(influential)} use "
            "influential selection)"
        )

    if problems:
        raise ConfigError(problems)

    train_cfg = TrainConfig(
        epochs=epochs,
        learning_rate=lr,
        weight_decay=wd,
        hidden_size=hidden,
        output_size=out_size,
        temperature=temp,
        view1=view1,
        view2=view2,
        seed=seed,
    )
    return RunConfig(
        seed=seed,
        dataset=dataset,
        train=train_cfg,
        ranking=RankingSettings(
            epochs=rank_epochs, rounds=rank_rounds, scorer=scorer
        ),
        evaluation=EvalConfig(
            n_splits=n_splits,
            train_fraction=train_fraction,
            l2=l2,
            iters=eval_iters,
            learning_rate=eval_lr,
        ),
        sweep=SweepSettings(
            ratios=tuple(float(r) for r in ratios),
            probabilities=tuple(float(p) for p in probabilities),
            positions=positions,
            runs_per_cell=runs_per_cell,
        ),
    )


def config_to_dict(cfg: RunConfig) -> dict:
    """Plain nested dict of the resolved config (manifest / hashing form)."""
    def view_dict(v: ViewConfig) -> dict:
        d = {
            "selection_mode": v.selection_mode,
            "feature_masking_ratio": v.feature_masking_ratio,
            "feature_masking_probability": v.feature_masking_probability,
            "edge_drop_probability": v.edge_drop_probability,
            "rng_seed": v.rng_seed,
        }
        if v.starting_position is not None:
            d["starting_position"] = v.starting_position
        return d

    data = {
        "seed": cfg.seed,
        "dataset": {"edges": cfg.dataset.edges, "features": cfg.dataset.features},
        "view1": view_dict(cfg.train.view1),
        "view2": view_dict(cfg.train.view2),
        "train": {
            "epochs": cfg.train.epochs,
            "learning_rate": cfg.train.learning_rate,
            "weight_decay": cfg.train.weight_decay,
            "hidden_size": cfg.train.hidden_size,
            "output_size": cfg.train.output_size,
            "temperature": cfg.train.temperature,
        },
        "ranking": {
            "epochs": cfg.ranking.epochs,
            "rounds": cfg.ranking.rounds,
            "scorer": cfg.ranking.scorer,
        },
        "eval": {
            "n_splits": cfg.evaluation.n_splits,
            "train_fraction": cfg.evaluation.train_fraction,
            "l2": cfg.evaluation.l2,
            "iters": cfg.evaluation.iters,
            "learning_rate": cfg.evaluation.learning_rate,
        },
        "sweep": {
            "ratios": list(cfg.sweep.ratios),
            "probabilities": list(cfg.sweep.probabilities),
            "positions": list(cfg.sweep.positions),
            "runs_per_cell": cfg.sweep.runs_per_cell,
        },
    }
    if cfg.dataset.labels is not None:
        data["dataset"]["labels"] = cfg.dataset.labels
    if cfg.dataset.ranking is not None:
        data["dataset"]["ranking"] = cfg.dataset.ranking
    return data


def _toml_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def serialize_config(cfg: RunConfig) -> str:
    """Emit the config as TOML; parsing the result yields an equal config."""
    data = config_to_dict(cfg)
    lines = [f"seed = {_toml_scalar(data['seed'])}", ""]
    for section, body in data.items():
        if section == "seed":
            continue
        lines.append(f"[{section}]")
        for key, value in body.items():
            lines.append(f"{key} = {_toml_scalar(value)}")
        lines.append("")
    return "\n".join(lines)


def config_hash(cfg: RunConfig) -> str:
    import hashlib

    blob = json.dumps(config_to_dict(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:10]
