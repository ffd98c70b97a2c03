"""Grid sweeps over masking ratio, masking probability, and starting position.

Each grid cell retrains and re-evaluates the pipeline runs_per_cell times
with seeds derived from (sweep seed, cell index, run index). On top of the
raw table: L-vs-M win counting per matched (ratio, probability) pair and
the only-feature-dropping ablation that reruns the identical pipeline with
edge dropping disabled on both views.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .augmentation import ViewConfig
from .engine import TrainConfig, train
from .evaluation import EvalConfig, generate_splits, linear_evaluate
from .graph import AttributedGraph
from .ranking import FeatureRanking
from .rng import NS_SWEEP, derive_seed
from .util import fmt_float

SWEEP_CSV_HEADER = "ratio,probability,pos,mean_f1,std_f1,runs"
PLOT_CSV_HEADER = "ratio,probability,mean_f1"


@dataclass(frozen=True)
class SweepGrid:
    ratios: tuple
    probabilities: tuple
    positions: tuple
    runs_per_cell: int
    base_train: TrainConfig
    evaluation: EvalConfig = field(default_factory=EvalConfig)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        object.__setattr__(
            self, "probabilities", tuple(float(p) for p in self.probabilities)
        )
        object.__setattr__(self, "positions", tuple(self.positions))
        if not (self.ratios and self.probabilities and self.positions):
            raise ValueError("sweep grid must be non-empty on every axis")
        for v in self.ratios + self.probabilities:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"grid values must lie in [0, 1], got {v}")
        if any(p not in ("L", "M") for p in self.positions):
            raise ValueError("positions must be drawn from {'L', 'M'}")
        if self.runs_per_cell < 1:
            raise ValueError("runs_per_cell must be >= 1")

    @property
    def cells(self) -> list:
        return list(
            itertools.product(self.ratios, self.probabilities, self.positions)
        )


@dataclass(frozen=True)
class SweepCell:
    ratio: float
    probability: float
    pos: str
    mean_f1: float
    std_f1: float
    runs: int
    per_run_scores: tuple


@dataclass(frozen=True)
class SweepTable:
    rows: tuple
    failures: tuple = ()


@dataclass(frozen=True)
class PosWinCounts:
    l_wins: int
    m_wins: int

    @property
    def pairs(self) -> int:
        return self.l_wins + self.m_wins


@dataclass(frozen=True)
class AblationArm:
    label: str
    mean_f1: float
    std_f1: float
    per_run_scores: tuple

    def summary(self) -> str:
        return f"{self.mean_f1:.2f}±{self.std_f1:.2f}"


@dataclass(frozen=True)
class AblationResult:
    with_edge_drop: AblationArm
    feature_only: AblationArm


def _cell_config(grid: SweepGrid, ratio: float, prob: float, pos: str, seed: int):
    """View 2 becomes the influential view under test; view 1 stays as configured."""
    swept_view = ViewConfig(
        selection_mode="influential",
        feature_masking_ratio=ratio,
        feature_masking_probability=prob,
        starting_position=pos,
        edge_drop_probability=grid.base_train.view2.edge_drop_probability,
    )
    return replace(grid.base_train, view2=swept_view, seed=seed)


def _run_once(
    graph: AttributedGraph,
    ranking: FeatureRanking | None,
    cfg: TrainConfig,
    eval_cfg: EvalConfig,
    split_seed: int,
) -> float:
    result = train(graph, ranking, cfg)
    splits = generate_splits(
        graph.num_nodes, eval_cfg.train_fraction, eval_cfg.n_splits, split_seed
    )
    outcome = linear_evaluate(
        result.embedding,
        graph.labels,
        splits,
        eval_cfg.l2,
        iters=eval_cfg.iters,
        learning_rate=eval_cfg.learning_rate,
    )
    return outcome.mean_f1


def run_sweep(
    graph: AttributedGraph, ranking: FeatureRanking, grid: SweepGrid
) -> SweepTable:
    """Train and evaluate every (ratio, probability, pos) cell.

    Per-cell failures are recorded on the table and the sweep continues.
    """
    if graph.labels is None:
        raise ValueError("sweeps need node labels for evaluation")
    rows = []
    failures = []
    for cell_index, (ratio, prob, pos) in enumerate(grid.cells):
        scores = []
        try:
            for run in range(grid.runs_per_cell):
                run_seed = derive_seed(grid.seed, NS_SWEEP, cell_index, run, 0)
                split_seed = derive_seed(grid.seed, NS_SWEEP, cell_index, run, 1)
                cfg = _cell_config(grid, ratio, prob, pos, run_seed)
                scores.append(_run_once(graph, ranking, cfg, grid.evaluation, split_seed))
        except Exception as exc:
            failures.append((ratio, prob, pos, str(exc)))
            continue
        arr = np.array(scores)
        rows.append(
            SweepCell(
                ratio=ratio,
                probability=prob,
                pos=pos,
                mean_f1=float(arr.mean()),
                std_f1=float(arr.std()),
                runs=grid.runs_per_cell,
                per_run_scores=tuple(float(s) for s in scores),
            )
        )
    return SweepTable(rows=tuple(rows), failures=tuple(failures))


def pos_win_analysis(table: SweepTable) -> PosWinCounts:
    """Count, per matched (ratio, probability) pair, which position won.

    The higher mean_f1 scores the win; exact ties count toward M.
    Unmatched cells are skipped.
    """
    by_key: dict = {}
    for row in table.rows:
        by_key.setdefault((row.ratio, row.probability), {})[row.pos] = row
    l_wins = m_wins = 0
    for pair in by_key.values():
        if "L" not in pair or "M" not in pair:
            continue
        if pair["L"].mean_f1 > pair["M"].mean_f1:
            l_wins += 1
        else:
            m_wins += 1
    return PosWinCounts(l_wins=l_wins, m_wins=m_wins)


def format_pos_wins(counts_by_dataset: dict) -> str:
    """Starting-position win table: one row per dataset plus a total row."""

    def cell(wins: int, pairs: int) -> str:
        pct = 100.0 * wins / pairs if pairs else 0.0
        return f"{wins} ({pct:.2f}%)"

    lines = ["Dataset\tpos=L\tpos=M"]
    total_l = total_m = 0
    for name, counts in counts_by_dataset.items():
        total_l += counts.l_wins
        total_m += counts.m_wins
        lines.append(
            f"{name}\t{cell(counts.l_wins, counts.pairs)}\t{cell(counts.m_wins, counts.pairs)}"
        )
    pairs = total_l + total_m
    lines.append(f"Total\t{cell(total_l, pairs)}\t{cell(total_m, pairs)}")
    return "\n".join(lines) + "\n"


def ablation_ofd(
    graph: AttributedGraph,
    ranking: FeatureRanking | None,
    cfg: TrainConfig,
    eval_cfg: EvalConfig,
    runs: int = 5,
    seed: int = 0,
) -> AblationResult:
    """Paired runs: configured edge dropping vs p_e = 0 on both views.

    Both arms reuse identical per-run seeds, so a config that already has
    p_e = 0 yields two identical arms.
    """
    ofd_cfg = replace(
        cfg,
        view1=replace(cfg.view1, edge_drop_probability=0.0),
        view2=replace(cfg.view2, edge_drop_probability=0.0),
    )
    arms = []
    for label, arm_cfg in (("with-edge-drop", cfg), ("feature-only", ofd_cfg)):
        scores = []
        for run in range(runs):
            run_seed = derive_seed(seed, NS_SWEEP, run, 0)
            split_seed = derive_seed(seed, NS_SWEEP, run, 1)
            scores.append(
                _run_once(
                    graph, ranking, replace(arm_cfg, seed=run_seed), eval_cfg, split_seed
                )
            )
        arr = np.array(scores)
        arms.append(
            AblationArm(
                label=label,
                mean_f1=float(arr.mean()),
                std_f1=float(arr.std()),
                per_run_scores=tuple(float(s) for s in scores),
            )
        )
    return AblationResult(with_edge_drop=arms[0], feature_only=arms[1])


def format_ablation(rows: dict) -> str:
    """Ablation table: dataset, hybrid augmentation, only-feature-dropping."""
    lines = ["Dataset\tFebAA\tFebAA(OFD)"]
    for name, result in rows.items():
        lines.append(
            f"{name}\t{result.with_edge_drop.summary()}\t{result.feature_only.summary()}"
        )
    return "\n".join(lines) + "\n"


def save_sweep_csv(table: SweepTable, path: str | Path) -> None:
    with open(path, "w") as f:
        f.write(SWEEP_CSV_HEADER + "\n")
        for row in table.rows:
            f.write(
                f"{fmt_float(row.ratio)},{fmt_float(row.probability)},{row.pos},"
                f"{fmt_float(row.mean_f1)},{fmt_float(row.std_f1)},{row.runs}\n"
            )


def save_plot_data(table: SweepTable, out_dir: str | Path) -> list[Path]:
    """One bar-group CSV per starting position, mirroring the ratio sweeps."""
    out_dir = Path(out_dir)
    written = []
    for pos in sorted({row.pos for row in table.rows}):
        path = out_dir / f"sweep_plot_{pos}.csv"
        with open(path, "w") as f:
            f.write(PLOT_CSV_HEADER + "\n")
            for row in sorted(
                (r for r in table.rows if r.pos == pos),
                key=lambda r: (r.ratio, r.probability),
            ):
                f.write(
                    f"{fmt_float(row.ratio)},{fmt_float(row.probability)},"
                    f"{fmt_float(row.mean_f1)}\n"
                )
        written.append(path)
    return written
