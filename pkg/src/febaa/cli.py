"""Command-line entry point.

Subcommands: ingest, rank, augment, train, eval, sweep, ablate. Every run
resolves its configuration (FEBAA_SEED overrides the config seed), writes
all artifacts under an output directory named by config hash + seed, and
records a manifest with artifact checksums so reruns can be verified
byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import augmentation, graph, ranking, sweep
from .config import (
    ConfigError,
    RunConfig,
    config_hash,
    config_to_dict,
    parse_config,
    serialize_config,
)
from .engine import TrainingDivergedError, train
from .evaluation import generate_splits, linear_evaluate
from .rng import NS_EPOCH, NS_SELECT, substream
from .util import fmt_float, sha256_file


class CommandError(RuntimeError):
    """User-facing command failure: one line, exit status 1."""


def _load_config(args) -> RunConfig:
    cfg = parse_config(args.config)
    env_seed = os.environ.get("FEBAA_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise CommandError(f"FEBAA_SEED must be an integer, got {env_seed!r}")
        cfg = _override_seed(cfg, seed)
    if getattr(args, "seed", None) is not None:
        cfg = _override_seed(cfg, args.seed)
    return cfg


def _override_seed(cfg: RunConfig, seed: int) -> RunConfig:
    from dataclasses import replace

    if seed < 0:
        raise CommandError(f"seed must be non-negative, got {seed}")
    return replace(cfg, seed=seed, train=replace(cfg.train, seed=seed))


def _run_dir(args, cfg: RunConfig, command: str) -> Path:
    out = Path(getattr(args, "out_dir", "runs") or "runs")
    run = out / f"{command}-{config_hash(cfg)}-s{cfg.seed}"
    run.mkdir(parents=True, exist_ok=True)
    return run


def _write_manifest(run_dir: Path, cfg: RunConfig, command: str, artifacts: list[Path]):
    manifest = {
        "command": command,
        "seed": cfg.seed,
        "config": config_to_dict(cfg),
        "artifacts": {p.name: sha256_file(p) for p in sorted(artifacts)},
    }
    path = run_dir / "manifest.json"
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    (run_dir / "config.resolved.toml").write_text(serialize_config(cfg))


def _load_dataset(cfg: RunConfig) -> graph.AttributedGraph:
    if not cfg.dataset.edges or not cfg.dataset.features:
        raise CommandError("config names no dataset files")
    return graph.load_graph(cfg.dataset.edges, cfg.dataset.features, cfg.dataset.labels)


def _load_ranking_if_needed(cfg: RunConfig):
    views = (cfg.train.view1, cfg.train.view2)
    if not any(v.selection_mode == "influential" for v in views):
        return None
    if cfg.dataset.ranking is None:
        raise CommandError("ranking required: a view uses influential selection")
    if not Path(cfg.dataset.ranking).exists():
        raise CommandError(
            f"ranking file {cfg.dataset.ranking} not found; run `febaa rank` first"
        )
    return ranking.load_ranking(cfg.dataset.ranking)


def _write_embedding_csv(H: np.ndarray, path: Path):
    graph.save_features_csv(H, path)


def _write_loss_trace(trace: np.ndarray, path: Path):
    with open(path, "w") as f:
        f.write("epoch,loss\n")
        for epoch, loss in enumerate(trace):
            f.write(f"{epoch},{fmt_float(loss)}\n")


def cmd_ingest(args) -> int:
    cfg = _load_config(args)
    g = _load_dataset(cfg)
    report = graph.ingest_report(g)
    run_dir = _run_dir(args, cfg, "ingest")
    report_path = run_dir / "report.json"
    with open(report_path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    _write_manifest(run_dir, cfg, "ingest", [report_path])
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_rank(args) -> int:
    cfg = _load_config(args)
    g = _load_dataset(cfg)
    epochs = args.epochs if args.epochs is not None else cfg.ranking.epochs
    rounds = args.rounds if args.rounds is not None else cfg.ranking.rounds
    scorer_name = args.scorer or cfg.ranking.scorer
    if scorer_name == "variance-stub":
        base_scorer = ranking.variance_stub_scorer
    else:
        base_scorer = ranking.GclScorer()

    calls = 0

    def counting_scorer(masked_graph, n_epochs, seed, split_seed):
        nonlocal calls
        calls += 1
        return base_scorer(masked_graph, n_epochs, seed, split_seed)

    result = ranking.rank_features(
        g, counting_scorer, epochs=epochs, rounds=rounds, seed=cfg.seed
    )
    run_dir = _run_dir(args, cfg, "rank")
    out_path = run_dir / "ranking.csv"
    ranking.save_ranking(result, out_path)
    artifacts = [out_path]
    if args.out:
        ranking.save_ranking(result, args.out)
    budget = ranking.pretraining_budget(g.num_features, epochs, rounds)
    _write_manifest(run_dir, cfg, "rank", artifacts)
    print(
        f"scorer_calls={calls} budget_iterations={budget.total_iterations} "
        f"ranking={out_path}"
    )
    return 0


def cmd_augment(args) -> int:
    cfg = _load_config(args)
    g = _load_dataset(cfg)
    view_cfg = cfg.train.view1 if args.view == 1 else cfg.train.view2
    rank_obj = None
    if view_cfg.selection_mode == "influential":
        rank_obj = _load_ranking_if_needed(cfg)
    base_seed = view_cfg.rng_seed if view_cfg.rng_seed else cfg.seed
    cf = augmentation.candidate_features(
        g, view_cfg, rank_obj, rng=substream(base_seed, NS_SELECT, args.view)
    )
    view = augmentation.apply_view(
        g, cf, view_cfg, substream(base_seed, NS_EPOCH, args.view, args.epoch)
    )
    run_dir = _run_dir(args, cfg, "augment")
    features_path = run_dir / "view_features.csv"
    edges_path = run_dir / "view_edges.txt"
    meta_path = run_dir / "view_meta.json"
    graph.save_features_csv(view.features, features_path)
    graph.save_edges(view.edges, edges_path)
    with open(meta_path, "w") as f:
        json.dump(
            {
                "view": args.view,
                "epoch": args.epoch,
                "candidate_features": [int(i) for i in cf.indices],
                "masked_columns": [int(i) for i in view.masked_columns],
                "dropped_edges": view.dropped_edges,
            },
            f,
            indent=2,
            sort_keys=True,
        )
        f.write("\n")
    _write_manifest(run_dir, cfg, "augment", [features_path, edges_path, meta_path])
    print(
        f"view={args.view} masked_columns={len(view.masked_columns)} "
        f"dropped_edges={view.dropped_edges}"
    )
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args)
    g = _load_dataset(cfg)
    rank_obj = _load_ranking_if_needed(cfg)
    result = train(g, rank_obj, cfg.train)
    run_dir = _run_dir(args, cfg, "train")
    trace_path = run_dir / "loss_trace.csv"
    embedding_path = run_dir / "embedding.csv"
    _write_loss_trace(result.loss_trace, trace_path)
    _write_embedding_csv(result.embedding, embedding_path)
    _write_manifest(run_dir, cfg, "train", [trace_path, embedding_path])
    final = result.loss_trace[-1] if result.loss_trace.size else float("nan")
    print(f"epochs={cfg.train.epochs} final_loss={final:.6f} run_dir={run_dir}")
    return 0


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    H = graph.load_features_csv(args.embedding)
    labels = graph.load_labels(args.labels)
    if labels.shape[0] != H.shape[0]:
        raise CommandError(
            f"embedding has {H.shape[0]} rows but labels file has {labels.shape[0]}"
        )
    ev = cfg.evaluation
    splits = generate_splits(H.shape[0], ev.train_fraction, ev.n_splits, cfg.seed)
    outcome = linear_evaluate(
        H, labels, splits, ev.l2, iters=ev.iters, learning_rate=ev.learning_rate
    )
    run_dir = _run_dir(args, cfg, "eval")
    scores_path = run_dir / "split_scores.csv"
    with open(scores_path, "w") as f:
        f.write("split,score\n")
        for i, score in enumerate(outcome.per_split_scores):
            f.write(f"{i},{fmt_float(score)}\n")
    _write_manifest(run_dir, cfg, "eval", [scores_path])
    print(outcome.summary())
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    g = _load_dataset(cfg)
    if cfg.dataset.ranking is None or not Path(cfg.dataset.ranking).exists():
        raise CommandError("sweep needs dataset.ranking (run `febaa rank` first)")
    rank_obj = ranking.load_ranking(cfg.dataset.ranking)
    grid = sweep.SweepGrid(
        ratios=cfg.sweep.ratios,
        probabilities=cfg.sweep.probabilities,
        positions=cfg.sweep.positions,
        runs_per_cell=cfg.sweep.runs_per_cell,
        base_train=cfg.train,
        evaluation=cfg.evaluation,
        seed=cfg.seed,
    )
    table = sweep.run_sweep(g, rank_obj, grid)
    run_dir = _run_dir(args, cfg, "sweep")
    table_path = run_dir / "sweep.csv"
    sweep.save_sweep_csv(table, table_path)
    plot_paths = sweep.save_plot_data(table, run_dir)
    wins = sweep.pos_win_analysis(table)
    wins_text = sweep.format_pos_wins({args.dataset_name: wins})
    wins_path = run_dir / "pos_wins.txt"
    wins_path.write_text(wins_text)
    _write_manifest(run_dir, cfg, "sweep", [table_path, wins_path, *plot_paths])
    sys.stdout.write(wins_text)
    for failure in table.failures:
        print(f"cell-failure ratio={failure[0]} prob={failure[1]} pos={failure[2]}: "
              f"{failure[3]}", file=sys.stderr)
    print(f"rows={len(table.rows)} run_dir={run_dir}")
    return 0


def cmd_ablate(args) -> int:
    cfg = _load_config(args)
    g = _load_dataset(cfg)
    rank_obj = _load_ranking_if_needed(cfg)
    result = sweep.ablation_ofd(
        g, rank_obj, cfg.train, cfg.evaluation, runs=args.runs, seed=cfg.seed
    )
    run_dir = _run_dir(args, cfg, "ablate")
    text = sweep.format_ablation({args.dataset_name: result})
    table_path = run_dir / "ablation.txt"
    table_path.write_text(text)
    csv_path = run_dir / "ablation.csv"
    with open(csv_path, "w") as f:
        f.write("arm,run,score\n")
        for arm in (result.with_edge_drop, result.feature_only):
            for i, score in enumerate(arm.per_run_scores):
                f.write(f"{arm.label},{i},{fmt_float(score)}\n")
    _write_manifest(run_dir, cfg, "ablate", [table_path, csv_path])
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="febaa",
        description="Adaptive feature-masking augmentation for graph contrastive learning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="run config TOML")
        p.add_argument("--out-dir", default="runs", help="root for per-run output dirs")
        p.add_argument("--seed", type=int, default=None, help="override config seed")

    p = sub.add_parser("ingest", help="load and validate a dataset")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("rank", help="compute the feature influence ranking")
    common(p)
    p.add_argument("--epochs", type=int, default=None, help="scorer epochs per run (i)")
    p.add_argument("--rounds", type=int, default=None, help="averaging rounds (n)")
    p.add_argument("--scorer", choices=["gcl", "variance-stub"], default=None)
    p.add_argument("--out", default=None, help="also write the ranking CSV here")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("augment", help="apply one view and dump it for inspection")
    common(p)
    p.add_argument("--view", type=int, choices=[1, 2], default=1)
    p.add_argument("--epoch", type=int, default=0, help="epoch substream index")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="run contrastive training")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="linear evaluation of an embedding CSV")
    common(p)
    p.add_argument("--embedding", required=True)
    p.add_argument("--labels", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="grid sweep over ratio/probability/position")
    common(p)
    p.add_argument("--dataset-name", default="dataset")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ablate", help="edge-drop vs feature-only ablation")
    common(p)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--dataset-name", default="dataset")
    p.set_defaults(func=cmd_ablate)
    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (
        CommandError,
        ConfigError,
        graph.GraphFormatError,
        ranking.RankingError,
        TrainingDivergedError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        message = " ".join(str(exc).split())
        print(f"febaa-error: {message}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
