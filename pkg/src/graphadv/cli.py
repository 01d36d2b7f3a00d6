"""Command-line interface.

Commands::

    graphadv gen-synth  --out data.gdf.json [...]      synthetic SBM dataset
    graphadv train      --dataset D --out DIR [...]    train one model
    graphadv eval       --checkpoint C --dataset D     evaluate a checkpoint
    graphadv attack     --checkpoint C --dataset D     robustness under attack
    graphadv sweep      --dataset D --grid G --out CSV hyperparameter grid

Config precedence for ``train`` and ``sweep``: command-line flags override
the optional ``--config`` JSON file, which overrides built-in defaults.
All randomness flows from ``--seed`` through a fixed 64-bit generator
(PCG64), so every command is reproducible from its full flag set.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .config import Mode, Strategy, TrainConfig
from .data import generate_sbm, load_dataset, save_dataset
from .errors import NonConvergenceError, TrainingDiverged, ValidationError
from .evaluate import EvalReport, attack_eval, evaluate_model
from .gcn import load_checkpoint, save_checkpoint
from .graph import normalize_adjacency
from .rng import generator
from .train import sweep, train


@dataclass
class RunManifest:
    """What a training run produced and where."""

    dataset_path: str
    dataset_name: str
    out_dir: str
    config: dict
    artifacts: dict = field(default_factory=dict)

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "dataset_path": self.dataset_path,
                    "dataset_name": self.dataset_name,
                    "out_dir": self.out_dir,
                    "config": self.config,
                    "artifacts": self.artifacts,
                },
                fh, indent=2,
            )
            fh.write("\n")


# ----------------------------------------------------------------------
# argument plumbing

CONFIG_FLAGS = {
    "mode": "mode",
    "hidden": "hidden",
    "weight_decay": "weight_decay",
    "dropout": "dropout",
    "lr": "lr",
    "max_epochs": "max_epochs",
    "patience": "patience",
    "epsilon": "epsilon",
    "beta": "beta",
    "k": "k",
    "strategy": "strategy",
    "vepsilon": "v_epsilon",
    "alpha": "alpha",
    "xi": "xi",
    "seed": "seed",
}


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON file with TrainConfig fields")
    parser.add_argument("--mode", choices=[m.value for m in Mode])
    parser.add_argument("--hidden", type=int)
    parser.add_argument("--weight-decay", type=float, dest="weight_decay")
    parser.add_argument("--dropout", type=float)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--max-epochs", type=int, dest="max_epochs")
    parser.add_argument("--patience", type=int)
    parser.add_argument("--epsilon", type=float, help="graph perturbation scale")
    parser.add_argument("--beta", type=float, help="graph regularizer weight")
    parser.add_argument("--k", type=int, help="neighbors sampled per node")
    parser.add_argument("--strategy", choices=[s.value for s in Strategy])
    parser.add_argument("--vepsilon", type=float, dest="vepsilon",
                        help="virtual perturbation scale")
    parser.add_argument("--alpha", type=float, help="virtual regularizer weight")
    parser.add_argument("--xi", type=float, help="power-iteration offset scale")
    parser.add_argument("--seed", type=int)


def _build_config(args) -> TrainConfig:
    doc = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            doc.update(json.load(fh))
    for flag, config_field in CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            doc[config_field] = value
    return TrainConfig.from_dict(doc)


# ----------------------------------------------------------------------
# commands


def cmd_gen_synth(args) -> int:
    dataset = generate_sbm(
        num_classes=args.classes,
        nodes_per_class=args.nodes_per_class,
        p_in=args.p_in,
        p_out=args.p_out,
        feature_dim=args.feature_dim,
        noise_scale=args.noise_scale,
        seed=args.seed,
        name=args.name,
    )
    save_dataset(dataset, args.out)
    load_dataset(args.out)  # validate what we wrote
    print(f"wrote {args.out}: {dataset.num_nodes} nodes, "
          f"{dataset.adjacency.nnz // 2} edges, {dataset.num_classes} classes")
    return 0


def cmd_train(args) -> int:
    config = _build_config(args)
    dataset = load_dataset(args.dataset)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    params, history = train(dataset, config)

    checkpoint_path = out_dir / "checkpoint.json"
    history_path = out_dir / "history.csv"
    eval_path = out_dir / "eval.json"
    manifest_path = out_dir / "manifest.json"

    save_checkpoint(params, config, checkpoint_path)
    history.to_csv(history_path)
    report = evaluate_model(dataset, normalize_adjacency(dataset.adjacency), params)
    with open(eval_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")

    manifest = RunManifest(
        dataset_path=str(args.dataset),
        dataset_name=dataset.name,
        out_dir=str(out_dir),
        config=config.to_dict(),
        artifacts={
            "checkpoint": checkpoint_path.name,
            "history": history_path.name,
            "eval": eval_path.name,
        },
    )
    manifest.write(manifest_path)

    missing = [p for p in (checkpoint_path, history_path, eval_path, manifest_path)
               if not p.is_file()]
    if missing:
        print(f"error: missing artifacts {missing}", file=sys.stderr)
        return 1

    best = history.best_record()
    print(f"{config.mode.value}: {history.num_epochs} epochs, "
          f"best val {best.val_acc:.4f} (epoch {best.epoch}), test {best.test_acc:.4f}")
    print(f"artifacts in {out_dir}")
    return 0


def cmd_eval(args) -> int:
    params, _ = load_checkpoint(args.checkpoint)
    dataset = load_dataset(args.dataset)
    report = evaluate_model(dataset, normalize_adjacency(dataset.adjacency), params)
    doc = json.dumps(report.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(doc + "\n")
    else:
        print(doc)
    if args.csv:
        new_file = not Path(args.csv).exists()
        with open(args.csv, "a", encoding="utf-8") as fh:
            if new_file:
                fh.write(EvalReport.CSV_HEADER + "\n")
            fh.write(report.csv_row() + "\n")
    if args.out:
        print(f"test accuracy {report.test_accuracy:.4f}; report at {args.out}")
    return 0


def cmd_attack(args) -> int:
    params, _ = load_checkpoint(args.checkpoint)
    dataset = load_dataset(args.dataset)
    a_hat = normalize_adjacency(dataset.adjacency)
    rob = attack_eval(
        dataset, a_hat, params,
        attack_epsilon=args.attack_epsilon,
        k=args.k,
        strategy=Strategy(args.strategy),
        rng=generator(args.seed),
    )
    doc = {
        "attack_epsilon": rob.attack_epsilon,
        "clean_accuracy": rob.clean_accuracy,
        "attacked_accuracy": rob.attacked_accuracy,
        "relative_decrease": rob.relative_decrease,
    }
    text = json.dumps(doc, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text if not args.out else
          f"clean {rob.clean_accuracy:.4f} -> attacked {rob.attacked_accuracy:.4f} "
          f"({100 * rob.relative_decrease:+.1f}%)")
    return 0


def cmd_sweep(args) -> int:
    config = _build_config(args)
    dataset = load_dataset(args.dataset)
    with open(args.grid, "r", encoding="utf-8") as fh:
        grid = json.load(fh)
    results = sweep(dataset, config, grid, csv_path=args.out, jobs=args.jobs)
    print(f"{len(results)} runs; best: {results[0].overrides} "
          f"val {results[0].val_acc:.4f} test {results[0].test_acc:.4f}")
    print(f"results at {args.out}")
    return 0


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphadv",
        description="Adversarial training for graph convolutional networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="generate a synthetic SBM dataset")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--nodes-per-class", type=int, default=100, dest="nodes_per_class")
    p.add_argument("--p-in", type=float, default=0.05, dest="p_in")
    p.add_argument("--p-out", type=float, default=0.005, dest="p_out")
    p.add_argument("--feature-dim", type=int, default=16, dest="feature_dim")
    p.add_argument("--noise-scale", type=float, default=1.0, dest="noise_scale")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default="sbm")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("train", help="train one model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="output directory for run artifacts")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", help="write the report JSON here (default: stdout)")
    p.add_argument("--csv", help="append a flat CSV row here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("attack", help="evaluate robustness under feature attack")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--attack-epsilon", type=float, default=0.01, dest="attack_epsilon")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("sweep", help="grid search over hyperparameters")
    p.add_argument("--dataset", required=True)
    p.add_argument("--grid", required=True, help="JSON file mapping fields to value lists")
    p.add_argument("--out", required=True, help="results CSV path")
    p.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, NonConvergenceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TrainingDiverged as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
