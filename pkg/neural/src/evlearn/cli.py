"""Command line interface: train on an exported manifest (or the built-in
synthetic set) and evaluate checkpoints over an SNR grid."""

from __future__ import annotations

import argparse
import sys

import torch

from .config import ModelConfig, TrainConfig
from .data import load_manifest_dataset, make_jump_dataset
from .evaluate import evaluate, format_table
from .training import load_checkpoint, train


def _model_config(args) -> ModelConfig:
    return ModelConfig(height=args.size, width=args.size, K=args.K,
                       k0=args.k0, k1=args.k1, k2=args.k2,
                       use_events=not args.no_events)


def _add_model_flags(parser):
    parser.add_argument("--size", type=int, default=48,
                        help="square crop size (default 48)")
    parser.add_argument("--K", type=int, default=3)
    parser.add_argument("--k0", type=int, default=256)
    parser.add_argument("--k1", type=int, default=256)
    parser.add_argument("--k2", type=int, default=256)
    parser.add_argument("--no-events", action="store_true",
                        help="replace the event input with zeros (ablation)")


def _load_dataset(args, cfg: ModelConfig):
    if args.synthetic is not None:
        return make_jump_dataset(args.synthetic, cfg, seed=args.seed)
    if args.manifest is None:
        raise SystemExit("either a manifest path or --synthetic is required")
    return load_manifest_dataset(args.manifest, cfg)


def cmd_train(args) -> int:
    cfg = _model_config(args)
    dataset = _load_dataset(args, cfg)
    snr_db = None if args.noiseless else args.snr_db
    tcfg = TrainConfig(lr=args.lr, batch_size=args.batch_size,
                       stage1_steps=args.stage1_steps,
                       stage2_steps=args.stage2_steps,
                       stage3_steps=args.stage3_steps,
                       snr_db=snr_db, noise_seed=args.seed,
                       shuffle_seed=args.seed)
    from .model import JointModel

    torch.manual_seed(args.seed)
    model = JointModel(cfg)
    histories = train(model, dataset, tcfg, out_dir=args.out)
    for stage, losses in histories.items():
        if losses:
            print(f"stage{stage}: {len(losses)} steps, "
                  f"final loss {losses[-1]:.6e}")
    return 0


def cmd_evaluate(args) -> int:
    model, checkpoint_snr = load_checkpoint(args.checkpoint)
    cfg = model.cfg
    if args.synthetic is not None:
        dataset = make_jump_dataset(args.synthetic, cfg, seed=args.seed)
    else:
        if args.manifest is None:
            raise SystemExit("either a manifest path or --synthetic is "
                             "required")
        dataset = load_manifest_dataset(args.manifest, cfg)
    grid = [None] if args.noiseless else [float(s) for s in args.snr_db]
    rows = evaluate(model, dataset, grid, seed=args.seed,
                    checkpoint_snr=checkpoint_snr)
    sys.stdout.write(format_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evlearn",
        description="Learned joint transmission and deblurring (toy scale)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run the three-stage training schedule")
    p.add_argument("manifest", nargs="?", default=None,
                   help="dataset manifest exported by `eventlink "
                        "export-dataset`")
    p.add_argument("--synthetic", type=int, default=None, metavar="N",
                   help="use N built-in synthetic scenes instead")
    _add_model_flags(p)
    p.add_argument("--snr-db", type=float, default=10.0)
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--stage1-steps", type=int, default=400)
    p.add_argument("--stage2-steps", type=int, default=400)
    p.add_argument("--stage3-steps", type=int, default=200)
    p.add_argument("--out", required=True,
                   help="output directory for checkpoints and loss logs")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a dataset")
    p.add_argument("checkpoint")
    p.add_argument("manifest", nargs="?", default=None)
    p.add_argument("--synthetic", type=int, default=None, metavar="N")
    p.add_argument("--snr-db", nargs="+", default=["10"],
                   help="SNR grid in dB")
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
