"""Command line: train a plan into a checkpoint, serve a checkpoint.

::

    modelserver train <plan.json> --out <checkpoint-dir>
    modelserver serve <checkpoint-dir> [--host H] [--port P]
"""

from __future__ import annotations

import argparse
import sys

from modelserver.plan import PlanError, load_plan
from modelserver.train import ServedModel, TrainingDiverged, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelserver")
    sub = parser.add_subparsers(dest="command", required=True)

    train_p = sub.add_parser("train", help="train a plan and write a checkpoint")
    train_p.add_argument("plan", help="JSON plan file")
    train_p.add_argument("--out", required=True, help="checkpoint directory")

    serve_p = sub.add_parser("serve", help="serve a checkpoint over HTTP")
    serve_p.add_argument("checkpoint", help="checkpoint directory")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    return parser


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            served = train(load_plan(args.plan))
            served.save(args.out)
            for log in served.logs:
                print(
                    f"{log.stage}: best epoch {log.best_epoch} "
                    f"(val loss {log.best_val_loss:.4f}), stopped at {log.stopped_epoch}"
                )
            print(f"checkpoint -> {args.out}")
            return 0
        from modelserver.server import serve

        serve(ServedModel.load(args.checkpoint), host=args.host, port=args.port)
        return 0
    except (PlanError, TrainingDiverged, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
