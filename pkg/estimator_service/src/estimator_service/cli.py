"""Command-line entry points: train, evaluate, gen-synthetic, serve.

Exit codes: 0 success, 2 configuration/data error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .data import (
    DataFileError,
    make_synthetic_dataset,
    read_rows,
    split_rows,
    write_rows,
)
from .features import DEFAULT_DIM
from .model import LinearBeliefModel, train

EXIT_OK = 0
EXIT_CONFIG = 2


def _cmd_train(args) -> int:
    rows = read_rows(args.data)
    if args.held_out > 0:
        train_rows, held_rows = split_rows(rows, args.held_out, args.seed)
    else:
        train_rows, held_rows = rows, []
    model = train(
        train_rows, dim=args.dim, epochs=args.epochs, learning_rate=args.learning_rate
    )
    if held_rows:
        model.metadata["held_out_accuracy"] = model.accuracy(held_rows)
        model.metadata["held_out_fraction"] = args.held_out
        model.metadata["split_seed"] = args.seed
    model.save(args.out)
    print(json.dumps(model.metadata, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    model = LinearBeliefModel.load(args.model)
    rows = read_rows(args.data)
    print(json.dumps({"n": len(rows), "accuracy": model.accuracy(rows)}, indent=2))
    return EXIT_OK


def _cmd_gen_synthetic(args) -> int:
    write_rows(make_synthetic_dataset(args.n, seed=args.seed), args.out)
    print(f"wrote {args.n} rows to {args.out}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(LinearBeliefModel.load(args.model))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="estimator-service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model from a JSONL training file")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=DEFAULT_DIM)
    p.add_argument("--epochs", type=int, default=1500)
    p.add_argument("--learning-rate", type=float, default=4.0)
    p.add_argument("--held-out", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="accuracy of a saved model on a JSONL file")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("gen-synthetic", help="emit a separable synthetic corpus")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_gen_synthetic)

    p = sub.add_parser("serve", help="serve the estimation protocol over HTTP")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8100)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataFileError, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
