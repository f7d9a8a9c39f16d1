"""Command-line entry points: dataset generation, experiment runs,
record evaluation, and training-data emission.

Exit codes: 0 success, 2 configuration error, 3 backend failure,
4 metrics undefined (every episode excluded).
"""

from __future__ import annotations

import argparse
import json
import sys

from .beliefs import GroundTruthTranscript, emit_training_data, write_training_file
from .errors import BedaError, DataError, DomainError, TransportError
from .harness import (
    ExperimentConfig,
    compute_metrics,
    load_records,
    run_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_UNDEFINED = 4


def _cmd_gen_dataset(args) -> int:
    if args.game == "ckbg":
        from .games import ckbg_generate_dataset

        settings, summary = ckbg_generate_dataset(args.n, seed=args.seed)
        doc = {"summary": summary.to_dict(), "settings": [s.to_dict() for s in settings]}
    elif args.game == "mf":
        from .games import mf_generate_scenarios

        scenarios = mf_generate_scenarios(args.n, seed=args.seed)
        doc = {"scenarios": [s.to_dict() for s in scenarios]}
    else:
        from .games import casino_generate_scenarios

        scenarios = casino_generate_scenarios(args.n, seed=args.seed)
        doc = {"scenarios": [s.to_dict() for s in scenarios]}
    payload = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


def _cmd_run(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        config = ExperimentConfig.from_dict(json.load(fh))
    report, _records = run_experiment(config)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    if report.undefined:
        return EXIT_UNDEFINED
    return EXIT_OK


def _cmd_eval(args) -> int:
    records = load_records(args.records)
    report = compute_metrics(records)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    if report.undefined:
        return EXIT_UNDEFINED
    return EXIT_OK


def _cmd_emit_training_data(args) -> int:
    transcripts = []
    with open(args.records, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                transcripts.append(GroundTruthTranscript.from_dict(json.loads(line)))
            except (ValueError, KeyError) as exc:
                raise DataError(f"{args.records}:{lineno}: malformed transcript: {exc}") from exc
    examples = emit_training_data(
        transcripts,
        clip_range=tuple(range(args.clip_max + 1)),
        negative_ratio=args.neg_ratio,
        seed=args.seed,
    )
    write_training_file(examples, args.out)
    print(f"wrote {len(examples)} examples to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beda")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="generate game settings/scenarios")
    p.add_argument("game", choices=("ckbg", "mf", "casino"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="")
    p.set_defaults(func=_cmd_gen_dataset)

    p = sub.add_parser("run", help="run a configured experiment")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("eval", help="recompute metrics from a record file")
    p.add_argument("--records", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("emit-training-data", help="derive labeled belief examples")
    p.add_argument("--records", required=True)
    p.add_argument("--clip-max", type=int, default=3)
    p.add_argument("--neg-ratio", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_emit_training_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TransportError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (DomainError, DataError, OSError, BedaError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
