import argparse
import sys
from enum import Enum, IntEnum
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

import logfire
from pydantic import ValidationError

sys.path.append(str(Path(__file__).parent.parent))

from src.config import settings
from src.commands import cmd_curate, cmd_eval, cmd_generate, cmd_preview, cmd_refine, load_generation_config
from src.exceptions import InvalidInputError, LesionGenError
from src.refine import RefineConfig, ReverseMode
from src.stats import ComparisonTest
from src.utils.logging_utils import configure_logging


class ExitCode(IntEnum):
    OK = 0
    USAGE = 1
    DATA_ERROR = 2
    INTERNAL = 3


class Command(Enum):
    CURATE = "curate"
    GENERATE = "generate"
    REFINE = "refine"
    EVAL = "eval"
    PREVIEW = "preview"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE, f"{self.prog}: error: {message}\n")


def run_curate(args: argparse.Namespace) -> None:
    cmd_curate(args.manifest, args.out, args.keywords, args.structures)


def run_generate(args: argparse.Namespace) -> None:
    config = load_generation_config(args.config, seed=args.seed, workers=args.workers, output_dir=args.out,
                                    grid=args.grid)
    cmd_generate(config, args.manifest)


def _refine_config(args: argparse.Namespace) -> RefineConfig:
    payload = {}
    if args.config:
        try:
            payload = RefineConfig.model_validate_json(Path(args.config).read_text(encoding="utf-8")).model_dump()
        except (OSError, ValidationError) as e:
            raise InvalidInputError(f"invalid refine config {args.config}: {e}") from e
    overrides = {"seed": args.seed, "workers": args.workers, "t_refine": args.t_refine, "mode": args.mode}
    payload.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return RefineConfig.model_validate(payload)
    except ValidationError as e:
        raise InvalidInputError(f"invalid refine settings: {e}") from e


def run_refine(args: argparse.Namespace) -> None:
    cmd_refine(args.manifest, args.predictor, _refine_config(args))


def run_eval(args: argparse.Namespace) -> None:
    cmd_eval(args.results, args.test, args.bootstrap, args.level, args.seed, args.permutations, args.out)


def run_preview(args: argparse.Namespace) -> None:
    cmd_preview(args.sample, args.manifest, args.out)


COMMANDS: Dict[Command, Callable[[argparse.Namespace], None]] = {
    Command.CURATE: run_curate,
    Command.GENERATE: run_generate,
    Command.REFINE: run_refine,
    Command.EVAL: run_eval,
    Command.PREVIEW: run_preview,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ct-lesion-synth", description="Synthetic CT lesion generation and evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    curate = sub.add_parser(Command.CURATE.value, help="classify template scans and report pool sizes")
    curate.add_argument("--manifest", required=True, help="input scan manifest (JSONL)")
    curate.add_argument("--out", default=settings.OUTPUT_DIR, help="output directory")
    curate.add_argument("--keywords", default=settings.KEYWORD_CONFIG, help="organ keyword config (JSON)")
    curate.add_argument("--structures", default=settings.STRUCTURE_CONFIG, help="structure label config (JSON)")

    generate = sub.add_parser(Command.GENERATE.value, help="generate lesion samples")
    generate.add_argument("--config", required=True, help="generation config (JSON)")
    generate.add_argument("--manifest", required=True, help="curated manifest (JSONL)")
    generate.add_argument("--seed", type=int, help="global seed")
    generate.add_argument("--workers", type=int, help="worker processes")
    generate.add_argument("--out", help="output directory")
    generate.add_argument("--grid", type=int, help="generation grid edge in voxels, 0 for whole volumes")

    refine = sub.add_parser(Command.REFINE.value, help="refine generated samples with a noise predictor")
    refine.add_argument("--manifest", required=True, help="batch manifest (JSONL)")
    refine.add_argument("--predictor", default="gaussian",
                        help="built-in name (oracle, zero, gaussian), http(s) URL or module:Class")
    refine.add_argument("--config", help="refine config (JSON)")
    refine.add_argument("--seed", type=int, help="refinement seed")
    refine.add_argument("--workers", type=int, help="window threads")
    refine.add_argument("--t-refine", dest="t_refine", type=int, help="partial-noising depth")
    refine.add_argument("--mode", choices=[m.value for m in ReverseMode], help="reverse step mode")

    evaluate = sub.add_parser(Command.EVAL.value, help="summarize per-case results")
    evaluate.add_argument("--results", required=True, help="per-case results (CSV or JSONL)")
    evaluate.add_argument("--test", choices=[t.value for t in ComparisonTest], help="one-sided comparison test")
    evaluate.add_argument("--bootstrap", type=int, default=settings.BOOTSTRAP_REPLICATES, help="bootstrap replicates")
    evaluate.add_argument("--level", type=float, default=settings.CONFIDENCE_LEVEL, help="confidence level")
    evaluate.add_argument("--permutations", type=int, default=settings.PERMUTATIONS, help="permutation count")
    evaluate.add_argument("--seed", type=int, default=settings.DEFAULT_SEED, help="resampling seed")
    evaluate.add_argument("--out", default=settings.OUTPUT_DIR, help="output directory")

    preview = sub.add_parser(Command.PREVIEW.value, help="write orthogonal slices through a lesion")
    preview.add_argument("--manifest", required=True, help="batch manifest (JSONL)")
    preview.add_argument("--sample", required=True, help="sample id")
    preview.add_argument("--out", help="output directory")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging()
    command = Command(args.command)
    try:
        with logfire.span('command {command}', command=command.value):
            COMMANDS[command](args)
    except LesionGenError as e:
        logfire.error('Command failed', command=command.value, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return ExitCode.DATA_ERROR
    except Exception as e:
        logfire.exception('Internal error', command=command.value)
        print(f"internal error: {e}", file=sys.stderr)
        return ExitCode.INTERNAL
    return ExitCode.OK


if __name__ == "__main__":
    sys.exit(main())
