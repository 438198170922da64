"""Command-line front end tying the pipeline together.

Subcommands cover the whole loop on one machine: ``synth`` writes a
synthetic dataset, ``sample`` draws a K-shot support set, ``train`` fits
the chain CRF (and, for the built-in surrogate route, the hashed
feature weights), ``eval`` scores a corpus and writes ``metrics.json``,
``predict`` prints decoded paths, and ``template`` renders the prompt
for inspection.

Every command is deterministic given identical inputs and ``--seed``.
Exit codes: 0 success, 1 usage, 2 data/format, 3 numerical divergence.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import errors
from .chain import DEFAULT_ITERATIONS, build_schedule, render_template
from .fewshot import Example, greedy_sample, read_corpus, write_corpus
from .icrf import FAITHFUL, MODES, argmax_decode, decode
from .metrics import evaluate
from .synthgen import SynthSpec, write_dataset
from .taxonomy import load_taxonomy
from .training import (
    FileEmitter,
    SurrogateEmitter,
    TrainConfig,
    fit,
    load_model,
    save_model,
)

__all__ = ["RunConfig", "main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one command invocation.

    ``no_chain`` is not a separate code path: it pins ``iterations`` to 0
    so the schedule degenerates to the single ascending pass.
    """

    taxonomy: Path | None
    corpus: tuple[Path, ...]
    iterations: int
    mode: str
    k: int | None
    seed: int | None
    epochs: int
    batch_size: int
    lr: float
    lr_features: float
    patience: int
    emissions: Path | None
    no_icrf: bool
    no_chain: bool
    out: Path | None
    log: Path | None
    predictions: Path | None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise errors.InvalidArgument(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.no_chain and self.iterations != 0:
            raise errors.InvalidArgument("--no-chain fixes the iteration count at 0")
        if not self.no_chain and self.iterations < 1:
            raise errors.InvalidArgument(
                f"iterations must be >= 1 (or use --no-chain), got {self.iterations}"
            )

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        def get(name, default=None):
            return getattr(args, name, default)

        corpus = tuple(
            Path(p) for p in (get("train"), get("dev"), get("corpus")) if p is not None
        )
        return cls(
            taxonomy=Path(args.taxonomy) if get("taxonomy") else None,
            corpus=corpus,
            iterations=0 if get("no_chain") else get("iters", DEFAULT_ITERATIONS),
            mode=get("mode", FAITHFUL),
            k=get("k"),
            seed=get("seed"),
            epochs=get("epochs", 20),
            batch_size=get("batch_size", 8),
            lr=get("lr", 1e-4),
            lr_features=get("lr_features", 1e-2),
            patience=get("patience", 5),
            emissions=Path(args.emissions) if get("emissions") else None,
            no_icrf=bool(get("no_icrf")),
            no_chain=bool(get("no_chain")),
            out=Path(args.out) if get("out") else None,
            log=Path(args.log) if get("log") else None,
            predictions=Path(args.predictions) if get("predictions") else None,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            seed=self.seed,
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            lr_features=self.lr_features,
            patience=self.patience,
            mode=self.mode,
            no_icrf=self.no_icrf,
        )


# -- helpers --------------------------------------------------------------


def _need_seed(config: RunConfig) -> int:
    if config.seed is None:
        raise errors.InvalidArgument("--seed is required for this command")
    return config.seed


def _need(value, flag: str):
    if value is None:
        raise errors.InvalidArgument(f"{flag} is required for this command")
    return value


def _thread_count() -> int:
    raw = os.environ.get("HIERICRF_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise errors.InvalidArgument(
            f"HIERICRF_THREADS must be an integer, got {raw!r}"
        ) from None
    return max(1, n)


def _load_tax(config: RunConfig):
    return load_taxonomy(_need(config.taxonomy, "--taxonomy"))


def _emitter_for_training(config: RunConfig, tax, schedule):
    if config.emissions is not None:
        return FileEmitter(config.emissions, schedule, tax)
    return SurrogateEmitter(tax)


def _emitter_for_inference(config: RunConfig, verb, tax, schedule):
    if config.emissions is not None:
        return FileEmitter(config.emissions, schedule, tax)
    if verb.weight.shape[1] == 0:
        raise errors.InvalidArgument(
            "model carries no feature weights (trained on external emissions); "
            "pass --emissions for this corpus"
        )
    return SurrogateEmitter.from_params(verb)


def _decode_all(examples, emitter, crf, tax, schedule, no_icrf: bool):
    """Decode every example; thread count comes from HIERICRF_THREADS.

    Output order always matches input order regardless of parallelism.
    """

    def one(ex):
        z = emitter.logits(ex, schedule)
        if no_icrf:
            return argmax_decode(z, tax, schedule)
        return decode(z, crf, schedule)

    workers = _thread_count()
    if workers == 1:
        return [one(ex) for ex in examples]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, examples))


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _load_model_bundle(args, config: RunConfig, tax):
    verb, crf, schedule, header = load_model(_need(getattr(args, "model", None), "--model"), tax)
    # A model trained without the CRF keeps its initial transitions, so
    # decoding it with Viterbi would silently change the ablation arm.
    no_icrf = config.no_icrf or bool(header["config"].get("no_icrf"))
    return verb, crf, schedule, header, no_icrf


# -- commands -------------------------------------------------------------


def cmd_template(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    if args.depth is not None:
        depth = args.depth
    elif config.taxonomy is not None:
        depth = _load_tax(config).depth
    else:
        raise errors.InvalidArgument("template needs --depth or --taxonomy")
    schedule = build_schedule(depth, config.iterations)
    print(render_template(args.text, schedule))
    _emit_json({"levels": list(schedule.levels), "l": schedule.l})
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    spec = SynthSpec(
        branching=args.branching,
        depth=args.depth,
        signatures_per_node=args.signatures,
        tokens_per_doc=args.tokens_per_doc,
        noise=args.noise,
        docs_per_path=args.docs_per_path,
        seed=_need_seed(config),
    )
    paths = write_dataset(spec, _need(config.out, "--out"))
    _emit_json({name: str(p) for name, p in sorted(paths.items())})
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    tax = _load_tax(config)
    corpus = read_corpus(_need(args.corpus, "--corpus"), tax)
    support = greedy_sample(corpus, tax, _need(config.k, "--k"), _need_seed(config))
    out = _need(config.out, "--out")
    write_corpus(out, support.examples, tax)
    _emit_json({"out": str(out), "k": support.k, "count": len(support)})
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    _need_seed(config)
    tax = _load_tax(config)
    schedule = build_schedule(tax.depth, config.iterations)
    train = read_corpus(_need(args.train, "--train"), tax)
    dev = read_corpus(args.dev, tax) if args.dev else None
    if config.k is not None:
        train = greedy_sample(train, tax, config.k, _need_seed(config)).examples
    emitter = _emitter_for_training(config, tax, schedule)
    verb, crf, log = fit(train, dev, emitter, tax, schedule, config.train_config())
    out = _need(config.out, "--out")
    save_model(out, verb, crf, tax, schedule, config.train_config())
    if config.log is not None:
        with open(config.log, "w", encoding="utf-8") as fh:
            for record in log:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    summary = {"model": str(out), "epochs_run": len(log)}
    if log:
        summary["final"] = log[-1]
    _emit_json(summary)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    tax = _load_tax(config)
    verb, crf, schedule, header, no_icrf = _load_model_bundle(args, config, tax)
    corpus = read_corpus(_need(args.corpus, "--corpus"), tax)
    emitter = _emitter_for_inference(config, verb, tax, schedule)
    results = _decode_all(corpus, emitter, crf, tax, schedule, no_icrf)
    pairs = [
        (set(res.per_level), set(ex.path)) for ex, res in zip(corpus, results)
    ]
    report = evaluate(pairs, tax)
    blob = json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    if config.out is not None:
        Path(config.out).write_text(blob, encoding="utf-8")
    if config.predictions is not None:
        with open(config.predictions, "w", encoding="utf-8") as fh:
            for ex, res in zip(corpus, results):
                fh.write(json.dumps(_prediction_record(ex, res, tax), sort_keys=True) + "\n")
    if config.out is None:
        sys.stdout.write(blob)
    else:
        _emit_json({"metrics": str(config.out), "micro_f1": report.micro_f1})
    return EXIT_OK


def _prediction_record(ex: Example, res, tax) -> dict:
    return {
        "id": ex.id,
        "path": [tax.node(i).name for i in res.per_level],
        "sequence": [tax.node(i).name for i in res.sequence],
    }


def cmd_predict(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    tax = _load_tax(config)
    verb, crf, schedule, header, no_icrf = _load_model_bundle(args, config, tax)
    if args.text is not None:
        corpus = [Example(id="text-0", text=args.text, path=())]
    else:
        corpus = read_corpus(_need(args.corpus, "--corpus or --text"), tax)
    emitter = _emitter_for_inference(config, verb, tax, schedule)
    results = _decode_all(corpus, emitter, crf, tax, schedule, no_icrf)
    for ex, res in zip(corpus, results):
        _emit_json(_prediction_record(ex, res, tax))
    return EXIT_OK


# -- parsing --------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage failures exit with code 1, not 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _shared_flags() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    g = shared.add_argument_group("shared")
    g.add_argument("--taxonomy", metavar="FILE", help="taxonomy JSON file")
    g.add_argument("--seed", type=int, help="run seed (required where randomness is used)")
    g.add_argument("--mode", choices=MODES, default=FAITHFUL, help="transition mode")
    g.add_argument("--iters", type=int, default=DEFAULT_ITERATIONS, metavar="I",
                   help="chain iterations (default %(default)s)")
    g.add_argument("--no-icrf", action="store_true",
                   help="drop the CRF: independent per-slot argmax with last-occurrence readout")
    g.add_argument("--no-chain", action="store_true",
                   help="single ascending pass over levels (iteration count 0)")
    g.add_argument("--emissions", metavar="FILE",
                   help="read per-example logits from this emissions file instead of the surrogate")
    return shared


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_flags()
    parser = _Parser(prog="hiericrf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("template", parents=[shared], help="render the prompt template")
    p.add_argument("--depth", type=int, help="taxonomy depth (alternative to --taxonomy)")
    p.add_argument("--text", default="x", help="document placeholder text")
    p.set_defaults(func=cmd_template)

    p = sub.add_parser("synth", parents=[shared], help="write a synthetic dataset")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--branching", type=int, default=3)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--signatures", type=int, default=3, help="signature tokens per node")
    p.add_argument("--tokens-per-doc", type=int, default=30)
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--docs-per-path", type=int, default=6)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sample", parents=[shared], help="draw a K-shot support set")
    p.add_argument("--corpus", required=True, metavar="FILE")
    p.add_argument("--k", type=int, required=True, help="examples per leaf path")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", parents=[shared], help="fit the model and save it")
    p.add_argument("--train", required=True, metavar="FILE")
    p.add_argument("--dev", metavar="FILE", help="held-out corpus for early stopping")
    p.add_argument("--out", required=True, metavar="FILE", help="model file to write")
    p.add_argument("--k", type=int, help="subsample a K-shot support set from --train first")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-4, help="CRF transition/start learning rate")
    p.add_argument("--lr-features", type=float, default=1e-2,
                   help="surrogate feature-weight learning rate")
    p.add_argument("--patience", type=int, default=5, help="dev evaluations without improvement")
    p.add_argument("--log", metavar="FILE", help="write per-epoch training records here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[shared], help="score a corpus with a saved model")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--corpus", required=True, metavar="FILE")
    p.add_argument("--out", metavar="FILE", help="metrics JSON path (default: stdout)")
    p.add_argument("--predictions", metavar="FILE", help="also write per-example decodes")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", parents=[shared], help="print decoded paths as JSON")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--corpus", metavar="FILE")
    p.add_argument("--text", help="classify one document given inline")
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (errors.DivergenceError, errors.NumericalError) as exc:
        print(f"hiericrf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (errors.InvalidArgument, errors.InvalidSpec) as exc:
        print(f"hiericrf: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except errors.HierICRFError as exc:
        print(f"hiericrf: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"hiericrf: missing file: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
