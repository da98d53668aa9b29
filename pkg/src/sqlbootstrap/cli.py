"""Command-line entry points.

Subcommands: generate, sample, pipeline, evaluate, check-provider,
check-backend. Exit codes: 0 ok, 1 stage or conformance failure,
2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import datasets
from .backend import RemoteBackend, TemplateParserBackend, check_backend_conformance
from .grammar import GrammarError, count_expansions, expand, load_grammar
from .lexicon import LexiconError, load_lexicon, load_schema
from .metrics import evaluate, render_eval_table
from .paraphrase import check_provider_conformance
from .pipeline import ConfigError, PipelineStageError, load_config, run_pipeline
from .sampling import sample_uat, sampling_report
from .wire import ProviderSpec, parse_provider_flag

USAGE_ERROR = 2
STAGE_ERROR = 1


def cmd_generate(args) -> int:
    lexicon = load_lexicon(args.lexicon)
    if args.schema:
        lexicon.validate_bindings(load_schema(args.schema))
    grammar = load_grammar(args.grammar, lexicon)
    if args.count_only:
        print(count_expansions(grammar, lexicon))
        return 0
    pairs = list(expand(grammar, lexicon))
    if args.out:
        datasets.write_pairs(args.out, pairs)
    report = sampling_report(pairs)
    print(f"pairs: {len(pairs)}")
    print(f"templates: {report.template_count}")
    print(f"abstract fraction: {report.abstract_fraction:.2%}")
    if args.out:
        print(f"wrote {args.out}")
    return 0


def cmd_sample(args) -> int:
    pairs = datasets.read_pairs(args.pairs)
    selected = sample_uat(pairs, args.sample_fraction, args.seed)
    if args.out:
        datasets.write_pairs(args.out, selected)
    report = sampling_report(selected, population=len(pairs))
    print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    return 0


def cmd_pipeline(args) -> int:
    config = load_config(args.config)
    manifest = run_pipeline(config, args.out, resume=args.resume)
    print(f"manifest written to {Path(args.out) / 'manifest.json'}")
    for stage, payload in manifest["stages"].items():
        if isinstance(payload, dict) and payload.get("skipped"):
            print(f"  {stage}: skipped")
        else:
            print(f"  {stage}: ok")
    return 0


def cmd_evaluate(args) -> int:
    gold = datasets.read_examples(args.gold)
    pred_path = Path(args.pred)
    if pred_path.suffix == ".jsonl":
        predictions = [record.get("sql", "") for record in datasets.read_jsonl(pred_path)]
    else:
        predictions = pred_path.read_text(encoding="utf-8").splitlines()
    report = evaluate(predictions, [sql for _, sql in gold])
    print(render_eval_table(report), end="")
    return 0


def cmd_check_provider(args) -> int:
    spec = parse_provider_flag(args.provider)
    violations = check_provider_conformance(spec, n=args.candidates_per_utterance)
    if violations:
        for violation in violations:
            print(f"VIOLATION: {violation}")
        return STAGE_ERROR
    print(f"provider {spec.name!r} conformant (0 violations)")
    return 0


def cmd_check_backend(args) -> int:
    if args.backend == "template":
        if not args.lexicon:
            raise ConfigError("--lexicon is required for the template backend")
        backend = TemplateParserBackend(load_lexicon(args.lexicon))
    else:
        kind, _, endpoint = args.backend.partition(":")
        backend = RemoteBackend(ProviderSpec(name=kind, kind=kind, endpoint=endpoint))
    try:
        violations = check_backend_conformance(backend)
    finally:
        if isinstance(backend, RemoteBackend):
            backend.close()
    if violations:
        for violation in violations:
            print(f"VIOLATION: {violation}")
        return STAGE_ERROR
    print("backend conformant (0 violations)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqlbootstrap",
        description="Bootstrap a text-to-SQL parser from a synchronous grammar: "
        "synthesize, paraphrase, filter, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="expand a grammar into canonical pairs")
    p.add_argument("--grammar", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--schema")
    p.add_argument("--out", help="JSONL output path")
    p.add_argument("--count-only", action="store_true", help="print the count, write nothing")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sample", help="template-uniform subset of a pair file")
    p.add_argument("--pairs", required=True)
    p.add_argument("--sample-fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("pipeline", help="run the end-to-end pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="run directory for artifacts + manifest")
    p.add_argument("--resume", action="store_true", help="reuse completed-stage artifacts")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("evaluate", help="score predictions against a gold example file")
    p.add_argument("--pred", required=True, help="SQL per line, or JSONL with a sql field")
    p.add_argument("--gold", required=True, help="JSONL with utterance and sql fields")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("check-provider", help="conformance-check an external paraphraser")
    p.add_argument("--provider", required=True, help="name=kind:endpoint")
    p.add_argument("--candidates-per-utterance", type=int, default=2)
    p.set_defaults(func=cmd_check_provider)

    p = sub.add_parser("check-backend", help="conformance-check a parser backend")
    p.add_argument("--backend", required=True, help="'template' or kind:endpoint")
    p.add_argument("--lexicon", help="lexicon path (template backend only)")
    p.set_defaults(func=cmd_check_backend)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return STAGE_ERROR
    except (ConfigError, LexiconError, GrammarError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
