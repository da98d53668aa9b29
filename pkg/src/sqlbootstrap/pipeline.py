"""End-to-end run orchestration: generate, sample, paraphrase, filter, train, evaluate.

A run is described by one declarative config file and produces a manifest
recording the config digest, per-stage counts, and a content digest for every
artifact file. Runs with builtin components are fully deterministic: the same
config yields a byte-identical manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import datasets
from .backend import (
    ParserBackend,
    RemoteBackend,
    TemplateParserBackend,
    TemplateParserConfig,
)
from .filtering import render_filter_table, run_filter
from .grammar import count_expansions, expand, load_grammar
from .lexicon import load_lexicon, load_schema
from .metrics import diversity_report, evaluate, render_eval_table
from .paraphrase import run_providers
from .sampling import sample_uat, sampling_report
from .wire import ProviderSpec


class ConfigError(Exception):
    """Unusable run configuration (missing key, bad value, unknown block)."""


class PipelineStageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


@dataclass
class PipelineConfig:
    grammar: Path
    lexicon: Path
    schema: Path | None = None
    sample_fraction: float = 0.1
    seed: int = 0
    rounds: int = 3
    match: str = "exact"
    candidates_per_utterance: int = 2
    backend: str = "template"
    fold_synonyms: bool = False
    theta: int | None = None
    theta_factor: float = 0.25
    eval_set: Path | None = None
    providers: list[ProviderSpec] = field(default_factory=list)
    raw_text: str = ""

    def backend_instance(self, lexicon) -> ParserBackend:
        if self.backend == "template":
            return TemplateParserBackend(
                lexicon,
                TemplateParserConfig(
                    fold_synonyms=self.fold_synonyms,
                    theta=self.theta,
                    theta_factor=self.theta_factor,
                ),
            )
        kind, _, endpoint = self.backend.partition(":")
        return RemoteBackend(ProviderSpec(name=kind, kind=kind, endpoint=endpoint))


_BOOLEANS = {"true": True, "yes": True, "on": True, "false": False, "no": False, "off": False}


def parse_config(text: str, base_dir: str | Path = ".") -> PipelineConfig:
    """Parse the key/value run config with nested ``provider <name> { ... }`` blocks."""
    base = Path(base_dir)
    values: dict[str, str] = {}
    providers: list[ProviderSpec] = []
    block_name: str | None = None
    block_values: dict[str, str] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if block_name is not None:
            if line == "}":
                providers.append(_build_provider(block_name, block_values, lineno))
                block_name, block_values = None, {}
            elif "=" in line:
                key, _, value = line.partition("=")
                block_values[key.strip()] = value.strip()
            else:
                raise ConfigError(f"line {lineno}: expected 'key = value' or '}}'")
            continue
        if line.startswith("provider ") and line.endswith("{"):
            block_name = line[len("provider"):-1].strip()
            if not block_name:
                raise ConfigError(f"line {lineno}: provider block needs a name")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    if block_name is not None:
        raise ConfigError(f"provider block '{block_name}' never closed")

    def path_of(key: str, required: bool = False) -> Path | None:
        if key not in values:
            if required:
                raise ConfigError(f"config is missing required key '{key}'")
            return None
        return base / values[key]

    def number(key: str, default, cast):
        if key not in values:
            return default
        try:
            return cast(values[key])
        except ValueError:
            raise ConfigError(f"config key '{key}' is not a valid {cast.__name__}")

    theta_raw = values.get("theta", "auto")
    try:
        theta = None if theta_raw == "auto" else int(theta_raw)
    except ValueError:
        raise ConfigError("config key 'theta' must be an integer or 'auto'")

    fold_raw = values.get("fold_synonyms", "false").lower()
    if fold_raw not in _BOOLEANS:
        raise ConfigError("config key 'fold_synonyms' must be true or false")

    match = values.get("match", "exact")
    if match not in ("exact", "no_order"):
        raise ConfigError("config key 'match' must be 'exact' or 'no_order'")

    return PipelineConfig(
        grammar=path_of("grammar", required=True),
        lexicon=path_of("lexicon", required=True),
        schema=path_of("schema"),
        sample_fraction=number("sample_fraction", 0.1, float),
        seed=number("seed", 0, int),
        rounds=number("rounds", 3, int),
        match=match,
        candidates_per_utterance=number("candidates_per_utterance", 2, int),
        backend=values.get("backend", "template"),
        fold_synonyms=_BOOLEANS[fold_raw],
        theta=theta,
        theta_factor=number("theta_factor", 0.25, float),
        eval_set=path_of("eval_set"),
        providers=providers,
        raw_text=text,
    )


def _build_provider(name: str, values: dict[str, str], lineno: int) -> ProviderSpec:
    kind = values.get("kind", "builtin")
    try:
        return ProviderSpec(
            name=name,
            kind=kind,
            endpoint=values.get("endpoint", values.get("command", "")),
            batch_size=int(values.get("batch_size", "32")),
            timeout=float(values.get("timeout", "30")),
        )
    except ValueError as exc:
        raise ConfigError(f"provider '{name}' (near line {lineno}): {exc}")


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)


def run_pipeline(config: PipelineConfig, out_dir: str | Path, resume: bool = False) -> dict:
    """Execute all stages, write artifacts + manifest under out_dir, return the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    checkpoint_file = out / "checkpoint.json"
    completed: list[str] = []
    if resume and checkpoint_file.exists():
        completed = json.loads(checkpoint_file.read_text(encoding="utf-8"))["completed"]

    manifest: dict = {
        "config_digest": datasets.text_digest(config.raw_text),
        "seed": config.seed,
        "match": config.match,
        "backend": {
            "name": config.backend,
            "fold_synonyms": config.fold_synonyms,
            "theta": config.theta,
            "theta_factor": config.theta_factor,
        },
        "stages": {},
        "artifacts": {},
    }

    def artifact(name: str) -> None:
        manifest["artifacts"][name] = datasets.file_digest(out / name)

    def mark_done(stage: str) -> None:
        completed.append(stage)
        checkpoint_file.write_text(
            json.dumps({"completed": completed}, indent=2) + "\n", encoding="utf-8"
        )

    # -- load ---------------------------------------------------------------
    try:
        lexicon = load_lexicon(config.lexicon)
        if config.schema is not None:
            lexicon.validate_bindings(load_schema(config.schema))
        grammar = load_grammar(config.grammar, lexicon)
    except Exception as exc:
        raise ConfigError(f"loading inputs failed: {exc}")

    # -- generate -------------------------------------------------------------
    stage = "generate"
    try:
        if stage in completed:
            pairs = datasets.read_pairs(out / "synthetic.jsonl")
        else:
            pairs = list(expand(grammar, lexicon))
            assert len(pairs) == count_expansions(grammar, lexicon)
            datasets.write_pairs(out / "synthetic.jsonl", pairs)
            mark_done(stage)
        artifact("synthetic.jsonl")
        generated_report = sampling_report(pairs)
        manifest["stages"]["generate"] = {
            "pairs": len(pairs),
            "templates": generated_report.template_count,
            "abstract_fraction": generated_report.abstract_fraction,
        }
    except Exception as exc:
        raise PipelineStageError(stage, exc)

    # -- sample ---------------------------------------------------------------
    stage = "sample"
    paraphrasing = config.sample_fraction > 0 and config.providers
    try:
        if paraphrasing:
            if stage in completed:
                sampled = datasets.read_pairs(out / "sampled.jsonl")
            else:
                sampled = sample_uat(pairs, config.sample_fraction, config.seed)
                datasets.write_pairs(out / "sampled.jsonl", sampled)
                mark_done(stage)
            artifact("sampled.jsonl")
            report = sampling_report(sampled, population=len(pairs))
            manifest["stages"]["sample"] = report.to_dict()
        else:
            sampled = []
            manifest["stages"]["sample"] = {"skipped": True}
    except Exception as exc:
        raise PipelineStageError(stage, exc)

    # -- paraphrase -------------------------------------------------------------
    stage = "paraphrase"
    try:
        if paraphrasing:
            if stage in completed:
                candidates = datasets.read_candidates(out / "candidates.jsonl")
            else:
                per_pair = run_providers(
                    config.providers, sampled,
                    k=config.candidates_per_utterance, seed=config.seed,
                )
                candidates = [c for group in per_pair for c in group]
                datasets.write_candidates(out / "candidates.jsonl", candidates)
                mark_done(stage)
            artifact("candidates.jsonl")
            manifest["stages"]["paraphrase"] = {
                "candidates": len(candidates),
                "valid": sum(1 for c in candidates if c.valid),
                "invalid": sum(1 for c in candidates if not c.valid),
                "duplicates": sum(1 for c in candidates if c.duplicate),
                "providers": [p.name for p in config.providers],
            }
            diversity = {}
            for provider in config.providers:
                own = [c for c in candidates if c.provider == provider.name and c.valid]
                if own:
                    diversity[provider.name] = diversity_report(
                        [c.text for c in own], [c.source_utterance for c in own]
                    ).to_dict()
            manifest["stages"]["paraphrase"]["diversity"] = diversity
        else:
            candidates = []
            manifest["stages"]["paraphrase"] = {"skipped": True}
    except Exception as exc:
        raise PipelineStageError(stage, exc)

    # -- filter -----------------------------------------------------------------
    stage = "filter"
    backend = config.backend_instance(lexicon)
    try:
        if candidates:
            result = run_filter(
                pairs, candidates, backend,
                rounds=config.rounds, match=config.match, seed=config.seed,
                checkpoint_path=out / "filter_checkpoint.json", resume=resume,
            )
            datasets.write_candidates(out / "kept.jsonl", result.kept)
            datasets.write_jsonl(
                out / "filter_rounds.jsonl", (r.to_dict() for r in result.reports)
            )
            (out / "filter_table.txt").write_text(
                render_filter_table(result.reports), encoding="utf-8"
            )
            artifact("kept.jsonl")
            artifact("filter_rounds.jsonl")
            artifact("filter_table.txt")
            manifest["stages"]["filter"] = {
                "rounds_run": len(result.reports),
                "kept": len(result.kept),
                "invalid_excluded": result.invalid,
                "total_candidates": result.total_candidates,
                "kept_per_round": [r.kept_this_round for r in result.reports],
                "cumulative_fraction": [r.cumulative_fraction for r in result.reports],
            }
            kept = result.kept
        else:
            kept = []
            manifest["stages"]["filter"] = {"skipped": True}
        if not (stage in completed) and candidates:
            mark_done(stage)
    except Exception as exc:
        raise PipelineStageError(stage, exc)

    # -- train + evaluate -------------------------------------------------------
    stage = "evaluate"
    try:
        pair_by_id = {pair.pair_id: pair for pair in pairs}
        training = [(pair.utterance, pair.sql) for pair in pairs]
        training += [(c.text, pair_by_id[c.source_pair_ref].sql) for c in kept]
        model = backend.train(training, seed=config.seed)
        manifest["stages"]["train"] = {"examples": len(training)}
        if config.eval_set is not None:
            examples = datasets.read_examples(config.eval_set)
            predictions = [model.predict(utterance) or "" for utterance, _ in examples]
            report = evaluate(predictions, [sql for _, sql in examples])
            (out / "eval.json").write_text(
                json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n",
                encoding="utf-8",
            )
            (out / "eval_table.txt").write_text(render_eval_table(report), encoding="utf-8")
            artifact("eval.json")
            artifact("eval_table.txt")
            manifest["stages"]["evaluate"] = report.to_dict()
        else:
            manifest["stages"]["evaluate"] = {"skipped": True}
    except Exception as exc:
        raise PipelineStageError(stage, exc)
    finally:
        if isinstance(backend, RemoteBackend):
            backend.close()

    manifest_text = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    (out / "manifest.json").write_text(manifest_text, encoding="utf-8")
    if checkpoint_file.exists():
        checkpoint_file.unlink()
    filter_checkpoint = out / "filter_checkpoint.json"
    if filter_checkpoint.exists():
        filter_checkpoint.unlink()
    return manifest
