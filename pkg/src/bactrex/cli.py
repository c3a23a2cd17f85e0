"""Command-line front end.

Subcommands::

    bactrex corpus validate <dir> [--kind sentence|passage]
    bactrex harmonize --out <dir> <descriptor.json> [<descriptor.json> ...]
    bactrex dataset build <corpus-dir> --out <file> [--kind sentence]
    bactrex baseline train <corpus-dir> [--runs K] [--save <model.json>]
    bactrex baseline eval <corpus-dir> --model <model.json>
    bactrex extract --mode {ss-ner-ie|ner-ie|only-ie} <input> [--out <file>]
    bactrex ablate <e2e-corpus-dir> [--oracle]
    bactrex casestudy run <network.tsv> [--offline-store <dir>] [--out <file>]

Options come from (lowest to highest precedence) built-in defaults, the
``--config`` JSON file, the ``BACTREX_NER_ENDPOINT`` /
``BACTREX_SCORE_ENDPOINT`` environment variables, then command-line
flags. Unknown config keys are rejected. One ``--seed`` governs the
split, training and run derivation (run ``i`` uses ``seed + i``).

Exit status: 0 success, 1 failed validation or empty result where content
was required, 2 configuration/usage error, 3 data error (parse failures,
missing files, protocol violations).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from bactrex import casestudy as cs
from bactrex import classify, evaluate, harmonize, ner, pipeline, transform
from bactrex.corpus import Corpus, CorpusKind, load_corpus
from bactrex.errors import BactrexError, ConfigError
from bactrex.segment import default_guard, load_guard, segment

logger = logging.getLogger("bactrex")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_DATA = 3


@dataclasses.dataclass
class Config:
    gazetteer: str | None = None
    guard_file: str | None = None
    cache_dir: str | None = None
    offline_store: str | None = None
    litsense_url: str | None = None
    ner_endpoint: str | None = None
    score_endpoint: str | None = None
    tagger_backend: str = "gazetteer"
    classifier_backend: str = "baseline"
    model_path: str | None = None
    threshold: float = 0.5
    seed: int = 0
    runs: int = 3
    fetch_cap: int = cs.DEFAULT_FETCH_CAP
    allow_network: bool = False


def load_config(path: str | Path | None) -> Config:
    config = Config()
    if path is not None:
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        known = {f.name for f in dataclasses.fields(Config)}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
        for key, value in payload.items():
            setattr(config, key, value)
    if os.environ.get("BACTREX_NER_ENDPOINT"):
        config.ner_endpoint = os.environ["BACTREX_NER_ENDPOINT"]
    if os.environ.get("BACTREX_SCORE_ENDPOINT"):
        config.score_endpoint = os.environ["BACTREX_SCORE_ENDPOINT"]
    if not 0.0 < config.threshold < 1.0:
        raise ConfigError(f"threshold must be inside (0, 1), got {config.threshold}")
    return config


def _guard(config: Config):
    return load_guard(config.guard_file) if config.guard_file else default_guard()


def _components(config: Config) -> pipeline.PipelineComponents:
    tagger = ner.make_tagger(
        ner.TaggerConfig(
            backend=config.tagger_backend,
            endpoint=config.ner_endpoint if config.tagger_backend == "remote" else None,
            gazetteer_path=config.gazetteer,
        )
    )
    classifier = classify.make_classifier(
        classify.ClassifierConfig(
            backend=config.classifier_backend,
            threshold=config.threshold,
            endpoint=config.score_endpoint if config.classifier_backend == "remote" else None,
            model_path=config.model_path,
        )
    )
    guard = _guard(config)
    return pipeline.PipelineComponents(
        segmenter=lambda text: segment(text, guard),
        tagger=tagger,
        classifier=classifier,
        threshold=config.threshold,
    )


def _kind(value: str) -> CorpusKind:
    return CorpusKind.SENTENCE if value == "sentence" else CorpusKind.PASSAGE


def _read_exact(path: Path) -> str:
    # newline="" keeps offsets exact: no newline translation on read.
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def cmd_corpus_validate(args: argparse.Namespace, config: Config) -> int:
    violations = 0
    root = Path(args.directory)
    txt_files = sorted(root.glob("*.txt"))
    stems = {p.stem for p in txt_files} | {p.stem for p in root.glob("*.ann")}
    if not stems:
        print(f"{root}: no document pairs found")
        return EXIT_FAILED
    from bactrex.corpus import parse_brat

    for stem in sorted(stems):
        txt, ann = root / f"{stem}.txt", root / f"{stem}.ann"
        if not txt.exists() or not ann.exists():
            print(f"{stem}: missing {'.txt' if not txt.exists() else '.ann'} sibling")
            violations += 1
            continue
        try:
            doc = parse_brat(_read_exact(txt), _read_exact(ann), doc_id=stem)
        except BactrexError as exc:
            print(f"{stem}: {exc}")
            violations += 1
            continue
        print(f"{stem}: ok ({len(doc.entities)} entities, {len(doc.relations)} relations)")
    if violations:
        print(f"{violations} violation(s)")
        return EXIT_FAILED
    print("all documents valid")
    return EXIT_OK


def _load_descriptor(path: Path) -> tuple[harmonize.SourceCorpusDescriptor, Path]:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        descriptor = harmonize.SourceCorpusDescriptor(
            name=payload["name"],
            format=payload["format"],
            entity_label_map=payload.get("entity_label_map", {}),
            relation_label_map=payload.get("relation_label_map", {}),
        )
        source_path = Path(payload["path"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad descriptor: {exc}") from exc
    if not source_path.is_absolute():
        source_path = path.parent / source_path
    return descriptor, source_path


def cmd_harmonize(args: argparse.Namespace, config: Config) -> int:
    guard = _guard(config)
    segmenter = lambda text: segment(text, guard)
    parts = []
    total = None
    for descriptor_path in args.descriptors:
        descriptor, source_path = _load_descriptor(Path(descriptor_path))
        docs = harmonize.parse_source(descriptor, source_path)
        part, report = harmonize.harmonize(docs, descriptor, segmenter)
        logger.info(
            "%s: %d sentences, %d/%d relations kept",
            descriptor.name, len(part.sentences), report.relations_kept, report.relations_total,
        )
        parts.append(part)
        if total is None:
            total = report
        else:
            total.add(report)
    merged = harmonize.merge_corpora(parts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    count = transform.write_dataset(transform.make_dataset(merged), out / "instances.jsonl")
    (out / "drop_report.json").write_text(
        json.dumps(total.to_dict() if total else {}, indent=2), encoding="utf-8"
    )
    print(f"{len(merged.sentences)} sentences from {len(parts)} source(s)")
    print(f"{count} instance records -> {out / 'instances.jsonl'}")
    if total:
        print(
            f"relations: {total.relations_kept} kept, "
            f"{total.relations_cross_sentence} cross-sentence dropped, "
            f"{total.relations_orphaned} orphaned"
        )
    return EXIT_OK


def cmd_dataset_build(args: argparse.Namespace, config: Config) -> int:
    corpus = load_corpus(args.corpus, _kind(args.kind))
    count = transform.write_dataset(transform.make_dataset(corpus), args.out)
    print(f"{count} instance records -> {args.out}")
    return EXIT_OK


def _split_and_instances(corpus: Corpus, config: Config):
    train_corpus, test_corpus = evaluate.split(corpus, seed=config.seed)
    return transform.make_dataset(train_corpus), transform.make_dataset(test_corpus)


def cmd_baseline_train(args: argparse.Namespace, config: Config) -> int:
    corpus = load_corpus(args.corpus, CorpusKind.SENTENCE)
    train, test = _split_and_instances(corpus, config)
    gold = [bool(inst.label) for inst in test]
    runs = []
    best_model = None
    for run in range(config.runs):
        model = classify.fit_baseline(train, seed=config.seed + run)
        backend = classify.BaselineClassifier(model)
        scores = backend.score_batch([inst.tagged_text for inst in test])
        predictions = [s >= config.threshold for s in scores]
        metrics = evaluate.evaluate_instances(predictions, gold)
        runs.append(metrics)
        if best_model is None or metrics.f1 >= max(m.f1 for m in runs):
            best_model = model
        logger.info("run %d: P %.3f R %.3f F1 %.3f", run, metrics.precision, metrics.recall, metrics.f1)
    if config.runs >= 2:
        table = evaluate.render_aggregate_table({"Baseline": evaluate.aggregate(runs)})
    else:
        table = evaluate.render_metric_table({"Baseline": runs[0]})
    print(f"split: {len(train)} train / {len(test)} test instances, threshold {config.threshold}")
    print(table)
    if args.save and best_model is not None:
        classify.save_model(best_model, args.save)
        print(f"model -> {args.save}")
    return EXIT_OK


def cmd_baseline_eval(args: argparse.Namespace, config: Config) -> int:
    corpus = load_corpus(args.corpus, CorpusKind.SENTENCE)
    instances = transform.make_dataset(corpus)
    backend = classify.BaselineClassifier(classify.load_model(args.model))
    scores = backend.score_batch([inst.tagged_text for inst in instances])
    predictions = [s >= config.threshold for s in scores]
    gold = [bool(inst.label) for inst in instances]
    metrics = evaluate.evaluate_instances(predictions, gold)
    print(evaluate.render_metric_table({"Baseline": metrics}))
    return EXIT_OK


def cmd_extract(args: argparse.Namespace, config: Config) -> int:
    components = _components(config)
    mode = pipeline.PipelineMode(args.mode)
    source = Path(args.input)
    if source.is_dir():
        docs = list(load_corpus(source, CorpusKind.PASSAGE).documents)
    else:
        from bactrex.corpus import AnnotatedDocument

        if mode is not pipeline.PipelineMode.SS_NER_IE:
            raise ConfigError("raw text input supports only --mode ss-ner-ie")
        docs = [AnnotatedDocument(_read_exact(source), (), (), doc_id=source.stem)]
    predictions = []
    for doc in docs:
        boundaries = None
        if mode is not pipeline.PipelineMode.SS_NER_IE:
            boundaries = pipeline.oracle_boundaries(doc, _guard(config))
        predictions.extend(pipeline.extract(doc, mode, components, gold_boundaries=boundaries))
    records = [pipeline.prediction_record(p) for p in predictions]
    if args.out:
        pipeline.write_predictions(predictions, args.out)
        print(f"{len(records)} prediction(s) -> {args.out}")
    else:
        for record in records:
            print(json.dumps(record, ensure_ascii=False))
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace, config: Config) -> int:
    corpus = load_corpus(args.corpus, CorpusKind.PASSAGE)
    components = _components(config)
    report = pipeline.ablation_report(
        corpus, components, oracle_components=args.oracle, guard=_guard(config)
    )
    print(pipeline.render_ablation_table(report))
    return EXIT_OK


def cmd_casestudy_run(args: argparse.Namespace, config: Config) -> int:
    network = cs.load_network(args.network)
    components = _components(config)
    offline = args.offline_store or config.offline_store
    if offline:
        source: cs.SentenceSource = cs.LocalSentenceStore(Path(offline))
    elif config.allow_network and config.litsense_url:
        source = cs.LitsenseClient(config.litsense_url)
    else:
        raise ConfigError(
            "no sentence source: pass --offline-store or enable allow_network "
            "with a litsense_url in the config"
        )
    if config.cache_dir:
        source = cs.CachedSource(Path(config.cache_dir), source)
    report = cs.validate_network(network, components, source, fetch_cap=config.fetch_cap)
    payload = report.to_json()
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        print(f"report -> {args.out}")
    summary = report.to_dict()["summary"]
    print(
        f"{summary['edges_with_support']} of {summary['edges_total']} edges have "
        f"probable sentences ({summary['probable_sentences']} sentences; recall unmeasured)"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bactrex", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="master seed (run i uses seed + i)")
    parser.add_argument("--threshold", type=float, help="decision threshold in (0, 1)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    corpus_p = sub.add_parser("corpus", help="corpus inspection")
    corpus_sub = corpus_p.add_subparsers(dest="subcommand", required=True)
    validate_p = corpus_sub.add_parser("validate", help="parse and check every document pair")
    validate_p.add_argument("directory")
    validate_p.add_argument("--kind", choices=["sentence", "passage"], default="passage")
    validate_p.set_defaults(func=cmd_corpus_validate)

    harmonize_p = sub.add_parser("harmonize", help="normalize external corpora")
    harmonize_p.add_argument("descriptors", nargs="+", metavar="descriptor.json")
    harmonize_p.add_argument("--out", required=True, help="output directory")
    harmonize_p.set_defaults(func=cmd_harmonize)

    dataset_p = sub.add_parser("dataset", help="classification datasets")
    dataset_sub = dataset_p.add_subparsers(dest="subcommand", required=True)
    build_p = dataset_sub.add_parser("build", help="corpus -> instance records")
    build_p.add_argument("corpus")
    build_p.add_argument("--out", required=True)
    build_p.add_argument("--kind", choices=["sentence", "passage"], default="sentence")
    build_p.set_defaults(func=cmd_dataset_build)

    baseline_p = sub.add_parser("baseline", help="lexical baseline model")
    baseline_sub = baseline_p.add_subparsers(dest="subcommand", required=True)
    train_p = baseline_sub.add_parser("train", help="fit over repeated runs and report")
    train_p.add_argument("corpus")
    train_p.add_argument("--runs", type=int, help="number of training runs")
    train_p.add_argument("--save", help="write the best model as JSON")
    train_p.set_defaults(func=cmd_baseline_train)
    eval_p = baseline_sub.add_parser("eval", help="evaluate a saved model")
    eval_p.add_argument("corpus")
    eval_p.add_argument("--model", required=True)
    eval_p.set_defaults(func=cmd_baseline_eval)

    extract_p = sub.add_parser("extract", help="run the end-to-end extractor")
    extract_p.add_argument("input", help="passage corpus directory or raw .txt file")
    extract_p.add_argument(
        "--mode", choices=[m.value for m in pipeline.PipelineMode], default="ss-ner-ie"
    )
    extract_p.add_argument("--out", help="write prediction records here instead of stdout")
    extract_p.set_defaults(func=cmd_extract)

    ablate_p = sub.add_parser("ablate", help="three-mode ablation table")
    ablate_p.add_argument("corpus", help="gold passage corpus directory")
    ablate_p.add_argument(
        "--oracle", action="store_true", help="replace segmenter and tagger with gold oracles"
    )
    ablate_p.set_defaults(func=cmd_ablate)

    casestudy_p = sub.add_parser("casestudy", help="network validation")
    casestudy_sub = casestudy_p.add_subparsers(dest="subcommand", required=True)
    run_p = casestudy_sub.add_parser("run", help="validate a network against literature")
    run_p.add_argument("network", help="edge list file (two tab-separated names per line)")
    run_p.add_argument("--offline-store", help="directory of per-pair sentence files")
    run_p.add_argument("--out", help="write the JSON report here")
    run_p.set_defaults(func=cmd_casestudy_run)

    return parser


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.threshold is not None:
            config.threshold = args.threshold
        if getattr(args, "runs", None) is not None:
            config.runs = args.runs
        if not 0.0 < config.threshold < 1.0:
            raise ConfigError(f"threshold must be inside (0, 1), got {config.threshold}")
        return args.func(args, config)
    except ConfigError as exc:
        logger.error("%s", exc)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BactrexError as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
