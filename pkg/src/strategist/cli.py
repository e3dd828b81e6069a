"""``strategist`` command line.

Exit codes: 0 ok, 2 usage or configuration error, 3 pipeline stage failure,
4 network failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from strategist.config import ConfigError, RunConfig, load_config
from strategist.errors import InvalidInput, ParseError
from strategist.evaluation import (
    ManifestError,
    OfflineEngine,
    PubMedEngine,
    error_buckets,
    load_manifest,
    rerun_with_objectives,
    run_benchmark,
    summary_table,
)
from strategist.llm import FixtureStore, Gateway, MissingFixture, OpenAICompatibleProvider, ProviderHttpError
from strategist.pipeline import PicoElements, StageFailure, StrategyChain, write_artifact
from strategist.query import parse_pubmed, pretty, serialize_pubmed, to_dict
from strategist.retrieval import PubMedClient, eval_query, index_corpus, load_corpus
from strategist.retrieval.index import DocRecord

EXIT_OK, EXIT_USAGE, EXIT_STAGE, EXIT_NETWORK = 0, 2, 3, 4

logger = logging.getLogger("strategist")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE) -> None:
        super().__init__(message)
        self.code = code


def _read_text(path: str | None) -> str | None:
    if path is None:
        return None
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _config(args: argparse.Namespace, *, needs_engine: bool = False) -> RunConfig:
    flags = {
        name: getattr(args, name, None)
        for name in (
            "mode", "engine", "entry", "tag", "include_roles", "parallelism", "corpus",
            "fixtures", "output_dir", "llm_model", "llm_base_url", "retmax",
        )
    }
    if getattr(args, "review_pass", False):
        flags["review_pass"] = True
    if getattr(args, "no_date_ceiling", False):
        flags["date_ceiling"] = False
    return load_config(flags, config_path=getattr(args, "config", None)).check(needs_engine=needs_engine)


def build_gateway(cfg: RunConfig) -> Gateway:
    store = FixtureStore(cfg.fixture_dir) if cfg.fixture_dir is not None else None
    provider = None
    if cfg.mode in ("live", "record"):
        provider = OpenAICompatibleProvider(cfg.llm_api_key, cfg.llm_base_url)
    return Gateway(provider, model=cfg.llm_model, mode=cfg.mode, store=store, max_attempts=cfg.max_attempts)


def build_chain(cfg: RunConfig) -> StrategyChain:
    return StrategyChain(build_gateway(cfg), tag=cfg.tag, include_roles=cfg.include_roles, review_pass=cfg.review_pass)


def new_run_dir(root: Path, run_id: str | None) -> Path:
    """Create a fresh ``runs/<run-id>`` directory; existing runs are never reused."""
    if run_id is None:
        run_id = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        candidate, n = root / run_id, 1
        while candidate.exists():
            n += 1
            candidate = root / f"{run_id}-{n}"
    else:
        candidate = root / run_id
        if candidate.exists():
            raise CliError(f"run directory {candidate} already exists")
    candidate.mkdir(parents=True)
    return candidate


def _stage_error(exc: StageFailure) -> CliError:
    cause = exc.cause
    if isinstance(cause, MissingFixture):
        return CliError(f"replay fixture missing at stage {exc.stage!r}: digest {cause.digest}", EXIT_USAGE)
    if isinstance(cause, ProviderHttpError):
        return CliError(f"stage {exc.stage!r}: {cause}", EXIT_NETWORK)
    return CliError(f"stage {exc.stage!r} failed: {cause}", EXIT_STAGE)


def cmd_strategy(args: argparse.Namespace) -> int:
    cfg = _config(args)
    title = args.title or ""
    abstract = args.abstract or _read_text(args.abstract_file) or ""
    objective = args.objective or _read_text(args.objective_file)
    pico = None
    if args.pico_file:
        try:
            pico = PicoElements.model_validate_json(_read_text(args.pico_file) or "")
        except ValueError as exc:
            raise CliError(f"{args.pico_file}: not a valid PICO document: {exc}") from None

    entry = cfg.entry if args.entry is not None else None
    if entry is None:
        entry = "pico_start" if pico is not None else "objective" if objective else "full"
    if entry == "pico_start" and pico is None:
        raise CliError("--entry pico-start needs --pico-file")
    if entry == "objective" and not objective:
        raise CliError("--entry objective needs --objective or --objective-file")
    if entry == "full" and not title:
        raise CliError("a full run needs --title (or use --objective-file / --pico-file)")

    chain = build_chain(cfg)
    review_id = args.review_id or "strategy"
    run_dir = new_run_dir(cfg.output_dir, args.run_id)
    try:
        artifact = chain.run_chain(
            title,
            abstract,
            objective=objective.strip() if entry == "objective" else None,
            pico=pico if entry == "pico_start" else None,
            review_id=review_id,
        )
    except StageFailure as exc:
        path = write_artifact(exc.partial, run_dir, review_id)
        logger.error("partial artifact written to %s", path)
        raise _stage_error(exc) from None
    path = write_artifact(artifact, run_dir, review_id)
    print(artifact.serialized_query)
    print(f"artifact: {path}", file=sys.stderr)
    return EXIT_OK


def _engine(cfg: RunConfig):
    if cfg.engine == "offline":
        try:
            return OfflineEngine(index_corpus(load_corpus(cfg.corpus)), cfg.retmax)
        except OSError as exc:
            raise CliError(f"cannot read corpus {cfg.corpus}: {exc.strerror}") from None
    return PubMedEngine(PubMedClient(cfg.pubmed_api_key), cfg.retmax, cfg.date_ceiling)


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _config(args, needs_engine=True)
    try:
        records = load_manifest(args.manifest)
    except ManifestError as exc:
        raise CliError(f"manifest error: {exc}") from None
    engine = _engine(cfg)
    chain = build_chain(cfg)
    run_dir = new_run_dir(cfg.output_dir, args.run_id)
    bench = run_benchmark(
        records,
        chain,
        engine,
        entry=cfg.entry,
        paper_criteria=args.filter_paper_criteria,
        parallelism=cfg.parallelism,
        run_dir=run_dir / "artifacts",
        label=args.label,
    )
    report = bench.report
    (run_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
    (run_dir / "summary.txt").write_text(summary_table([report]), encoding="utf-8")

    corrected = None
    if args.corrected_objectives:
        try:
            objectives = json.loads(_read_text(args.corrected_objectives) or "{}")
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.corrected_objectives}: invalid JSON: {exc.msg}") from None
        corrected = rerun_with_objectives(records, objectives, chain, engine)
    titles = None
    if cfg.engine == "offline":
        titles = {d.doc_id: d.title for d in load_corpus(cfg.corpus)}
    buckets = error_buckets(report.results, bench.artifacts, records, titles=titles, corrected_recall=corrected)
    (run_dir / "error_buckets.json").write_text(json.dumps(buckets, indent=2) + "\n", encoding="utf-8")

    def fmt(v: float | None) -> str:
        return "--" if v is None else f"{v:.4f}"

    print(f"mean recall: {fmt(report.mean_recall)}")
    print(f"mean recall (>0.2 only): {fmt(report.mean_recall_above_0_2)}")
    if report.exclusions:
        print("excluded: " + ", ".join(f"{k}={v}" for k, v in report.exclusions.items()))
    print(f"report: {run_dir / 'report.json'}", file=sys.stderr)
    return EXIT_OK


def _query_text(args: argparse.Namespace) -> str:
    text = args.text if args.text is not None else _read_text(args.query_file)
    if text is None:
        raise CliError("give the query as an argument or with --query-file")
    return text.strip()


def _parse(text: str):
    try:
        return parse_pubmed(text)
    except ParseError as exc:
        raise CliError(f"parse error: {exc}") from None


def cmd_query(args: argparse.Namespace) -> int:
    q = _parse(_query_text(args))
    if args.query_cmd == "parse":
        print(serialize_pubmed(q))
    elif args.query_cmd == "print":
        print(json.dumps(to_dict(q), indent=2) if args.json else pretty(q))
    else:
        try:
            docs: list[DocRecord] = load_corpus(args.corpus)
        except OSError as exc:
            raise CliError(f"cannot read corpus {args.corpus}: {exc.strerror}") from None
        for doc_id in sorted(eval_query(q, index_corpus(docs))):
            print(doc_id)
    return EXIT_OK


def cmd_fixtures(args: argparse.Namespace) -> int:
    if args.fixtures_cmd == "list":
        cfg = load_config({"fixtures": args.fixtures}, config_path=args.config)
        if cfg.fixture_dir is None:
            raise CliError("--fixtures is required")
        store = FixtureStore(cfg.fixture_dir)
        for digest in store.digests():
            doc = store.load(digest)
            first = doc.get("user", "").strip().splitlines()[:1]
            print(f"{digest}  {doc.get('schema', '?'):<12}  {doc.get('model', '?')}  {first[0][:60] if first else ''}")
        return EXIT_OK

    args.mode = "record"
    cfg = _config(args)
    try:
        records = load_manifest(args.manifest)
    except ManifestError as exc:
        raise CliError(f"manifest error: {exc}") from None
    chain = build_chain(cfg)
    failures = 0
    for record in records:
        try:
            if cfg.entry == "pico_start":
                if record.external_pico is None:
                    raise CliError(f"review {record.review_id} has no external_pico")
                chain.run_chain(record.title, record.abstract, pico=record.external_pico, review_id=record.review_id)
            else:
                chain.run_chain(record.title, record.abstract, review_id=record.review_id)
            print(f"recorded {record.review_id}")
        except StageFailure as exc:
            failures += 1
            err = _stage_error(exc)
            print(f"{record.review_id}: {err}", file=sys.stderr)
            if err.code == EXIT_NETWORK:
                return EXIT_NETWORK
    return EXIT_STAGE if failures else EXIT_OK


def _common(p: argparse.ArgumentParser, *, engine: bool = False) -> None:
    p.add_argument("--config", help="path to strategist.toml (default: ./strategist.toml if present)")
    p.add_argument("--mode", choices=["live", "record", "replay"])
    p.add_argument("--fixtures", help="fixture root; LLM recordings live under <fixtures>/llm")
    p.add_argument("--output-dir", dest="output_dir", help="root for run directories (default: runs)")
    p.add_argument("--run-id", dest="run_id")
    p.add_argument("--tag", help="field tag for keywords: tiab, mh, all or tw")
    p.add_argument("--include-roles", dest="include_roles", help="comma list of PICO roles to AND into the query")
    p.add_argument("--review-pass", dest="review_pass", action="store_true", help="let the LLM reorder/drop keywords")
    p.add_argument("--model", dest="llm_model")
    p.add_argument("--base-url", dest="llm_base_url")
    if engine:
        p.add_argument("--engine", choices=["offline", "pubmed"])
        p.add_argument("--corpus", help="JSON-lines corpus for the offline engine")
        p.add_argument("--retmax", type=int)
        p.add_argument("--no-date-ceiling", dest="no_date_ceiling", action="store_true")
        p.add_argument("--parallelism", type=int)


def _entry(value: str) -> str:
    return value.replace("-", "_")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strategist", description="Systematic-review search strategy builder")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("strategy", help="build one search strategy")
    _common(p)
    p.add_argument("--title")
    p.add_argument("--abstract")
    p.add_argument("--abstract-file")
    p.add_argument("--objective")
    p.add_argument("--objective-file")
    p.add_argument("--pico-file", help="JSON PICO elements; starts the chain at concept identification")
    p.add_argument("--entry", type=_entry, choices=["full", "objective", "pico_start"])
    p.add_argument("--review-id")
    p.set_defaults(func=cmd_strategy)

    p = sub.add_parser("bench", help="run a recall benchmark over a manifest")
    _common(p, engine=True)
    p.add_argument("manifest")
    p.add_argument("--entry", type=_entry, choices=["full", "pico_start"])
    p.add_argument("--filter-paper-criteria", action="store_true", help="apply year-window, 1000-citation and API-error exclusions")
    p.add_argument("--label")
    p.add_argument("--corrected-objectives", help="JSON object review_id -> corrected objective, for error triage")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("query", help="parse, print or evaluate query text")
    qsub = p.add_subparsers(dest="query_cmd", required=True)
    for name, help_text in (("parse", "validate and echo the normalized query"), ("print", "show the query tree"), ("eval", "run against a corpus")):
        q = qsub.add_parser(name, help=help_text)
        q.add_argument("text", nargs="?")
        q.add_argument("--query-file")
        if name == "print":
            q.add_argument("--json", action="store_true")
        if name == "eval":
            q.add_argument("--corpus", required=True)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("fixtures", help="record or list LLM fixtures")
    fsub = p.add_subparsers(dest="fixtures_cmd", required=True)
    r = fsub.add_parser("record", help="run the chain over a manifest in record mode")
    _common(r)
    r.add_argument("manifest")
    r.add_argument("--entry", type=_entry, choices=["full", "pico_start"])
    ls = fsub.add_parser("list", help="list recorded exchanges")
    ls.add_argument("--config")
    ls.add_argument("--fixtures", required=True)
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except CliError as exc:
        print(f"strategist: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, InvalidInput) as exc:
        print(f"strategist: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run(argv: Sequence[str] | None = None) -> Any:
    sys.exit(main(argv))


if __name__ == "__main__":
    run()
