"""Batch command-line front-end.

Subcommands wire the library into file-to-file pipelines:

- ``project``   alignment-based label projection over parallel files
- ``tproject``  candidate generation/selection projection
- ``decode``    constrained (or unconstrained) generation with mock models
- ``diagnose``  error taxonomy over raw generation output
- ``eval``      entity-level F1 between two column files
- ``convert``   column file / tagged text / tag scheme conversions

Exit codes: 0 success, 1 input or contract error, 2 internal error. All
output is deterministic given identical inputs and flags.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .candidates import external_candidates, filter_candidates, generate_ngram_candidates
from .core import (
    CATEGORY_PATTERN,
    LabeledSentence,
    Span,
    TagScheme,
    spans_to_tags,
    tags_to_spans,
)
from .diagnostics import corpus_rates, diagnose, to_iob2_lenient
from .engine import constrained_beam, unconstrained_beam
from .evaluation import f1_from_tag_files
from .formats import (
    build_table_model,
    load_score_cache,
    load_table_model_spec,
    read_candidate_file,
    read_conll,
    read_pharaoh,
    read_tagged,
    read_tokens,
    save_score_cache,
    write_conll,
    write_labeled_conll,
    write_tagged,
)
from .models import (
    CharChunkSplitter,
    MockTokenizer,
    SeededRandomModel,
    Vocabulary,
    WholeWordSplitter,
)
from .projection import project
from .scoring import CharOverlapScorer, ScoreCache, SeededRandomScorer, TableScorer
from .selection import candidate_sweep, oracle_upper_bound, select_candidates, select_most_probable

__all__ = ["main"]


def _scheme(value: str) -> TagScheme:
    return TagScheme(value)


def _conll_sentences(path, scheme: TagScheme) -> list[LabeledSentence]:
    return [
        LabeledSentence(words, tags_to_spans(tags, scheme))
        for words, tags in read_conll(path)
    ]


def _check_parallel(name_a: str, a, name_b: str, b) -> None:
    if len(a) != len(b):
        raise ValueError(
            f"{name_a} and {name_b} diverge at index {min(len(a), len(b))}: "
            f"{len(a)} vs {len(b)} lines")


def cmd_project(args) -> int:
    scheme = _scheme(args.scheme)
    sources = _conll_sentences(args.source, scheme)
    targets = read_tokens(args.target)
    alignments = read_pharaoh(args.alignments)
    _check_parallel("source", sources, "target", targets)
    _check_parallel("source", sources, "alignments", alignments)

    projected = []
    rows = []
    for k, (src, words, align) in enumerate(zip(sources, targets, alignments)):
        try:
            report = project(src, words, align)
        except ValueError as exc:
            raise ValueError(f"sentence {k}: {exc}") from exc
        projected.append(LabeledSentence(words, report.projected))
        rows.append([
            k, len(report.projected), report.merged_gaps, report.dropped_splits,
            report.collisions_merged, report.collisions_resolved,
            report.punct_alignments_ignored, report.unaligned_spans,
        ])
    write_labeled_conll(args.output, projected, scheme)
    if args.report:
        header = [
            "sentence", "projected", "merged_gaps", "dropped_splits",
            "collisions_merged", "collisions_resolved",
            "punct_alignments_ignored", "unaligned_spans",
        ]
        totals = ["total"] + [sum(r[i] for r in rows) for i in range(1, len(header))]
        _write_csv(args.report, header, rows + [totals])
    return 0


def _make_scorer(spec: str):
    if spec == "char-overlap":
        return CharOverlapScorer()
    kind, sep, arg = spec.partition(":")
    if kind == "random":
        return SeededRandomScorer(int(arg) if sep and arg else 0)
    if kind == "table" and sep and arg:
        cache = load_score_cache(arg)
        return TableScorer(
            {key: [prob] for key, prob in cache.values.items()})
    raise ValueError(
        f"unknown scorer spec {spec!r}; use char-overlap, random:<seed>, or table:<file>")


def cmd_tproject(args) -> int:
    scheme = _scheme(args.scheme)
    sources = _conll_sentences(args.source, scheme)
    targets = read_tokens(args.target)
    _check_parallel("source", sources, "target", targets)

    if args.ngram:
        pools = [
            generate_ngram_candidates(words, src.spans)
            for src, words in zip(sources, targets)
        ]
    else:
        if not args.candidates:
            raise ValueError("tproject needs --candidates FILE or --ngram")
        by_sentence = read_candidate_file(args.candidates)
        pools = []
        for k, (src, words) in enumerate(zip(sources, targets)):
            ranked = by_sentence.get(k, {})
            unknown = set(ranked) - set(src.spans)
            if unknown:
                raise ValueError(
                    f"sentence {k}: candidate file names unknown spans {sorted(unknown)}")
            pools.append(external_candidates(
                words, {span: ranked.get(span, []) for span in src.spans}))
    pools = [
        filter_candidates(pool, words) for pool, words in zip(pools, targets)
    ]

    gold = _conll_sentences(args.oracle, scheme) if args.oracle else None
    if gold is not None:
        _check_parallel("source", sources, "gold", gold)

    if args.most_probable:
        selected = [select_most_probable(pool) for pool in pools]
    elif args.oracle:
        selected = [
            oracle_upper_bound(pool, g) for pool, g in zip(pools, gold)
        ]
    else:
        scorer = _make_scorer(args.scorer)
        cache = ScoreCache()
        if args.score_cache and Path(args.score_cache).exists():
            cache = load_score_cache(args.score_cache)
        selected = [
            select_candidates(pool, src, scorer, cache)
            for pool, src in zip(pools, sources)
        ]
        if args.score_cache:
            save_score_cache(args.score_cache, cache)
    write_labeled_conll(args.output, selected, scheme)

    if args.sweep:
        if gold is None:
            raise ValueError("--sweep needs --oracle GOLD for the reference spans")
        ks = [int(k) for k in args.sweep.split(",")]
        weighted = {k: 0.0 for k in ks}
        total_spans = 0
        for pool, g in zip(pools, gold):
            total_spans += len(pool.per_span)
            for k, rate in candidate_sweep(pool, ks, g):
                weighted[k] += rate * len(pool.per_span)
        rows = [
            [k, f"{weighted[k] / total_spans:.6f}" if total_spans else "0.000000"]
            for k in ks
        ]
        _write_csv(args.sweep_output, ["k", "hit_rate"], rows)
    return 0


def _parse_categories(value: str) -> list[str]:
    cats = sorted({c for c in value.split(",") if c})
    if not cats:
        raise ValueError("decode needs a non-empty category list")
    for cat in cats:
        if not CATEGORY_PATTERN.match(cat):
            raise ValueError(f"invalid category name {cat!r}")
    return cats


def _make_splitter(spec: str):
    if spec == "whole":
        return WholeWordSplitter()
    kind, sep, arg = spec.partition(":")
    if kind == "chunk":
        return CharChunkSplitter(int(arg) if sep and arg else 3)
    raise ValueError(f"unknown tokenizer spec {spec!r}; use whole or chunk:<n>")


def cmd_decode(args) -> int:
    sentences = read_tokens(args.input)
    for k, words in enumerate(sentences):
        if not words:
            raise ValueError(f"{args.input}:{k + 1}: empty input sentence")
    categories = _parse_categories(args.categories)
    splitter = _make_splitter(args.tokenizer)
    vocab = Vocabulary.build(sentences, categories, splitter)
    tokenizer = MockTokenizer(vocab, splitter)

    kind, sep, arg = args.model.partition(":")
    if kind == "random":
        model = SeededRandomModel(len(vocab), int(arg) if sep and arg else 0)
    elif kind == "mock-table" and sep and arg:
        model = build_table_model(vocab, load_table_model_spec(arg))
    else:
        raise ValueError(
            f"unknown model spec {args.model!r}; use random:<seed> or mock-table:<file>")

    tagged_lines = []
    conll_rows = []
    for words in sentences:
        if args.unconstrained:
            emitted = unconstrained_beam(
                model, vocab.end_id, args.beam, max_steps=2 * (3 * len(words) + 1))
            text = tokenizer.render(emitted)
            tagged_lines.append(text)
            # sidecar stays aligned with the input so evaluation never aborts
            conll_rows.append((words, to_iob2_lenient(text, len(words))))
        else:
            result = constrained_beam(words, categories, model, tokenizer, args.beam)
            tagged_lines.append(result.tagged_text)
            conll_rows.append(
                (list(result.sentence.words),
                 spans_to_tags(result.sentence, TagScheme.IOB2)))
    Path(args.output).write_text(
        "".join(line + "\n" for line in tagged_lines), encoding="utf-8")
    if args.conll:
        write_conll(args.conll, conll_rows)
    return 0


def cmd_diagnose(args) -> int:
    inputs = read_tokens(args.input)
    outputs = Path(args.output).read_text(encoding="utf-8").splitlines()
    _check_parallel("input", inputs, "output", outputs)
    rows = []
    for k, (words, raw) in enumerate(zip(inputs, outputs)):
        report = diagnose(words, raw)
        rows.append([
            k,
            report.markup_error.kind.value if report.markup_error else "",
            " ".join(sorted(report.hallucinated_words)),
            int(report.splitting),
            int(report.clean),
        ])
    rates = corpus_rates(zip(inputs, outputs))
    summary = [
        "rates_pct", f"{rates.markup_pct:.2f}", f"{rates.hallucination_pct:.2f}",
        f"{rates.splitting_pct:.2f}", f"{rates.any_error_pct:.2f}",
    ]
    if args.csv:
        _write_csv(
            args.csv,
            ["sentence", "markup_error", "hallucinated", "splitting", "clean"],
            rows + [summary])
    print(
        f"sentences={rates.sentences} markup={rates.markup_pct:.2f}% "
        f"hallucination={rates.hallucination_pct:.2f}% "
        f"splitting={rates.splitting_pct:.2f}% any={rates.any_error_pct:.2f}%")
    return 0


def cmd_eval(args) -> int:
    report = f1_from_tag_files(args.gold, args.pred, _scheme(args.scheme))
    rows = []
    for category in report.categories():
        score = report.per_category[category]
        rows.append([
            category, score.tp, score.fp, score.fn,
            f"{score.precision:.4f}", f"{score.recall:.4f}", f"{score.f1:.4f}",
        ])
    micro = report.micro
    rows.append([
        "micro", micro.tp, micro.fp, micro.fn,
        f"{micro.precision:.4f}", f"{micro.recall:.4f}", f"{micro.f1:.4f}",
    ])
    header = ["category", "tp", "fp", "fn", "precision", "recall", "f1"]
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    for row in [header] + rows:
        print("  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)).rstrip())
    if args.csv:
        _write_csv(args.csv, header, rows)
    return 0


def _parse_rename(value: str | None) -> dict[str, str]:
    mapping: dict[str, str] = {}
    if not value:
        return mapping
    for item in value.split(","):
        old, sep, new = item.partition("=")
        if not sep or not old or not CATEGORY_PATTERN.match(new):
            raise ValueError(f"bad rename {item!r}; use Old=New[,Old2=New2]")
        mapping[old] = new
    return mapping


def cmd_convert(args) -> int:
    scheme_in = _scheme(args.scheme_in)
    scheme_out = _scheme(args.scheme_out)
    if args.input_format == "conll":
        sentences = _conll_sentences(args.input, scheme_in)
    else:
        sentences = read_tagged(args.input)
    rename = _parse_rename(args.rename)
    if rename:
        sentences = [
            LabeledSentence(
                s.words,
                (Span(sp.start, sp.end, rename.get(sp.category, sp.category))
                 for sp in s.spans))
            for s in sentences
        ]
    if args.output_format == "conll":
        write_labeled_conll(args.output, sentences, scheme_out)
    else:
        write_tagged(args.output, sentences)
    return 0


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosstag",
        description="Cross-lingual sequence-labeling transfer pipelines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="project labels through word alignments")
    p.add_argument("--source", required=True, help="labeled column file")
    p.add_argument("--target", required=True, help="tokenized target sentences")
    p.add_argument("--alignments", required=True, help="alignment file (i-j pairs)")
    p.add_argument("--output", required=True, help="projected column file")
    p.add_argument("--report", help="per-sentence heuristic counters (CSV)")
    p.add_argument("--scheme", default="iob2", choices=["iob2", "bilou"])
    p.add_argument(
        "--direction", default="train", choices=["train", "test"],
        help="train: gold labels onto translations; test: predictions back "
             "onto originals (alignment source side = labeled side in both)")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("tproject", help="candidate generation/selection projection")
    p.add_argument("--source", required=True, help="labeled column file")
    p.add_argument("--target", required=True, help="tokenized target sentences")
    p.add_argument("--candidates", help="ranked candidate file")
    p.add_argument("--ngram", action="store_true", help="enumerate all target n-grams")
    p.add_argument("--scorer", default="char-overlap",
                   help="char-overlap | random:<seed> | table:<file>")
    p.add_argument("--score-cache", help="replayable p(A|B) cache file")
    p.add_argument("--output", required=True, help="selected-span column file")
    p.add_argument("--scheme", default="iob2", choices=["iob2", "bilou"])
    p.add_argument("--most-probable", action="store_true",
                   help="take each span's top-ranked candidate, no scoring")
    p.add_argument("--oracle", help="gold column file: pick gold candidates when present")
    p.add_argument("--sweep", help="comma-separated candidate counts, e.g. 1,5,10")
    p.add_argument("--sweep-output", default="sweep.csv", help="sweep table (CSV)")
    p.set_defaults(func=cmd_tproject)

    p = sub.add_parser("decode", help="constrained generation over mock models")
    p.add_argument("--input", required=True, help="tokenized sentences, one per line")
    p.add_argument("--categories", required=True, help="comma-separated category names")
    p.add_argument("--model", required=True, help="random:<seed> | mock-table:<file>")
    p.add_argument("--tokenizer", default="whole", help="whole | chunk:<n>")
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--unconstrained", action="store_true",
                   help="decode without masking (for diagnostics demos)")
    p.add_argument("--output", required=True, help="tagged-text output")
    p.add_argument("--conll", help="sidecar column file (IOB2)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("diagnose", help="error taxonomy over raw outputs")
    p.add_argument("--input", required=True, help="tokenized input sentences")
    p.add_argument("--output", required=True, help="raw generation output, one per line")
    p.add_argument("--csv", help="per-sentence diagnoses plus summary row")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("eval", help="entity-level F1 between column files")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--scheme", default="iob2", choices=["iob2", "bilou"])
    p.add_argument("--csv", help="write the score table as CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("convert", help="convert between formats and tag schemes")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--input-format", default="conll", choices=["conll", "tagged"])
    p.add_argument("--output-format", default="conll", choices=["conll", "tagged"])
    p.add_argument("--scheme-in", default="iob2", choices=["iob2", "bilou"])
    p.add_argument("--scheme-out", default="iob2", choices=["iob2", "bilou"])
    p.add_argument("--rename", help="category rename map, e.g. PER=Person,LOC=Location")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - internal invariant violations
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
