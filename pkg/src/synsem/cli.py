"""Command-line front end.

Subcommands:
  convert    rewrite a dependency treebank or semantic-graph corpus into
             unified DAG JSON-lines
  confusion  cross-scheme confusion matrix plus a yield-overlap summary
  stats      corpus-level divergence statistics
  evaluate   score predicted semantic graphs against gold, optionally with
             the per-relation fine-grained report

Exit codes: 0 success, 1 usage error, 2 data error. Set SYNSEM_LOG to
debug/info/warning to control diagnostic verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import multiprocessing
import os
import sys
from pathlib import Path

from .alignment import (
    AlignmentError,
    align_sentence,
    confusion_matrix,
    aggregate_stats,
    overlap_f1,
    render_matrix_markdown,
    render_matrix_tsv,
)
from .evaluation import (
    EvalCounts,
    EvaluationError,
    FineGrainedScorer,
    evaluate_ucca,
    render_report,
    report_json,
)
from .model import StructureError
from .normalization import normalize
from .treebanks import (
    ParseError,
    pair_sentences,
    parse_conllu,
    parse_ucca_json,
    write_unified,
)
from .ud_conversion import convert_extended

log = logging.getLogger("synsem")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

DATA_ERRORS = (ParseError, StructureError, AlignmentError, EvaluationError, OSError)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for data
    # errors here.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str, text: str):
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _map_jobs(fn, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with multiprocessing.Pool(jobs) as pool:
        return pool.map(fn, items)


def _convert_ud_sentence(args):
    tree, join, promote = args
    return convert_extended(tree, join_unanalyzable=join, promote=promote)


def _convert_ucca_sentence(graph):
    return normalize(graph)


def _align_pair(args):
    tree, graph = args
    ud_dag = convert_extended(tree)
    ucca_dag = normalize(graph)
    return align_sentence(ud_dag, ucca_dag), ud_dag, ucca_dag


def cmd_convert(args) -> int:
    if args.ud:
        trees = parse_conllu(_read(args.ud))
        log.info("parsed %d sentences from %s", len(trees), args.ud)
        work = [(t, not args.no_mwe_join, not args.no_conj_promote) for t in trees]
        dags = _map_jobs(_convert_ud_sentence, work, args.jobs)
    else:
        graphs = parse_ucca_json(_read(args.ucca))
        log.info("parsed %d graphs from %s", len(graphs), args.ucca)
        dags = _map_jobs(_convert_ucca_sentence, graphs, args.jobs)
    _write(args.out, write_unified(dags))
    return EXIT_OK


def _load_pairs(args):
    trees = parse_conllu(_read(args.ud))
    graphs = parse_ucca_json(_read(args.ucca))
    return pair_sentences(trees, graphs, by=args.pair_by)


def cmd_confusion(args) -> int:
    results = _map_jobs(_align_pair, _load_pairs(args), args.jobs)
    matrix = confusion_matrix(alignment for alignment, _, _ in results)
    score = overlap_f1(matrix)
    if args.format == "md":
        body = render_matrix_markdown(matrix) + "\n" + score.summary() + "\n"
    else:
        body = render_matrix_tsv(matrix) + "# " + score.summary() + "\n"
    _write(args.out, body)
    return EXIT_OK


def cmd_stats(args) -> int:
    results = _map_jobs(_align_pair, _load_pairs(args), args.jobs)
    report = aggregate_stats(
        [a for a, _, _ in results],
        [u for _, u, _ in results],
        [g for _, _, g in results],
    )
    _write(args.out, report.render())
    return EXIT_OK


def _evaluate_pair(args):
    gold_graph, pred_graph = args
    gold = normalize(gold_graph, keep_remotes=True)
    pred = normalize(pred_graph, keep_remotes=True)
    return {
        (edge_class, labeled): evaluate_ucca(gold, pred, labeled, edge_class)
        for edge_class in ("primary", "remote")
        for labeled in (True, False)
    }


def cmd_evaluate(args) -> int:
    gold_graphs = parse_ucca_json(_read(args.gold))
    pred_graphs = parse_ucca_json(_read(args.pred))
    pairs = pair_sentences(gold_graphs, pred_graphs, by=args.pair_by)
    per_sentence = _map_jobs(_evaluate_pair, pairs, args.jobs)
    totals: dict[tuple[str, bool], EvalCounts] = {}
    for counts in per_sentence:
        for key, value in counts.items():
            totals[key] = totals.get(key, EvalCounts()) + value

    rows = None
    if args.fine_grained:
        trees = parse_conllu(_read(args.ud))
        ud_pairs = pair_sentences(gold_graphs, trees, by=args.pair_by)
        scorer = FineGrainedScorer()
        for (gold_graph, pred_graph), (_, tree) in zip(pairs, ud_pairs):
            scorer.add(
                normalize(gold_graph),
                normalize(pred_graph),
                convert_extended(tree),
            )
        rows = scorer.rows()

    _write(args.out, _format_evaluation(totals, rows, args.format))
    return EXIT_OK


def _format_evaluation(totals, rows, fmt: str) -> str:
    order = [
        ("primary", True), ("primary", False), ("remote", True), ("remote", False),
    ]
    if fmt == "json":
        payload = {
            "corpus": {
                f"{edge_class}_{'labeled' if labeled else 'unlabeled'}": {
                    "n_gold": c.n_gold,
                    "n_pred": c.n_pred,
                    "n_correct": c.n_correct,
                    "precision": c.precision,
                    "recall": c.recall,
                    "f1": c.f1,
                }
                for (edge_class, labeled) in order
                for c in [totals[(edge_class, labeled)]]
            }
        }
        if rows is not None:
            payload["fine_grained"] = [row.as_dict() for row in rows]
        return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"

    header = ["edges", "mode", "n_gold", "n_pred", "n_correct", "P", "R", "F1"]
    body_rows = []
    for edge_class, labeled in order:
        c = totals[(edge_class, labeled)]
        body_rows.append(
            [
                edge_class,
                "labeled" if labeled else "unlabeled",
                str(c.n_gold),
                str(c.n_pred),
                str(c.n_correct),
                f"{100 * c.precision:.1f}",
                f"{100 * c.recall:.1f}",
                f"{100 * c.f1:.1f}",
            ]
        )
    if fmt == "md":
        out = [
            "| " + " | ".join(header) + " |",
            "|" + "|".join(["---"] * len(header)) + "|",
        ]
        out.extend("| " + " | ".join(row) + " |" for row in body_rows)
        text = "".join(line + "\n" for line in out)
        if rows is not None:
            text += "\n" + render_report(rows, fmt="md")
        return text
    text = "".join("\t".join(row) + "\n" for row in [header] + body_rows)
    if rows is not None:
        text += "\n" + render_report(rows, fmt="tsv")
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="synsem", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--jobs", type=int, default=1,
                       help="sentence-level worker processes (output-identical)")
        p.add_argument("--pair-by", choices=("index", "id"), default="index",
                       help="pair sentences positionally or by sentence id")

    p = sub.add_parser("convert", help="convert a corpus to unified JSON-lines")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--ud", help="CoNLL-U input path")
    source.add_argument("--ucca", help="semantic-graph JSON-lines input path")
    p.add_argument("--no-mwe-join", action="store_true",
                   help="keep flat/fixed/goeswith chains as separate tokens")
    p.add_argument("--no-conj-promote", action="store_true",
                   help="leave conjunctions inside their conjuncts")
    common(p)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("confusion", help="cross-scheme confusion matrix")
    p.add_argument("--ud", required=True, help="CoNLL-U input path")
    p.add_argument("--ucca", required=True, help="semantic-graph JSON-lines path")
    p.add_argument("--format", choices=("tsv", "md"), default="tsv")
    common(p)
    p.set_defaults(func=cmd_confusion)

    p = sub.add_parser("stats", help="corpus divergence statistics")
    p.add_argument("--ud", required=True, help="CoNLL-U input path")
    p.add_argument("--ucca", required=True, help="semantic-graph JSON-lines path")
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("evaluate", help="score predicted graphs against gold")
    p.add_argument("--gold", required=True, help="gold JSON-lines path")
    p.add_argument("--pred", required=True, help="predicted JSON-lines path")
    p.add_argument("--ud", help="gold CoNLL-U path (for --fine-grained)")
    p.add_argument("--fine-grained", action="store_true",
                   help="add the per-relation breakdown (requires --ud)")
    p.add_argument("--format", choices=("tsv", "md", "json"), default="tsv")
    common(p)
    p.set_defaults(func=cmd_evaluate)
    return parser


def _configure_logging():
    level_name = os.environ.get("SYNSEM_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "evaluate" and args.fine_grained and not args.ud:
        parser.error("--fine-grained requires --ud")
    try:
        return args.func(args)
    except DATA_ERRORS as exc:
        print(f"synsem: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
