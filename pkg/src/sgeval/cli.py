"""Command-line entry point.

Subcommands cover the whole pipeline: parse generations, align vocabulary,
evaluate (JSON/CSV reports plus figures), importance ranking and nDCG,
grounding queries/assembly, prompt emission, and synthetic corpora.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
breach. Parse exits 0 on partial parses and 2 when no frame yielded any
triplet. SGEVAL_LOG sets log verbosity (debug, info, warning, error).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import align as align_mod
from . import importance as importance_mod
from . import ingest, metrics, promptgen, report, synth
from . import grounding as grounding_mod
from . import parser as parser_mod
from .core import (
    DocumentKind,
    EmbeddingTable,
    SceneGraphDocument,
    frame_key,
    reranked,
)
from .errors import DataError

log = logging.getLogger("sgeval")

_TASKS = {
    "sgcls-star": metrics.TaskVariant.SGCLS_STAR,
    "sgdet": metrics.TaskVariant.SGDET,
    "sgdet-agg": metrics.TaskVariant.SGDET_AGG,
}

_PROMPT_MODES = {
    "zs-triplet": promptgen.PromptMode.ZERO_SHOT_TRIPLET,
    "zs-quad": promptgen.PromptMode.ZERO_SHOT_QUADRUPLET,
    "ft": promptgen.PromptMode.FINETUNE_TRIPLET,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this tool reserves 2 for
    data errors and uses 1 for usage."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _k_list(raw: str) -> list[int]:
    try:
        values = sorted({int(part) for part in raw.split(",") if part.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid K list {raw!r}")
    if not values or values[0] < 1:
        raise argparse.ArgumentTypeError("K values must be positive integers")
    return values


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _load_table(frame_path: str, text_path: Optional[str]) -> EmbeddingTable:
    table = ingest.load_embeddings(frame_path)
    if text_path and Path(text_path) != Path(frame_path):
        table = table.merged(ingest.load_embeddings(text_path))
    return table


def _read_frame_ids(path: str) -> list[str]:
    try:
        with open(path, encoding="utf-8") as handle:
            ids = [line.strip() for line in handle if line.strip()]
    except OSError as exc:
        raise DataError(f"cannot read frame ids from {path}: {exc}") from exc
    if not ids:
        raise DataError(f"frame id file {path} is empty")
    return ids


# --- subcommand implementations ---


def _cmd_parse(args) -> int:
    text = Path(args.generation).read_text(encoding="utf-8")
    frame_ids = _read_frame_ids(args.frames)
    frames, parse_report = parser_mod.parse_generation(text, args.format, frame_ids)
    doc = ingest.SceneGraphDocument(
        video_id=args.video_id, frames=tuple(frames), kind=DocumentKind.PREDICTION
    )
    ingest.dump_scene_graphs([doc], args.out)
    report.dump_json(parse_report.to_dict())
    if parse_report.frames_found == 0:
        log.error("no frames recovered from %s", args.generation)
        return 2
    return 0


def _cmd_align(args) -> int:
    docs = ingest.load_scene_graphs(args.input, DocumentKind.PREDICTION)
    vocab = ingest.load_vocabulary(args.vocab)
    table = ingest.load_embeddings(args.embeddings)
    cfg = align_mod.AlignmentConfig(min_similarity=args.min_sim)
    aligned = []
    rejected = 0
    for doc in docs:
        out_doc, count = align_mod.align_document(doc, vocab, table, cfg)
        aligned.append(out_doc)
        rejected += count
    ingest.dump_scene_graphs(aligned, args.out)
    report.dump_json({"rejected": rejected})
    return 0


def _cmd_eval(args) -> int:
    gt_docs = ingest.load_scene_graphs(args.gt, DocumentKind.GROUND_TRUTH)
    pred_docs = ingest.load_scene_graphs(args.pred, DocumentKind.PREDICTION)
    task = metrics.EvalTask(variant=_TASKS[args.task], iou_threshold=args.iou)
    result = metrics.evaluate(
        pred_docs,
        gt_docs,
        task,
        args.k,
        per_class=args.per_class,
        entity=args.entity,
        micro=args.micro,
        jobs=args.jobs,
    )
    report.dump_json(report.build_report(result), args.out)
    if args.csv:
        report.write_report_csv(result, args.csv)
    points = [(k, result.precision_at[k], result.recall_at[k]) for k in result.ks]
    if args.curve_csv:
        report.write_pr_curve_csv(points, args.curve_csv)
    if args.plot:
        report.render_pr_curve(points, args.plot, label=result.task)
    if args.class_plot:
        if not args.per_class:
            raise DataError("--class-plot requires --per-class")
        report.render_per_class_bars(result, result.ks[0], args.class_plot)
    return 0


def _cmd_importance_rank(args) -> int:
    kind = DocumentKind(args.kind.replace("-", "_"))
    docs = ingest.load_scene_graphs(args.input, kind)
    table = _load_table(args.frame_emb, args.text_emb)
    cfg = importance_mod.ImportanceConfig(lambda_=args.lambda_)
    ranked_docs = []
    ti = {}
    for doc in docs:
        frames = []
        for frame in doc.frames:
            ranking = importance_mod.rank_by_importance(
                frame, frame_key(doc.video_id, frame.frame_id), table, cfg
            )
            frames.append(reranked(frame.frame_id, [e.triplet for e in ranking]))
            ti[(doc.video_id, frame.frame_id)] = [
                entry.importance for entry in ranking
            ]
        ranked_docs.append(
            SceneGraphDocument(
                video_id=doc.video_id, frames=tuple(frames), kind=doc.kind
            )
        )
    ingest.dump_scene_graphs(ranked_docs, args.out, ti=ti)
    return 0


def _cmd_importance_ndcg(args) -> int:
    gt_docs = ingest.load_scene_graphs(args.gt, DocumentKind.GROUND_TRUTH)
    pred_docs = ingest.load_scene_graphs(args.pred, DocumentKind.PREDICTION)
    table = _load_table(args.frame_emb, args.text_emb)
    cfg = importance_mod.ImportanceConfig(lambda_=args.lambda_)
    value = importance_mod.ndcg_report(pred_docs, gt_docs, table, cfg, p=args.p)
    report.dump_json({"p": args.p, "ndcg": value}, args.out)
    return 0


def _cmd_ground_queries(args) -> int:
    docs = ingest.load_scene_graphs(args.input, DocumentKind.PREDICTION)
    count = grounding_mod.write_query_manifest(docs, args.out)
    report.dump_json({"queries": count})
    return 0


def _cmd_ground_assemble(args) -> int:
    docs = ingest.load_scene_graphs(args.input, DocumentKind.PREDICTION)
    detections = ingest.load_detections(args.detections)
    grounded = [grounding_mod.ground_document(doc, detections) for doc in docs]
    ingest.dump_scene_graphs(grounded, args.out)
    return 0


def _cmd_prompt(args) -> int:
    vocab = ingest.load_vocabulary(args.vocab)
    fewshot: tuple = ()
    if args.fewshot:
        docs = ingest.load_scene_graphs(args.fewshot, DocumentKind.PREDICTION)
        if args.importance_ordered:
            if not args.frame_emb:
                raise DataError(
                    "--importance-ordered needs --frame-emb (and --text-emb) "
                    "to rank the few-shot examples"
                )
            table = _load_table(args.frame_emb, args.text_emb)
            cfg = importance_mod.ImportanceConfig(lambda_=args.lambda_)
            fewshot = promptgen.rank_fewshot(docs, table, cfg)
        else:
            fewshot = tuple(tuple(doc.frames) for doc in docs)
    predicate_split = None
    if args.predicate_split:
        raw = json.loads(Path(args.predicate_split).read_text(encoding="utf-8"))
        predicate_split = {
            key: (str(value[0]), str(value[1])) for key, value in raw.items()
        }
    spec = promptgen.PromptSpec(
        mode=_PROMPT_MODES[args.mode],
        vocab=vocab,
        fewshot=fewshot,
        importance_ordered=args.importance_ordered,
        predicate_split=predicate_split,
    )
    text = promptgen.build_prompt(spec)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_synth(args) -> int:
    vocab = ingest.load_vocabulary(args.vocab)
    gt_docs, pred_docs = synth.generate(
        seed=args.seed,
        videos=args.videos,
        frames_per_video=args.frames,
        gt_per_frame=args.gt_per_frame,
        correct_k=args.correct_k,
        filler_k=args.filler_k,
        vocab=vocab,
        box_jitter=args.box_jitter,
    )
    ingest.dump_scene_graphs(gt_docs, args.gt_out)
    ingest.dump_scene_graphs(pred_docs, args.pred_out)
    return 0


# --- parser wiring ---


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="sgeval",
        description="Scene-graph generation evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[], help="parse generation text into a scene-graph file")
    p.add_argument("generation", help="generation text file")
    p.add_argument("--format", choices=("triplet", "quadruplet"), default="triplet")
    p.add_argument("--frames", required=True, help="file with one frame id per line")
    p.add_argument("--video-id", default="video", help="video id for the output document")
    p.add_argument("--out", required=True, help="output scene-graph file")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("align", help="map open-vocabulary labels onto the closed vocabulary")
    p.add_argument("input", help="prediction scene-graph file")
    p.add_argument("--vocab", required=True, help="vocabulary file")
    p.add_argument("--embeddings", required=True, help="text embedding file")
    p.add_argument("--min-sim", type=float, default=0.0, help="minimum accepted cosine")
    p.add_argument("--out", required=True, help="aligned scene-graph file")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("eval", help="recall/precision metric report")
    p.add_argument("--task", choices=sorted(_TASKS), required=True)
    p.add_argument("--k", type=_k_list, default=[1, 10, 20, 50, 100],
                   help="comma-separated K list (default 1,10,20,50,100)")
    p.add_argument("--gt", required=True, help="ground-truth scene-graph file")
    p.add_argument("--pred", required=True, help="prediction scene-graph file")
    p.add_argument("--iou", type=float, default=None,
                   help="IoU threshold (default 0.5 for sgdet tasks; sgcls-star forces 0)")
    p.add_argument("--per-class", action="store_true", help="add per-class means")
    p.add_argument("--entity", action="store_true", help="add per-role entity breakdown")
    p.add_argument("--micro", action="store_true",
                   help="corpus-level micro averaging instead of frame/video macro")
    p.add_argument("--jobs", type=_positive_int, default=1,
                   help="parallel workers over videos (output independent of N)")
    p.add_argument("--out", default=None, help="report JSON path (default stdout)")
    p.add_argument("--csv", default=None, help="CSV export path (one row per task, K)")
    p.add_argument("--curve-csv", default=None, help="PR curve points CSV path")
    p.add_argument("--plot", default=None, help="PR curve figure path")
    p.add_argument("--class-plot", default=None,
                   help="per-class bars figure path (needs --per-class)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("importance", help="triplet importance ranking and nDCG")
    imp = p.add_subparsers(dest="subcommand", required=True)

    r = imp.add_parser("rank", help="re-rank triplets by importance and annotate ti")
    r.add_argument("input", help="scene-graph file (prediction or ground truth)")
    r.add_argument("--kind", choices=("prediction", "ground-truth"),
                   default="prediction", help="how to validate the input file")
    r.add_argument("--frame-emb", required=True, help="frame embedding file")
    r.add_argument("--text-emb", default=None, help="text embedding file")
    r.add_argument("--lambda", dest="lambda_", type=float, default=0.75,
                   help="informativeness weight (default 0.75)")
    r.add_argument("--out", required=True, help="importance-annotated scene-graph file")
    r.set_defaults(func=_cmd_importance_rank)

    n = imp.add_parser("ndcg", help="capped nDCG of predictions against ground truth")
    n.add_argument("--gt", required=True)
    n.add_argument("--pred", required=True)
    n.add_argument("--frame-emb", required=True, help="frame embedding file")
    n.add_argument("--text-emb", default=None, help="text embedding file")
    n.add_argument("--lambda", dest="lambda_", type=float, default=0.75,
                   help="informativeness weight (default 0.75)")
    n.add_argument("--p", type=_positive_int, default=5, help="rank cutoff (default 5)")
    n.add_argument("--out", default=None, help="output JSON path (default stdout)")
    n.set_defaults(func=_cmd_importance_ndcg)

    p = sub.add_parser("ground", help="grounding queries and detector assembly")
    g = p.add_subparsers(dest="subcommand", required=True)

    q = g.add_parser("queries", help="emit the referring-expression query manifest")
    q.add_argument("input", help="scene-graph file")
    q.add_argument("--out", required=True, help="query manifest (jsonl)")
    q.set_defaults(func=_cmd_ground_queries)

    a = g.add_parser("assemble", help="attach detector boxes to triplets")
    a.add_argument("input", help="scene-graph file")
    a.add_argument("--detections", required=True, help="detection records (jsonl)")
    a.add_argument("--out", required=True, help="grounded scene-graph file")
    a.set_defaults(func=_cmd_ground_assemble)

    p = sub.add_parser("prompt", help="emit a generation prompt")
    p.add_argument("--mode", choices=sorted(_PROMPT_MODES), required=True)
    p.add_argument("--vocab", required=True, help="vocabulary file")
    p.add_argument("--fewshot", default=None,
                   help="scene-graph file; each video becomes one example")
    p.add_argument("--importance-ordered", action="store_true",
                   help="order example triplets by importance")
    p.add_argument("--frame-emb", default=None, help="frame embedding file")
    p.add_argument("--text-emb", default=None, help="text embedding file")
    p.add_argument("--lambda", dest="lambda_", type=float, default=0.75,
                   help="informativeness weight (default 0.75)")
    p.add_argument("--predicate-split", default=None,
                   help="JSON file mapping predicate -> [action, spatial]")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=_cmd_prompt)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--videos", type=_positive_int, default=1)
    p.add_argument("--frames", type=_positive_int, default=10,
                   help="frames per video")
    p.add_argument("--gt-per-frame", type=_positive_int, default=7)
    p.add_argument("--correct-k", type=int, default=7)
    p.add_argument("--filler-k", type=int, default=0)
    p.add_argument("--vocab", required=True, help="vocabulary file")
    p.add_argument("--box-jitter", type=float, default=0.0)
    p.add_argument("--gt-out", required=True, help="ground-truth output file")
    p.add_argument("--pred-out", required=True, help="prediction output file")
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("SGEVAL_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        log.error("%s", exc)
        return 2
    except Exception:  # pragma: no cover - defensive
        log.exception("internal error")
        return 3


if __name__ == "__main__":
    sys.exit(main())
