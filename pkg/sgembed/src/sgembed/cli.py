"""Command-line exporter for embedding tables.

``sgembed text`` encodes one key per input line (vocabulary labels or
triplet sentences, already normalized by the caller); ``sgembed frames``
encodes images listed as line-delimited JSON records. Model load failures
exit nonzero with a message; the ``hash`` encoder family needs no weights.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from .encoders import EncoderUnavailable, image_encoder, text_encoder
from .export import (
    ExportError,
    export_frame_embeddings,
    export_text_embeddings,
    read_frame_specs,
    read_text_keys,
)

log = logging.getLogger("sgembed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgembed", description="Export embedding tables for scene-graph evaluation"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("text", help="encode text keys (labels or sentences)")
    t.add_argument("input", help="file with one key per line")
    t.add_argument("--encoder", choices=("hash", "clip-text", "t5"), default="hash")
    t.add_argument("--model", default=None, help="override the pinned model id")
    t.add_argument("--dim", type=int, default=None, help="hash encoder dimension")
    t.add_argument("--batch-size", type=int, default=16)
    t.add_argument("--device", default="cpu")
    t.add_argument("--out", required=True, help="embedding file to write")
    t.set_defaults(run=_cmd_text)

    f = sub.add_parser("frames", help="encode frame images")
    f.add_argument("input", help='jsonl records {"video_id","frame_id","path"}')
    f.add_argument("--encoder", choices=("hash", "clip-image"), default="hash")
    f.add_argument("--model", default=None, help="override the pinned model id")
    f.add_argument("--dim", type=int, default=None, help="hash encoder dimension")
    f.add_argument("--batch-size", type=int, default=8)
    f.add_argument("--device", default="cpu")
    f.add_argument("--out", required=True, help="embedding file to write")
    f.add_argument("--skip-report", default=None,
                   help="sidecar JSON listing skipped images")
    f.set_defaults(run=_cmd_frames)
    return parser


def _cmd_text(args) -> int:
    keys = read_text_keys(args.input)
    encoder = text_encoder(
        args.encoder,
        model_id=args.model,
        dim=args.dim,
        device=args.device,
        batch_size=args.batch_size,
    )
    count = export_text_embeddings(keys, encoder, args.out)
    log.info("wrote %d records to %s", count, args.out)
    return 0


def _cmd_frames(args) -> int:
    specs = read_frame_specs(args.input)
    encoder = image_encoder(
        args.encoder,
        model_id=args.model,
        dim=args.dim,
        device=args.device,
        batch_size=args.batch_size,
    )
    written, skipped = export_frame_embeddings(
        specs, encoder, args.out, skip_report_path=args.skip_report
    )
    log.info("wrote %d records to %s (%d skipped)", written, args.out, len(skipped))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except EncoderUnavailable as exc:
        log.error("model load failure: %s", exc)
        return 2
    except ExportError as exc:
        log.error("%s", exc)
        return 2
    except OSError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
