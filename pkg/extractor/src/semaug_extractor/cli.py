"""Command-line entry point: semaug-extract.

Exit codes: 0 success, 1 validation error (manifest or missing frames),
2 I/O error, 3 encoder load failure.
"""

import argparse
import sys

from .encoders import EncoderLoadError
from .extract import ExtractError, ExtractJob, extract_embeddings


def build_parser():
    parser = argparse.ArgumentParser(
        prog="semaug-extract",
        description="Encode segment frames and annotations into SEMB files.",
    )
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--frames-dir", required=True)
    parser.add_argument("--out-frames", required=True)
    parser.add_argument("--out-texts", required=True)
    parser.add_argument("--model", default="tiny")
    return parser


def run(argv):
    args = build_parser().parse_args(argv)
    job = ExtractJob(
        manifest=args.manifest,
        frames_dir=args.frames_dir,
        out_frames=args.out_frames,
        out_texts=args.out_texts,
        model=args.model,
    )
    try:
        n_frames, n_texts, image_dim, text_dim = extract_embeddings(job)
    except EncoderLoadError as exc:
        print(f"encoder error: {exc}", file=sys.stderr)
        return 3
    except ExtractError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {n_frames} frame rows (dim {image_dim}) and "
        f"{n_texts} text rows (dim {text_dim})"
    )
    return 0


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
