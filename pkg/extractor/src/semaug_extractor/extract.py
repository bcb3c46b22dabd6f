"""Run encoders over pre-extracted segment frames and annotation sentences.

Frames live at ``<frames_dir>/<video_id>/<segment_id>/<frame_index>.jpg``
for the three middle frame indices of each segment (0-based
floor(N/2)-1 .. floor(N/2)+1). Output row order is manifest order times
ascending frame index for frames, manifest order for annotation texts.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoders import load_encoders
from .semb_writer import TEXT_ROW, write_semb


class ExtractError(ValueError):
    """Raised for manifest problems or missing frame files."""


@dataclass(frozen=True)
class ExtractJob:
    manifest: str
    frames_dir: str
    out_frames: str
    out_texts: str
    model: str = "tiny"


def middle_indices(frame_count):
    if frame_count < 3:
        raise ExtractError(f"frame_count {frame_count} < 3")
    hi = min(frame_count // 2 + 1, frame_count - 1)
    return (hi - 2, hi - 1, hi)


def read_manifest(path):
    records = []
    seen = set()
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExtractError(f"line {line_no}: malformed JSON ({exc.msg})") from exc
            try:
                rec = {
                    "video_id": str(obj["video_id"]),
                    "segment_id": str(obj["segment_id"]),
                    "annotation": str(obj["annotation"]),
                    "frame_count": int(obj["frame_count"]),
                }
            except KeyError as exc:
                raise ExtractError(f"line {line_no}: missing field {exc}") from exc
            key = (rec["video_id"], rec["segment_id"])
            if key in seen:
                raise ExtractError(f"line {line_no}: duplicate segment {key}")
            if rec["frame_count"] < 3:
                raise ExtractError(
                    f"line {line_no}: segment {key} has frame_count "
                    f"{rec['frame_count']}, need at least 3"
                )
            seen.add(key)
            records.append(rec)
    return records


def extract_embeddings(job):
    """Encode frames and annotations; writes both SEMB files plus sidecars.

    Returns (frame_count, text_count, image_dim, text_dim).
    """
    records = read_manifest(job.manifest)
    image_enc, text_enc = load_encoders(job.model)
    frames_dir = Path(job.frames_dir)

    frame_rows, frame_index = [], []
    text_rows, text_index = [], []
    for rec in records:
        key = (rec["video_id"], rec["segment_id"])
        for idx in middle_indices(rec["frame_count"]):
            frame_path = frames_dir / rec["video_id"] / rec["segment_id"] / f"{idx}.jpg"
            if not frame_path.exists():
                raise ExtractError(
                    f"segment {key}: missing frame file {frame_path}"
                )
            frame_rows.append(image_enc.encode(frame_path))
            frame_index.append((rec["video_id"], rec["segment_id"], idx))
        text_rows.append(text_enc.encode(rec["annotation"]))
        text_index.append((rec["video_id"], rec["segment_id"], TEXT_ROW))

    frame_arr = (
        np.vstack(frame_rows) if frame_rows else np.empty((0, image_enc.dim), np.float32)
    )
    text_arr = (
        np.vstack(text_rows) if text_rows else np.empty((0, text_enc.dim), np.float32)
    )
    write_semb(job.out_frames, frame_arr, frame_index)
    write_semb(job.out_texts, text_arr, text_index)
    return frame_arr.shape[0], text_arr.shape[0], image_enc.dim, text_enc.dim
