"""Segment manifests, video-level splits, and the SEMB embedding file format.

Manifests are JSON Lines, one segment per line:
    {"video_id", "segment_id", "start_sec", "end_sec", "annotation", "frame_count"}
Transcripts are JSON Lines:
    {"video_id", "transcript"}

Embedding files: magic ``SEMB`` + version byte 0x01 + u32-LE row count +
u32-LE dim + row-major 32-bit LE floats. A sidecar ``<path>.idx.jsonl``
describes row i on line i: {"video_id", "segment_id", "frame_index"} with
frame_index -1 meaning an annotation-text embedding.
"""

import json
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

MAGIC = b"SEMB"
VERSION = 1
TEXT_ROW = -1  # frame_index sentinel for annotation embeddings


class ManifestError(ValueError):
    """Raised for malformed or invariant-violating manifest content."""


class EmbeddingFormatError(ValueError):
    """Raised when an embedding file does not match the SEMB format."""


@dataclass(frozen=True)
class SegmentRecord:
    video_id: str
    segment_id: str
    start_sec: float
    end_sec: float
    annotation: str
    frame_count: int

    def key(self):
        return (self.video_id, self.segment_id)


@dataclass(frozen=True)
class VideoTranscript:
    video_id: str
    transcript: str


@dataclass(frozen=True)
class RowRef:
    """Identifies the origin of one embedding row."""

    video_id: str
    segment_id: str
    frame_index: int  # >= 0 for frames, TEXT_ROW for annotation text

    @property
    def is_text(self):
        return self.frame_index == TEXT_ROW


@dataclass
class EmbeddingTable:
    dim: int
    rows: np.ndarray  # (n, dim) float32
    index: list  # list[RowRef], len n

    def validate(self):
        if self.rows.ndim != 2 or self.rows.shape[1] != self.dim:
            raise EmbeddingFormatError(
                f"rows shape {self.rows.shape} inconsistent with dim {self.dim}"
            )
        if len(self.index) != self.rows.shape[0]:
            raise EmbeddingFormatError(
                f"index has {len(self.index)} entries for {self.rows.shape[0]} rows"
            )
        if self.rows.size and not np.isfinite(self.rows).all():
            bad = int(np.argwhere(~np.isfinite(self.rows).all(axis=1))[0, 0])
            raise EmbeddingFormatError(f"non-finite value in row {bad}")

    def __eq__(self, other):
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.index == other.index
            and self.rows.shape == other.rows.shape
            and self.rows.tobytes() == other.rows.tobytes()
        )


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.67
    val_frac: float = 0.08
    test_frac: float = 0.25
    seed: int = 0

    def validate(self):
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"split fractions sum to {total!r}, expected 1.0")
        if min(self.train_frac, self.val_frac, self.test_frac) < 0:
            raise ValueError("split fractions must be non-negative")


@dataclass(frozen=True)
class Splits:
    train: frozenset
    val: frozenset
    test: frozenset

    def of(self, name):
        return {"train": self.train, "val": self.val, "test": self.test}[name]


def _require(obj, key, line_no):
    if key not in obj:
        raise ManifestError(f"line {line_no}: missing field {key!r}")
    return obj[key]


def load_manifest(path):
    """Read segment records from a JSON Lines manifest, validating invariants."""
    records = []
    seen = set()
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"line {line_no}: malformed JSON ({exc.msg})") from exc
            rec = SegmentRecord(
                video_id=str(_require(obj, "video_id", line_no)),
                segment_id=str(_require(obj, "segment_id", line_no)),
                start_sec=float(_require(obj, "start_sec", line_no)),
                end_sec=float(_require(obj, "end_sec", line_no)),
                annotation=str(_require(obj, "annotation", line_no)),
                frame_count=int(_require(obj, "frame_count", line_no)),
            )
            if rec.start_sec < 0:
                raise ManifestError(
                    f"line {line_no}: segment {rec.key()} has negative start_sec"
                )
            if rec.end_sec <= rec.start_sec:
                raise ManifestError(
                    f"line {line_no}: segment {rec.key()} has end_sec <= start_sec"
                )
            if rec.frame_count < 3:
                raise ManifestError(
                    f"line {line_no}: segment {rec.key()} has frame_count "
                    f"{rec.frame_count}, need at least 3"
                )
            if rec.key() in seen:
                raise ManifestError(f"line {line_no}: duplicate segment {rec.key()}")
            seen.add(rec.key())
            records.append(rec)
    return records


def load_transcripts(path):
    """Read video transcripts from JSON Lines; video_id must be unique."""
    out = []
    seen = set()
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"line {line_no}: malformed JSON ({exc.msg})") from exc
            vid = str(_require(obj, "video_id", line_no))
            if vid in seen:
                raise ManifestError(f"line {line_no}: duplicate video_id {vid!r}")
            seen.add(vid)
            out.append(VideoTranscript(video_id=vid, transcript=str(obj.get("transcript", ""))))
    return out


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def split_dataset(records, spec):
    """Partition distinct video ids into train/val/test sets.

    Splitting is by video so all segments of a video land in one split.
    Sizes: round-half-up(train_frac * V), then round-half-up(val_frac * V),
    remainder to test. Deterministic for a fixed spec.seed regardless of
    record order.
    """
    spec.validate()
    vids = sorted({r.video_id for r in records})
    if not vids:
        raise ValueError("no videos in manifest")
    v = len(vids)
    rng = np.random.default_rng(spec.seed)
    shuffled = [vids[i] for i in rng.permutation(v)]
    n_train = min(v, _round_half_up(spec.train_frac * v))
    n_val = min(v - n_train, _round_half_up(spec.val_frac * v))
    train = frozenset(shuffled[:n_train])
    val = frozenset(shuffled[n_train : n_train + n_val])
    test = frozenset(shuffled[n_train + n_val :])
    for name, part in (("train", train), ("val", val), ("test", test)):
        if not part:
            logger.warning("split %r is empty for %d videos", name, v)
    return Splits(train=train, val=val, test=test)


def write_manifest(records, path):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(
                json.dumps(
                    {
                        "video_id": r.video_id,
                        "segment_id": r.segment_id,
                        "start_sec": r.start_sec,
                        "end_sec": r.end_sec,
                        "annotation": r.annotation,
                        "frame_count": r.frame_count,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def write_transcripts(transcripts, path):
    with open(path, "w", encoding="utf-8") as f:
        for t in transcripts:
            f.write(
                json.dumps(
                    {"video_id": t.video_id, "transcript": t.transcript}, sort_keys=True
                )
                + "\n"
            )


def write_splits(splits, path, seed=None):
    payload = {
        "train": sorted(splits.train),
        "val": sorted(splits.val),
        "test": sorted(splits.test),
    }
    if seed is not None:
        payload["seed"] = seed
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_splits(path):
    with open(path, "r", encoding="utf-8") as f:
        obj = json.load(f)
    return Splits(
        train=frozenset(obj["train"]),
        val=frozenset(obj["val"]),
        test=frozenset(obj["test"]),
    )


def write_embedding_table(table, path):
    """Write a table in the SEMB binary format plus its .idx.jsonl sidecar."""
    table.validate()
    rows = np.ascontiguousarray(table.rows, dtype="<f4")
    n, d = rows.shape if rows.ndim == 2 else (0, table.dim)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(bytes([VERSION]))
        f.write(struct.pack("<II", n, table.dim))
        f.write(rows.tobytes())
    with open(index_path(path), "w", encoding="utf-8") as f:
        for ref in table.index:
            f.write(
                json.dumps(
                    {
                        "video_id": ref.video_id,
                        "segment_id": ref.segment_id,
                        "frame_index": ref.frame_index,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def index_path(path):
    return str(path) + ".idx.jsonl"


def read_embedding_table(path):
    """Read a SEMB file and its sidecar; inverse of :func:`write_embedding_table`."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise EmbeddingFormatError(f"bad magic bytes {magic!r} in {path}")
        version = f.read(1)
        if len(version) != 1 or version[0] != VERSION:
            raise EmbeddingFormatError(f"unsupported version {version!r} in {path}")
        header = f.read(8)
        if len(header) != 8:
            raise EmbeddingFormatError(f"truncated header in {path}")
        n, d = struct.unpack("<II", header)
        payload = f.read()
    expected = n * d * 4
    if len(payload) < expected:
        raise EmbeddingFormatError(
            f"truncated payload in {path}: expected {expected} bytes of floats, "
            f"found {len(payload)}"
        )
    if len(payload) > expected:
        raise EmbeddingFormatError(f"trailing bytes after payload in {path}")
    rows = np.frombuffer(payload, dtype="<f4").reshape(n, d).copy()

    idx_file = index_path(path)
    if not Path(idx_file).exists():
        raise EmbeddingFormatError(f"missing index sidecar {idx_file}")
    index = []
    with open(idx_file, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EmbeddingFormatError(
                    f"{idx_file} line {line_no}: malformed JSON"
                ) from exc
            index.append(
                RowRef(
                    video_id=str(obj["video_id"]),
                    segment_id=str(obj["segment_id"]),
                    frame_index=int(obj["frame_index"]),
                )
            )
    if len(index) != n:
        raise EmbeddingFormatError(
            f"index/row count mismatch: {len(index)} index lines for {n} rows"
        )
    table = EmbeddingTable(dim=d, rows=rows, index=index)
    table.validate()
    return table
