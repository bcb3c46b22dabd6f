"""Writer for the SEMB embedding wire format.

Layout: magic ``SEMB`` + version byte 0x01 + u32-LE row count + u32-LE dim +
row-major 32-bit LE floats. The sidecar ``<path>.idx.jsonl`` holds one JSON
object per row: {"video_id", "segment_id", "frame_index"}, frame_index -1
marking an annotation-text row.
"""

import json
import struct

import numpy as np

MAGIC = b"SEMB"
VERSION = 1
TEXT_ROW = -1


def write_semb(path, rows, index):
    """Write rows (n, d) float32 and the aligned index sidecar."""
    rows = np.ascontiguousarray(rows, dtype="<f4")
    if rows.ndim != 2:
        raise ValueError(f"rows must be 2-d, got shape {rows.shape}")
    if len(index) != rows.shape[0]:
        raise ValueError(f"{len(index)} index entries for {rows.shape[0]} rows")
    if rows.size and not np.isfinite(rows).all():
        bad = int(np.argwhere(~np.isfinite(rows).all(axis=1))[0, 0])
        raise ValueError(f"non-finite embedding in row {bad}")
    n, d = rows.shape
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(bytes([VERSION]))
        f.write(struct.pack("<II", n, d))
        f.write(rows.tobytes())
    with open(str(path) + ".idx.jsonl", "w", encoding="utf-8") as f:
        for video_id, segment_id, frame_index in index:
            f.write(
                json.dumps(
                    {
                        "video_id": video_id,
                        "segment_id": segment_id,
                        "frame_index": frame_index,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
