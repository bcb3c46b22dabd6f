"""Frame index selection and temporal feature concatenation.

A segment with N frames contributes its three consecutive middle frames,
0-based (floor(N/2)-1, floor(N/2), floor(N/2)+1). Their embeddings are
concatenated in temporal order into one 3d-dim temporal feature used for
clustering; the raw 3xd sequence feeds the resampler heads.
"""

import numpy as np


def middle_frame_indices(frame_count):
    """Return the three consecutive middle frame indices for a segment.

    Uses m = floor(N/2) under 0-based indexing and returns (m-1, m, m+1),
    shifted down to stay inside [0, N) at the boundary.
    """
    n = int(frame_count)
    if n < 3:
        raise ValueError(f"frame_count {n} < 3, no middle triple exists")
    m = n // 2
    hi = min(m + 1, n - 1)
    return (hi - 2, hi - 1, hi)


def uniform_sample_indices(frame_count, k):
    """Return k evenly spaced frame indices in [0, N).

    Index j is round(j * (N-1) / (k-1)) with half-even rounding, deduplicated
    ascending; k=1 yields the single middle frame floor(N/2).
    """
    n = int(frame_count)
    k = int(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > n:
        raise ValueError(f"cannot sample k={k} indices from {n} frames")
    if k == 1:
        return (n // 2,)
    raw = [round(j * (n - 1) / (k - 1)) for j in range(k)]
    out = []
    for idx in raw:
        if not out or idx != out[-1]:
            out.append(int(idx))
    return tuple(out)


def temporal_concat(frames):
    """Concatenate three equally sized vectors in temporal order.

    Output layout: [0, d) = first frame, [d, 2d) = second, [2d, 3d) = third.
    """
    if len(frames) != 3:
        raise ValueError(f"expected exactly 3 frame vectors, got {len(frames)}")
    vecs = [np.asarray(v) for v in frames]
    d = vecs[0].shape[-1] if vecs[0].ndim else 0
    for i, v in enumerate(vecs):
        if v.ndim != 1:
            raise ValueError(f"frame vector {i} is not 1-dimensional")
        if v.shape[0] != d:
            raise ValueError(
                f"frame vector {i} has dimension {v.shape[0]}, expected {d}"
            )
    return np.concatenate(vecs)


def segment_sequences(records, frame_table):
    """Look up each record's middle-frame rows as a (len(records), 3, d) array.

    Rows are matched by (video_id, segment_id, frame_index); a missing frame
    row is an error naming the segment.
    """
    lookup = {}
    for row_i, ref in enumerate(frame_table.index):
        lookup[(ref.video_id, ref.segment_id, ref.frame_index)] = row_i
    out = np.empty((len(records), 3, frame_table.dim), dtype=frame_table.rows.dtype)
    for i, rec in enumerate(records):
        for slot, frame_idx in enumerate(middle_frame_indices(rec.frame_count)):
            key = (rec.video_id, rec.segment_id, frame_idx)
            if key not in lookup:
                raise KeyError(
                    f"no embedding row for segment {rec.key()} frame {frame_idx}"
                )
            out[i, slot] = frame_table.rows[lookup[key]]
    return out


def temporal_features(records, frame_table):
    """Concatenate each record's middle-frame rows into (len(records), 3*d)."""
    seqs = segment_sequences(records, frame_table)
    return seqs.reshape(seqs.shape[0], -1)
