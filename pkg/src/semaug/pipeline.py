"""Wiring between manifests, embedding tables, heads, and retrieval tasks."""

import numpy as np

from . import frame_sampler
from .dataset import TEXT_ROW
from .resampler_head import head_forward_batch


def subset_records(records, video_set):
    """Records whose video is in the given split, in manifest order."""
    return [r for r in records if r.video_id in video_set]


def text_rows(records, text_table):
    """Per-record annotation embedding rows as an (n, d) array."""
    lookup = {}
    for row_i, ref in enumerate(text_table.index):
        if ref.frame_index == TEXT_ROW:
            lookup[(ref.video_id, ref.segment_id)] = row_i
    out = np.empty((len(records), text_table.dim), dtype=text_table.rows.dtype)
    for i, rec in enumerate(records):
        if rec.key() not in lookup:
            raise KeyError(f"no annotation embedding row for segment {rec.key()}")
        out[i] = text_table.rows[lookup[rec.key()]]
    return out


def image_sequences(records, frame_table):
    """Middle-frame sequences as an (n, 3, d) array."""
    return frame_sampler.segment_sequences(records, frame_table)


def clustering_features(records, frame_table):
    """Temporal concat features (n, 3*d) used by the diversity batcher."""
    return frame_sampler.temporal_features(records, frame_table)


def candidate_pool(records):
    """Distinct annotation texts in first-occurrence order plus truth indices.

    Returns (texts, truth, first_record_idx): truth[i] is the pool index of
    record i's annotation; first_record_idx[j] is the record index whose text
    row represents pool entry j.
    """
    texts = []
    first_idx = []
    pos = {}
    truth = np.empty(len(records), dtype=int)
    for i, rec in enumerate(records):
        if rec.annotation not in pos:
            pos[rec.annotation] = len(texts)
            texts.append(rec.annotation)
            first_idx.append(i)
        truth[i] = pos[rec.annotation]
    return texts, truth, first_idx


def embed_sequences(params, seqs, chunk=512):
    """Head forward over (n, T, d) sequences in chunks; returns (n, e)."""
    seqs = np.asarray(seqs, dtype=np.float64)
    outs = []
    for start in range(0, seqs.shape[0], chunk):
        out, _ = head_forward_batch(params, seqs[start : start + chunk])
        outs.append(out)
    return np.concatenate(outs, axis=0) if outs else np.empty((0, 0))


def retrieval_task(records, frame_table, text_table, img_params, txt_params):
    """Assemble (query_embs, candidate_embs, truth, texts) for a record set.

    Queries are head-embedded middle-frame sequences; candidates are the
    head-embedded annotation rows of each distinct annotation text (first
    occurrence wins).
    """
    if not records:
        raise ValueError("retrieval task needs at least one record")
    seqs = image_sequences(records, frame_table)
    query_embs = embed_sequences(img_params, seqs)
    texts, truth, first_idx = candidate_pool(records)
    t_rows = text_rows(records, text_table)
    cand_seqs = t_rows[first_idx][:, None, :]  # (m, 1, d)
    candidate_embs = embed_sequences(txt_params, cand_seqs)
    return query_embs, candidate_embs, truth, texts


def predict_concepts(query_embs, candidate_embs, texts):
    """Top-1 retrieved annotation text per query (ties -> lower index)."""
    sims = np.asarray(query_embs, dtype=np.float64) @ np.asarray(
        candidate_embs, dtype=np.float64
    ).T
    best = np.argmax(sims, axis=1)  # argmax returns the first max: lower index wins
    return [texts[int(j)] for j in best]
