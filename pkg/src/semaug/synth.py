"""Synthetic concept-plus-noise corpus generator.

Each concept is a random unit vector in d dims with one fixed annotation
sentence and one annotation embedding drawn once per concept (same sentence,
same encoder output). Every segment of a concept gets three middle-frame
embeddings equal to the concept vector plus i.i.d. Gaussian noise. Segments
are dealt round-robin into videos so every video mixes concepts and any
video-level split covers all concepts.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import TEXT_ROW, EmbeddingTable, RowRef, SegmentRecord, VideoTranscript
from .frame_sampler import middle_frame_indices


@dataclass(frozen=True)
class SynthSpec:
    concepts: int = 10
    segments_per_concept: int = 40
    dim: int = 32
    noise_sigma: float = 0.3
    concept_scale: float = 1.5  # concept vector norm; >1 separates clusters from noise
    frame_count: int = 9
    segments_per_video: int = 10
    seed: int = 0

    def validate(self):
        if self.concepts < 1 or self.segments_per_concept < 1:
            raise ValueError("need at least one concept and one segment per concept")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.concept_scale <= 0:
            raise ValueError("concept_scale must be > 0")
        if self.frame_count < 3:
            raise ValueError("frame_count must be >= 3")
        if self.segments_per_video < 1:
            raise ValueError("segments_per_video must be >= 1")


@dataclass
class SynthCorpus:
    records: list
    transcripts: list
    frame_table: EmbeddingTable
    text_table: EmbeddingTable
    concept_vectors: np.ndarray  # (C, d)
    concept_labels: np.ndarray  # (n_segments,) concept id per record


def _annotation(concept_id):
    return f"concept {concept_id:02d} step"


def generate_corpus(spec):
    """Build records, transcripts, and frame/text embedding tables."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)

    concepts = rng.normal(size=(spec.concepts, spec.dim))
    concepts *= spec.concept_scale / np.linalg.norm(concepts, axis=1, keepdims=True)
    concept_texts = rng.normal(
        size=(spec.concepts, spec.dim), scale=spec.noise_sigma
    ) + concepts

    n_segments = spec.concepts * spec.segments_per_concept
    mid = middle_frame_indices(spec.frame_count)

    records = []
    frame_rows, frame_index = [], []
    text_rows, text_index = [], []
    labels = np.empty(n_segments, dtype=int)
    videos = {}

    for seg_i in range(n_segments):
        concept_id = seg_i % spec.concepts
        video_i = seg_i // spec.segments_per_video
        video_id = f"video{video_i:04d}"
        slot = seg_i % spec.segments_per_video
        segment_id = f"seg{slot:03d}"
        start = 10.0 * slot
        rec = SegmentRecord(
            video_id=video_id,
            segment_id=segment_id,
            start_sec=start,
            end_sec=start + 8.0,
            annotation=_annotation(concept_id),
            frame_count=spec.frame_count,
        )
        records.append(rec)
        labels[seg_i] = concept_id
        videos.setdefault(video_id, []).append(rec)

        for frame_idx in mid:
            frame_rows.append(
                concepts[concept_id] + rng.normal(size=spec.dim, scale=spec.noise_sigma)
            )
            frame_index.append(
                RowRef(video_id=video_id, segment_id=segment_id, frame_index=frame_idx)
            )
        text_rows.append(concept_texts[concept_id])
        text_index.append(
            RowRef(video_id=video_id, segment_id=segment_id, frame_index=TEXT_ROW)
        )

    transcripts = []
    for video_id in sorted(videos):
        segs = sorted(videos[video_id], key=lambda r: r.start_sec)
        narration = "first " + ", then ".join(s.annotation for s in segs) + "."
        transcripts.append(VideoTranscript(video_id=video_id, transcript=narration))

    frame_table = EmbeddingTable(
        dim=spec.dim,
        rows=np.asarray(frame_rows, dtype=np.float32),
        index=frame_index,
    )
    text_table = EmbeddingTable(
        dim=spec.dim,
        rows=np.asarray(text_rows, dtype=np.float32),
        index=text_index,
    )
    return SynthCorpus(
        records=records,
        transcripts=transcripts,
        frame_table=frame_table,
        text_table=text_table,
        concept_vectors=concepts,
        concept_labels=labels,
    )
