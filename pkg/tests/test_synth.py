import numpy as np

from semaug.dataset import TEXT_ROW, split_dataset, SplitSpec
from semaug.frame_sampler import middle_frame_indices
from semaug.synth import SynthSpec, generate_corpus


def small_spec(**overrides):
    base = dict(
        concepts=4, segments_per_concept=6, dim=8, segments_per_video=4, seed=3
    )
    base.update(overrides)
    return SynthSpec(**base)


class TestGenerateCorpus:
    def test_counts_and_alignment(self):
        corpus = generate_corpus(small_spec())
        assert len(corpus.records) == 24
        assert corpus.text_table.rows.shape == (24, 8)
        assert corpus.frame_table.rows.shape == (72, 8)
        mid = middle_frame_indices(9)
        for i, rec in enumerate(corpus.records):
            refs = corpus.frame_table.index[3 * i : 3 * i + 3]
            assert [r.frame_index for r in refs] == list(mid)
            assert all(r.video_id == rec.video_id for r in refs)
            assert corpus.text_table.index[i].frame_index == TEXT_ROW

    def test_same_concept_shares_annotation_and_embedding(self):
        corpus = generate_corpus(small_spec())
        by_concept = {}
        for rec, label, row in zip(
            corpus.records, corpus.concept_labels, corpus.text_table.rows
        ):
            by_concept.setdefault(int(label), []).append((rec.annotation, row))
        for label, items in by_concept.items():
            annotations = {a for a, _ in items}
            assert len(annotations) == 1
            base = items[0][1]
            for _, row in items[1:]:
                np.testing.assert_array_equal(row, base)

    def test_deterministic(self):
        a = generate_corpus(small_spec())
        b = generate_corpus(small_spec())
        np.testing.assert_array_equal(a.frame_table.rows, b.frame_table.rows)
        assert a.records == b.records

    def test_every_video_mixes_concepts(self):
        # round-robin dealing puts one segment per concept in each video
        corpus = generate_corpus(small_spec())
        for vid in {r.video_id for r in corpus.records}:
            annos = {r.annotation for r in corpus.records if r.video_id == vid}
            assert len(annos) == 4

    def test_transcripts_cover_all_videos(self):
        corpus = generate_corpus(small_spec())
        assert {t.video_id for t in corpus.transcripts} == {
            r.video_id for r in corpus.records
        }
        assert all(t.transcript for t in corpus.transcripts)

    def test_split_keeps_concept_coverage(self):
        corpus = generate_corpus(small_spec(segments_per_concept=12))
        splits = split_dataset(corpus.records, SplitSpec(seed=1))
        train_annos = {
            r.annotation for r in corpus.records if r.video_id in splits.train
        }
        assert len(train_annos) == 4
