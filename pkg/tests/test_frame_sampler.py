import numpy as np
import pytest

from semaug.dataset import EmbeddingTable, RowRef, SegmentRecord
from semaug.frame_sampler import (
    middle_frame_indices,
    segment_sequences,
    temporal_concat,
    uniform_sample_indices,
)


class TestMiddleFrameIndices:
    def test_ten_frames(self):
        assert middle_frame_indices(10) == (4, 5, 6)

    def test_smallest_segment(self):
        assert middle_frame_indices(3) == (0, 1, 2)

    def test_seven_frames(self):
        assert middle_frame_indices(7) == (2, 3, 4)

    def test_too_few_frames(self):
        with pytest.raises(ValueError):
            middle_frame_indices(2)

    @pytest.mark.parametrize("n", range(3, 60))
    def test_consecutive_in_range_and_centered(self, n):
        triple = middle_frame_indices(n)
        assert len(triple) == 3
        assert triple[1] == triple[0] + 1 and triple[2] == triple[1] + 1
        assert 0 <= triple[0] and triple[2] < n
        assert n // 2 in triple


class TestUniformSampleIndices:
    def test_three_of_ten(self):
        assert uniform_sample_indices(10, 3) == (0, 4, 9)

    def test_all_frames(self):
        assert uniform_sample_indices(5, 5) == (0, 1, 2, 3, 4)

    def test_single_sample_is_middle(self):
        assert uniform_sample_indices(9, 1) == (4,)

    def test_k_larger_than_n(self):
        with pytest.raises(ValueError):
            uniform_sample_indices(4, 5)

    @pytest.mark.parametrize("n,k", [(10, 2), (10, 4), (37, 5), (100, 7), (6, 6)])
    def test_endpoints_and_order(self, n, k):
        idx = uniform_sample_indices(n, k)
        assert idx[0] == 0 and idx[-1] == n - 1
        assert all(a < b for a, b in zip(idx, idx[1:]))


class TestTemporalConcat:
    def test_scalar_dims(self):
        np.testing.assert_array_equal(
            temporal_concat([np.array([1.0]), np.array([2.0]), np.array([3.0])]),
            [1.0, 2.0, 3.0],
        )

    def test_order_sensitivity(self):
        a, b, c = np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([2.0, 2.0])
        assert not np.array_equal(temporal_concat([a, b, c]), temporal_concat([b, a, c]))

    def test_zero_vectors(self):
        zeros = [np.zeros(4)] * 3
        np.testing.assert_array_equal(temporal_concat(zeros), np.zeros(12))

    def test_dimension_mismatch_names_vector(self):
        with pytest.raises(ValueError, match="vector 2"):
            temporal_concat([np.zeros(3), np.zeros(3), np.zeros(5)])

    def test_middle_slot_recoverable(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            frames = [rng.normal(size=6) for _ in range(3)]
            out = temporal_concat(frames)
            np.testing.assert_array_equal(out[6:12], frames[1])


class TestSegmentSequences:
    def make_fixture(self):
        rec = SegmentRecord("v0", "s0", 0.0, 2.0, "chop onions", 10)
        rows = np.arange(12, dtype=np.float32).reshape(3, 4)
        index = [RowRef("v0", "s0", i) for i in (4, 5, 6)]
        table = EmbeddingTable(dim=4, rows=rows, index=index)
        return rec, table

    def test_lookup_in_temporal_order(self):
        rec, table = self.make_fixture()
        seqs = segment_sequences([rec], table)
        assert seqs.shape == (1, 3, 4)
        np.testing.assert_array_equal(seqs[0], table.rows)

    def test_missing_frame_row(self):
        rec, table = self.make_fixture()
        bad = SegmentRecord("v0", "s1", 0.0, 2.0, "whisk eggs", 10)
        with pytest.raises(KeyError, match="s1"):
            segment_sequences([bad], table)
