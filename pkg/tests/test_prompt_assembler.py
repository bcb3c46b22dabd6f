import pytest

from semaug.prompt_assembler import (
    assemble_augmented_input,
    order_concepts,
    read_summaries,
    write_prompts,
    write_summaries,
)


class TestAssemble:
    def test_baseline_is_bare_transcript(self):
        out = assemble_augmented_input("v1", ["melt butter"], "hello", include_concepts=False)
        assert out.rendered == "hello"

    def test_template_rendering(self):
        out = assemble_augmented_input(
            "v1", ["melt butter", "add onions"], "hello", include_concepts=True
        )
        assert out.rendered == "Concepts: melt butter; add onions\nTranscript: hello"

    def test_empty_concepts_warns_but_renders(self, caplog):
        with caplog.at_level("WARNING"):
            out = assemble_augmented_input("v1", [], "some talking")
        assert out.rendered == "Concepts: \nTranscript: some talking"
        assert any("concepts" in r.message for r in caplog.records)

    def test_empty_transcript_rejected(self):
        with pytest.raises(ValueError):
            assemble_augmented_input("v1", ["x"], "")

    def test_transcript_is_suffix_of_augmented(self):
        transcript = "start stirring now"
        plain = assemble_augmented_input("v", ["a"], transcript, include_concepts=False)
        augmented = assemble_augmented_input("v", ["a"], transcript, include_concepts=True)
        assert augmented.rendered.endswith(plain.rendered)


class TestOrderConcepts:
    def test_sorts_by_start_time(self):
        pairs = [(30.0, "c"), (10.0, "a"), (20.0, "b")]
        assert order_concepts(pairs) == ["a", "b", "c"]

    def test_any_permutation_gives_same_order(self):
        import itertools

        pairs = [(1.0, "one"), (2.0, "two"), (3.0, "three")]
        expected = order_concepts(pairs)
        for perm in itertools.permutations(pairs):
            assert order_concepts(list(perm)) == expected


class TestSummaryFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "s.jsonl"
        write_summaries([("v1", "first summary"), ("v2", "second")], path)
        assert read_summaries(path) == {"v1": "first summary", "v2": "second"}

    def test_duplicate_video_rejected(self, tmp_path):
        path = tmp_path / "s.jsonl"
        write_summaries([("v1", "a"), ("v1", "b")], path)
        with pytest.raises(ValueError, match="duplicate"):
            read_summaries(path)

    def test_prompt_emission(self, tmp_path):
        import json

        inputs = [
            assemble_augmented_input("v1", ["chop"], "talk talk"),
            assemble_augmented_input("v2", [], "more talk", include_concepts=False),
        ]
        path = tmp_path / "p.jsonl"
        write_prompts(inputs, path)
        lines = [json.loads(l) for l in path.read_text().splitlines()]
        assert lines[0] == {"video_id": "v1", "prompt": "Concepts: chop\nTranscript: talk talk"}
        assert lines[1] == {"video_id": "v2", "prompt": "more talk"}
