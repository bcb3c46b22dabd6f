"""Assemble summarizer inputs: predicted concepts plus the video transcript.

The rendered prompt is versioned by TEMPLATE_VERSION; the concepts line is
prepended only when augmentation is enabled, so the plain transcript is
always a suffix of the augmented prompt.
"""

import json
import logging
from dataclasses import dataclass

logger = logging.getLogger(__name__)

TEMPLATE_VERSION = 1


@dataclass(frozen=True)
class AugmentedInput:
    video_id: str
    concepts: tuple  # annotation sentences in segment temporal order
    transcript: str
    rendered: str


def order_concepts(pairs):
    """Sort (start_sec, concept) pairs by start time; returns concepts only.

    Ties keep the given relative order.
    """
    return [c for _, c in sorted(pairs, key=lambda p: p[0])]


def assemble_augmented_input(video_id, concepts, transcript, include_concepts=True):
    """Render one summarizer input for a video.

    With include_concepts the prompt is
    "Concepts: <c1>; <c2>\\nTranscript: <transcript>"; without it the prompt
    is the bare transcript (the no-augmentation baseline).
    """
    if not transcript:
        raise ValueError(f"video {video_id!r} has an empty transcript")
    concepts = tuple(concepts)
    if include_concepts:
        if not concepts:
            logger.warning("video %r has no predicted concepts to prepend", video_id)
        rendered = "Concepts: " + "; ".join(concepts) + "\nTranscript: " + transcript
    else:
        rendered = transcript
    return AugmentedInput(
        video_id=video_id, concepts=concepts, transcript=transcript, rendered=rendered
    )


def write_prompts(inputs, path):
    """Emit prompts as JSON Lines {"video_id", "prompt"}."""
    with open(path, "w", encoding="utf-8") as f:
        for item in inputs:
            f.write(
                json.dumps(
                    {"video_id": item.video_id, "prompt": item.rendered},
                    sort_keys=True,
                )
                + "\n"
            )


def write_summaries(summaries, path):
    """Emit {"video_id", "summary"} JSON Lines (ref or generated summaries)."""
    with open(path, "w", encoding="utf-8") as f:
        for video_id, summary in summaries:
            f.write(
                json.dumps({"video_id": video_id, "summary": summary}, sort_keys=True)
                + "\n"
            )


def read_summaries(path):
    """Read {"video_id", "summary"} JSON Lines into an ordered dict."""
    out = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            vid = str(obj["video_id"])
            if vid in out:
                raise ValueError(f"{path} line {line_no}: duplicate video_id {vid!r}")
            out[vid] = str(obj["summary"])
    return out
