"""Concept retrieval evaluation and summarizer prompt assembly.

After training, each held-out segment's frame sequence is embedded and
matched against the head-embedded pool of distinct annotations; the top-1
annotation becomes the segment's predicted concept, and per-video concepts
prepend the transcript as the summarizer input.
"""

from semaug import pipeline
from semaug.contrastive_trainer import TrainConfig, train
from semaug.dataset import SplitSpec, split_dataset
from semaug.evaluation import evaluate_retrieval
from semaug.prompt_assembler import assemble_augmented_input
from semaug.resampler_head import HeadConfig
from semaug.synth import SynthSpec, generate_corpus

corpus = generate_corpus(SynthSpec(concepts=5, segments_per_concept=10, dim=16,
                                   segments_per_video=5, seed=4))
splits = split_dataset(corpus.records, SplitSpec(seed=4))
report = train(
    corpus.frame_table, corpus.text_table, corpus.records, splits,
    HeadConfig(d=16, latent_count=4, mode="perceiver"),
    TrainConfig(epochs=25, batch_size=8, seed=4, cluster_count=5),
)

held_out = pipeline.subset_records(corpus.records, splits.test)
q, c, truth, texts = pipeline.retrieval_task(
    held_out, corpus.frame_table, corpus.text_table,
    report.img_params, report.txt_params,
)
result = evaluate_retrieval(q, c, truth)
print(f"held-out retrieval: top1 {result.top1:.3f} top3 {result.top3:.3f} "
      f"over {result.candidate_count} candidates")

predicted = pipeline.predict_concepts(q, c, texts)
video_id = held_out[0].video_id
segs = sorted(
    (r for r in held_out if r.video_id == video_id), key=lambda r: r.start_sec
)
concepts = [
    predicted[held_out.index(r)] for r in segs
]
transcript = next(
    t.transcript for t in corpus.transcripts if t.video_id == video_id
)

augmented = assemble_augmented_input(video_id, concepts, transcript)
baseline = assemble_augmented_input(video_id, concepts, transcript,
                                    include_concepts=False)
print(f"\nsummarizer input for {video_id} (augmented):\n  {augmented.rendered!r}")
print(f"\nbaseline input (transcript only):\n  {baseline.rendered!r}")
