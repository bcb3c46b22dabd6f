"""ROUGE-1/2/L scoring of generated summaries against references.

Scores are precision/recall/F1 per variant; corpus scores are the means of
per-pair scores, printed as a two-decimal table.
"""

from semaug.evaluation import (
    format_rouge_table,
    rouge_l,
    rouge_n,
    score_summary_corpus,
)

pred = "the cat sat"
ref = "the cat ate"
print(f"pair: pred={pred!r} ref={ref!r}")
for n in (1, 2):
    s = rouge_n(pred, ref, n)
    print(f"  R{n}: P={s.precision:.4f} R={s.recall:.4f} F={s.f1:.4f}")
s = rouge_l("a b c d", "a c b d")
print(f"  RL for 'a b c d' vs 'a c b d': {s.precision:.2f}/{s.recall:.2f}/{s.f1:.2f}"
      " (LCS length 3)")

corpus = [
    ("melt the butter then add onions", "melt butter and add the onions"),
    ("boil pasta for ten minutes", "boil the pasta ten minutes then drain"),
    ("season the soup with salt", "add salt and pepper to the soup"),
]
print("\ncorpus of three prediction/reference pairs:")
print(format_rouge_table(score_summary_corpus(corpus), label="demo-corpus"))
