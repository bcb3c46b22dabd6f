"""Top-k concept-retrieval accuracy and ROUGE-1/2/L summary scoring.

Retrieval: a query counts for top-k when its true candidate is among the k
highest cosine similarities (embeddings are expected L2-normalized, so dot
product is cosine). Ties rank the lower candidate index first.

ROUGE: tokenization lowercases and splits on runs of non-alphanumeric
characters. ROUGE-n counts n-gram overlap with multiplicity; ROUGE-L uses
the longest common subsequence. Corpus scores are means of per-pair scores.
"""

import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

_TOKEN_RE = re.compile(r"[a-z0-9]+")

ROUGE_VARIANTS = ("R1", "R2", "RL")


@dataclass(frozen=True)
class RetrievalResult:
    top1: float
    top3: float
    candidate_count: int
    ranked: tuple = None  # optional per-query candidate ranking audit


@dataclass(frozen=True)
class RougeScore:
    variant: str
    precision: float
    recall: float
    f1: float


def _f1(p, r):
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def retrieval_ranks(query_embs, candidate_embs, truth):
    """Rank of each query's true candidate (0 = best), deterministic ties."""
    q = np.asarray(query_embs, dtype=np.float64)
    c = np.asarray(candidate_embs, dtype=np.float64)
    if q.ndim != 2 or c.ndim != 2 or q.shape[1] != c.shape[1]:
        raise ValueError(
            f"query shape {q.shape} and candidate shape {c.shape} are incompatible"
        )
    truth = np.asarray(truth, dtype=int)
    if truth.shape != (q.shape[0],):
        raise ValueError("truth must give one candidate index per query")
    if truth.size and (truth.min() < 0 or truth.max() >= c.shape[0]):
        raise ValueError("truth index out of candidate range")
    sims = q @ c.T  # (n, m)
    true_sim = sims[np.arange(q.shape[0]), truth]
    better = (sims > true_sim[:, None]).sum(axis=1)
    idx = np.arange(c.shape[0])[None, :]
    tied_lower = ((sims == true_sim[:, None]) & (idx < truth[:, None])).sum(axis=1)
    return better + tied_lower


def topk_retrieval_accuracy(query_embs, candidate_embs, truth, k):
    """Fraction of queries whose true candidate ranks within the top k."""
    c = np.asarray(candidate_embs)
    if k < 1 or k > c.shape[0]:
        raise ValueError(f"k={k} out of range for {c.shape[0]} candidates")
    ranks = retrieval_ranks(query_embs, candidate_embs, truth)
    return float(np.mean(ranks < k))


def evaluate_retrieval(query_embs, candidate_embs, truth, keep_ranked=False):
    """Top-1/Top-3 accuracy over the candidate pool (Top-3 capped at pool size)."""
    c = np.asarray(candidate_embs)
    ranks = retrieval_ranks(query_embs, candidate_embs, truth)
    top1 = float(np.mean(ranks < 1))
    top3 = float(np.mean(ranks < min(3, c.shape[0])))
    ranked = None
    if keep_ranked:
        sims = np.asarray(query_embs, dtype=np.float64) @ c.astype(np.float64).T
        # stable sort on (-sim, index) implements the tie rule
        ranked = tuple(
            tuple(int(j) for j in np.lexsort((np.arange(c.shape[0]), -sims[i])))
            for i in range(sims.shape[0])
        )
    return RetrievalResult(
        top1=top1, top3=top3, candidate_count=int(c.shape[0]), ranked=ranked
    )


def tokenize(text):
    """Lowercase and split on maximal runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(prediction, reference, n):
    """N-gram overlap precision/recall/F1 with multiplicity."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    pred = _ngrams(tokenize(prediction), n)
    ref = _ngrams(tokenize(reference), n)
    overlap = sum(min(count, ref[gram]) for gram, count in pred.items())
    total_pred = sum(pred.values())
    total_ref = sum(ref.values())
    p = overlap / total_pred if total_pred else 0.0
    r = overlap / total_ref if total_ref else 0.0
    return RougeScore(variant=f"R{n}", precision=p, recall=r, f1=_f1(p, r))


def _lcs_len(a, b):
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ai in a:
        cur = [0]
        for j, bj in enumerate(b, start=1):
            if ai == bj:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(prediction, reference):
    """Longest-common-subsequence precision/recall/F1 over token sequences."""
    pred = tokenize(prediction)
    ref = tokenize(reference)
    lcs = _lcs_len(pred, ref)
    p = lcs / len(pred) if pred else 0.0
    r = lcs / len(ref) if ref else 0.0
    return RougeScore(variant="RL", precision=p, recall=r, f1=_f1(p, r))


def score_pair(prediction, reference):
    """All three variants for one (prediction, reference) pair."""
    return {
        "R1": rouge_n(prediction, reference, 1),
        "R2": rouge_n(prediction, reference, 2),
        "RL": rouge_l(prediction, reference),
    }


def score_summary_corpus(pairs):
    """Arithmetic mean of per-pair precision/recall/F1 for each variant."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("corpus scoring needs at least one (prediction, reference) pair")
    sums = {v: np.zeros(3) for v in ROUGE_VARIANTS}
    for pred, ref in pairs:
        scores = score_pair(pred, ref)
        for v in ROUGE_VARIANTS:
            s = scores[v]
            sums[v] += (s.precision, s.recall, s.f1)
    n = len(pairs)
    return {
        v: RougeScore(
            variant=v,
            precision=float(sums[v][0] / n),
            recall=float(sums[v][1] / n),
            f1=float(sums[v][2] / n),
        )
        for v in ROUGE_VARIANTS
    }


def rouge_report_dict(scores):
    """JSON-ready {"R1": {"p","r","f"}, ...} mapping."""
    return {
        v: {
            "p": scores[v].precision,
            "r": scores[v].recall,
            "f": scores[v].f1,
        }
        for v in ROUGE_VARIANTS
    }


def format_rouge_table(scores, label="corpus"):
    """Two-decimal text table, one row per scored corpus."""
    lines = [
        f"{'Model':<16} {'R-1 (P/R/F)':<18} {'R-2 (P/R/F)':<18} {'R-L (P/R/F)':<18}"
    ]
    cells = []
    for v in ROUGE_VARIANTS:
        s = scores[v]
        cells.append(f"{s.precision:.2f}/{s.recall:.2f}/{s.f1:.2f}")
    lines.append(f"{label:<16} {cells[0]:<18} {cells[1]:<18} {cells[2]:<18}")
    return "\n".join(lines)
