"""Acceptance suite: one criterion per test, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. The synthetic-training criteria share a module-scoped fixture so the
whole suite stays inside its runtime budgets.
"""

import filecmp
import math
import os
import time

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from oracles import oracle_rouge_l, oracle_rouge_n
from semaug import pipeline
from semaug.cli import run as cli_run
from semaug.contrastive_trainer import TrainConfig, finite_difference_check, train
from semaug.dataset import SplitSpec, split_dataset
from semaug.diversity_batcher import (
    build_diverse_batches,
    build_random_batches,
    kmeans_fit,
    mean_pairwise_distance,
)
from semaug.evaluation import evaluate_retrieval, rouge_l, rouge_n
from semaug.resampler_head import HeadConfig, init_head, resampler_forward
from semaug.synth import SynthSpec, generate_corpus


def _report(criterion, ok, detail):
    print(f"{criterion} {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"{criterion}: {detail}"


# ---------------------------------------------------------------------------
# A1 - gradient correctness
# ---------------------------------------------------------------------------


def test_a1_gradient_correctness():
    """Analytic gradients match central finite differences on 20 tiny configs."""
    start = time.monotonic()
    cfg = HeadConfig(d=4, latent_count=2, attn_dim=3, embed_dim=4, mode="perceiver")
    worst = 0.0
    for trial in range(20):
        rng = np.random.default_rng(1000 + trial)
        img = init_head(cfg, [trial, 0])
        txt = init_head(cfg, [trial, 1])
        img_feats = rng.normal(size=(3, 3, 4))  # B=3 sequences of T=3 frames
        txt_feats = rng.normal(size=(3, 1, 4))
        rep = finite_difference_check(
            img, txt, img_feats, txt_feats,
            log_temp=math.log(1 / 0.07), temperature_learnable=True,
            eps=1e-4, tolerance=1e-4, seed=trial,
        )
        worst = max(worst, rep.max_rel_err)
        assert rep.passed, {k: v.max_rel_err for k, v in rep.blocks.items()}
    elapsed = time.monotonic() - start
    _report(
        "A1",
        worst <= 1e-4 and elapsed < 30,
        f"gradient check on 20 configs: max rel err {worst:.2e} <= 1e-4, "
        f"{elapsed:.1f}s < 30s",
    )


# ---------------------------------------------------------------------------
# A2 - ROUGE against an independent brute-force oracle
# ---------------------------------------------------------------------------

ROUGE_PAIRS = [
    ("the cat sat", "the cat ate"),  # worked example: 2/3 unigram, 1/2 bigram
    ("the cat sat on the mat", "the cat sat on the mat"),
    ("alpha beta gamma", "delta epsilon zeta"),
    ("a b c d", "a c b d"),
    ("go go go", "go go stop"),
    ("", "non empty reference"),
    ("non empty prediction", ""),
    ("single", "single"),
    ("Mix, THE batter!", "mix the batter"),
    ("one two three four five", "one three five"),
    ("repeat repeat repeat repeat", "repeat"),
    ("stir slowly then season", "season then stir slowly"),
    ("add 2 cups of flour", "add two cups of flour"),
    ("preheat the oven to 350", "preheat oven to 350 degrees"),
    ("x y z", "z y x"),
    ("the the the cat", "the cat the cat"),
    ("chop onions and garlic finely", "finely chop the garlic and onions"),
    ("boil water", "boil the water then add salt and stir"),
    ("a", "a b"),
    ("knead the dough for ten minutes", "rest the dough for ten minutes"),
]


def test_a2_rouge_matches_oracle():
    worst = 0.0
    for pred, ref in ROUGE_PAIRS:
        for n in (1, 2):
            mine = rouge_n(pred, ref, n)
            p, r, f = oracle_rouge_n(pred, ref, n)
            worst = max(
                worst,
                abs(mine.precision - p), abs(mine.recall - r), abs(mine.f1 - f),
            )
        mine = rouge_l(pred, ref)
        p, r, f = oracle_rouge_l(pred, ref)
        worst = max(
            worst, abs(mine.precision - p), abs(mine.recall - r), abs(mine.f1 - f)
        )
    worked = rouge_n("the cat sat", "the cat ate", 1)
    assert worked.f1 == pytest.approx(2 / 3, abs=1e-12)
    assert rouge_n("the cat sat", "the cat ate", 2).f1 == pytest.approx(0.5, abs=1e-12)
    _report(
        "A2",
        worst <= 1e-9,
        f"rouge vs brute-force oracle on {len(ROUGE_PAIRS)} pairs: "
        f"max abs diff {worst:.1e} <= 1e-9",
    )


# ---------------------------------------------------------------------------
# A3/A4 - synthetic retrieval learning and diversity batching
# ---------------------------------------------------------------------------

SEEDS = range(5)


def _train_and_score(seed, mode, batching):
    corpus = generate_corpus(SynthSpec(seed=seed))
    splits = split_dataset(corpus.records, SplitSpec(seed=seed))
    head = HeadConfig(d=32, mode=mode)
    config = TrainConfig(
        epochs=200, learning_rate=0.05, batch_size=16,
        seed=seed, batching_mode=batching, cluster_count=10,
    )
    report = train(
        corpus.frame_table, corpus.text_table, corpus.records, splits, head, config
    )
    held_out = pipeline.subset_records(corpus.records, splits.test)
    q, c, truth, _ = pipeline.retrieval_task(
        held_out, corpus.frame_table, corpus.text_table,
        report.img_params, report.txt_params,
    )
    return evaluate_retrieval(q, c, truth).top1


@pytest.fixture(scope="module")
def synthetic_training_results():
    start = time.monotonic()
    results = {
        mode: [_train_and_score(s, mode, "kmeans") for s in SEEDS]
        for mode in ("perceiver", "learnable_pool", "frozen_mean")
    }
    results["elapsed_a3"] = time.monotonic() - start
    results["perceiver_random"] = [
        _train_and_score(s, "perceiver", "random") for s in SEEDS
    ]
    return results


def test_a3_synthetic_retrieval_learning(synthetic_training_results):
    res = synthetic_training_results
    perceiver = float(np.mean(res["perceiver"]))
    learnable = float(np.mean(res["learnable_pool"]))
    frozen = float(np.mean(res["frozen_mean"]))
    elapsed = res["elapsed_a3"]
    ok = (
        perceiver >= 0.90
        and perceiver >= learnable >= frozen
        and elapsed < 300
    )
    _report(
        "A3",
        ok,
        f"held-out top1 means over 5 seeds: perceiver {perceiver:.3f} >= 0.90, "
        f"ordering {perceiver:.3f} >= {learnable:.3f} >= {frozen:.3f}, "
        f"{elapsed:.0f}s < 300s",
    )


def test_a4_diversity_batching(synthetic_training_results):
    res = synthetic_training_results
    kmeans_acc = float(np.mean(res["perceiver"]))
    random_acc = float(np.mean(res["perceiver_random"]))

    mpd_kmeans, mpd_random = [], []
    for seed in SEEDS:
        corpus = generate_corpus(SynthSpec(seed=seed))
        splits = split_dataset(corpus.records, SplitSpec(seed=seed))
        recs = pipeline.subset_records(corpus.records, splits.train)
        feats = pipeline.clustering_features(recs, corpus.frame_table)
        model = kmeans_fit(feats, k=10, seed=seed)
        diverse = build_diverse_batches(model, 16, seed=seed)
        random_plan = build_random_batches(len(recs), 16, seed=seed)
        mpd_kmeans.append(np.mean(
            [mean_pairwise_distance(feats, b) for b in diverse.batches if len(b) >= 2]
        ))
        mpd_random.append(np.mean(
            [mean_pairwise_distance(feats, b) for b in random_plan.batches if len(b) >= 2]
        ))
    mk, mr = float(np.mean(mpd_kmeans)), float(np.mean(mpd_random))
    ok = mk > mr and kmeans_acc >= random_acc
    _report(
        "A4",
        ok,
        f"mean pairwise distance kmeans {mk:.4f} > random {mr:.4f}; "
        f"final top1 kmeans {kmeans_acc:.3f} >= random {random_acc:.3f} (5-seed means)",
    )


# ---------------------------------------------------------------------------
# A5 - k-means sanity
# ---------------------------------------------------------------------------


def test_a5_kmeans_sanity():
    rng = np.random.default_rng(99)
    points, labels = [], []
    for label, center in enumerate([(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)]):
        points.append(rng.normal(loc=center, scale=0.5, size=(100, 2)))
        labels.extend([label] * 100)
    model = kmeans_fit(np.vstack(points), k=3, seed=0)
    ari = adjusted_rand_score(labels, model.assignments)

    monotone = True
    for trial in range(50):
        trng = np.random.default_rng(trial)
        x = trng.normal(size=(int(trng.integers(8, 80)), int(trng.integers(2, 8))))
        hist = kmeans_fit(x, k=int(trng.integers(1, 7)), seed=trial, n_init=1).inertia_history
        monotone = monotone and all(a >= b - 1e-9 for a, b in zip(hist, hist[1:]))

    _report(
        "A5",
        ari == 1.0 and monotone,
        f"3-blob adjusted Rand index {ari:.3f} == 1.0; "
        f"inertia non-increasing on 50 random datasets: {monotone}",
    )


# ---------------------------------------------------------------------------
# A6 - pipeline determinism
# ---------------------------------------------------------------------------


def _run_chain(workdir):
    cwd = os.getcwd()
    os.chdir(workdir)
    try:
        steps = [
            ["gen-synth", "--out-dir", "data", "--concepts", "6",
             "--segments-per-concept", "10", "--dim", "16",
             "--segments-per-video", "6", "--seed", "4"],
            ["split", "--manifest", "data/manifest.jsonl",
             "--out", "splits.json", "--seed", "9"],
            ["batch-plan", "--manifest", "data/manifest.jsonl",
             "--frames", "data/frames.semb", "--splits", "splits.json",
             "--out", "plan.jsonl", "--batch-size", "8", "--clusters", "6",
             "--seed", "2"],
            ["train", "--manifest", "data/manifest.jsonl",
             "--frames", "data/frames.semb", "--texts", "data/texts.semb",
             "--splits", "splits.json", "--out-prefix", "run",
             "--epochs", "25", "--batch-size", "8", "--clusters", "6",
             "--seed", "2"],
            ["eval-retrieval", "--manifest", "data/manifest.jsonl",
             "--frames", "data/frames.semb", "--texts", "data/texts.semb",
             "--splits", "splits.json", "--split", "test",
             "--img-ckpt", "run.img.ckpt", "--txt-ckpt", "run.txt.ckpt",
             "--out", "eval.json", "--predictions", "preds.jsonl"],
            ["prompts", "--manifest", "data/manifest.jsonl",
             "--transcripts", "data/transcripts.jsonl",
             "--predictions", "preds.jsonl", "--out", "prompts.jsonl",
             "--gold-summaries-out", "gold.jsonl",
             "--concept-summaries-out", "csum.jsonl"],
            ["score", "--pred", "csum.jsonl", "--ref", "gold.jsonl",
             "--out", "scores.json"],
        ]
        for step in steps:
            assert cli_run(step) == 0, f"step failed: {step[0]}"
    finally:
        os.chdir(cwd)


def test_a6_pipeline_determinism(tmp_path):
    run_a = tmp_path / "a"
    run_b = tmp_path / "b"
    run_a.mkdir()
    run_b.mkdir()
    _run_chain(run_a)
    _run_chain(run_b)

    artifacts = sorted(
        str(p.relative_to(run_a)) for p in run_a.rglob("*") if p.is_file()
    )
    assert artifacts, "chain produced no files"
    mismatched = [
        rel
        for rel in artifacts
        if not filecmp.cmp(run_a / rel, run_b / rel, shallow=False)
    ]
    _report(
        "A6",
        not mismatched,
        f"two chain runs byte-identical across {len(artifacts)} artifacts"
        + (f"; mismatched: {mismatched}" if mismatched else ""),
    )


# ---------------------------------------------------------------------------
# A7 - fixed-size contract and permutation invariance
# ---------------------------------------------------------------------------


def test_a7_fixed_size_contract():
    cfg = HeadConfig(d=12, latent_count=4, attn_dim=6, embed_dim=10, mode="perceiver")
    params = init_head(cfg, seed=21)
    rng = np.random.default_rng(21)
    dims = set()
    for t in (1, 2, 5, 17, 50):
        out = resampler_forward(params, rng.normal(size=(t, 12)))
        dims.add(out.shape[0])

    x = rng.normal(size=(17, 12))
    base = resampler_forward(params, x)
    max_dev = 0.0
    for _ in range(10):
        out = resampler_forward(params, x[rng.permutation(17)])
        max_dev = max(max_dev, float(np.abs(out - base).max()))

    ok = dims == {10} and max_dev <= 1e-6
    _report(
        "A7",
        ok,
        f"output dim fixed at {sorted(dims)} across T in (1,2,5,17,50); "
        f"permutation deviation {max_dev:.1e} <= 1e-6",
    )
