"""Symmetric contrastive training of the embedding heads.

The loss is the CLIP-style symmetric cross-entropy over the in-batch
image/text similarity matrix with matched diagonal targets. Optimization is
plain gradient descent on the head parameters (encoders stay frozen; only
head weights move) and, optionally, on the log temperature-scale.

Temperature convention: logits = (img . txt) / tau with tau = exp(-t); the
trainable scalar is t, initialized to ln(1/tau_0).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import pipeline
from .diversity_batcher import build_diverse_batches, build_random_batches, kmeans_fit
from .evaluation import evaluate_retrieval
from .resampler_head import head_backward_batch, head_forward_batch, init_head

logger = logging.getLogger(__name__)

BATCHING_MODES = ("kmeans", "random")


class TrainingDiverged(RuntimeError):
    """Raised when a non-finite loss or gradient appears."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    learning_rate: float = 0.05
    batch_size: int = 16
    temperature_init: float = 0.07
    temperature_learnable: bool = True
    seed: int = 0
    batching_mode: str = "kmeans"
    cluster_count: int = None  # None -> min(batch_size, rows)

    def validate(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.temperature_init <= 0:
            raise ValueError("temperature_init must be > 0")
        if self.batching_mode not in BATCHING_MODES:
            raise ValueError(f"unknown batching_mode {self.batching_mode!r}")


@dataclass
class TrainReport:
    epoch_losses: list = field(default_factory=list)
    val_top1: list = field(default_factory=list)
    val_top3: list = field(default_factory=list)
    steps: int = 0
    final_log_temp: float = 0.0
    img_params: object = None
    txt_params: object = None
    checkpoints: dict = field(default_factory=dict)  # filled by callers that save

    def to_json_dict(self):
        return {
            "epoch_losses": [float(x) for x in self.epoch_losses],
            "val_top1": [float(x) for x in self.val_top1],
            "val_top3": [float(x) for x in self.val_top3],
            "steps": self.steps,
            "final_log_temp": float(self.final_log_temp),
            "checkpoints": dict(self.checkpoints),
        }


def similarity_matrix(img_embs, txt_embs, temperature):
    """Scaled cosine logits: logits[i][j] = img[i] . txt[j] / temperature."""
    img = np.asarray(img_embs, dtype=np.float64)
    txt = np.asarray(txt_embs, dtype=np.float64)
    if img.ndim != 2 or txt.ndim != 2 or img.shape != txt.shape:
        raise ValueError(
            f"expected matching (B, e) inputs, got {img.shape} and {txt.shape}"
        )
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    return img @ txt.T / temperature


def _log_softmax(z):
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def clip_contrastive_loss(logits):
    """Mean of row-wise and column-wise cross-entropy with diagonal targets."""
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise ValueError(f"logits must be square, got shape {z.shape}")
    if not np.isfinite(z).all():
        raise ValueError("logits contain non-finite entries")
    diag = np.arange(z.shape[0])
    row_ce = -_log_softmax(z)[diag, diag].mean()
    col_ce = -_log_softmax(z.T)[diag, diag].mean()
    return float(0.5 * (row_ce + col_ce))


def _loss_and_logit_grad(logits):
    b = logits.shape[0]
    diag = np.arange(b)
    log_p_row = _log_softmax(logits)
    log_p_col = _log_softmax(logits.T)
    loss = float(-0.5 * (log_p_row[diag, diag].mean() + log_p_col[diag, diag].mean()))
    eye = np.eye(b)
    grad = (np.exp(log_p_row) + np.exp(log_p_col).T - 2.0 * eye) / (2.0 * b)
    return loss, grad


def backward_gradients(
    img_params,
    txt_params,
    img_feats,
    txt_feats,
    log_temp,
    temperature_learnable=True,
):
    """Loss and exact gradients for one batch.

    img_feats: (B, T_img, d) stack, txt_feats: (B, T_txt, d) stack. Returns
    (loss, grads) with grads = {"img": {...}, "txt": {...}, "log_temp": float
    or None}; block shapes match the parameter matrices.
    """
    img_embs, img_cache = head_forward_batch(img_params, img_feats)
    txt_embs, txt_cache = head_forward_batch(txt_params, txt_feats)
    if img_embs.shape != txt_embs.shape:
        raise ValueError(
            f"head output shapes differ: {img_embs.shape} vs {txt_embs.shape}"
        )
    scale = math.exp(log_temp)
    logits = img_embs @ txt_embs.T * scale
    if not np.isfinite(logits).all():
        raise TrainingDiverged("non-finite values in logits")
    loss, d_logits = _loss_and_logit_grad(logits)

    d_img = d_logits @ txt_embs * scale
    d_txt = d_logits.T @ img_embs * scale
    grads = {
        "img": head_backward_batch(img_params, img_cache, d_img),
        "txt": head_backward_batch(txt_params, txt_cache, d_txt),
        "log_temp": float(np.sum(d_logits * logits)) if temperature_learnable else None,
    }
    for side in ("img", "txt"):
        for name, g in grads[side].items():
            if not np.isfinite(g).all():
                raise TrainingDiverged(f"non-finite gradient in {side}/{name}")
    return loss, grads


def _batch_loss(img_params, txt_params, img_feats, txt_feats, log_temp):
    img_embs, _ = head_forward_batch(img_params, img_feats)
    txt_embs, _ = head_forward_batch(txt_params, txt_feats)
    logits = img_embs @ txt_embs.T * math.exp(log_temp)
    return clip_contrastive_loss(logits)


@dataclass
class FdBlockResult:
    max_rel_err: float
    checked_coords: int
    passed: bool


@dataclass
class FdReport:
    blocks: dict
    tolerance: float
    eps: float
    warned_large_eps: bool = False

    @property
    def passed(self):
        return all(b.passed for b in self.blocks.values())

    @property
    def max_rel_err(self):
        return max((b.max_rel_err for b in self.blocks.values()), default=0.0)


def finite_difference_check(
    img_params,
    txt_params,
    img_feats,
    txt_feats,
    log_temp=0.0,
    temperature_learnable=True,
    eps=1e-4,
    tolerance=1e-4,
    min_coords=50,
    seed=0,
    analytic=None,
):
    """Compare analytic gradients against central finite differences.

    Checks every coordinate of blocks smaller than min_coords and a seeded
    subsample otherwise. Relative error per coordinate is
    |a - n| / max(|a|, |n|, 1e-3); the floor guards coordinates whose true
    gradient is below the finite-difference noise level.
    """
    if eps > 1e-2:
        logger.warning(
            "finite-difference eps=%g is large; truncation error grows as eps^2", eps
        )
    rng = np.random.default_rng(seed)
    if analytic is None:
        _, analytic = backward_gradients(
            img_params,
            txt_params,
            img_feats,
            txt_feats,
            log_temp,
            temperature_learnable,
        )

    blocks = {}

    def check_array(name, arr, grad):
        flat = arr.reshape(-1)
        gflat = np.asarray(grad).reshape(-1)
        size = flat.shape[0]
        coords = (
            np.arange(size)
            if size <= min_coords
            else np.sort(rng.choice(size, size=min_coords, replace=False))
        )
        max_rel = 0.0
        for c in coords:
            orig = flat[c]
            flat[c] = orig + eps
            up = _batch_loss(img_params, txt_params, img_feats, txt_feats, log_temp)
            flat[c] = orig - eps
            down = _batch_loss(img_params, txt_params, img_feats, txt_feats, log_temp)
            flat[c] = orig
            numeric = (up - down) / (2.0 * eps)
            a = gflat[c]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-3)
            max_rel = max(max_rel, rel)
        blocks[name] = FdBlockResult(
            max_rel_err=max_rel, checked_coords=len(coords), passed=max_rel <= tolerance
        )

    for side, params in (("img", img_params), ("txt", txt_params)):
        for name, arr in params.matrices():
            check_array(f"{side}/{name}", arr, analytic[side][name])

    if temperature_learnable:
        up = _batch_loss(img_params, txt_params, img_feats, txt_feats, log_temp + eps)
        down = _batch_loss(img_params, txt_params, img_feats, txt_feats, log_temp - eps)
        numeric = (up - down) / (2.0 * eps)
        a = analytic["log_temp"]
        rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-3)
        blocks["log_temp"] = FdBlockResult(
            max_rel_err=rel, checked_coords=1, passed=rel <= tolerance
        )

    return FdReport(blocks=blocks, tolerance=tolerance, eps=eps, warned_large_eps=eps > 1e-2)


def _apply_update(params, grads, lr):
    for name, arr in params.matrices():
        arr -= lr * grads[name]


def train(frame_table, text_table, records, splits, head_config, config):
    """Run the full training loop; deterministic for a fixed config.seed.

    Per epoch: build a batch plan (k-means clusters are fit once since the
    input features are frozen), sweep batches with gradient-descent updates,
    then record val Top-1/Top-3 under the current heads.
    """
    config.validate()
    train_records = pipeline.subset_records(records, splits.train)
    val_records = pipeline.subset_records(records, splits.val)
    if not train_records:
        raise ValueError("training split is empty")

    img_seqs = pipeline.image_sequences(train_records, frame_table).astype(np.float64)
    txt_seqs = pipeline.text_rows(train_records, text_table).astype(np.float64)[:, None, :]
    n = len(train_records)
    b = min(config.batch_size, n)

    img_params = init_head(head_config, [config.seed, 0])
    txt_params = init_head(head_config, [config.seed, 1])
    log_temp = math.log(1.0 / config.temperature_init)
    trainable = bool(list(img_params.matrices()) or list(txt_params.matrices()))

    model = None
    if config.batching_mode == "kmeans":
        feats = pipeline.clustering_features(train_records, frame_table)
        k = config.cluster_count if config.cluster_count is not None else min(b, n)
        model = kmeans_fit(feats, k=k, seed=[config.seed, 2])

    report = TrainReport()
    for epoch in range(config.epochs):
        if config.batching_mode == "kmeans":
            plan = build_diverse_batches(model, b, seed=[config.seed, 3, epoch])
        else:
            plan = build_random_batches(n, b, seed=[config.seed, 3, epoch])

        losses = []
        for batch in plan.batches:
            rows = np.asarray(batch, dtype=int)
            loss, grads = backward_gradients(
                img_params,
                txt_params,
                img_seqs[rows],
                txt_seqs[rows],
                log_temp,
                config.temperature_learnable,
            )
            if not math.isfinite(loss):
                raise TrainingDiverged(f"loss became non-finite at step {report.steps}")
            losses.append(loss)
            if trainable and config.learning_rate > 0:
                _apply_update(img_params, grads["img"], config.learning_rate)
                _apply_update(txt_params, grads["txt"], config.learning_rate)
            if config.temperature_learnable and config.learning_rate > 0:
                log_temp -= config.learning_rate * grads["log_temp"]
            report.steps += 1
        report.epoch_losses.append(float(np.mean(losses)))

        if val_records:
            q, c, truth, _ = pipeline.retrieval_task(
                val_records, frame_table, text_table, img_params, txt_params
            )
            result = evaluate_retrieval(q, c, truth)
            report.val_top1.append(result.top1)
            report.val_top3.append(result.top3)

    report.img_params = img_params
    report.txt_params = txt_params
    report.final_log_temp = log_temp
    return report
