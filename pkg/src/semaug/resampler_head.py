"""Heads that map a variable-length feature sequence to one fixed-size embedding.

Three modes:
  * ``perceiver``       - learned latent queries cross-attend over the input
                          rows (single block, single head), flattened and
                          projected to the shared embedding dim.
  * ``learnable_pool``  - scalar attention scores per row, softmax-weighted
                          mean, then a learned projection.
  * ``frozen_mean``     - arithmetic mean of the rows; no parameters.

All outputs are L2-normalized so cosine similarity equals dot product. The
batched forward/backward pairs below are what the trainer drives; the
single-sequence functions wrap them.
"""

import json
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

MODES = ("perceiver", "learnable_pool", "frozen_mean")
CHECKPOINT_KIND = "semaug-head"


@dataclass(frozen=True)
class HeadConfig:
    d: int  # input feature dim
    latent_count: int = 8
    attn_dim: int = None  # defaults to d
    embed_dim: int = None  # defaults to d
    mode: str = "perceiver"

    def __post_init__(self):
        if self.attn_dim is None:
            object.__setattr__(self, "attn_dim", self.d)
        if self.embed_dim is None:
            object.__setattr__(self, "embed_dim", self.d)
        if self.mode not in MODES:
            raise ValueError(f"unknown head mode {self.mode!r}")
        for name in ("d", "latent_count", "attn_dim", "embed_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def output_dim(self):
        return self.d if self.mode == "frozen_mean" else self.embed_dim


@dataclass
class ResamplerParams:
    latents: np.ndarray  # (R, d)
    w_q: np.ndarray  # (d, h)
    w_k: np.ndarray  # (d, h)
    w_v: np.ndarray  # (d, h)
    w_o: np.ndarray  # (R*h, e)

    def matrices(self):
        return [
            ("latents", self.latents),
            ("w_q", self.w_q),
            ("w_k", self.w_k),
            ("w_v", self.w_v),
            ("w_o", self.w_o),
        ]


@dataclass
class LearnablePoolParams:
    w: np.ndarray  # (d,) row scoring vector
    p: np.ndarray  # (d, e) projection

    def matrices(self):
        return [("w", self.w), ("p", self.p)]


@dataclass
class FrozenMeanParams:
    def matrices(self):
        return []


def _glorot(rng, shape):
    fan = shape[0] + (shape[1] if len(shape) > 1 else 1)
    s = np.sqrt(6.0 / fan)
    return rng.uniform(-s, s, size=shape)


def init_head(config, seed):
    """Draw head parameters i.i.d. uniform(-s, s), s = sqrt(6/(fan_in+fan_out))."""
    rng = np.random.default_rng(seed)
    d, r = config.d, config.latent_count
    h, e = config.attn_dim, config.embed_dim
    if config.mode == "perceiver":
        return ResamplerParams(
            latents=_glorot(rng, (r, d)),
            w_q=_glorot(rng, (d, h)),
            w_k=_glorot(rng, (d, h)),
            w_v=_glorot(rng, (d, h)),
            w_o=_glorot(rng, (r * h, e)),
        )
    if config.mode == "learnable_pool":
        return LearnablePoolParams(w=_glorot(rng, (d,)), p=_glorot(rng, (d, e)))
    return FrozenMeanParams()


def _softmax_last(z):
    z = z - z.max(axis=-1, keepdims=True)
    ez = np.exp(z)
    return ez / ez.sum(axis=-1, keepdims=True)


def _normalize_rows(u, zero_ok=False):
    norms = np.linalg.norm(u, axis=-1, keepdims=True)
    if np.any(norms == 0):
        if not zero_ok:
            raise ValueError("cannot L2-normalize a zero embedding")
        logger.warning("zero-norm embedding left unnormalized")
        safe = np.where(norms == 0, 1.0, norms)
        return u / safe, norms
    return u / norms, norms


def _check_batch(x, d):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"expected (B, T, d) features, got shape {x.shape}")
    if x.shape[1] < 1:
        raise ValueError("feature sequences must have at least one row")
    if x.shape[2] != d:
        raise ValueError(f"feature dim {x.shape[2]} does not match head dim {d}")
    return x


def resampler_forward_batch(params, x):
    """Cross-attention forward over a (B, T, d) stack; returns (out, cache)."""
    x = _check_batch(x, params.w_q.shape[0])
    h = params.w_q.shape[1]
    q = params.latents @ params.w_q  # (R, h)
    k = x @ params.w_k  # (B, T, h)
    v = x @ params.w_v  # (B, T, h)
    scale = 1.0 / np.sqrt(h)
    scores = np.einsum("rh,bth->brt", q, k) * scale
    attn = _softmax_last(scores)  # (B, R, T), rows sum to 1
    z = np.einsum("brt,bth->brh", attn, v)
    z_flat = z.reshape(z.shape[0], -1)  # row-major (B, R*h)
    u = z_flat @ params.w_o  # (B, e)
    out, norms = _normalize_rows(u)
    cache = {"x": x, "q": q, "k": k, "v": v, "attn": attn, "z_flat": z_flat,
             "out": out, "norms": norms, "scale": scale}
    return out, cache


def resampler_backward_batch(params, cache, d_out):
    """Gradients of the batched forward w.r.t. every parameter matrix."""
    x, q, k, v = cache["x"], cache["q"], cache["k"], cache["v"]
    attn, out, norms, scale = cache["attn"], cache["out"], cache["norms"], cache["scale"]
    b, r, t = attn.shape

    d_u = (d_out - np.sum(d_out * out, axis=1, keepdims=True) * out) / norms
    d_wo = cache["z_flat"].T @ d_u
    d_zflat = d_u @ params.w_o.T
    d_z = d_zflat.reshape(b, r, -1)

    d_attn = np.einsum("brh,bth->brt", d_z, v)
    d_v = np.einsum("brt,brh->bth", attn, d_z)
    inner = np.sum(d_attn * attn, axis=2, keepdims=True)
    d_scores = attn * (d_attn - inner)

    d_q = np.einsum("brt,bth->rh", d_scores, k) * scale
    d_k = np.einsum("brt,rh->bth", d_scores, q) * scale
    d_latents = d_q @ params.w_q.T
    d_wq = params.latents.T @ d_q
    d_wk = np.einsum("btd,bth->dh", x, d_k)
    d_wv = np.einsum("btd,bth->dh", x, d_v)
    return {"latents": d_latents, "w_q": d_wq, "w_k": d_wk, "w_v": d_wv, "w_o": d_wo}


def learnable_pool_forward_batch(params, x):
    """Score-weighted pooling forward over a (B, T, d) stack."""
    x = _check_batch(x, params.w.shape[0])
    scores = x @ params.w  # (B, T)
    attn = _softmax_last(scores)
    pooled = np.einsum("bt,btd->bd", attn, x)
    u = pooled @ params.p
    out, norms = _normalize_rows(u)
    cache = {"x": x, "attn": attn, "pooled": pooled, "out": out, "norms": norms}
    return out, cache


def learnable_pool_backward_batch(params, cache, d_out):
    x, attn, pooled = cache["x"], cache["attn"], cache["pooled"]
    out, norms = cache["out"], cache["norms"]

    d_u = (d_out - np.sum(d_out * out, axis=1, keepdims=True) * out) / norms
    d_p = pooled.T @ d_u
    d_pooled = d_u @ params.p.T
    d_attn = np.einsum("btd,bd->bt", x, d_pooled)
    inner = np.sum(d_attn * attn, axis=1, keepdims=True)
    d_scores = attn * (d_attn - inner)
    d_w = np.einsum("btd,bt->d", x, d_scores)
    return {"w": d_w, "p": d_p}


def mean_pool_batch(params, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[1] < 1:
        raise ValueError(f"expected non-empty (B, T, d) features, got shape {x.shape}")
    u = x.mean(axis=1)
    out, norms = _normalize_rows(u, zero_ok=True)
    return out, {"norms": norms}


def head_forward_batch(params, x):
    """Dispatch on param type; returns (embeddings (B, e), cache)."""
    if isinstance(params, ResamplerParams):
        return resampler_forward_batch(params, x)
    if isinstance(params, LearnablePoolParams):
        return learnable_pool_forward_batch(params, x)
    return mean_pool_batch(params, x)


def head_backward_batch(params, cache, d_out):
    if isinstance(params, ResamplerParams):
        return resampler_backward_batch(params, cache, d_out)
    if isinstance(params, LearnablePoolParams):
        return learnable_pool_backward_batch(params, cache, d_out)
    return {}


def resampler_forward(params, features):
    """Map one (T, d) sequence to an e-dim unit embedding via cross-attention."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError(f"expected (T, d) features, got shape {features.shape}")
    out, _ = resampler_forward_batch(params, features[None])
    return out[0]


def learnable_pool_forward(params, features):
    """Map one (T, d) sequence to an e-dim unit embedding via scored pooling."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError(f"expected (T, d) features, got shape {features.shape}")
    out, _ = learnable_pool_forward_batch(params, features[None])
    return out[0]


def mean_pool(features):
    """Arithmetic mean over rows, then L2-normalized.

    A zero mean vector is returned unnormalized with a warning.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 1:
        raise ValueError(f"expected non-empty (T, d) features, got shape {features.shape}")
    out, _ = mean_pool_batch(FrozenMeanParams(), features[None])
    return out[0]


def head_forward(params, features):
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError(f"expected (T, d) features, got shape {features.shape}")
    out, _ = head_forward_batch(params, features[None])
    return out[0]


def save_head_checkpoint(path, config, seed, step, params):
    """Write a checkpoint: one JSON header line, then matrices as 32-bit LE floats
    concatenated in declaration order."""
    header = {
        "kind": CHECKPOINT_KIND,
        "version": 1,
        "mode": config.mode,
        "d": config.d,
        "latent_count": config.latent_count,
        "attn_dim": config.attn_dim,
        "embed_dim": config.embed_dim,
        "seed": seed,
        "step": step,
        "matrices": [[name, list(m.shape)] for name, m in params.matrices()],
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for _, m in params.matrices():
            f.write(np.ascontiguousarray(m, dtype="<f4").tobytes())


def load_head_checkpoint(path):
    """Read a checkpoint; returns (config, seed, step, params) with float64 matrices."""
    with open(path, "rb") as f:
        header_line = f.readline()
        payload = f.read()
    header = json.loads(header_line.decode("utf-8"))
    if header.get("kind") != CHECKPOINT_KIND:
        raise ValueError(f"not a head checkpoint: {path}")
    config = HeadConfig(
        d=header["d"],
        latent_count=header["latent_count"],
        attn_dim=header["attn_dim"],
        embed_dim=header["embed_dim"],
        mode=header["mode"],
    )
    arrays = {}
    offset = 0
    for name, shape in header["matrices"]:
        count = int(np.prod(shape))
        chunk = payload[offset : offset + 4 * count]
        if len(chunk) != 4 * count:
            raise ValueError(f"truncated checkpoint matrix {name!r} in {path}")
        arrays[name] = np.frombuffer(chunk, dtype="<f4").reshape(shape).astype(np.float64)
        offset += 4 * count
    if offset != len(payload):
        raise ValueError(f"trailing bytes after matrices in {path}")
    if config.mode == "perceiver":
        params = ResamplerParams(**arrays)
    elif config.mode == "learnable_pool":
        params = LearnablePoolParams(**arrays)
    else:
        params = FrozenMeanParams()
    return config, header["seed"], header["step"], params
