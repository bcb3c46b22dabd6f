"""Image and text encoders usable fully offline.

The built-in "tiny" encoder pair needs no model weights: images become 8x8
grayscale intensity grids, annotation sentences become hashed bag-of-words
counts. Both are deterministic across processes, which keeps extraction
reruns byte-identical. Any other model name is treated as a Hugging Face
CLIP checkpoint and loaded strictly from the local cache.
"""

import hashlib
import re

import numpy as np
from PIL import Image

TINY_DIM = 64
_TOKEN_RE = re.compile(r"[a-z0-9]+")


class EncoderLoadError(RuntimeError):
    """Raised when the requested encoder cannot be loaded locally."""


class TinyImageEncoder:
    dim = TINY_DIM

    def encode(self, path):
        with Image.open(path) as img:
            gray = img.convert("L").resize((8, 8), Image.BILINEAR)
        pixels = np.asarray(gray, dtype=np.float32).reshape(-1)
        return pixels / 255.0 - 0.5


class TinyTextEncoder:
    dim = TINY_DIM

    def encode(self, text):
        vec = np.zeros(self.dim, dtype=np.float32)
        for token in _TOKEN_RE.findall(text.lower()):
            digest = hashlib.md5(token.encode("utf-8")).digest()
            vec[int.from_bytes(digest[:4], "little") % self.dim] += 1.0
        return vec


class ClipImageEncoder:
    def __init__(self, model, processor):
        import torch

        self._torch = torch
        self._model = model
        self._processor = processor
        self.dim = model.config.projection_dim

    def encode(self, path):
        with Image.open(path) as img:
            inputs = self._processor(images=img.convert("RGB"), return_tensors="pt")
        with self._torch.no_grad():
            feats = self._model.get_image_features(**inputs)
        return feats[0].numpy().astype(np.float32)


class ClipTextEncoder:
    def __init__(self, model, processor):
        import torch

        self._torch = torch
        self._model = model
        self._processor = processor
        self.dim = model.config.projection_dim

    def encode(self, text):
        inputs = self._processor(
            text=[text], return_tensors="pt", padding=True, truncation=True
        )
        with self._torch.no_grad():
            feats = self._model.get_text_features(**inputs)
        return feats[0].numpy().astype(np.float32)


def load_encoders(name):
    """Return (image_encoder, text_encoder) for the given model name."""
    if name == "tiny":
        return TinyImageEncoder(), TinyTextEncoder()
    try:
        from transformers import CLIPModel, CLIPProcessor

        model = CLIPModel.from_pretrained(name, local_files_only=True)
        processor = CLIPProcessor.from_pretrained(name, local_files_only=True)
        model.eval()
    except Exception as exc:
        raise EncoderLoadError(f"cannot load encoder {name!r} locally: {exc}") from exc
    return ClipImageEncoder(model, processor), ClipTextEncoder(model, processor)
