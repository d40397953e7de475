"""Text and image encoders behind one interface.

Two families:

* ``hash`` — dependency-free deterministic featurizers (signed feature
  hashing for text, a fixed random projection of a thumbnail for images).
  They satisfy every structural contract of the embedding-file format and
  run offline, but carry no semantics; use them for plumbing tests and CI.
* pretrained vision-language / text encoders loaded through
  ``transformers`` / ``sentence_transformers`` with pinned model ids from
  ``models.json``. Loading needs local weights or a warm cache; failure
  raises :class:`EncoderUnavailable`.

All encoders return float64 arrays of shape (n, dim); rows are
unit-normalized by the caller's writer.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources

import numpy as np


class EncoderUnavailable(RuntimeError):
    """A pretrained model could not be loaded (no weights, no package)."""


def pinned_models() -> dict:
    with resources.files("sgembed").joinpath("models.json").open() as handle:
        return json.load(handle)


def _hash_index(token: str, dim: int) -> tuple[int, float]:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    index = int.from_bytes(digest[:8], "big") % dim
    sign = 1.0 if digest[8] % 2 == 0 else -1.0
    return index, sign


class HashTextEncoder:
    """Signed feature hashing over word tokens and character trigrams."""

    def __init__(self, dim: int = 256):
        self.dim = dim
        self.model_id = f"hash-text-{dim}"

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=float)
        for row, text in enumerate(texts):
            tokens = text.split()
            features = list(tokens)
            padded = f" {text} "
            features.extend(padded[i : i + 3] for i in range(len(padded) - 2))
            if not features:
                features = ["<empty>"]
            for feature in features:
                index, sign = _hash_index(feature, self.dim)
                out[row, index] += sign
            if not out[row].any():
                # pathological cancellation; fall back to a whole-string bit
                index, _ = _hash_index(text or "<empty>", self.dim)
                out[row, index] = 1.0
        return out


class HashImageEncoder:
    """Fixed random projection of a 16x16 RGB thumbnail."""

    _SIDE = 16

    def __init__(self, dim: int = 256):
        self.dim = dim
        self.model_id = f"hash-image-{dim}"
        rng = np.random.default_rng(20230816)
        self._projection = rng.standard_normal((self._SIDE * self._SIDE * 3, dim))

    def encode(self, images) -> np.ndarray:
        from PIL import Image

        rows = []
        for image in images:
            if not isinstance(image, Image.Image):
                image = Image.open(image)
            thumb = image.convert("RGB").resize(
                (self._SIDE, self._SIDE), Image.BILINEAR
            )
            flat = np.asarray(thumb, dtype=float).reshape(-1) / 255.0
            rows.append(flat @ self._projection)
        return np.stack(rows) if rows else np.zeros((0, self.dim))


class ClipTextEncoder:
    def __init__(self, model_id: str, device: str = "cpu", batch_size: int = 16):
        self.model_id = model_id
        self.batch_size = batch_size
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            raise EncoderUnavailable(f"transformers/torch not installed: {exc}") from exc
        try:
            self._model = CLIPModel.from_pretrained(model_id).to(device).eval()
            self._processor = CLIPProcessor.from_pretrained(model_id)
        except Exception as exc:
            raise EncoderUnavailable(f"cannot load {model_id}: {exc}") from exc
        self._torch = torch
        self._device = device

    def encode(self, texts: list[str]) -> np.ndarray:
        rows = []
        with self._torch.no_grad():
            for start in range(0, len(texts), self.batch_size):
                batch = texts[start : start + self.batch_size]
                inputs = self._processor(
                    text=batch, return_tensors="pt", padding=True, truncation=True
                ).to(self._device)
                features = self._model.get_text_features(**inputs)
                rows.append(features.cpu().double().numpy())
        return np.concatenate(rows) if rows else np.zeros((0, 1))


class ClipImageEncoder:
    def __init__(self, model_id: str, device: str = "cpu", batch_size: int = 8):
        self.model_id = model_id
        self.batch_size = batch_size
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            raise EncoderUnavailable(f"transformers/torch not installed: {exc}") from exc
        try:
            self._model = CLIPModel.from_pretrained(model_id).to(device).eval()
            self._processor = CLIPProcessor.from_pretrained(model_id)
        except Exception as exc:
            raise EncoderUnavailable(f"cannot load {model_id}: {exc}") from exc
        self._torch = torch
        self._device = device

    def encode(self, images) -> np.ndarray:
        from PIL import Image

        loaded = [
            img if isinstance(img, Image.Image) else Image.open(img) for img in images
        ]
        rows = []
        with self._torch.no_grad():
            for start in range(0, len(loaded), self.batch_size):
                batch = loaded[start : start + self.batch_size]
                inputs = self._processor(images=batch, return_tensors="pt").to(
                    self._device
                )
                features = self._model.get_image_features(**inputs)
                rows.append(features.cpu().double().numpy())
        return np.concatenate(rows) if rows else np.zeros((0, 1))


class SentenceTextEncoder:
    """Sentence-transformers backend for the text-encoder (T5) table."""

    def __init__(self, model_id: str, device: str = "cpu", batch_size: int = 16):
        self.model_id = model_id
        self.batch_size = batch_size
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderUnavailable(
                f"sentence-transformers not installed: {exc}"
            ) from exc
        try:
            self._model = SentenceTransformer(model_id, device=device)
        except Exception as exc:
            raise EncoderUnavailable(f"cannot load {model_id}: {exc}") from exc

    def encode(self, texts: list[str]) -> np.ndarray:
        vectors = self._model.encode(
            texts, batch_size=self.batch_size, show_progress_bar=False
        )
        return np.asarray(vectors, dtype=float)


def text_encoder(name: str, model_id=None, dim=None, device="cpu", batch_size=16):
    pinned = pinned_models()
    if name == "hash":
        return HashTextEncoder(dim=dim or pinned["hash_dim"])
    if name == "clip-text":
        return ClipTextEncoder(
            model_id or pinned["clip-text"], device=device, batch_size=batch_size
        )
    if name == "t5":
        return SentenceTextEncoder(
            model_id or pinned["t5"], device=device, batch_size=batch_size
        )
    raise ValueError(f"unknown text encoder {name!r}")


def image_encoder(name: str, model_id=None, dim=None, device="cpu", batch_size=8):
    pinned = pinned_models()
    if name == "hash":
        return HashImageEncoder(dim=dim or pinned["hash_dim"])
    if name == "clip-image":
        return ClipImageEncoder(
            model_id or pinned["clip-image"], device=device, batch_size=batch_size
        )
    raise ValueError(f"unknown image encoder {name!r}")
