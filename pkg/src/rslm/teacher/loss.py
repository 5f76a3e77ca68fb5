"""Symmetric contrastive loss over cosine similarities."""

from __future__ import annotations

import torch
import torch.nn.functional as F

from ..errors import InputError


def safe_normalize(x: torch.Tensor) -> torch.Tensor:
    """L2-normalize rows; zero-norm rows stay zero so their similarity is 0."""
    norms = x.norm(dim=-1, keepdim=True)
    return torch.where(norms > 0, x / norms.clamp(min=1e-30), torch.zeros_like(x))


def info_nce(img_embs: torch.Tensor, txt_embs: torch.Tensor, temperature) -> torch.Tensor:
    """Average of image->text and text->image cross entropies; targets on the diagonal."""
    if img_embs.shape != txt_embs.shape:
        raise InputError(f"embedding shapes differ: {img_embs.shape} vs {txt_embs.shape}")
    if img_embs.ndim != 2 or img_embs.shape[0] < 1:
        raise InputError("expected (B, E) embedding batches with B >= 1")
    if not torch.is_tensor(temperature):
        temperature = torch.tensor(float(temperature), dtype=img_embs.dtype)
    if float(temperature.detach()) <= 0:
        raise InputError("temperature must be > 0")
    logits = safe_normalize(img_embs) @ safe_normalize(txt_embs).T / temperature
    targets = torch.arange(img_embs.shape[0], device=img_embs.device)
    return 0.5 * (F.cross_entropy(logits, targets) + F.cross_entropy(logits.T, targets))
