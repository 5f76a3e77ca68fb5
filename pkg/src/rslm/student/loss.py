"""Embedding matching loss."""

from __future__ import annotations

from ..errors import InputError


def matching_loss(student_emb, teacher_emb):
    """Mean squared difference over embedding dimensions (and batch, if any).

    Works on numpy arrays and torch tensors alike."""
    if tuple(student_emb.shape) != tuple(teacher_emb.shape):
        raise InputError(
            f"embedding dims differ: {tuple(student_emb.shape)} vs {tuple(teacher_emb.shape)}"
        )
    diff = student_emb - teacher_emb
    return (diff * diff).mean()
