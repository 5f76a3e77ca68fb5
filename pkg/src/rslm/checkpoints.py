"""Checkpoint directories shared by teacher/student/detector: `params.bin`
(torch state dict) plus `meta.json`, with a content hash over parameters."""

from __future__ import annotations

import hashlib
from pathlib import Path

import torch

from .hashing import read_json, write_json


def param_hash(module: torch.nn.Module) -> str:
    """SHA-256 over all state-dict tensors (parameters and buffers), keyed order."""
    h = hashlib.sha256()
    state = module.state_dict()
    for name in sorted(state):
        h.update(name.encode("utf-8"))
        tensor = state[name].detach().cpu().contiguous()
        h.update(str(tensor.dtype).encode())
        h.update(str(tuple(tensor.shape)).encode())
        h.update(tensor.numpy().tobytes())
    return h.hexdigest()


def save_checkpoint(out_dir, module: torch.nn.Module, meta: dict) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(module.state_dict(), out / "params.bin")
    write_json(out / "meta.json", meta)
    return out


def load_state(ckpt_dir) -> dict:
    return torch.load(Path(ckpt_dir) / "params.bin", map_location="cpu", weights_only=True)


def load_meta(ckpt_dir) -> dict:
    return read_json(Path(ckpt_dir) / "meta.json")
