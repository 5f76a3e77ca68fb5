"""Caption generation from a frozen template bank.

Caption 0 is always the canonical full description (or the fixed
empty-road sentence), which guarantees that every category present in the
scene is mentioned somewhere in a frame's caption set. Further captions
are drawn without replacement from the remaining applicable templates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .scene import Scene

NUMBER_WORDS = ["zero", "one", "two", "three", "four", "five", "six"]

PLURALS = {
    "car": "cars",
    "truck": "trucks",
    "pedestrian": "pedestrians",
    "cyclist": "cyclists",
}

_LAYOUT_PHRASES = {
    "open_road": {"a": "an open road", "b": "the open road", "noun": "open road"},
    "urban_street": {"a": "a busy urban street", "b": "the city street", "noun": "urban street"},
    "parking_lot": {"a": "a parking lot", "b": "the parking lot", "noun": "parking lot"},
}

EMPTY_ROAD_CAPTION = "an empty road with no traffic"

_POSITION_EDGES_DEG = (-36.0, -12.0, 12.0, 36.0)
_DISTANCE_EDGES_M = (15.0, 30.0, 60.0)


@dataclass(frozen=True)
class Caption:
    text: str
    frame_id: str
    template_id: int

    def to_dict(self) -> dict:
        return {"text": self.text, "frame_id": self.frame_id, "template_id": self.template_id}


def _load_bank():
    data = resources.files("rslm.datagen").joinpath("assets/templates_v1.json")
    return json.loads(data.read_text())


_BANK = _load_bank()


def position_word(azimuth_deg: float) -> str:
    a, b, c, d = _POSITION_EDGES_DEG
    if azimuth_deg < a:
        return "on the far left"
    if azimuth_deg < b:
        return "on the left"
    if azimuth_deg <= c:
        return "ahead"
    if azimuth_deg <= d:
        return "on the right"
    return "on the far right"


def distance_word(range_m: float) -> str:
    very_close, near, far = _DISTANCE_EDGES_M
    if range_m < very_close:
        return "very close"
    if range_m < near:
        return "near"
    if range_m >= far:
        return "far"
    return ""


def _group_phrase(category, objs):
    """'two cars near on the left' style phrase for one (cat, pos, dist) group."""
    count = len(objs)
    noun = PLURALS[category] if count != 1 else category
    parts = [NUMBER_WORDS[count], noun]
    dist = distance_word(objs[0].range_m)
    if dist:
        parts.append(dist)
    parts.append(position_word(objs[0].azimuth_deg))
    return " ".join(parts)


def _join(parts):
    if len(parts) == 1:
        return parts[0]
    return ", ".join(parts[:-1]) + " and " + parts[-1]


def _scene_slots(scene: Scene) -> dict:
    phr = _LAYOUT_PHRASES[scene.layout]
    groups: dict = {}
    for o in scene.objects:
        key = (o.category, position_word(o.azimuth_deg), distance_word(o.range_m))
        groups.setdefault(key, []).append(o)
    ordered = sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2]))
    inventory = _join([_group_phrase(cat, objs) for (cat, _, _), objs in ordered]) if groups else ""

    counts: dict = {}
    for o in scene.objects:
        counts[o.category] = counts.get(o.category, 0) + 1
    short_parts = [
        f"{NUMBER_WORDS[n]} {PLURALS[c] if n != 1 else c}" for c, n in sorted(counts.items())
    ]
    cat_list = _join([PLURALS[c] for c in sorted(counts)]) if counts else ""

    total = len(scene.objects)
    speeds = [abs(o.radial_velocity_mps) for o in scene.objects]
    mean_speed = sum(speeds) / len(speeds) if speeds else 0.0
    if mean_speed < 1.0:
        motion = "mostly stationary"
    elif mean_speed < 5.0:
        motion = "moving slowly"
    else:
        motion = "moving fast"

    return {
        "layout_a": phr["a"],
        "layout_b": phr["b"],
        "layout_noun": phr["noun"],
        "inventory": inventory,
        "inventory_short": _join(short_parts) if short_parts else "",
        "cat_list": cat_list,
        "total_word": NUMBER_WORDS[total],
        "total_noun": "objects" if total != 1 else "object",
        "motion": motion,
    }


def generate_captions(scene: Scene, n: int, seed: int) -> list:
    """Render n captions; caption 0 is the canonical template (id 0)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    slots = _scene_slots(scene)
    empty = not scene.objects
    bank = _BANK["empty_templates"] if empty else _BANK["scene_templates"]
    # Empty-scene template ids are offset past the scene bank.
    id_base = len(_BANK["scene_templates"]) if empty else 0

    captions = [Caption(bank[0].format(**slots), scene.frame_id, id_base)]
    rng = np.random.default_rng(seed)
    pool = list(range(1, len(bank)))
    order = [pool[i] for i in rng.permutation(len(pool))]
    k = 1
    while len(captions) < n:
        idx = order[(k - 1) % len(order)]
        captions.append(Caption(bank[idx].format(**slots), scene.frame_id, id_base + idx))
        k += 1
    return captions


def caption_words(text: str) -> set:
    """Lowercased word set used by the faithfulness oracle."""
    import re

    return set(re.split(r"[^a-z0-9]+", text.lower())) - {""}


def mentions_category(text: str, category: str) -> bool:
    words = caption_words(text)
    return category in words or PLURALS[category] in words
