"""Keypoint skeletons: parts, limbs, PAF channel layout and tree/redundant edges.

A topology is described by a JSON object::

    {"parts": ["neck", "nose", ...],
     "limbs": [["neck", "nose"], ...],
     "root": "neck"}

``root`` is optional.  Two optional keys are also understood: ``name`` and
``template`` (``{part: [x, y]}`` in units of person height, used by the scene
generator), and ``midpoints`` (``{part: [a, b]}``) for parts whose position is
interpolated between two other parts, e.g. a mid-hip point.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import (
    DisconnectedGraph,
    DuplicateLimb,
    DuplicatePart,
    SelfLoop,
    TopologyError,
    UnknownPartInLimb,
)

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


@dataclass(frozen=True)
class SkeletonTopology:
    """Validated skeleton. Parts and limbs are 0-indexed internally.

    Limb ``c`` owns PAF planes ``2c`` (x component) and ``2c + 1`` (y).
    """

    parts: tuple[str, ...]
    limbs: tuple[tuple[int, int], ...]
    root: int
    name: str = "custom"
    template: Mapping[str, tuple[float, float]] | None = field(default=None, compare=False)
    midpoints: Mapping[str, tuple[str, str]] = field(default_factory=dict, compare=False)

    @property
    def n_parts(self) -> int:
        return len(self.parts)

    @property
    def n_limbs(self) -> int:
        return len(self.limbs)

    @property
    def n_channels(self) -> int:
        return self.n_parts + 2 * self.n_limbs

    def part_index(self, name: str) -> int:
        try:
            return self.parts.index(name)
        except ValueError:
            raise UnknownPartInLimb(f"unknown part {name!r}") from None

    def limb_index(self, a: str, b: str) -> int:
        """Index of the limb joining parts ``a`` and ``b`` in either direction."""
        pair = {self.part_index(a), self.part_index(b)}
        for c, limb in enumerate(self.limbs):
            if set(limb) == pair:
                return c
        raise KeyError(f"no limb {a}-{b}")

    @staticmethod
    def paf_channels(c: int) -> tuple[int, int]:
        return 2 * c, 2 * c + 1

    def to_dict(self) -> dict:
        return {
            "parts": list(self.parts),
            "limbs": [[self.parts[a], self.parts[b]] for a, b in self.limbs],
            "root": self.parts[self.root],
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    @property
    def hash(self) -> int:
        return fnv1a_64(self.canonical_json().encode("utf-8"))


@dataclass(frozen=True)
class EdgeClassification:
    root: int
    tree_edges: tuple[int, ...]
    redundant_edges: tuple[int, ...]
    # attachment order of reachable parts, root first
    order: tuple[int, ...]
    # child part -> (parent part, limb index)
    parent: Mapping[int, tuple[int, int]]


def validate_topology(raw: Mapping) -> SkeletonTopology:
    """Check a raw topology description and return the canonical form."""
    parts = [str(p) for p in raw.get("parts", [])]
    if not parts:
        raise TopologyError("topology declares no parts")
    seen = set()
    for p in parts:
        if p in seen:
            raise DuplicatePart(f"part {p!r} declared twice")
        seen.add(p)
    index = {p: i for i, p in enumerate(parts)}

    limbs = []
    pairs = set()
    for limb in raw.get("limbs", []):
        if len(limb) != 2:
            raise TopologyError(f"limb must have two endpoints: {limb!r}")
        a, b = (str(x) for x in limb)
        for end in (a, b):
            if end not in index:
                raise UnknownPartInLimb(f"limb {a}-{b} references undeclared part {end!r}")
        if a == b:
            raise SelfLoop(f"limb {a}-{b} is a self loop")
        key = frozenset((a, b))
        if key in pairs:
            raise DuplicateLimb(f"limb {a}-{b} declared twice")
        pairs.add(key)
        limbs.append((index[a], index[b]))

    root_name = raw.get("root")
    if root_name is None:
        root = index.get("neck", 0)
    elif root_name in index:
        root = index[root_name]
    else:
        raise TopologyError(f"root {root_name!r} is not a declared part")

    template = raw.get("template")
    if template is not None:
        template = {str(k): (float(v[0]), float(v[1])) for k, v in template.items()}
        missing = [p for p in parts if p not in template]
        if missing:
            raise TopologyError(f"template lacks parts: {missing}")
    midpoints = {}
    for k, (a, b) in (raw.get("midpoints") or {}).items():
        for end in (k, a, b):
            if end not in index:
                raise UnknownPartInLimb(f"midpoint references undeclared part {end!r}")
        midpoints[str(k)] = (str(a), str(b))

    return SkeletonTopology(
        parts=tuple(parts),
        limbs=tuple(limbs),
        root=root,
        name=str(raw.get("name", "custom")),
        template=template,
        midpoints=midpoints,
    )


def classify_edges(topology: SkeletonTopology, root_part: str | int | None = None) -> EdgeClassification:
    """Split limbs into a spanning tree grown from ``root_part`` and the rest.

    The tree grows by scanning limbs in declaration order and taking every
    limb with exactly one endpoint already attached; scans repeat until no
    limb is added. Limbs declared after the tree path reaches both their
    endpoints (ear-shoulder links in the COCO body) come out redundant.
    """
    if root_part is None:
        root = topology.root
    elif isinstance(root_part, str):
        root = topology.part_index(root_part)
    else:
        root = int(root_part)
        if not 0 <= root < topology.n_parts:
            raise TopologyError(f"root index {root} out of range")

    attached = {root}
    order = [root]
    parent: dict[int, tuple[int, int]] = {}
    tree = []
    changed = True
    while changed:
        changed = False
        for c, (a, b) in enumerate(topology.limbs):
            if (a in attached) == (b in attached):
                continue
            src, dst = (a, b) if a in attached else (b, a)
            attached.add(dst)
            order.append(dst)
            parent[dst] = (src, c)
            tree.append(c)
            changed = True

    unreachable = [topology.parts[j] for j in range(topology.n_parts) if j not in attached]
    if unreachable:
        raise DisconnectedGraph(unreachable)
    tree_set = set(tree)
    return EdgeClassification(
        root=root,
        tree_edges=tuple(sorted(tree_set)),
        redundant_edges=tuple(c for c in range(topology.n_limbs) if c not in tree_set),
        order=tuple(order),
        parent=parent,
    )


def load_topology(source: str | Path | Mapping) -> SkeletonTopology:
    """Load a topology from a built-in name, a JSON file path, or a mapping."""
    if isinstance(source, Mapping):
        return validate_topology(source)
    if str(source) in BUILTIN:
        return builtin(str(source))
    with open(source, encoding="utf-8") as fh:
        return validate_topology(json.load(fh))


# ---------------------------------------------------------------------------
# built-in skeletons

_COCO18_PARTS = [
    "nose", "neck",
    "r_shoulder", "r_elbow", "r_wrist",
    "l_shoulder", "l_elbow", "l_wrist",
    "r_hip", "r_knee", "r_ankle",
    "l_hip", "l_knee", "l_ankle",
    "r_eye", "l_eye", "r_ear", "l_ear",
]

_COCO18_LIMBS = [
    ["neck", "r_shoulder"], ["neck", "l_shoulder"],
    ["r_shoulder", "r_elbow"], ["r_elbow", "r_wrist"],
    ["l_shoulder", "l_elbow"], ["l_elbow", "l_wrist"],
    ["neck", "r_hip"], ["r_hip", "r_knee"], ["r_knee", "r_ankle"],
    ["neck", "l_hip"], ["l_hip", "l_knee"], ["l_knee", "l_ankle"],
    ["neck", "nose"],
    ["nose", "r_eye"], ["r_eye", "r_ear"],
    ["nose", "l_eye"], ["l_eye", "l_ear"],
    ["r_shoulder", "r_ear"], ["l_shoulder", "l_ear"],
]

# person height = 1, neck at the origin, y down; the person's right side is image left
_BODY_TEMPLATE = {
    "neck": (0.0, 0.0),
    "nose": (0.0, -0.12),
    "r_eye": (-0.05, -0.16), "l_eye": (0.05, -0.16),
    "r_ear": (-0.10, -0.13), "l_ear": (0.10, -0.13),
    "r_shoulder": (-0.13, 0.02), "r_elbow": (-0.17, 0.21), "r_wrist": (-0.19, 0.38),
    "l_shoulder": (0.13, 0.02), "l_elbow": (0.17, 0.21), "l_wrist": (0.19, 0.38),
    "r_hip": (-0.08, 0.40), "r_knee": (-0.09, 0.63), "r_ankle": (-0.10, 0.86),
    "l_hip": (0.08, 0.40), "l_knee": (0.09, 0.63), "l_ankle": (0.10, 0.86),
}

_BODY25_PARTS = [
    "nose", "neck",
    "r_shoulder", "r_elbow", "r_wrist",
    "l_shoulder", "l_elbow", "l_wrist",
    "mid_hip",
    "r_hip", "r_knee", "r_ankle",
    "l_hip", "l_knee", "l_ankle",
    "r_eye", "l_eye", "r_ear", "l_ear",
    "l_big_toe", "l_small_toe", "l_heel",
    "r_big_toe", "r_small_toe", "r_heel",
]

_BODY25_LIMBS = [
    ["neck", "mid_hip"],
    ["neck", "r_shoulder"], ["neck", "l_shoulder"],
    ["r_shoulder", "r_elbow"], ["r_elbow", "r_wrist"],
    ["l_shoulder", "l_elbow"], ["l_elbow", "l_wrist"],
    ["mid_hip", "r_hip"], ["r_hip", "r_knee"], ["r_knee", "r_ankle"],
    ["mid_hip", "l_hip"], ["l_hip", "l_knee"], ["l_knee", "l_ankle"],
    ["neck", "nose"],
    ["nose", "r_eye"], ["r_eye", "r_ear"],
    ["nose", "l_eye"], ["l_eye", "l_ear"],
    ["l_ankle", "l_big_toe"], ["l_big_toe", "l_small_toe"], ["l_ankle", "l_heel"],
    ["r_ankle", "r_big_toe"], ["r_big_toe", "r_small_toe"], ["r_ankle", "r_heel"],
    ["r_shoulder", "r_ear"], ["l_shoulder", "l_ear"],
]

_BODY25_TEMPLATE = dict(
    _BODY_TEMPLATE,
    mid_hip=(0.0, 0.40),
    l_big_toe=(0.14, 0.93), l_small_toe=(0.19, 0.92), l_heel=(0.08, 0.91),
    r_big_toe=(-0.14, 0.93), r_small_toe=(-0.19, 0.92), r_heel=(-0.08, 0.91),
)

_VEHICLE12_PARTS = [
    "front_bumper", "front_l_wheel", "front_r_wheel", "front_l_light", "front_r_light",
    "roof_front_l", "roof_front_r", "roof_rear_l", "roof_rear_r",
    "rear_l_wheel", "rear_r_wheel", "rear_bumper",
]

_VEHICLE12_LIMBS = [
    ["front_bumper", "front_l_light"], ["front_bumper", "front_r_light"],
    ["front_l_light", "front_l_wheel"], ["front_r_light", "front_r_wheel"],
    ["front_l_light", "roof_front_l"], ["front_r_light", "roof_front_r"],
    ["roof_front_l", "roof_rear_l"], ["roof_front_r", "roof_rear_r"],
    ["roof_rear_l", "rear_l_wheel"], ["roof_rear_r", "rear_r_wheel"],
    ["rear_l_wheel", "rear_bumper"],
    ["front_l_wheel", "rear_l_wheel"], ["roof_front_l", "roof_front_r"],
]

# vehicle length = 1, seen in three-quarter view
_VEHICLE12_TEMPLATE = {
    "front_bumper": (0.0, 0.0),
    "front_l_light": (-0.12, -0.03), "front_r_light": (0.12, -0.05),
    "front_l_wheel": (-0.10, 0.10), "front_r_wheel": (0.16, 0.08),
    "roof_front_l": (-0.02, -0.22), "roof_front_r": (0.20, -0.24),
    "roof_rear_l": (0.40, -0.22), "roof_rear_r": (0.58, -0.24),
    "rear_l_wheel": (0.52, 0.12), "rear_r_wheel": (0.76, 0.09),
    "rear_bumper": (0.72, 0.01),
}

_MINI5 = {
    "name": "mini5",
    "parts": ["head", "neck", "l_hand", "r_hand", "hip"],
    "limbs": [["neck", "head"], ["neck", "l_hand"], ["neck", "r_hand"], ["neck", "hip"], ["head", "l_hand"]],
    "root": "neck",
    "template": {"head": (0.0, -0.3), "neck": (0.0, 0.0), "l_hand": (0.35, 0.2),
                 "r_hand": (-0.35, 0.2), "hip": (0.0, 0.55)},
}

BUILTIN: dict[str, dict] = {
    "coco18": {"name": "coco18", "parts": _COCO18_PARTS, "limbs": _COCO18_LIMBS,
               "root": "neck", "template": _BODY_TEMPLATE},
    "coco18_tree": {"name": "coco18_tree", "parts": _COCO18_PARTS, "limbs": _COCO18_LIMBS[:17],
                    "root": "neck", "template": _BODY_TEMPLATE},
    "body25": {"name": "body25", "parts": _BODY25_PARTS, "limbs": _BODY25_LIMBS, "root": "neck",
               "template": _BODY25_TEMPLATE, "midpoints": {"mid_hip": ["r_hip", "l_hip"]}},
    "vehicle12": {"name": "vehicle12", "parts": _VEHICLE12_PARTS, "limbs": _VEHICLE12_LIMBS,
                  "root": "front_bumper", "template": _VEHICLE12_TEMPLATE},
    "mini5": _MINI5,
}


def builtin(name: str) -> SkeletonTopology:
    return validate_topology(BUILTIN[name])
