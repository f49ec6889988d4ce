"""Seeded synthetic scenes: articulated people placed on a grid."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InfeasibleSpec
from .fields import SIGMA, SIGMA_LIMB, FieldStack, Scene, paf_person, render_scene_fields
from .topology import SkeletonTopology, builtin, classify_edges, load_topology

# distance kept between keypoints and the grid edge
EDGE_MARGIN = 2.0


@dataclass
class SceneSpec:
    seed: int = 0
    n_people: tuple[int, int] = (1, 8)
    scale: tuple[float, float] = (50.0, 90.0)
    width: int = 368
    height: int = 368
    # minimum distance between same-part keypoints of different people
    min_separation: float = 40.0
    # fraction of the smaller padded bounding box that may overlap another
    max_overlap: float = 0.0
    bbox_margin: float = 10.0
    topology: str = "coco18"
    length_jitter: float = 0.1
    angle_jitter: float = 0.15
    drop_prob: float = 0.0
    max_retries: int = 300
    template: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        self.n_people = tuple(int(v) for v in self.n_people)
        self.scale = tuple(float(v) for v in self.scale)
        if self.n_people[0] < 0 or self.n_people[0] > self.n_people[1]:
            raise InfeasibleSpec(f"bad n_people range {self.n_people}")
        if self.scale[0] <= 0 or self.scale[0] > self.scale[1]:
            raise InfeasibleSpec(f"bad scale range {self.scale}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_people"] = list(self.n_people)
        d["scale"] = list(self.scale)
        if d["template"] is None:
            del d["template"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SceneSpec":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def load_topology(self) -> SkeletonTopology:
        return load_topology(self.topology)


def _template(spec: SceneSpec, topology: SkeletonTopology) -> dict:
    if spec.template is not None:
        return {k: tuple(v) for k, v in spec.template.items()}
    if topology.template is not None:
        return dict(topology.template)
    # no template: every tree limb a quarter of the person scale, fanned out
    edges = classify_edges(topology)
    pts = {topology.parts[edges.root]: (0.0, 0.0)}
    for i, child in enumerate(edges.order[1:]):
        par, _ = edges.parent[child]
        ang = 2.0 * math.pi * i / max(1, len(edges.order) - 1)
        px, py = pts[topology.parts[par]]
        pts[topology.parts[child]] = (px + 0.25 * math.cos(ang), py + 0.25 * math.sin(ang))
    return pts


def _articulate(rng, topology, edges, template, scale, spec) -> np.ndarray:
    kp = np.zeros((topology.n_parts, 2))
    for child in edges.order[1:]:
        par, _ = edges.parent[child]
        tx = template[topology.parts[child]][0] - template[topology.parts[par]][0]
        ty = template[topology.parts[child]][1] - template[topology.parts[par]][1]
        length = math.hypot(tx, ty) * scale * (1.0 + rng.uniform(-spec.length_jitter, spec.length_jitter))
        ang = math.atan2(ty, tx) + rng.normal(0.0, spec.angle_jitter)
        kp[child] = kp[par] + length * np.array([math.cos(ang), math.sin(ang)])
    for name, (a, b) in topology.midpoints.items():
        j = topology.part_index(name)
        kp[j] = 0.5 * (kp[topology.part_index(a)] + kp[topology.part_index(b)])
    return kp


def _bbox(kp, margin):
    pts = kp[~np.isnan(kp[:, 0])]
    return (pts[:, 0].min() - margin, pts[:, 1].min() - margin,
            pts[:, 0].max() + margin, pts[:, 1].max() + margin)


def _overlap_fraction(b1, b2) -> float:
    iw = min(b1[2], b2[2]) - max(b1[0], b2[0])
    ih = min(b1[3], b2[3]) - max(b1[1], b2[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    a1 = (b1[2] - b1[0]) * (b1[3] - b1[1])
    a2 = (b2[2] - b2[0]) * (b2[3] - b2[1])
    return iw * ih / min(a1, a2)


def _fits(kp, placed, spec) -> bool:
    box = _bbox(kp, spec.bbox_margin)
    for other in placed:
        d = np.hypot(*(kp - other).T)
        if np.nanmin(d) < spec.min_separation:
            return False
        if _overlap_fraction(box, _bbox(other, spec.bbox_margin)) > spec.max_overlap:
            return False
    return True


def random_scene(spec: SceneSpec, index: int = 0, topology: SkeletonTopology | None = None) -> Scene:
    """Scene number ``index`` of the stream defined by ``spec.seed``."""
    topology = topology or spec.load_topology()
    edges = classify_edges(topology)
    template = _template(spec, topology)
    rng = np.random.default_rng([spec.seed, index])
    n = int(rng.integers(spec.n_people[0], spec.n_people[1] + 1))
    w, h = spec.width, spec.height

    for _ in range(20):
        placed: list[np.ndarray] = []
        for _k in range(n):
            for _try in range(spec.max_retries):
                kp = _articulate(rng, topology, edges, template, rng.uniform(*spec.scale), spec)
                lo = kp.min(axis=0)
                hi = kp.max(axis=0)
                span_x = (w - 1 - 2 * EDGE_MARGIN) - (hi[0] - lo[0])
                span_y = (h - 1 - 2 * EDGE_MARGIN) - (hi[1] - lo[1])
                if span_x < 0 or span_y < 0:
                    continue
                kp = kp - lo + EDGE_MARGIN + rng.uniform(0, 1, 2) * (span_x, span_y)
                if _fits(kp, placed, spec):
                    placed.append(kp)
                    break
            else:
                break
        if len(placed) == n:
            break
    else:
        raise InfeasibleSpec(f"could not place {n} people on {w}x{h} with the requested separation")

    kp = np.stack(placed) if placed else np.zeros((0, topology.n_parts, 2))
    if spec.drop_prob > 0 and n:
        drop = rng.uniform(size=kp.shape[:2]) < spec.drop_prob
        kp[drop] = np.nan
    return Scene(kp, w, h)


def redundant_veto_scene(sigma: float = SIGMA, sigma_l: float = SIGMA_LIMB,
                         spurious_strength: float = 0.7) -> tuple[Scene, FieldStack, SkeletonTopology]:
    """Two people whose only link through the tree is a spurious neck-nose field.

    Person A shows the body without a head; person B shows the head and its
    right shoulder. A weakened PAF band from A's neck to B's nose is added
    to the neck-nose channel. Without the ear-shoulder limbs the tree parse
    glues B's head onto A; with them, B's ear-shoulder link claims the
    shoulder first and the neck-nose merge is refused.
    """
    topo = builtin("coco18")
    P = topo.part_index
    kp = np.full((2, topo.n_parts, 2), np.nan)
    body = {
        "neck": (150, 160), "r_shoulder": (130, 163), "r_elbow": (124, 193), "r_wrist": (121, 220),
        "l_shoulder": (170, 163), "l_elbow": (176, 193), "l_wrist": (179, 220),
        "r_hip": (137, 224), "r_knee": (136, 261), "r_ankle": (135, 298),
        "l_hip": (163, 224), "l_knee": (164, 261), "l_ankle": (165, 298),
    }
    head = {
        "nose": (210, 110), "r_eye": (202, 103), "l_eye": (218, 103),
        "r_ear": (194, 106), "l_ear": (226, 106), "r_shoulder": (190, 140),
    }
    for name, xy in body.items():
        kp[0, P(name)] = xy
    for name, xy in head.items():
        kp[1, P(name)] = xy
    scene = Scene(kp, 300, 320)
    stack = render_scene_fields(scene, topo, sigma, sigma_l)
    c = topo.limb_index("neck", "nose")
    spurious = paf_person(kp[0, P("neck")], kp[1, P("nose")], sigma_l, (scene.width, scene.height))
    stack.paf[2 * c:2 * c + 2] += (spurious_strength * spurious).astype(np.float32)
    return scene, stack, topo
