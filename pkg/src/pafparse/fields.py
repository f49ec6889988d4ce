"""Ground-truth confidence maps and part affinity fields rendered from a scene.

Pixel centres sit at integer coordinates ``p = (col, row)``.  With
``stride > 1`` the grid samples the image at cell centres
``stride * i + (stride - 1) / 2``; keypoints always stay in image pixels.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateLimb, DimMismatch, EmptyInput, NonPositiveSigma, PafError
from .topology import SkeletonTopology

SIGMA = 7.0
SIGMA_LIMB = 8.0
GRID = (368, 368)


@dataclass
class Scene:
    """Ground-truth people.

    ``keypoints`` has shape ``(K, J, 2)`` holding ``(x, y)`` pixel positions;
    NaN rows mark unlabelled parts.
    """

    keypoints: np.ndarray
    width: int
    height: int
    allow_out_of_frame: bool = False

    def __post_init__(self):
        kp = np.asarray(self.keypoints, dtype=np.float64)
        if kp.ndim != 3 or kp.shape[-1] != 2:
            if kp.size == 0:
                kp = kp.reshape(0, 0, 2)
            else:
                raise PafError(f"keypoints must be (K, J, 2), got {kp.shape}")
        self.keypoints = kp
        if not self.allow_out_of_frame:
            present = ~np.isnan(kp[..., 0])
            xs, ys = kp[..., 0][present], kp[..., 1][present]
            if np.any((xs < 0) | (xs >= self.width) | (ys < 0) | (ys >= self.height)):
                raise PafError("keypoint outside the grid; pass allow_out_of_frame=True to keep it")

    @property
    def n_people(self) -> int:
        return self.keypoints.shape[0]

    def present(self) -> np.ndarray:
        return ~np.isnan(self.keypoints[..., 0])

    def to_dict(self) -> dict:
        people = []
        for person in self.keypoints:
            people.append([None if np.isnan(x) else [float(x), float(y)] for x, y in person])
        return {"width": self.width, "height": self.height, "people": people}

    @classmethod
    def from_dict(cls, d: dict, n_parts: int | None = None) -> "Scene":
        people = d.get("people", [])
        j = n_parts if n_parts is not None else (len(people[0]) if people else 0)
        kp = np.full((len(people), j, 2), np.nan)
        for k, person in enumerate(people):
            for i, pt in enumerate(person):
                if pt is not None:
                    kp[k, i] = pt
        return cls(kp, int(d["width"]), int(d["height"]), bool(d.get("allow_out_of_frame", False)))


@dataclass
class FieldStack:
    """Confidence maps ``(J, h, w)`` and PAF planes ``(2C, h, w)``, float32."""

    confidence: np.ndarray
    paf: np.ndarray
    topology_hash: int | None = None
    stride: int = 1

    @property
    def height(self) -> int:
        return self.confidence.shape[1]

    @property
    def width(self) -> int:
        return self.confidence.shape[2]

    @property
    def n_channels(self) -> int:
        return self.confidence.shape[0] + self.paf.shape[0]

    def limb_field(self, c: int) -> np.ndarray:
        """The ``(2, h, w)`` vector field of limb ``c``."""
        return self.paf[2 * c:2 * c + 2]


def _grid_axes(grid_dims, stride=1):
    w, h = grid_dims
    off = (stride - 1) / 2.0
    return np.arange(w) * stride + off, np.arange(h) * stride + off


def confidence_map_person(x_jk, sigma: float = SIGMA, grid_dims=GRID, stride: int = 1) -> np.ndarray:
    """Gaussian peak ``exp(-|p - x|^2 / sigma^2)`` as an ``(h, w)`` plane."""
    if not sigma > 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
    xs, ys = _grid_axes(grid_dims, stride)
    gx = np.exp(-((xs - x_jk[0]) ** 2) / sigma**2)
    gy = np.exp(-((ys - x_jk[1]) ** 2) / sigma**2)
    return np.outer(gy, gx)


def aggregate_confidence(planes: Sequence[np.ndarray]) -> np.ndarray:
    """Pixelwise max over per-person planes."""
    if len(planes) == 0:
        raise EmptyInput("no planes to aggregate")
    shape = planes[0].shape
    if any(p.shape != shape for p in planes):
        raise DimMismatch("planes differ in shape")
    out = np.array(planes[0], dtype=np.float64, copy=True)
    for p in planes[1:]:
        np.maximum(out, p, out=out)
    return out


def _limb_geometry(x1, x2):
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    d = x2 - x1
    length = float(np.hypot(d[0], d[1]))
    if length == 0.0:
        raise DegenerateLimb(f"limb endpoints coincide at {tuple(x1)}")
    return x1, d / length, length


def _paf_into(acc, count, x1, x2, sigma_l, xs, ys):
    """Add one person's limb band into ``acc`` (2, h, w) and ``count`` (h, w)."""
    x1, v, length = _limb_geometry(x1, x2)
    x2 = np.asarray(x2, dtype=np.float64)
    lo_x, hi_x = min(x1[0], x2[0]) - sigma_l, max(x1[0], x2[0]) + sigma_l
    lo_y, hi_y = min(x1[1], x2[1]) - sigma_l, max(x1[1], x2[1]) + sigma_l
    c0, c1 = np.searchsorted(xs, lo_x, "left"), np.searchsorted(xs, hi_x, "right")
    r0, r1 = np.searchsorted(ys, lo_y, "left"), np.searchsorted(ys, hi_y, "right")
    if c0 >= c1 or r0 >= r1:
        return
    dx = xs[c0:c1][None, :] - x1[0]
    dy = ys[r0:r1][:, None] - x1[1]
    # projections on the unnormalised direction: the far endpoint lands
    # exactly on length**2 instead of a rounded neighbour of length
    d = x2 - x1
    along = d[0] * dx + d[1] * dy
    across = np.abs(-d[1] * dx + d[0] * dy)
    on = (along >= 0) & (along <= d @ d) & (across <= sigma_l * length)
    acc[0, r0:r1, c0:c1][on] += v[0]
    acc[1, r0:r1, c0:c1][on] += v[1]
    count[r0:r1, c0:c1][on] += 1


def paf_person(x_j1, x_j2, sigma_l: float = SIGMA_LIMB, grid_dims=GRID, stride: int = 1) -> np.ndarray:
    """Unit vector ``(x_j2 - x_j1) / |x_j2 - x_j1|`` on the limb band, zero elsewhere.

    Returns a ``(2, h, w)`` array.
    """
    if not sigma_l > 0:
        raise NonPositiveSigma(f"sigma_l must be positive, got {sigma_l}")
    xs, ys = _grid_axes(grid_dims, stride)
    acc = np.zeros((2, len(ys), len(xs)))
    count = np.zeros((len(ys), len(xs)))
    _paf_into(acc, count, x_j1, x_j2, sigma_l, xs, ys)
    return acc


def aggregate_paf(planes: Sequence[np.ndarray]) -> np.ndarray:
    """Average of per-person vector planes over the people that cover each pixel."""
    if len(planes) == 0:
        raise EmptyInput("no planes to aggregate")
    shape = planes[0].shape
    if any(p.shape != shape for p in planes):
        raise DimMismatch("planes differ in shape")
    acc = np.zeros(shape)
    count = np.zeros(shape[1:])
    for p in planes:
        acc += p
        count += np.any(p != 0, axis=0)
    return _divide_counts(acc, count)


def _divide_counts(acc, count):
    out = np.zeros_like(acc)
    np.divide(acc, count, out=out, where=count > 0)
    return out


def render_scene_fields(
    scene: Scene,
    topology: SkeletonTopology,
    sigma: float = SIGMA,
    sigma_l: float = SIGMA_LIMB,
    grid_dims=None,
    stride: int = 1,
) -> FieldStack:
    """Render every confidence map and PAF of ``scene``.

    People are accumulated in ascending index order, so output is bit-stable.
    Limbs missing an endpoint are skipped for that person.
    """
    if not sigma > 0 or not sigma_l > 0:
        raise NonPositiveSigma(f"sigma={sigma}, sigma_l={sigma_l}")
    if grid_dims is None:
        grid_dims = (-(-scene.width // stride), -(-scene.height // stride))
    kp = scene.keypoints
    if kp.shape[0] and kp.shape[1] != topology.n_parts:
        raise DimMismatch(f"scene has {kp.shape[1]} parts, topology {topology.n_parts}")
    xs, ys = _grid_axes(grid_dims, stride)
    w, h = grid_dims
    present = scene.present()

    conf = np.zeros((topology.n_parts, h, w))
    for j in range(topology.n_parts):
        for k in range(scene.n_people):
            if present[k, j]:
                gx = np.exp(-((xs - kp[k, j, 0]) ** 2) / sigma**2)
                gy = np.exp(-((ys - kp[k, j, 1]) ** 2) / sigma**2)
                np.maximum(conf[j], np.outer(gy, gx), out=conf[j])

    paf = np.zeros((2 * topology.n_limbs, h, w))
    for c, (a, b) in enumerate(topology.limbs):
        acc = np.zeros((2, h, w))
        count = np.zeros((h, w))
        for k in range(scene.n_people):
            if present[k, a] and present[k, b]:
                _paf_into(acc, count, kp[k, a], kp[k, b], sigma_l, xs, ys)
        paf[2 * c:2 * c + 2] = _divide_counts(acc, count)

    return FieldStack(conf.astype(np.float32), _f32_toward_zero(paf), topology.hash, stride)


def _f32_toward_zero(a: np.ndarray) -> np.ndarray:
    """float32 copy never larger in magnitude than ``a``, so unit vectors stay within the unit disc."""
    out = a.astype(np.float32)
    grew = np.abs(out.astype(np.float64)) > np.abs(a)
    out[grew] = np.nextafter(out[grew], np.float32(0))
    return out


def weighted_l2_loss(predicted: FieldStack, groundtruth: FieldStack, mask) -> tuple[float, float]:
    """Masked squared error ``(f_L, f_S)`` summed over channels and pixels."""
    mask = np.asarray(mask, dtype=np.float64)
    if (predicted.confidence.shape != groundtruth.confidence.shape
            or predicted.paf.shape != groundtruth.paf.shape
            or mask.shape != predicted.confidence.shape[1:]):
        raise DimMismatch("predicted, groundtruth and mask must share a grid")
    dl = predicted.paf.astype(np.float64) - groundtruth.paf.astype(np.float64)
    ds = predicted.confidence.astype(np.float64) - groundtruth.confidence.astype(np.float64)
    # x/y planes of a limb together give the squared vector norm
    f_l = float(np.sum(mask * np.sum(dl * dl, axis=0)))
    f_s = float(np.sum(mask * np.sum(ds * ds, axis=0)))
    return f_l, f_s
