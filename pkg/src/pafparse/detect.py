"""Part candidates from confidence maps via non-maximum suppression."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter

THRESHOLD = 0.1
WINDOW_RADIUS = 3


@dataclass(frozen=True)
class PartCandidate:
    part: int
    index: int
    x: float
    y: float
    score: float

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


def subpixel_refine(plane: np.ndarray, peak: tuple[int, int]) -> tuple[float, float]:
    """Refine an integer ``(row, col)`` peak with per-axis parabola fits.

    Returns ``(x, y)``. Peaks on the grid border come back unrefined.
    """
    r, c = peak
    h, w = plane.shape
    if r <= 0 or c <= 0 or r >= h - 1 or c >= w - 1:
        return float(c), float(r)
    f0 = float(plane[r, c])
    offsets = []
    for lo, hi in ((plane[r, c - 1], plane[r, c + 1]), (plane[r - 1, c], plane[r + 1, c])):
        lo, hi = float(lo), float(hi)
        curv = lo - 2.0 * f0 + hi
        off = 0.5 * (lo - hi) / curv if curv < 0 else 0.0
        offsets.append(min(0.5, max(-0.5, off)))
    return c + offsets[0], r + offsets[1]


def nms_peaks(
    plane: np.ndarray,
    threshold: float = THRESHOLD,
    window_radius: int = WINDOW_RADIUS,
    part: int = 0,
    refine: bool = True,
    stride: int = 1,
) -> list[PartCandidate]:
    """Local maxima of a ``(2r+1)^2`` window above ``threshold``.

    On exact ties inside a window the smallest ``(row, col)`` survives.
    Candidates are sorted by descending score, then ``(row, col)``.
    """
    plane = np.asarray(plane)
    size = 2 * window_radius + 1
    local_max = maximum_filter(plane, size=size, mode="constant", cval=-np.inf)
    rows, cols = np.nonzero((plane == local_max) & (plane > threshold))
    # np.nonzero yields row-major order, so earlier entries win plateaus
    kept: list[tuple[int, int]] = []
    for r, c in zip(rows.tolist(), cols.tolist()):
        v = plane[r, c]
        if any(abs(r - kr) <= window_radius and abs(c - kc) <= window_radius and plane[kr, kc] == v
               for kr, kc in kept):
            continue
        kept.append((r, c))
    kept.sort(key=lambda rc: (-float(plane[rc]), rc[0], rc[1]))

    off = (stride - 1) / 2.0
    out = []
    for m, (r, c) in enumerate(kept):
        x, y = subpixel_refine(plane, (r, c)) if refine else (float(c), float(r))
        out.append(PartCandidate(part, m, x * stride + off, y * stride + off, float(plane[r, c])))
    return out


def detect_parts(stack, threshold: float = THRESHOLD, window_radius: int = WINDOW_RADIUS,
                 refine: bool = True) -> list[list[PartCandidate]]:
    """Run :func:`nms_peaks` on every confidence channel of a FieldStack."""
    return [
        nms_peaks(plane, threshold, window_radius, part=j, refine=refine, stride=stack.stride)
        for j, plane in enumerate(stack.confidence)
    ]
