"""PAF line-integral scoring of candidate pairs and per-limb bipartite matching."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import CoincidentCandidates

N_SAMPLES = 10
ACCEPT_THRESHOLD = 0.05
SAMPLE_THRESHOLD = 0.05
MIN_SUPPORT = 0.8


def sample_field(field: np.ndarray, points: np.ndarray, interp: str = "bilinear", stride: int = 1) -> np.ndarray:
    """Read a ``(2, h, w)`` vector field at image points ``(..., 2)``.

    Points (or bilinear taps) falling outside the grid read as zero.
    """
    pts = np.asarray(points, dtype=np.float64)
    return _gather(np.asarray(field), np.zeros(pts.shape[:-1], dtype=np.intp), pts, interp, stride)


def _segment_samples(d1, d2, n_samples):
    u = np.linspace(0.0, 1.0, n_samples)
    return (1.0 - u)[:, None] * d1 + u[:, None] * d2


def line_integral_detail(paf_plane, d1, d2, n_samples: int = N_SAMPLES, interp: str = "bilinear",
                         stride: int = 1, sample_threshold: float = SAMPLE_THRESHOLD) -> tuple[float, float]:
    """Return ``(E, support)`` where support is the fraction of samples whose
    dot product exceeds ``sample_threshold``."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    d1 = np.asarray(d1, dtype=np.float64)
    d2 = np.asarray(d2, dtype=np.float64)
    d = d2 - d1
    norm = float(np.hypot(d[0], d[1]))
    if norm == 0.0:
        raise CoincidentCandidates(f"candidates coincide at {tuple(d1)}")
    vals = sample_field(paf_plane, _segment_samples(d1, d2, n_samples), interp, stride)
    dots = vals @ (d / norm)
    return float(dots.mean()), float(np.mean(dots > sample_threshold))


def line_integral_score(paf_plane, d1, d2, n_samples: int = N_SAMPLES, interp: str = "bilinear",
                        stride: int = 1) -> float:
    """Mean alignment of the field with the unit direction ``d1 -> d2``,
    sampled at ``n_samples`` evenly spaced points including both ends."""
    return line_integral_detail(paf_plane, d1, d2, n_samples, interp, stride)[0]


@dataclass
class ScoreMatrix:
    """Pairwise line-integral scores between two candidate sets.

    ``scores[m, n]`` is E for source candidate m and destination n;
    ``support[m, n]`` the fraction of samples above the per-sample threshold.
    """

    scores: np.ndarray
    support: np.ndarray

    @property
    def shape(self):
        return self.scores.shape

    def gated(self, threshold: float = ACCEPT_THRESHOLD, min_support: float = MIN_SUPPORT) -> np.ndarray:
        """Scores with pairs failing either acceptance rule set to zero."""
        ok = (self.scores > threshold) & (self.support >= min_support)
        return np.where(ok, self.scores, 0.0)


def _positions(cands) -> np.ndarray:
    if isinstance(cands, np.ndarray):
        return cands.reshape(-1, 2).astype(np.float64)
    return np.array([c.position for c in cands], dtype=np.float64).reshape(-1, 2)


def score_matrix(paf_plane, candidates_j1, candidates_j2, n_samples: int = N_SAMPLES,
                 interp: str = "bilinear", stride: int = 1,
                 sample_threshold: float = SAMPLE_THRESHOLD) -> ScoreMatrix:
    """Score every pair of candidates at once. Coincident pairs score zero."""
    paf = np.asarray(paf_plane)
    return score_matrices(paf, [(0, _positions(candidates_j1), _positions(candidates_j2))],
                          n_samples, interp, stride, sample_threshold)[0]


def score_matrices(paf: np.ndarray, jobs, n_samples: int = N_SAMPLES, interp: str = "bilinear",
                   stride: int = 1, sample_threshold: float = SAMPLE_THRESHOLD) -> list[ScoreMatrix]:
    """Batched :func:`score_matrix` for several limbs of one PAF stack.

    ``jobs`` holds ``(limb, positions_j1, positions_j2)``; ``paf`` is the
    ``(2C, h, w)`` stack. All samples are read in a single gather.
    """
    sizes = [(len(p1), len(p2)) for _, p1, p2 in jobs]
    total = sum(a * b for a, b in sizes)
    out = [ScoreMatrix(np.zeros(s), np.zeros(s)) for s in sizes]
    if total == 0:
        return out
    src = np.concatenate([np.repeat(p1, len(p2), axis=0) for _, p1, p2 in jobs if len(p1) and len(p2)])
    dst = np.concatenate([np.tile(p2, (len(p1), 1)) for _, p1, p2 in jobs if len(p1) and len(p2)])
    limb = np.concatenate([np.full(a * b, c, dtype=np.intp) for (c, _, _), (a, b) in zip(jobs, sizes)])

    d = dst - src
    norm = np.hypot(d[:, 0], d[:, 1])
    unit = d / np.where(norm > 0, norm, 1.0)[:, None]
    u = np.linspace(0.0, 1.0, n_samples)
    pts = src[:, None, :] + u[None, :, None] * d[:, None, :]
    vals = _gather(paf, np.broadcast_to(limb[:, None], pts.shape[:2]), pts, interp, stride)
    dots = np.einsum("tsk,tk->ts", vals, unit)
    valid = norm > 0
    scores = np.where(valid, dots.mean(axis=1), 0.0)
    support = np.where(valid, (dots > sample_threshold).mean(axis=1), 0.0)

    start = 0
    for i, (a, b) in enumerate(sizes):
        n = a * b
        if n:
            out[i] = ScoreMatrix(scores[start:start + n].reshape(a, b), support[start:start + n].reshape(a, b))
        start += n
    return out


def _gather(paf, limb, pts, interp, stride):
    """Sample limb ``limb[i]`` of a ``(2C, h, w)`` stack at ``pts[i]``."""
    _, h, w = paf.shape
    flat = paf.reshape(-1)
    plane = h * w
    if stride != 1:
        pts = (pts - (stride - 1) / 2.0) / stride
    x, y = pts[..., 0], pts[..., 1]
    base = 2 * limb * plane
    out = np.zeros(pts.shape)
    if interp == "nearest":
        taps = [(np.floor(y + 0.5).astype(np.intp), np.floor(x + 0.5).astype(np.intp), 1.0)]
    elif interp == "bilinear":
        x0 = np.floor(x)
        y0 = np.floor(y)
        fx = x - x0
        fy = y - y0
        x0 = x0.astype(np.intp)
        y0 = y0.astype(np.intp)
        taps = [(y0, x0, (1 - fy) * (1 - fx)), (y0, x0 + 1, (1 - fy) * fx),
                (y0 + 1, x0, fy * (1 - fx)), (y0 + 1, x0 + 1, fy * fx)]
    else:
        raise ValueError(f"unknown interpolation {interp!r}")
    for r, c, wt in taps:
        ok = (c >= 0) & (c < w) & (r >= 0) & (r < h)
        idx = np.where(ok, base + r * w + c, 0)
        wt = np.where(ok, wt, 0.0)
        out[..., 0] += wt * flat[idx]
        out[..., 1] += wt * flat[idx + plane]
    return out


def _as_array(matrix) -> np.ndarray:
    if isinstance(matrix, ScoreMatrix):
        return matrix.scores
    return np.asarray(matrix, dtype=np.float64)


def hungarian_match(matrix, threshold: float = ACCEPT_THRESHOLD) -> list[tuple[int, int]]:
    """Maximum-weight one-to-one partial matching; pairs with E <= threshold
    are dropped after optimisation."""
    m = _as_array(matrix)
    if m.size == 0:
        return []
    # a partial matching never gains from a non-positive edge
    rows, cols = linear_sum_assignment(np.maximum(m, 0.0), maximize=True)
    return sorted((int(r), int(c)) for r, c in zip(rows, cols) if m[r, c] > threshold and m[r, c] > 0)


def greedy_match(matrix, threshold: float = ACCEPT_THRESHOLD) -> list[tuple[int, int]]:
    """Take pairs by descending E (ties by ``(m, n)``) while both ends are free."""
    m = _as_array(matrix)
    if m.size == 0:
        return []
    flat = m.ravel()
    # lexsort: last key is primary
    order = np.lexsort((np.arange(flat.size), -flat))
    used_r = set()
    used_c = set()
    out = []
    ncols = m.shape[1]
    for idx in order.tolist():
        e = flat[idx]
        if not e > threshold:
            break
        r, c = divmod(idx, ncols)
        if r in used_r or c in used_c:
            continue
        used_r.add(r)
        used_c.add(c)
        out.append((r, c))
    return sorted(out)


def match_weight(matrix, pairs) -> float:
    m = _as_array(matrix)
    return float(sum(m[r, c] for r, c in pairs))


MATCHERS = {"hungarian": hungarian_match, "greedy": greedy_match}
