"""Multi-person assembly from per-limb connections.

``parse_poses`` is the fast path: each limb type is matched independently,
then all accepted connections are scanned in descending score order and
grown into people.  A connection whose endpoints already belong to two
people that both own the same part type is dropped, which is how redundant
limbs (ear-shoulder, ...) veto wrong merges.

``exhaustive_parse`` solves the joint problem exactly for tiny instances and
serves as the reference the greedy parse is measured against.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .associate import (
    ACCEPT_THRESHOLD,
    MATCHERS,
    MIN_SUPPORT,
    N_SAMPLES,
    SAMPLE_THRESHOLD,
    ScoreMatrix,
    score_matrices,
)
from .detect import PartCandidate
from .errors import InstanceTooLarge, TopologyFieldMismatch
from .topology import EdgeClassification, SkeletonTopology, classify_edges

EXHAUSTIVE_LIMIT = 10**6


@dataclass
class ParseConfig:
    min_parts: int = 3
    # people scoring below min_score_per_part * n_parts are dropped
    min_score_per_part: float = 0.2
    matcher: str = "hungarian"
    threshold: float = ACCEPT_THRESHOLD
    min_support: float = MIN_SUPPORT
    sample_threshold: float = SAMPLE_THRESHOLD
    n_samples: int = N_SAMPLES
    interp: str = "bilinear"
    use_redundant: bool = True

    def __post_init__(self):
        if self.min_parts < 1:
            raise ValueError("min_parts must be >= 1")
        if self.matcher not in MATCHERS:
            raise ValueError(f"matcher must be one of {sorted(MATCHERS)}")


@dataclass
class PersonParse:
    """One assembled person.

    ``parts[j]`` is the candidate index used for part ``j`` or -1.
    ``connections`` holds ``(limb, m, n, E)`` for every accepted link.
    """

    parts: list[int]
    connections: list[tuple[int, int, int, float]] = field(default_factory=list)
    part_scores: float = 0.0

    @property
    def n_parts(self) -> int:
        return sum(1 for m in self.parts if m >= 0)

    @property
    def association(self) -> float:
        return float(sum(e for *_, e in self.connections))

    @property
    def score(self) -> float:
        return person_score(self)

    def keypoints(self, candidates: Sequence[Sequence[PartCandidate]]) -> list:
        """``[x, y, score]`` per part, ``None`` where the part is missing."""
        out = []
        for j, m in enumerate(self.parts):
            if m < 0:
                out.append(None)
            else:
                c = candidates[j][m]
                out.append([c.x, c.y, c.score])
        return out


def person_score(person: PersonParse) -> float:
    return person.association + person.part_scores


def total_association(persons: Sequence[PersonParse]) -> float:
    return float(sum(p.association for p in persons))


def unassigned_candidates(candidates, persons: Sequence[PersonParse]) -> list[tuple[int, int]]:
    """``(part, index)`` of every candidate no person uses."""
    used = {(j, m) for p in persons for j, m in enumerate(p.parts) if m >= 0}
    return [(j, m) for j, cands in enumerate(candidates) for m in range(len(cands)) if (j, m) not in used]


def _paf_array(paf_stack) -> np.ndarray:
    return getattr(paf_stack, "paf", paf_stack)


def _positions(cands) -> np.ndarray:
    return np.array([(c.x, c.y) for c in cands], dtype=np.float64).reshape(-1, 2)


def limb_score_matrices(candidates, paf_stack, topology: SkeletonTopology, limbs: Sequence[int],
                        config: ParseConfig | None = None) -> dict[int, ScoreMatrix]:
    config = config or ParseConfig()
    paf = np.asarray(_paf_array(paf_stack))
    stride = getattr(paf_stack, "stride", 1)
    if paf.shape[0] != 2 * topology.n_limbs:
        raise TopologyFieldMismatch(
            f"{paf.shape[0]} PAF planes for a topology with {topology.n_limbs} limbs")
    pos = [_positions(c) for c in candidates]
    jobs = [(c, pos[topology.limbs[c][0]], pos[topology.limbs[c][1]]) for c in limbs]
    mats = score_matrices(paf, jobs, config.n_samples, config.interp, stride, config.sample_threshold)
    return dict(zip(limbs, mats))


def _part_score_sum(parts, candidates) -> float:
    return float(sum(candidates[j][m].score for j, m in enumerate(parts) if m >= 0))


def parse_poses(candidates: Sequence[Sequence[PartCandidate]], paf_stack, topology: SkeletonTopology,
                edges: EdgeClassification | None = None, config: ParseConfig | None = None) -> list[PersonParse]:
    """Assemble people from part candidates and PAFs.

    ``candidates[j]`` lists the candidates of part ``j``. Returns people
    sorted by descending score.
    """
    config = config or ParseConfig()
    edges = edges or classify_edges(topology)
    limbs = list(edges.tree_edges)
    if config.use_redundant:
        limbs += list(edges.redundant_edges)
    limbs.sort()
    matrices = limb_score_matrices(candidates, paf_stack, topology, limbs, config)
    match = MATCHERS[config.matcher]

    conns = []
    for c in limbs:
        gated = matrices[c].gated(config.threshold, config.min_support)
        for m, n in match(gated, config.threshold):
            conns.append((float(gated[m, n]), c, m, n))
    conns.sort(key=lambda t: (-t[0], t[1], t[2], t[3]))

    J = topology.n_parts
    owner = [[-1] * len(candidates[j]) for j in range(J)]
    people: dict[int, PersonParse] = {}
    next_id = 0
    for e, c, m, n in conns:
        a, b = topology.limbs[c]
        pa, pb = owner[a][m], owner[b][n]
        if pa < 0 and pb < 0:
            parts = [-1] * J
            parts[a], parts[b] = m, n
            people[next_id] = PersonParse(parts, [(c, m, n, e)])
            owner[a][m] = owner[b][n] = next_id
            next_id += 1
        elif pa >= 0 and pb >= 0:
            if pa == pb:
                people[pa].connections.append((c, m, n, e))
                continue
            p, q = people[min(pa, pb)], people[max(pa, pb)]
            if any(x >= 0 and y >= 0 for x, y in zip(p.parts, q.parts)):
                continue  # contradicts a stronger connection
            for j, k in enumerate(q.parts):
                if k >= 0:
                    p.parts[j] = k
                    owner[j][k] = min(pa, pb)
            p.connections.extend(q.connections)
            p.connections.append((c, m, n, e))
            del people[max(pa, pb)]
        else:
            pid, j, k = (pa, b, n) if pa >= 0 else (pb, a, m)
            person = people[pid]
            if person.parts[j] >= 0:
                continue
            person.parts[j] = k
            owner[j][k] = pid
            person.connections.append((c, m, n, e))

    out = []
    for pid in sorted(people):
        p = people[pid]
        p.part_scores = _part_score_sum(p.parts, candidates)
        if p.n_parts >= config.min_parts and p.score >= config.min_score_per_part * p.n_parts:
            out.append(p)
    # stable: equal scores keep creation order
    out.sort(key=lambda p: -p.score)
    return out


def _weights(mat, threshold) -> np.ndarray:
    if isinstance(mat, ScoreMatrix):
        return mat.gated(threshold)
    m = np.asarray(mat, dtype=np.float64)
    return np.where(m > threshold, m, 0.0)


def exhaustive_parse(candidates: Sequence[Sequence[PartCandidate]], score_matrices: Mapping[int, object],
                     topology: SkeletonTopology, edges: EdgeClassification | None = None,
                     threshold: float = ACCEPT_THRESHOLD, limit: int = EXHAUSTIVE_LIMIT) -> list[PersonParse]:
    """Exact joint assembly for small instances.

    Every person hypothesis (one candidate or nothing per part, so
    ``prod(N_j + 1)`` of them) is enumerated and scored by the sum of its
    internal links over all limbs in ``score_matrices``, tree or redundant.
    The best set of disjoint hypotheses is then found by depth-first search
    with an admissible bound. Among equal optima the first in enumeration
    order wins.
    """
    edges = edges or classify_edges(topology)
    J = topology.n_parts
    counts = [len(candidates[j]) for j in range(J)]
    size = int(np.prod([n + 1 for n in counts], dtype=object))
    if size > limit:
        raise InstanceTooLarge(f"instance size {size} exceeds {limit}")

    weights = {c: _weights(mat, threshold) for c, mat in sorted(score_matrices.items())}
    limb_list = [(c, topology.limbs[c][0], topology.limbs[c][1], w) for c, w in weights.items()]
    offset = np.concatenate([[0], np.cumsum(counts)]).astype(int)

    # hypotheses: (mask over candidates, score, parts, links)
    hyps = []
    for choice in itertools.product(*[range(-1, n) for n in counts]):
        if sum(1 for m in choice if m >= 0) < 2:
            continue
        links = []
        for c, a, b, w in limb_list:
            ma, mb = choice[a], choice[b]
            if ma >= 0 and mb >= 0 and w[ma, mb] > 0:
                links.append((c, ma, mb, float(w[ma, mb])))
        if not links or len(_components(choice, links, topology)) != 1:
            continue
        mask = 0
        for j in (j for j in range(J) if choice[j] >= 0):
            mask |= 1 << int(offset[j] + choice[j])
        hyps.append((mask, sum(e for *_, e in links), list(choice), links))

    n_items = int(offset[-1])
    by_first: list[list[int]] = [[] for _ in range(n_items)]
    share = [0.0] * n_items
    for h, (mask, score, _, _) in enumerate(hyps):
        bits = [i for i in range(n_items) if mask >> i & 1]
        by_first[bits[0]].append(h)
        for i in bits:
            share[i] = max(share[i], score / len(bits))
    # bound on what undecided items i.. can still add
    tail = np.concatenate([np.cumsum(share[::-1])[::-1], [0.0]])

    eps = 1e-12
    best = {"value": -1.0, "chosen": []}
    chosen: list[int] = []

    def search(i, decided, value):
        while i < n_items and decided >> i & 1:
            i += 1
        if value + tail[i] <= best["value"] + eps:
            return
        if i == n_items:
            best["value"] = value
            best["chosen"] = list(chosen)
            return
        for h in by_first[i]:
            mask, score = hyps[h][0], hyps[h][1]
            if mask & decided:
                continue
            chosen.append(h)
            search(i + 1, decided | mask, value + score)
            chosen.pop()
        search(i + 1, decided | (1 << i), value)

    search(0, 0, 0.0)

    out = []
    for h in best["chosen"]:
        _, _, parts, links = hyps[h]
        person = PersonParse(list(parts), list(links))
        person.part_scores = _part_score_sum(parts, candidates)
        out.append(person)
    out.sort(key=lambda p: -p.score)
    return out


def _components(parts, links, topology):
    """Connected groups of part types joined by ``links`` within one person."""
    parent = {j: j for j, m in enumerate(parts) if m >= 0}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c, *_ in links:
        a, b = topology.limbs[c]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, set] = {}
    for j in parent:
        comps.setdefault(find(j), set()).add(j)
    return [comps[k] for k in sorted(comps)]
