"""
From fields to people
=====================

Detect, score, match and assemble. Then compare with the ground truth.
"""
import numpy as np

from pafparse import builtin, detect_parts, parse_poses, render_scene_fields
from pafparse.evaluate import poses_from_parse
from pafparse.metrics import match_people
from pafparse.parse import unassigned_candidates
from pafparse.scenes import SceneSpec, random_scene

topo = builtin("coco18")
scene = random_scene(SceneSpec(seed=12, n_people=(6, 6)), 0, topo)
stack = render_scene_fields(scene, topo)
cands = detect_parts(stack)
people = parse_poses(cands, stack, topo)
print(f"{sum(map(len, cands))} candidates -> {len(people)} people "
      f"({len(unassigned_candidates(cands, people))} candidates left over)")

poses = poses_from_parse(people, cands, topo.n_parts)
for p, g, sim in match_people(poses, list(scene.keypoints)):
    err = np.nanmean(np.hypot(*(poses[p] - scene.keypoints[g]).T))
    print(f"person {p} -> truth {g}: OKS {sim:.4f}, mean error {err:.4f} px, score {people[p].score:.2f}")
