"""
Rendering ground-truth fields
=============================

A scene is just keypoints. Rendering turns it into one Gaussian confidence
map per part and a two-plane vector field per limb.
"""
import numpy as np

from pafparse import builtin, render_scene_fields
from pafparse.scenes import SceneSpec, random_scene

topo = builtin("coco18")
scene = random_scene(SceneSpec(seed=1, n_people=(3, 3)), 0, topo)
stack = render_scene_fields(scene, topo, sigma=7.0, sigma_l=8.0)
print("confidence", stack.confidence.shape, "paf", stack.paf.shape)

# every annotated part sits on a peak of its own channel
neck = topo.part_index("neck")
for x, y in scene.keypoints[:, neck]:
    print(f"neck at ({x:6.1f}, {y:6.1f}) -> map value {stack.confidence[neck, round(y), round(x)]:.3f}")

# limb fields are unit vectors on the band and zero elsewhere
c = topo.limb_index("neck", "r_shoulder")
norm = np.hypot(*stack.limb_field(c))
print(f"limb {c}: {np.count_nonzero(norm)} pixels on the band, max norm {norm.max():.6f}")
