"""
Peak detection
==============

Non-maximum suppression over each confidence map, with a parabola fit to
recover sub-pixel positions.
"""
import numpy as np

from pafparse import aggregate_confidence, confidence_map_person, nms_peaks

grid = (160, 120)
truth = [(40.3, 60.7), (80.6, 60.2), (120.0, 30.5)]
plane = aggregate_confidence([confidence_map_person(p, 7.0, grid) for p in truth])

for c in nms_peaks(plane, threshold=0.1, window_radius=3):
    err = min(np.hypot(c.x - x, c.y - y) for x, y in truth)
    print(f"candidate {c.index}: ({c.x:7.3f}, {c.y:7.3f}) score {c.score:.3f}  error {err:.3f} px")

coarse = nms_peaks(plane, refine=False)
print("without refinement, worst error:",
      max(min(np.hypot(c.x - x, c.y - y) for x, y in truth) for c in coarse))
