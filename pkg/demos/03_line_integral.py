"""
Scoring candidate pairs
=======================

The association score of two candidates is the mean projection of the limb
field onto the segment joining them.
"""
import numpy as np

from pafparse import paf_person, line_integral_score, score_matrix

grid = (200, 120)
field = paf_person((30, 60), (170, 60), sigma_l=8.0, grid_dims=grid)

print("true endpoints      ", line_integral_score(field, (30, 60), (170, 60)))
print("reversed            ", line_integral_score(field, (170, 60), (30, 60)))
print("perpendicular probe ", line_integral_score(field, (100, 40), (100, 80)))
print("half on the band    ", line_integral_score(field, (100, 60), (240, 60)))

# all pairs at once
left = np.array([[30.0, 60.0], [30.0, 100.0]])
right = np.array([[170.0, 60.0], [170.0, 20.0]])
m = score_matrix(field, left, right)
print("scores\n", np.round(m.scores, 3))
print("gated\n", np.round(m.gated(), 3))
