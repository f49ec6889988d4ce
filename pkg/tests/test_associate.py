import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import best_partial_matching, dense_line_integral
from pafparse import greedy_match, hungarian_match, line_integral_score, paf_person, score_matrix
from pafparse import render_scene_fields
from pafparse.associate import ScoreMatrix, line_integral_detail, match_weight, sample_field
from pafparse.errors import CoincidentCandidates
from pafparse.scenes import SceneSpec, random_scene

GRID = (120, 100)


def test_aligned_limb_scores_one():
    f = paf_person((20, 50), (90, 50), 8, GRID)
    assert line_integral_score(f, (20, 50), (90, 50)) == pytest.approx(1.0)
    assert line_integral_score(f, (90, 50), (20, 50)) == pytest.approx(-1.0)


def test_orthogonal_probe():
    f = np.zeros((2, 100, 120))
    f[0] = 1.0
    assert abs(line_integral_score(f, (60, 10), (60, 90))) <= 1e-6


def test_half_band_against_dense_oracle():
    f = np.zeros((2, 100, 120))
    f[0, :, :55] = 1.0
    e = line_integral_score(f, (10, 50), (100, 50))
    assert e == pytest.approx(dense_line_integral(f, (10, 50), (100, 50)), abs=0.05)
    assert e == pytest.approx(0.5, abs=0.05)


def test_support_rule():
    f = np.zeros((2, 100, 120))
    f[0, :, :30] = 3.0  # strong but short overlap
    e, support = line_integral_detail(f, (10, 50), (100, 50))
    assert e > 0.05 and support < 0.8
    m = ScoreMatrix(np.array([[e]]), np.array([[support]]))
    assert m.gated()[0, 0] == 0.0


def test_coincident_candidates():
    with pytest.raises(CoincidentCandidates):
        line_integral_score(np.zeros((2, 5, 5)), (1, 1), (1, 1))


def test_out_of_grid_reads_zero():
    f = np.ones((2, 10, 10))
    np.testing.assert_array_equal(sample_field(f, np.array([[-3.0, 4.0], [4.0, 20.0]])), 0.0)
    np.testing.assert_allclose(sample_field(f, np.array([[4.5, 4.5]])), [[1.0, 1.0]])


def test_score_matrix_shapes():
    f = paf_person((20, 50), (90, 50), 8, GRID)
    m = score_matrix(f, np.array([[20.0, 50.0]]), np.array([[90.0, 50.0]]))
    assert m.shape == (1, 1) and m.scores[0, 0] == pytest.approx(1.0)
    assert score_matrix(f, np.zeros((0, 2)), np.array([[1.0, 2.0]] * 3)).shape == (0, 3)


def test_three_person_matrix_is_diagonal_dominant(coco):
    scene = random_scene(SceneSpec(seed=4, n_people=(3, 3)), 0, coco)
    stack = render_scene_fields(scene, coco)
    c = coco.limb_index("neck", "r_shoulder")
    a, b = coco.limbs[c]
    m = score_matrix(stack.limb_field(c), scene.keypoints[:, a], scene.keypoints[:, b]).scores
    for k in range(3):
        assert m[k, k] > 0.5  # sub-pixel endpoints lose a little to taps behind the limb
        assert m[k, k] > np.delete(m[k], k).max()
    assert hungarian_match(m) == greedy_match(m) == [(0, 0), (1, 1), (2, 2)]


@pytest.mark.parametrize("matcher", [hungarian_match, greedy_match])
def test_small_examples(matcher):
    assert matcher(np.array([[1.0]])) == [(0, 0)]
    assert matcher(np.eye(2)) == [(0, 0), (1, 1)]
    assert matcher(np.zeros((0, 4))) == []


def test_greedy_gap_gadget():
    m = np.array([[10.0, 9.0], [9.0, 1.0]])
    assert match_weight(m, greedy_match(m)) == 11.0
    assert match_weight(m, hungarian_match(m)) == 18.0 == best_partial_matching(m)


def test_threshold_drops_weak_pairs():
    m = np.array([[0.04, 0.0], [0.0, 0.9]])
    assert hungarian_match(m) == greedy_match(m) == [(1, 1)]


matrices = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda s: arrays(np.float64, s, elements=st.floats(-1, 1, allow_nan=False, width=32)))


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_matchers_against_brute_force(m):
    h, g = hungarian_match(m, 0.0), greedy_match(m, 0.0)
    for pairs in (h, g):
        assert len({r for r, _ in pairs}) == len(pairs)
        assert len({c for _, c in pairs}) == len(pairs)
    opt = best_partial_matching(m)
    assert match_weight(m, h) == pytest.approx(opt, abs=1e-9)
    assert match_weight(m, h) >= match_weight(m, g) - 1e-12


@settings(max_examples=40, deadline=None)
@given(x1=st.floats(15, 100), y1=st.floats(15, 85), x2=st.floats(15, 100), y2=st.floats(15, 85))
def test_direction_reversal_flips_sign(x1, y1, x2, y2):
    if np.hypot(x2 - x1, y2 - y1) < 1:
        return
    f = paf_person((30, 40), (90, 60), 8, GRID)
    assert line_integral_score(f, (x1, y1), (x2, y2)) == pytest.approx(
        -line_integral_score(f, (x2, y2), (x1, y1)), abs=1e-12)
