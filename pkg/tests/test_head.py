import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from simplexseg import ProjectionHead, build_prototypes, classify, project, score, uncertainty

def test_zero_head_projects_to_zero():
    head = ProjectionHead.zeros(7, 3)
    f = np.random.default_rng(0).normal(size=(4, 5, 7))
    out = project(head, f)
    assert out.shape == (4, 5, 3)
    assert not out.any()


def test_identity_head_reproduces_prototype():
    p = build_prototypes(5)
    head = ProjectionHead(np.eye(4), np.zeros(4))
    for c in range(5):
        np.testing.assert_array_equal(project(head, p[:, c]), p[:, c])


def test_parameter_count_d256_six_classes():
    assert ProjectionHead.zeros(256, 5).num_params == 1285


def test_project_rejects_depth_mismatch():
    with pytest.raises(ValueError):
        project(ProjectionHead.zeros(4, 2), np.zeros((2, 2, 5)))


def test_head_rejects_bad_bias():
    with pytest.raises(ValueError):
        ProjectionHead(np.zeros((4, 2)), np.zeros(3))


def test_project_is_affine():
    rng = np.random.default_rng(1)
    head = ProjectionHead(rng.normal(size=(6, 3)), rng.normal(size=3))
    for _ in range(20):
        f1, f2 = rng.normal(size=(2, 6))
        a, b = rng.normal(size=2)
        lhs = project(head, a * f1 + b * f2)
        rhs = a * project(head, f1) + b * project(head, f2) - (a + b - 1) * head.bias
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_score_on_prototype():
    p = build_prototypes(6)
    s = score(p[:, 2], p)
    np.testing.assert_allclose(s, [-0.2, -0.2, 1.0, -0.2, -0.2, -0.2], atol=1e-12)
    assert not score(np.zeros(5), p).any()


def test_score_three_classes():
    np.testing.assert_allclose(score(np.array([1.0, 0.0]), build_prototypes(3)), [1.0, -0.5, -0.5], atol=1e-15)


def test_score_dimension_mismatch():
    with pytest.raises(ValueError):
        score(np.zeros(4), build_prototypes(4))


@pytest.mark.parametrize("n", [2, 3, 6, 19])
def test_uniform_scores_give_max_uncertainty(n):
    assert uncertainty(np.full(n, 0.37)) == 1 - 1 / n


def test_two_class_hand_value():
    # softmax(ln 3, 0) = (3/4, 1/4)
    assert uncertainty(np.array([math.log(3.0), 0.0])) == pytest.approx(0.25, abs=1e-15)


def test_uncertainty_decreases_toward_zero_on_prototype_direction():
    base = np.array([1.0] + [-0.2] * 5)
    values = [float(uncertainty(t * base)) for t in (0.0, 0.5, 1, 2, 5, 10, 50)]
    assert values == sorted(values, reverse=True)
    assert values[-1] < 1e-20


def test_uncertainty_rejects_non_finite():
    with pytest.raises(ValueError):
        uncertainty(np.array([0.0, np.inf]))


def test_classify():
    assert classify(np.array([0.2, 0.9, 0.1])) == 1
    assert classify(score(np.zeros(5), build_prototypes(6))) == 0
    p = build_prototypes(4)
    np.testing.assert_array_equal(classify(score(p.T, p)), [0, 1, 2, 3])


def test_ties_break_to_lowest_index():
    assert classify(np.array([0.0, 1.0, 1.0])) == 1


# multiples of 1/64 keep score + shift exact, so argmax cannot change by rounding
lattice = st.integers(-3200, 3200).map(lambda k: k / 64.0)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(2, 12), elements=lattice), lattice)
def test_shift_invariance(scores, shift):
    u0, u1 = uncertainty(scores), uncertainty(scores + shift)
    assert abs(u0 - u1) <= 1e-12
    assert classify(scores) == classify(scores + shift)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(2, 12), elements=st.floats(-1e3, 1e3)))
def test_uncertainty_range(scores):
    n = scores.size
    u = uncertainty(scores)
    assert 0.0 <= u <= 1 - 1 / n


def test_argmax_score_is_nearest_prototype():
    rng = np.random.default_rng(7)
    for n in (3, 6, 10):
        p = build_prototypes(n)
        z = rng.normal(size=(500, n - 1))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        dist = np.linalg.norm(z[:, :, None] - p[None, :, :], axis=1)
        np.testing.assert_array_equal(classify(score(z, p)), dist.argmin(axis=1))
