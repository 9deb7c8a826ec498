import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from crossed_modules import (
    GLCrossedModule, GLDims, GLGroupElement, GLHElement, IMAGE_DIMS, ImageParams,
    abelian_grid_assignment, check_group_element, face_matrix_n, gl_action, gl_feedback,
    gl_h_inv, gl_h_mul, image_edge_eta, image_grid_assignment,
)
from double_category import Rect, free_lift, validate_grid
from utils.errors import DimensionMismatch, NonFinite, NotInFeedbackImage, ValidationError

DIMS = GLDims(2, 1, 3)
XM = GLCrossedModule(*DIMS)


def test_h_unit_is_neutral(rng):
    h = XM.sample_h(rng)
    unit = XM.h_unit()
    assert_allclose(gl_h_mul(unit, h, DIMS).block, h.block, atol=1e-15)
    assert_allclose(gl_h_mul(h, unit, DIMS).block, h.block, atol=1e-15)


def test_h_inverse_both_sides(rng):
    h = XM.sample_h(rng)
    inv = gl_h_inv(h, DIMS)
    assert XM.h_distance(gl_h_mul(h, inv, DIMS), XM.h_unit()) < 1e-12
    assert XM.h_distance(gl_h_mul(inv, h, DIMS), XM.h_unit()) < 1e-12
    assert XM.h_distance(gl_h_inv(inv, DIMS), h) < 1e-12


def test_h_product_is_associative(rng):
    a, b, c = (XM.sample_h(rng) for _ in range(3))
    left = gl_h_mul(gl_h_mul(a, b, DIMS), c, DIMS)
    right = gl_h_mul(a, gl_h_mul(b, c, DIMS), DIMS)
    assert XM.h_distance(left, right) < 1e-12


def test_feedback_of_unit_and_products(rng):
    assert XM.g_distance(gl_feedback(XM.h_unit(), DIMS), XM.g_unit()) == 0.0
    a, b = XM.sample_h(rng), XM.sample_h(rng)
    lhs = gl_feedback(gl_h_mul(a, b, DIMS), DIMS)
    rhs = XM.g_mul(gl_feedback(a, DIMS), gl_feedback(b, DIMS))
    assert XM.g_distance(lhs, rhs) < 1e-12


def test_feedback_block_layout():
    P = np.array([[2.0, 1.0], [0.0, 1.0]])
    B = np.arange(6.0).reshape(2, 3)
    R = np.array([[5.0, -1.0]])
    h = GLHElement(np.block([[P - np.eye(2), B], [R, np.ones((1, 3))]]))
    g = gl_feedback(h, DIMS)
    assert_allclose(g.U, [[2, 1, 0], [0, 1, 0], [5, -1, 1]])
    assert_allclose(g.V[:2], np.hstack([P, B]))
    assert_allclose(g.V[2:], np.hstack([np.zeros((3, 2)), np.eye(3)]))


def test_action_by_unit_and_composite(rng):
    h = XM.sample_h(rng)
    assert XM.h_distance(gl_action(XM.g_unit(), h, DIMS), h) < 1e-15
    g1, g2 = XM.sample_g(rng), XM.sample_g(rng)
    both = gl_action(XM.g_mul(g1, g2), h, DIMS)
    nested = gl_action(g1, gl_action(g2, h, DIMS), DIMS)
    assert XM.h_distance(both, nested) < 1e-12


def test_group_element_checks(rng):
    g = XM.sample_g(rng)
    check_group_element(g, DIMS)

    U = g.U.copy()
    U[0, 2] = 1.0
    with pytest.raises(ValidationError, match="lower triangular"):
        check_group_element(GLGroupElement(U, g.V), DIMS)

    V = g.V.copy()
    V[0, 0] += 0.5
    with pytest.raises(ValidationError, match="P block"):
        check_group_element(GLGroupElement(g.U, V), DIMS)

    with pytest.raises(DimensionMismatch):
        check_group_element(GLGroupElement(np.eye(4), g.V), DIMS)


def test_dimensions_are_validated():
    with pytest.raises(ValidationError):
        GLCrossedModule(0, 1, 1)
    with pytest.raises(DimensionMismatch):
        gl_h_mul(GLHElement(np.zeros((2, 2))), XM.h_unit(), DIMS)


def test_eta_of_a_constant_step():
    g = image_edge_eta([0.2, 0.4, 0.6], [0.2, 0.4, 0.6], ImageParams())
    assert_allclose(g.U, [[1, 0, 0], [0, 1, 0], [0, 1, 1]], atol=1e-15)
    assert_allclose(g.V, np.eye(5), atol=1e-15)
    check_group_element(g, IMAGE_DIMS)


def test_eta_there_and_back():
    params = ImageParams()
    z, zbar = [0.9, 0.1, 0.4], [0.3, 0.7, 0.2]
    loop = XM.g_mul(image_edge_eta(z, zbar, params), image_edge_eta(zbar, z, params))
    assert_allclose(loop.U[:2, :2], np.eye(2), atol=1e-12)
    assert_allclose(loop.U[2:, 2:], [[1.0]], atol=1e-12)
    assert_allclose(loop.V[2:, 2:], np.eye(3), atol=1e-12)


def test_eta_rejects_non_finite_pixels():
    with pytest.raises(NonFinite):
        image_edge_eta([math.nan, 0, 0], [0, 0, 0], ImageParams())


NON_COMMUTING_Q = [
    np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
    np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
    np.zeros((3, 3)),
]


def test_image_params_validation():
    with pytest.raises(ValidationError, match="do not commute"):
        ImageParams(Q=NON_COMMUTING_Q)
    with pytest.raises(DimensionMismatch):
        ImageParams(s=[0.1, 0.2])
    with pytest.raises(DimensionMismatch):
        ImageParams(A=[np.eye(3)] * 3)


def test_non_commuting_q_leaves_the_feedback_image(rng):
    params = ImageParams()
    params.Q = NON_COMMUTING_Q
    with pytest.raises(NotInFeedbackImage):
        image_grid_assignment(rng.uniform(0, 1, size=(3, 3, 3)), params)


def test_constant_image_grid():
    grid, xm = image_grid_assignment(np.full((3, 4, 3), 0.5))
    assert (grid.m, grid.n) == (2, 3)
    assert validate_grid(grid, xm) == []
    for column in grid.faces:
        for face in column:
            assert_allclose(face.block, np.zeros((3, 5)), atol=1e-12)


def test_random_image_grid_is_consistent(rng):
    grid, xm = image_grid_assignment(rng.uniform(0, 1, size=(5, 4, 3)))
    assert validate_grid(grid, xm) == []
    for column in grid.hcells:
        for g in column:
            check_group_element(g, IMAGE_DIMS)


def test_face_matrix_n():
    pixels = np.zeros((2, 2, 3))
    pixels[0, 1] = (1, 2, 3)
    pixels[1, 0] = (2, 0, 1)
    pixels[1, 1] = (3, 3, 3)
    assert_allclose(face_matrix_n(pixels, 0, 0), [[27.0, 0.0, 5.0]])
    grid, _ = image_grid_assignment(pixels)
    assert_allclose(grid.faces[0][0].block[2:, 2:], [[27.0, 0.0, 5.0]])


def test_image_shape_checks():
    with pytest.raises(DimensionMismatch):
        image_grid_assignment(np.zeros((3, 3)))
    with pytest.raises(DimensionMismatch):
        image_grid_assignment(np.zeros((3, 3, 1)))


def test_abelian_grid_sums():
    grid, xm = abelian_grid_assignment(np.ones((4, 4)).tolist())
    assert free_lift(grid, Rect(0, 4, 0, 4), xm).face == 16
    grid, xm = abelian_grid_assignment([[7]])
    assert free_lift(grid, Rect(0, 1, 0, 1), xm).face == 7
    with pytest.raises(DimensionMismatch):
        abelian_grid_assignment([[1, 2], [3]])


def test_abelian_max_grid():
    grid, xm = abelian_grid_assignment([[1, 5], [4, -2]], "max")
    assert free_lift(grid, Rect(0, 2, 0, 2), xm, "midpoint").face == 5
    assert free_lift(grid, Rect(1, 2, 0, 2), xm).face == 4
