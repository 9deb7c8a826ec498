import itertools
import math

import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose, assert_array_equal

from category import (
    Interval, IntervalAssignment, MatrixCategory, functor_law_check, lift, validate_assignment,
)
from instances import (
    DimProfile, SSMParams,
    make_affine_assignment, make_iis_assignment, make_iss_assignment, make_mat_assignment,
    make_product_assignment, make_ssm_assignment,
)
from numeric import REAL, TROPICAL, mat_mul
from tensor_algebra import tensor_mul
from utils.errors import DimensionMismatch, ValidationError


def close(a, b):
    return math.isclose(a, b, rel_tol=1e-10, abs_tol=1e-12)


def test_product_equals_subset_expansion_exactly(rng):
    series = [int(x) for x in rng.integers(-4, 5, size=10)]
    asg, cat = make_product_assignment(series)
    expected = sum(
        math.prod(subset)
        for k in range(len(series) + 1)
        for subset in itertools.combinations(series, k)
    )
    assert lift(asg, Interval(0, len(series)), cat) == expected


def test_affine_recursion():
    series = [0.5, -0.25, 2.0]
    asg, cat = make_affine_assignment(series)
    y = 1.0
    for x in series:
        y = y + x * y
    assert math.isclose(lift(asg, Interval(0, 3), cat), y)


def test_iss_coefficients_match_nested_sums(rng):
    x = list(rng.normal(size=20))
    asg, cat = make_iss_assignment(x, level=3)
    assert validate_assignment(asg, cat) == []
    sig = lift(asg, Interval(0, 20), cat)
    n = len(x)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    assert close(sig[(1,)], sum(x))
    assert close(sig[(2,)], sum(v ** 2 for v in x))
    assert close(sig[(3,)], sum(v ** 3 for v in x))
    assert close(sig[(1, 1)], sum(x[i] * x[j] for i, j in pairs))
    assert close(sig[(1, 2)], sum(x[i] * x[j] ** 2 for i, j in pairs))
    assert close(sig[(2, 1)], sum(x[i] ** 2 * x[j] for i, j in pairs))
    assert close(
        sig[(1, 1, 1)],
        sum(x[i] * x[j] * x[k] for i, j, k in itertools.combinations(range(n), 3)),
    )


def test_iss_splitting_is_exact_on_integers():
    series = [3, -1, 4, 1, -5, 9, 2, -6]
    asg, cat = make_iss_assignment(series, level=4)
    whole = lift(asg, Interval(0, 8), cat)
    for k in range(9):
        split = tensor_mul(lift(asg, Interval(0, k), cat), lift(asg, Interval(k, 8), cat))
        assert split.terms == whole.terms


def test_iis_chen_identity(rng):
    path = rng.normal(size=(12, 2)).cumsum(axis=0)
    asg, cat = make_iis_assignment(path.tolist(), level=3)
    whole = lift(asg, Interval(0, 11), cat)
    for k in (0, 3, 7, 11):
        split = tensor_mul(lift(asg, Interval(0, k), cat), lift(asg, Interval(k, 11), cat))
        assert cat.equal(split, whole)

    increment = path[-1] - path[0]
    assert close(whole[(1,)], increment[0])
    assert close(whole[(2,)], increment[1])
    assert close(whole[(1, 1)], increment[0] ** 2 / 2)
    assert close(whole[(2, 2)], increment[1] ** 2 / 2)


def test_iis_one_dimensional_degeneracy():
    path = [0.0, 0.3, -0.4, 1.1]
    asg, cat = make_iis_assignment(path, level=4)
    sig = lift(asg, Interval(0, 3), cat)
    delta = 1.1
    for j in range(5):
        assert close(sig[(1,) * j], delta ** j / math.factorial(j))


def test_iis_needs_two_points():
    with pytest.raises(ValidationError):
        make_iis_assignment([1.0], level=2)
    with pytest.raises(DimensionMismatch):
        make_iis_assignment([[0.0, 1.0], [1.0]], level=2)


def test_ssm_scalar_telescoping():
    a = 0.7
    series = [0.0, 0.4, -0.3, 1.2, 0.9]
    asg, cat = make_ssm_assignment(series, SSMParams([[[a]]]))
    result = lift(asg, Interval(0, 4), cat)
    assert_allclose(result, [[math.exp(a * 0.9)]], rtol=1e-12)


def test_ssm_commuting_coefficients(rng):
    params = SSMParams([np.diag([0.1, -0.2]), np.diag([0.3, 0.05]), np.diag([-0.1, 0.2])])
    path = rng.normal(size=(30, 3))
    asg, cat = make_ssm_assignment(path, params)
    expected = scipy.linalg.expm(sum(a * d for a, d in zip(params.A, path[-1] - path[0])))
    assert_allclose(lift(asg, Interval(0, 29), cat), expected, rtol=1e-9, atol=1e-12)


def test_ssm_constant_series_gives_identity():
    params = SSMParams.antisymmetric(3, 2)
    asg, cat = make_ssm_assignment([[1.0, 2.0]] * 5, params)
    assert_allclose(lift(asg, Interval(0, 4), cat), np.eye(3), atol=1e-15)


def test_ssm_order_follows_the_series():
    params = SSMParams([np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0, 0.0], [1.0, 0.0]])])
    path = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    asg, cat = make_ssm_assignment(path, params)
    first, second = asg.cells
    assert_allclose(lift(asg, Interval(0, 2), cat), second @ first)
    assert not np.allclose(second @ first, first @ second)


def test_ssm_shape_checks():
    with pytest.raises(DimensionMismatch):
        make_ssm_assignment(np.zeros((4, 3)), SSMParams.antisymmetric(2, 2))
    with pytest.raises(ValidationError):
        make_ssm_assignment([1.0], SSMParams.antisymmetric(2, 1))
    with pytest.raises(DimensionMismatch):
        SSMParams([np.eye(2), np.eye(3)])


def test_antisymmetric_defaults():
    params = SSMParams.antisymmetric(2, 3, scale=0.1)
    assert params.state_dim == 2 and params.input_dim == 3
    for a in params.A:
        assert_allclose(a, -a.T)


def test_mat_scalar_case():
    series = [2.0, 3.0, 0.5]
    asg, cat = make_mat_assignment(series, DimProfile([1, 1, 1, 1]))
    assert_allclose(lift(asg, Interval(0, 3), cat), [[3.0]])


def test_mat_varying_dims(rng):
    templates = {(3, 2): rng.normal(size=(3, 2)), (2, 3): rng.normal(size=(2, 3))}
    asg, cat = make_mat_assignment([1.5, -0.5], DimProfile([2, 3, 2], templates))
    assert validate_assignment(asg, cat) == []
    result = lift(asg, Interval(0, 2), cat)
    assert result.shape == (2, 2)
    assert_allclose(result, (-0.5 * templates[(2, 3)]) @ (1.5 * templates[(3, 2)]))


def test_mat_tropical_fold():
    series = [1.0, 4.0, -2.0, 0.5]
    asg, cat = make_mat_assignment(series, DimProfile([2] * 5), TROPICAL)
    expected = asg.cells[0]
    for cell in asg.cells[1:]:
        expected = mat_mul(cell, expected, TROPICAL)
    assert_array_equal(lift(asg, Interval(0, 4), cat), expected)


def test_mat_is_not_commutative():
    cat = MatrixCategory()
    a = np.array([[1.0, 2.0], [0.0, 1.0]])
    b = np.array([[0.0, 1.0], [3.0, 0.0]])
    forward = IntervalAssignment((a, b), (2, 2, 2))
    backward = IntervalAssignment((b, a), (2, 2, 2))
    assert not cat.equal(lift(forward, Interval(0, 2), cat), lift(backward, Interval(0, 2), cat))


def test_mat_dims_length():
    with pytest.raises(DimensionMismatch):
        make_mat_assignment([1.0, 2.0], DimProfile([1, 1]))
    with pytest.raises(ValidationError):
        DimProfile([1, 0])


def test_mat_template_shape_mismatch():
    profile = DimProfile([2, 2], {(2, 2): np.ones((3, 3))})
    with pytest.raises(DimensionMismatch, match="at cell 0"):
        make_mat_assignment([1.0], profile, REAL)


def _float_instances(rng, n):
    dims = [int(d) for d in rng.integers(1, 4, size=n + 1)]
    return [
        make_ssm_assignment(rng.normal(size=(n + 1, 3)), SSMParams.antisymmetric(2, 3)),
        make_iss_assignment((0.1 * rng.normal(size=n)).tolist(), 3),
        make_iis_assignment((0.1 * rng.normal(size=(n + 1, 2))).tolist(), 3),
        make_mat_assignment(rng.normal(size=n).tolist(), DimProfile([2] * (n + 1)), REAL),
        make_mat_assignment(
            [float(x) for x in rng.integers(-9, 10, size=n)], DimProfile(dims), TROPICAL
        ),
    ]


def test_lifts_compose_across_any_split(rng):
    n = 40
    for asg, cat in _float_instances(rng, n):
        loose = cat.with_tolerance(1e-9, 1e-10)
        for _ in range(200):
            m, k, hi = sorted(int(v) for v in rng.integers(0, n + 1, size=3))
            assert functor_law_check(asg, [k], loose, Interval(m, hi)), (cat.name, m, k, hi)


def test_tropical_template_rejects_minus_infinity():
    profile = DimProfile([2, 2], {(2, 2): np.array([[0.0, -np.inf], [1.0, 2.0]])})
    with pytest.raises(ValidationError, match=r"entry \(0, 1\).*at cell 0"):
        make_mat_assignment([1.0], profile, TROPICAL)


@pytest.mark.parametrize("bad", [float("nan"), -math.inf])
def test_tropical_series_rejects_non_elements(bad):
    with pytest.raises(ValidationError, match="at cell 1"):
        make_mat_assignment([1.0, bad], DimProfile([2, 2, 2]), TROPICAL)


def test_tropical_accepts_its_zero():
    asg, cat = make_mat_assignment([math.inf, 1.0], DimProfile([2, 2, 2]), TROPICAL)
    result = lift(asg, Interval(0, 2), cat)
    assert np.all(np.isposinf(result))
    assert not np.any(np.isnan(result))


def test_tropical_default_template_is_the_semiring_one():
    asg, _ = make_mat_assignment([2.5, -1.0], DimProfile([2, 3, 1]), TROPICAL)
    assert_array_equal(asg.cells[0], np.full((3, 2), 2.5))
    assert_array_equal(asg.cells[1], np.full((1, 3), -1.0))


def test_real_template_rejects_infinity():
    profile = DimProfile([1, 1], {(1, 1): np.array([[np.inf]])})
    with pytest.raises(ValidationError, match="real semiring"):
        make_mat_assignment([2.0], profile, REAL)
