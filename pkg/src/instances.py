"""
Assignment constructors for the one-parameter aggregations: sum, max, the
product expansion, affine state-space models, iterated-sums and
iterated-integrals signatures, and multi-object matrix aggregation.

Each constructor returns an (IntervalAssignment, Category) pair.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from category import (
    MAX, PRODUCT, SUM, UNIT,
    Category, GeneralLinearCategory, IntervalAssignment, MatrixCategory,
)
from numeric import REAL, DenseMatrix, Semiring, as_matrix, mat_exp
from tensor_algebra import (
    INTEGRALS, MAX_FACTORIAL_LEVEL, SUMS,
    TensorAlgebraCategory, power_series_cell, tensor_exp,
)
from utils.errors import DimensionMismatch, ValidationError

Built = Tuple[IntervalAssignment, Category]

DEFAULT_TRUNCATION = 4


def _delooping(cells: Sequence[Any], cat: Category) -> Built:
    cells = tuple(cells)
    return IntervalAssignment(cells, (UNIT,) * (len(cells) + 1)), cat


def _as_path(series: Any) -> np.ndarray:
    """A d-dimensional series as a (T, d) float array."""
    path = np.asarray(series, dtype=float)
    if path.ndim == 1:
        path = path[:, None]
    if path.ndim != 2:
        raise DimensionMismatch("a (T, d) series", path.shape)
    return path


def make_sum_assignment(series: Sequence[Any]) -> Built:
    return _delooping(series, SUM)


def make_max_assignment(series: Sequence[Any]) -> Built:
    return _delooping(series, MAX)


def make_product_assignment(series: Sequence[Any]) -> Built:
    """Cells 1 + x_k, so the lift expands to 1 + sum over ordered subsets."""
    return _delooping([1 + x for x in series], PRODUCT)


def make_affine_assignment(series: Sequence[Any]) -> Built:
    """The scalar recursion y_{k+1} = y_k + x_k y_k with y_0 = 1; lift([0, n]) is y_n."""
    return make_product_assignment(series)


@dataclass
class SSMParams:
    """Coefficient matrices A_1..A_d of the linear controlled system."""
    A: List[DenseMatrix]

    def __post_init__(self):
        if not self.A:
            raise ValidationError("state-space model needs at least one A_k")
        self.A = [as_matrix(a) for a in self.A]
        size = self.A[0].shape[0]
        for k, a in enumerate(self.A):
            if a.shape != (size, size):
                raise DimensionMismatch((size, size), a.shape, index=k)

    @property
    def state_dim(self) -> int:
        return self.A[0].shape[0]

    @property
    def input_dim(self) -> int:
        return len(self.A)

    @classmethod
    def antisymmetric(cls, state_dim: int, input_dim: int, scale: float = 0.1) -> "SSMParams":
        """Default parameters: scaled elementary antisymmetric matrices E_ab - E_ba."""
        pairs = [(a, b) for a in range(state_dim) for b in range(a + 1, state_dim)] or [(0, 0)]
        mats = []
        for k in range(input_dim):
            a, b = pairs[k % len(pairs)]
            m = np.zeros((state_dim, state_dim))
            m[a, b] += scale
            m[b, a] -= scale
            mats.append(m)
        return cls(mats)


def make_ssm_assignment(series: Any, params: SSMParams) -> Built:
    """Cells exp(sum_j A_j (x_{k+1}^{(j)} - x_k^{(j)})) in the delooping of GL_e."""
    path = _as_path(series)
    if path.shape[0] < 2:
        raise ValidationError(f"state-space series needs at least 2 points, got {path.shape[0]}")
    if path.shape[1] != params.input_dim:
        raise DimensionMismatch(params.input_dim, path.shape[1])

    stacked = np.stack(params.A)
    increments = np.diff(path, axis=0)
    cells = [mat_exp(np.tensordot(dx, stacked, axes=1)) for dx in increments]
    return _delooping(cells, GeneralLinearCategory(params.state_dim))


def make_iss_assignment(series: Sequence[Any], level: int = DEFAULT_TRUNCATION) -> Built:
    """Iterated-sums signature cells sum_{n <= L} x_k^n [1^n]."""
    if level < 1:
        raise ValidationError(f"truncation level must be >= 1, got {level}")
    cells = [power_series_cell(x, level) for x in series]
    return _delooping(cells, TensorAlgebraCategory(level, SUMS, 1))


def make_iis_assignment(series: Any, level: int = DEFAULT_TRUNCATION) -> Built:
    """Iterated-integrals signature cells exp(x_{k+1} - x_k), truncated at L."""
    if level > MAX_FACTORIAL_LEVEL:
        raise ValidationError(f"truncation level {level} exceeds {MAX_FACTORIAL_LEVEL}")
    points = [list(row) if isinstance(row, (list, tuple, np.ndarray)) else [row] for row in series]
    if len(points) < 2:
        raise ValidationError(f"iterated-integrals series needs at least 2 points, got {len(points)}")
    dim = len(points[0])
    cells = []
    for k, (a, b) in enumerate(zip(points, points[1:])):
        if len(b) != dim:
            raise DimensionMismatch(dim, len(b), index=k + 1)
        cells.append(tensor_exp([y - x for x, y in zip(a, b)], level))
    return _delooping(cells, TensorAlgebraCategory(level, INTEGRALS, dim))


@dataclass
class DimProfile:
    """
    Object sizes n_i for every grid point and the embeddings
    phi_{n×m}(x) = x ⊗ E_{n×m} for stored templates E. A missing template is
    filled with the semiring one: all ones over the reals, all zeros under min-plus.
    """
    dims: List[int]
    templates: Dict[Tuple[int, int], DenseMatrix] = field(default_factory=dict)

    def __post_init__(self):
        if any(d < 1 for d in self.dims):
            raise ValidationError(f"object sizes must be positive, got {self.dims}")

    def template(self, rows: int, cols: int, sr: Semiring) -> DenseMatrix:
        found = self.templates.get((rows, cols))
        if found is None:
            return np.full((rows, cols), sr.one)
        return found

    def embed(self, x: float, rows: int, cols: int, sr: Semiring) -> DenseMatrix:
        cell = sr.scale(x, self.template(rows, cols, sr))
        if cell.shape != (rows, cols):
            raise DimensionMismatch((rows, cols), cell.shape)
        return cell


def make_mat_assignment(
    series: Sequence[float], profile: DimProfile, sr: Semiring = REAL
) -> Built:
    """MAT assignment with objects dims[i] and cells phi_{dims[i+1]×dims[i]}(x_i)."""
    dims = profile.dims
    if len(dims) != len(series) + 1:
        raise DimensionMismatch(len(series) + 1, len(dims))
    cells = []
    for i, x in enumerate(series):
        try:
            cell = profile.embed(x, dims[i + 1], dims[i], sr)
        except DimensionMismatch as err:
            raise DimensionMismatch(err.expected, err.got, index=i) from err
        bad = np.argwhere(sr.inadmissible(cell))
        if len(bad):
            r, c = (int(v) for v in bad[0])
            raise ValidationError(
                f"entry ({r}, {c}) = {cell[r, c]} is not an element of the {sr.name} semiring",
                index=i,
            )
        cells.append(cell)
    return IntervalAssignment(tuple(cells), tuple(dims)), MatrixCategory(sr)

