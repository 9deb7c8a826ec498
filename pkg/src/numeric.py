"""
Dense matrix arithmetic over a pluggable semiring, plus the real matrix
exponential and inverse used by every matrix-valued instance.

Matrices are plain 2-D float64 numpy arrays; they are never mutated after
construction, so they can be shared freely between scan workers.
"""
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np
import scipy.linalg

from utils.errors import DimensionMismatch, NonFinite, NonSquare, Singular

DenseMatrix = np.ndarray

SINGULAR_THRESHOLD = 1e-12
REL_TOL = 1e-9
ABS_TOL = 1e-12


@dataclass(frozen=True)
class Semiring:
    """
    A scalar semiring given by its units and two numpy ufuncs.

    `add` must be associative and commutative with unit `zero`; `mul` must be
    associative with unit `one`, distribute over `add`, and be annihilated by
    `zero`.
    """
    name: str
    zero: float
    one: float
    add: np.ufunc
    mul: np.ufunc

    def identity(self, size: int) -> DenseMatrix:
        eye = np.full((size, size), self.zero, dtype=float)
        np.fill_diagonal(eye, self.one)
        return eye

    def scale(self, scalar: float, matrix: DenseMatrix) -> DenseMatrix:
        """Multiply every entry of `matrix` by `scalar` in this semiring."""
        return self.mul(scalar, np.asarray(matrix, dtype=float))

    def inadmissible(self, matrix: DenseMatrix) -> np.ndarray:
        """
        Mask of entries outside the semiring: NaN, and infinities other than
        `zero`. Over min-plus, -inf + (+inf) would turn into NaN.
        """
        matrix = np.asarray(matrix, dtype=float)
        return np.isnan(matrix) | (np.isinf(matrix) & (matrix != self.zero))


REAL = Semiring("real", zero=0.0, one=1.0, add=np.add, mul=np.multiply)

# min-plus: the additive unit is +inf (it absorbs under +), the multiplicative unit is 0
TROPICAL = Semiring("tropical", zero=np.inf, one=0.0, add=np.minimum, mul=np.add)

SEMIRINGS = {REAL.name: REAL, TROPICAL.name: TROPICAL}


def as_matrix(values: Any) -> DenseMatrix:
    """Coerce nested lists / scalars / arrays to a read-only 2-D float array."""
    matrix = np.array(values, dtype=float)
    if matrix.ndim == 0:
        matrix = matrix.reshape(1, 1)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise DimensionMismatch("a non-empty 2-D matrix", matrix.shape)
    matrix.setflags(write=False)
    return matrix


def mat_mul(a: DenseMatrix, b: DenseMatrix, sr: Semiring = REAL) -> DenseMatrix:
    """
    Semiring matrix product a ⊗ b with shape a.rows × b.cols.

    Raises:
        DimensionMismatch: if a.cols != b.rows
    """
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(a.shape[1], b.shape[0])
    if sr is REAL:
        return a @ b
    # c[i, j] = add_k mul(a[i, k], b[k, j])
    return sr.add.reduce(sr.mul(a[:, :, None], b[None, :, :]), axis=1)


def _require_square(a: DenseMatrix) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquare(a.shape)


def mat_exp(a: DenseMatrix) -> DenseMatrix:
    """Real matrix exponential (scaling and squaring with a Padé approximant)."""
    _require_square(a)
    if not np.all(np.isfinite(a)):
        raise NonFinite()
    return scipy.linalg.expm(a)


def mat_inv(a: DenseMatrix) -> DenseMatrix:
    """
    Real matrix inverse through a partially pivoted LU factorization.

    Raises:
        Singular: if a pivot falls below 1e-12 times the largest entry
    """
    _require_square(a)
    if not np.all(np.isfinite(a)):
        raise NonFinite()
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    threshold = SINGULAR_THRESHOLD * scale
    if scale == 0.0:
        raise Singular(0.0, threshold)

    lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    smallest = int(np.argmin(pivots))
    if pivots[smallest] < threshold:
        raise Singular(float(pivots[smallest]), threshold, index=smallest)
    return scipy.linalg.lu_solve((lu, piv), np.eye(a.shape[0]), check_finite=False)


def allclose(a: Any, b: Any, rel: float = REL_TOL, abs_tol: float = ABS_TOL) -> bool:
    """Default float comparison: relative tolerance with an absolute floor.

    Infinite entries compare equal when they carry the same sign.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return False
    return bool(np.allclose(a, b, rtol=rel, atol=abs_tol))


def max_deviation(a: Any, b: Any) -> float:
    """Largest entrywise difference, used by the axiom reports."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return float("inf")
    both_inf = np.isinf(a) & np.isinf(b) & (np.sign(a) == np.sign(b))
    diff = np.where(both_inf, 0.0, np.abs(a - b))
    return float(np.max(diff)) if diff.size else 0.0


def sample_semiring_laws(sr: Semiring, scalars: Any, check: Callable[[Any, Any], bool]) -> bool:
    """Check the semiring axioms on every triple of the sampled scalars."""
    zero, one, add, mul = sr.zero, sr.one, sr.add, sr.mul
    for x in scalars:
        if not (check(add(x, zero), x) and check(mul(x, one), x) and check(mul(one, x), x)):
            return False
        if not (check(mul(x, zero), zero) and check(mul(zero, x), zero)):
            return False
        for y in scalars:
            if not check(add(x, y), add(y, x)):
                return False
            for z in scalars:
                if not check(add(add(x, y), z), add(x, add(y, z))):
                    return False
                if not check(mul(mul(x, y), z), mul(x, mul(y, z))):
                    return False
                if not check(mul(x, add(y, z)), add(mul(x, y), mul(x, z))):
                    return False
    return True
