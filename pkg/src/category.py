"""
Categories, the interval category INT, interval assignments and the free lift.

Composition is diagrammatic throughout: compose(f, g) means "f, then g".
Matrix categories therefore compute compose(f, g) as the product g·f.
"""
import math
import numbers
import operator
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Callable, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from numeric import REAL, REL_TOL, ABS_TOL, DenseMatrix, Semiring, allclose, mat_mul
from utils.errors import DimensionMismatch, EndpointMismatch, OutOfRange

UNIT = "*"


class Category(ABC):
    """
    A category given by its structure maps.

    Implementations must be pure: the scan engine calls `compose` from many
    worker threads at once.
    """
    name: str = "category"

    @abstractmethod
    def src(self, morphism: Any) -> Hashable:
        ...

    @abstractmethod
    def tgt(self, morphism: Any) -> Hashable:
        ...

    @abstractmethod
    def identity(self, obj: Any) -> Any:
        ...

    @abstractmethod
    def compose(self, f: Any, g: Any) -> Any:
        """f then g; requires tgt(f) == src(g)."""

    def equal(self, f: Any, g: Any) -> bool:
        """Instance-defined equality of morphisms (exact unless overridden)."""
        return f == g

    def same_object(self, a: Any, b: Any) -> bool:
        return a == b

    def with_tolerance(self, rel: float, abs_tol: float) -> "Category":
        """This category with float equality at the given tolerances; exact ones return self."""
        return self


class MonoidCategory(Category):
    """The delooping of a monoid: one object, morphisms are monoid elements."""

    def __init__(
        self,
        unit: Any,
        combine: Callable[[Any, Any], Any],
        name: str = "monoid",
        equal: Optional[Callable[[Any, Any], bool]] = None,
    ):
        self.unit = unit
        self.combine = combine
        self.name = name
        self._equal = equal

    def src(self, morphism: Any) -> str:
        return UNIT

    def tgt(self, morphism: Any) -> str:
        return UNIT

    def identity(self, obj: Any = UNIT) -> Any:
        return self.unit

    def compose(self, f: Any, g: Any) -> Any:
        return self.combine(f, g)

    def equal(self, f: Any, g: Any) -> bool:
        if self._equal is not None:
            return self._equal(f, g)
        return f == g

    def with_tolerance(self, rel: float, abs_tol: float) -> "MonoidCategory":
        if self._equal is None:
            return self
        return MonoidCategory(self.unit, self.combine, self.name, scalar_equal(rel, abs_tol))


def scalar_equal(rel: float = REL_TOL, abs_tol: float = ABS_TOL) -> Callable[[Any, Any], bool]:
    """Exact for ints, fractions and infinities, tolerance-based for floats."""
    def equal(f: Any, g: Any) -> bool:
        if isinstance(f, numbers.Rational) and isinstance(g, numbers.Rational):
            return f == g
        if math.isinf(f) or math.isinf(g):
            return f == g
        return math.isclose(f, g, rel_tol=rel, abs_tol=abs_tol)
    return equal


SUM = MonoidCategory(0, operator.add, name="sum", equal=scalar_equal())
MAX = MonoidCategory(-math.inf, max, name="max", equal=scalar_equal())
PRODUCT = MonoidCategory(1, operator.mul, name="product", equal=scalar_equal())


class GeneralLinearCategory(Category):
    """The delooping of GL_e(R); composition f then g is the matrix product g·f."""

    def __init__(self, size: int, rel: float = REL_TOL, abs_tol: float = ABS_TOL):
        self.size = size
        self.rel = rel
        self.abs_tol = abs_tol
        self.name = f"gl{size}"

    def src(self, morphism: DenseMatrix) -> str:
        return UNIT

    def tgt(self, morphism: DenseMatrix) -> str:
        return UNIT

    def identity(self, obj: Any = UNIT) -> DenseMatrix:
        return np.eye(self.size)

    def compose(self, f: DenseMatrix, g: DenseMatrix) -> DenseMatrix:
        return g @ f

    def equal(self, f: DenseMatrix, g: DenseMatrix) -> bool:
        return allclose(f, g, self.rel, self.abs_tol)

    def with_tolerance(self, rel: float, abs_tol: float) -> "GeneralLinearCategory":
        return GeneralLinearCategory(self.size, rel, abs_tol)


class MatrixCategory(Category):
    """
    MAT over a semiring: objects are natural numbers, hom(m, n) = S^{n×m}.

    A morphism's source is its column count and its target its row count.
    """

    def __init__(self, semiring: Semiring = REAL, rel: float = REL_TOL, abs_tol: float = ABS_TOL):
        self.semiring = semiring
        self.rel = rel
        self.abs_tol = abs_tol
        self.name = f"mat-{semiring.name}"

    def src(self, morphism: DenseMatrix) -> int:
        return int(morphism.shape[1])

    def tgt(self, morphism: DenseMatrix) -> int:
        return int(morphism.shape[0])

    def identity(self, obj: int) -> DenseMatrix:
        return self.semiring.identity(int(obj))

    def compose(self, f: DenseMatrix, g: DenseMatrix) -> DenseMatrix:
        return mat_mul(g, f, self.semiring)

    def equal(self, f: DenseMatrix, g: DenseMatrix) -> bool:
        return allclose(f, g, self.rel, self.abs_tol)

    def with_tolerance(self, rel: float, abs_tol: float) -> "MatrixCategory":
        return MatrixCategory(self.semiring, rel, abs_tol)


@dataclass(frozen=True, order=True)
class Interval:
    """A morphism [lo, hi] of INT."""
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise OutOfRange(f"interval [{self.lo},{self.hi}] has lo > hi")

    @property
    def length(self) -> int:
        return self.hi - self.lo

    def then(self, other: "Interval") -> "Interval":
        """Composition in INT: [l, m] then [m, n] is [l, n]."""
        if self.hi != other.lo:
            raise OutOfRange(f"[{self.lo},{self.hi}] and [{other.lo},{other.hi}] do not meet")
        return Interval(self.lo, other.hi)


@dataclass(frozen=True)
class IntervalAssignment:
    """
    One morphism per elementary interval [offset+k, offset+k+1], together with
    the object attached to every grid point.
    """
    cells: Tuple[Any, ...]
    objects: Tuple[Any, ...]
    offset: int = 0

    def __post_init__(self):
        if len(self.objects) != len(self.cells) + 1:
            raise DimensionMismatch(len(self.cells) + 1, len(self.objects))

    @classmethod
    def from_cells(
        cls, cells: Sequence[Any], cat: Category, offset: int = 0, start: Any = UNIT
    ) -> "IntervalAssignment":
        """Read the grid-point objects off the cells themselves."""
        cells = tuple(cells)
        if not cells:
            return cls((), (start,), offset)
        objects = [cat.src(cells[0])] + [cat.tgt(cell) for cell in cells]
        return cls(cells, tuple(objects), offset)

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def span(self) -> Interval:
        return Interval(self.offset, self.offset + len(self.cells))

    def restrict(self, iv: Interval) -> "IntervalAssignment":
        self.check_range(iv)
        lo, hi = iv.lo - self.offset, iv.hi - self.offset
        return IntervalAssignment(self.cells[lo:hi], self.objects[lo:hi + 1], iv.lo)

    def check_range(self, iv: Interval) -> None:
        if iv.lo < self.offset or iv.hi > self.offset + len(self.cells):
            raise OutOfRange(
                f"[{iv.lo},{iv.hi}] not inside [{self.offset},{self.offset + len(self.cells)}]"
            )


def validate_assignment(asg: IntervalAssignment, cat: Category) -> List[int]:
    """Indices k whose cell does not run from objects[k] to objects[k+1]."""
    bad = []
    for k, cell in enumerate(asg.cells):
        if not (
            cat.same_object(cat.src(cell), asg.objects[k])
            and cat.same_object(cat.tgt(cell), asg.objects[k + 1])
        ):
            bad.append(k)
    return bad


def require_valid(asg: IntervalAssignment, cat: Category) -> None:
    """Raise EndpointMismatch naming the first inconsistent cell."""
    bad = validate_assignment(asg, cat)
    if bad:
        k = bad[0]
        raise EndpointMismatch(
            asg.offset + k,
            f"cell does not run from object {asg.objects[k]!r} to {asg.objects[k + 1]!r}",
        )


def fold(cells: Sequence[Any], cat: Category) -> Any:
    """Left-to-right composite of a non-empty run of composable cells."""
    return reduce(cat.compose, cells)


def lift(asg: IntervalAssignment, iv: Interval, cat: Category) -> Any:
    """
    Value of the unique functor INT -> cat extending the assignment:
    the composite of the cells inside [lo, hi], or the identity at lo.

    Raises:
        OutOfRange: if the interval leaves the assignment's span
        EndpointMismatch: if the cells inside the interval are not composable
    """
    part = asg.restrict(iv)
    require_valid(part, cat)
    if not part.cells:
        return cat.identity(part.objects[0])
    return fold(part.cells, cat)


def functor_law_check(
    asg: IntervalAssignment,
    splits: Sequence[int],
    cat: Category,
    interval: Optional[Interval] = None,
) -> bool:
    """
    True iff composing the lifts of the pieces between consecutive split
    points equals the direct lift of the whole interval.
    """
    iv = interval or asg.span
    points = [iv.lo, *splits, iv.hi]
    if any(a > b for a, b in zip(points, points[1:])):
        raise OutOfRange(f"split points {list(splits)} are not sorted inside [{iv.lo},{iv.hi}]")
    pieces = [lift(asg, Interval(a, b), cat) for a, b in zip(points, points[1:])]
    return cat.equal(reduce(cat.compose, pieces), lift(asg, iv, cat))


@dataclass
class CountingCategory(Category):
    """Wraps a category and counts compositions (benchmark bookkeeping)."""
    inner: Category
    count: int = field(default=0)

    def __post_init__(self):
        self._lock = threading.Lock()
        self.name = self.inner.name

    def src(self, morphism: Any) -> Hashable:
        return self.inner.src(morphism)

    def tgt(self, morphism: Any) -> Hashable:
        return self.inner.tgt(morphism)

    def identity(self, obj: Any) -> Any:
        return self.inner.identity(obj)

    def compose(self, f: Any, g: Any) -> Any:
        with self._lock:
            self.count += 1
        return self.inner.compose(f, g)

    def equal(self, f: Any, g: Any) -> bool:
        return self.inner.equal(f, g)

    def same_object(self, a: Any, b: Any) -> bool:
        return self.inner.same_object(a, b)

