"""
Crossed modules, the double category they deloop to, grids of 2-cells and
the free double-functor lift over rectangles.

A 2-cell is a square with four G-valued edges and an H-valued face obeying
the boundary law

    feedback(face) · west · north == south · east

Horizontal composition glues along a vertical edge (left.east == right.west),
vertical composition along a horizontal edge (lower.north == upper.south).
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from category import Category
from utils.errors import BoundaryMismatch, DimensionMismatch, OutOfRange, ValidationError
from utils.logging_utils import get_logger

logger = get_logger(__name__)

CHECK_TOLERANCE = 1e-8


class CrossedModule(ABC):
    """
    A crossed module of groups (feedback: H -> G, action of G on H).

    Products are written left to right in each group, and the feedback must
    satisfy feedback(h · h') == feedback(h) · feedback(h').
    """
    name: str = "crossed-module"
    tol: float = 1e-9

    @abstractmethod
    def g_mul(self, a: Any, b: Any) -> Any:
        ...

    @abstractmethod
    def g_inv(self, a: Any) -> Any:
        ...

    @abstractmethod
    def g_unit(self) -> Any:
        ...

    @abstractmethod
    def h_mul(self, a: Any, b: Any) -> Any:
        ...

    @abstractmethod
    def h_inv(self, a: Any) -> Any:
        ...

    @abstractmethod
    def h_unit(self) -> Any:
        ...

    @abstractmethod
    def feedback(self, h: Any) -> Any:
        ...

    @abstractmethod
    def act(self, g: Any, h: Any) -> Any:
        ...

    @abstractmethod
    def g_distance(self, a: Any, b: Any) -> float:
        ...

    @abstractmethod
    def h_distance(self, a: Any, b: Any) -> float:
        ...

    @abstractmethod
    def sample_g(self, rng: np.random.Generator) -> Any:
        ...

    @abstractmethod
    def sample_h(self, rng: np.random.Generator) -> Any:
        ...

    def g_equal(self, a: Any, b: Any) -> bool:
        return self.g_distance(a, b) <= self.tol

    def h_equal(self, a: Any, b: Any) -> bool:
        return self.h_distance(a, b) <= self.tol

    def g_conj(self, g: Any, x: Any) -> Any:
        """g x g^-1"""
        return self.g_mul(self.g_mul(g, x), self.g_inv(g))

    def h_conj(self, h: Any, y: Any) -> Any:
        """h y h^-1"""
        return self.h_mul(self.h_mul(h, y), self.h_inv(h))


@dataclass(frozen=True, eq=False)
class TwoCell:
    """A square: four boundary edges in G and a face in H."""
    south: Any
    east: Any
    north: Any
    west: Any
    face: Any


def boundary_violation(cell: TwoCell, xm: CrossedModule) -> float:
    """Distance between feedback(face)·west·north and south·east."""
    lhs = xm.g_mul(xm.g_mul(xm.feedback(cell.face), cell.west), cell.north)
    rhs = xm.g_mul(cell.south, cell.east)
    return xm.g_distance(lhs, rhs)


def identity_v(edge: Any, xm: CrossedModule) -> TwoCell:
    """The vertical identity on a horizontal 1-cell: a square of height zero."""
    unit = xm.g_unit()
    return TwoCell(south=edge, east=unit, north=edge, west=unit, face=xm.h_unit())


def identity_h(edge: Any, xm: CrossedModule) -> TwoCell:
    """The horizontal identity on a vertical 1-cell: a square of width zero."""
    unit = xm.g_unit()
    return TwoCell(south=unit, east=edge, north=unit, west=edge, face=xm.h_unit())


def compose_h(a: TwoCell, b: TwoCell, xm: CrossedModule) -> TwoCell:
    """Place b to the right of a; the face is act(a.south, b.face) · a.face."""
    if not xm.g_equal(a.east, b.west):
        raise BoundaryMismatch(
            f"east edge of the left cell differs from the west edge of the right cell "
            f"by {xm.g_distance(a.east, b.west):.3e}"
        )
    return TwoCell(
        south=xm.g_mul(a.south, b.south),
        east=b.east,
        north=xm.g_mul(a.north, b.north),
        west=a.west,
        face=xm.h_mul(xm.act(a.south, b.face), a.face),
    )


def compose_v(a: TwoCell, b: TwoCell, xm: CrossedModule) -> TwoCell:
    """Place b on top of a; the face is a.face · act(a.west, b.face)."""
    if not xm.g_equal(a.north, b.south):
        raise BoundaryMismatch(
            f"north edge of the lower cell differs from the south edge of the upper cell "
            f"by {xm.g_distance(a.north, b.south):.3e}"
        )
    return TwoCell(
        south=a.south,
        east=xm.g_mul(a.east, b.east),
        north=b.north,
        west=xm.g_mul(a.west, b.west),
        face=xm.h_mul(a.face, xm.act(a.west, b.face)),
    )


def two_cell_distance(a: TwoCell, b: TwoCell, xm: CrossedModule) -> float:
    return max(
        xm.g_distance(a.south, b.south),
        xm.g_distance(a.east, b.east),
        xm.g_distance(a.north, b.north),
        xm.g_distance(a.west, b.west),
        xm.h_distance(a.face, b.face),
    )


class HorizontalFaceCategory(Category):
    """2-cells under horizontal composition; objects are vertical 1-cells."""

    def __init__(self, xm: CrossedModule, tol: float = CHECK_TOLERANCE):
        self.xm = xm
        self.tol = tol
        self.name = f"{xm.name}-horizontal"

    def src(self, morphism: TwoCell) -> Any:
        return morphism.west

    def tgt(self, morphism: TwoCell) -> Any:
        return morphism.east

    def identity(self, obj: Any) -> TwoCell:
        return identity_h(obj, self.xm)

    def compose(self, f: TwoCell, g: TwoCell) -> TwoCell:
        return compose_h(f, g, self.xm)

    def equal(self, f: TwoCell, g: TwoCell) -> bool:
        return two_cell_distance(f, g, self.xm) <= self.tol

    def same_object(self, a: Any, b: Any) -> bool:
        return self.xm.g_equal(a, b)


class VerticalFaceCategory(HorizontalFaceCategory):
    """2-cells under vertical composition; objects are horizontal 1-cells."""

    def __init__(self, xm: CrossedModule, tol: float = CHECK_TOLERANCE):
        super().__init__(xm, tol)
        self.name = f"{xm.name}-vertical"

    def src(self, morphism: TwoCell) -> Any:
        return morphism.south

    def tgt(self, morphism: TwoCell) -> Any:
        return morphism.north

    def identity(self, obj: Any) -> TwoCell:
        return identity_v(obj, self.xm)

    def compose(self, f: TwoCell, g: TwoCell) -> TwoCell:
        return compose_v(f, g, self.xm)


@dataclass(frozen=True)
class Rect:
    """The rectangle [s1, t1] × [s2, t2]; the first axis is horizontal."""
    s1: int
    t1: int
    s2: int
    t2: int

    def __post_init__(self):
        if self.s1 > self.t1 or self.s2 > self.t2:
            raise OutOfRange(f"rectangle {self} has a negative side")

    @property
    def width(self) -> int:
        return self.t1 - self.s1

    @property
    def height(self) -> int:
        return self.t2 - self.s2


@dataclass(frozen=True)
class TwoCellGridAssignment:
    """
    Values on the elementary cells of the m × n grid:

    * hcells[i][j] on the horizontal edge [i, i+1] × {j}   (m × (n+1))
    * vcells[i][j] on the vertical edge {i} × [j, j+1]     ((m+1) × n)
    * faces[i][j]  on the square [i, i+1] × [j, j+1]        (m × n)
    """
    m: int
    n: int
    hcells: Sequence[Sequence[Any]]
    vcells: Sequence[Sequence[Any]]
    faces: Sequence[Sequence[Any]]

    def __post_init__(self):
        expected = {
            "hcells": (self.m, self.n + 1),
            "vcells": (self.m + 1, self.n),
            "faces": (self.m, self.n),
        }
        for name, (rows, cols) in expected.items():
            table = getattr(self, name)
            if len(table) != rows or any(len(row) != cols for row in table):
                got = (len(table), len(table[0]) if len(table) else 0)
                raise DimensionMismatch((rows, cols), got, index=name)

    def cell(self, i: int, j: int) -> TwoCell:
        return TwoCell(
            south=self.hcells[i][j],
            east=self.vcells[i + 1][j],
            north=self.hcells[i][j + 1],
            west=self.vcells[i][j],
            face=self.faces[i][j],
        )

    def h_edge(self, j: int, s1: int, t1: int, xm: CrossedModule) -> Any:
        """Lifted horizontal 1-cell [s1, t1] × {j}."""
        edges = [self.hcells[i][j] for i in range(s1, t1)]
        return reduce(xm.g_mul, edges) if edges else xm.g_unit()

    def v_edge(self, i: int, s2: int, t2: int, xm: CrossedModule) -> Any:
        """Lifted vertical 1-cell {i} × [s2, t2]."""
        edges = [self.vcells[i][j] for j in range(s2, t2)]
        return reduce(xm.g_mul, edges) if edges else xm.g_unit()


def validate_grid(
    grid: TwoCellGridAssignment, xm: CrossedModule, tol: float = CHECK_TOLERANCE
) -> List[Tuple[int, int]]:
    """Cells (i, j) whose face violates the boundary law beyond `tol`."""
    return [
        (i, j)
        for i in range(grid.m)
        for j in range(grid.n)
        if boundary_violation(grid.cell(i, j), xm) > tol
    ]


def random_grid(
    xm: CrossedModule, m: int, n: int, rng: np.random.Generator
) -> TwoCellGridAssignment:
    """
    A boundary-consistent random grid: horizontal edges, the western column of
    vertical edges and all faces are sampled, and every other vertical edge is
    solved from the boundary law, east = south^-1 · feedback(face) · west · north.
    """
    hcells = [[xm.sample_g(rng) for _ in range(n + 1)] for _ in range(m)]
    faces = [[xm.sample_h(rng) for _ in range(n)] for _ in range(m)]
    vcells = [[xm.sample_g(rng) for _ in range(n)]]
    for i in range(m):
        column = []
        for j in range(n):
            south, north, west = hcells[i][j], hcells[i][j + 1], vcells[i][j]
            rest = xm.g_mul(xm.g_mul(xm.feedback(faces[i][j]), west), north)
            column.append(xm.g_mul(xm.g_inv(south), rest))
        vcells.append(column)
    return TwoCellGridAssignment(m, n, hcells, vcells, faces)


Chooser = Callable[[Rect], Tuple[str, int]]


def _leftmost(rng: Optional[np.random.Generator]) -> Chooser:
    def choose(r: Rect) -> Tuple[str, int]:
        if r.width > 1:
            return "h", r.s1 + 1
        return "v", r.s2 + 1
    return choose


def _midpoint(rng: Optional[np.random.Generator]) -> Chooser:
    def choose(r: Rect) -> Tuple[str, int]:
        if r.width >= r.height:
            return "h", r.s1 + r.width // 2
        return "v", r.s2 + r.height // 2
    return choose


def _random(rng: Optional[np.random.Generator]) -> Chooser:
    rng = rng or np.random.default_rng()

    def choose(r: Rect) -> Tuple[str, int]:
        axes = [axis for axis, size in (("h", r.width), ("v", r.height)) if size > 1]
        axis = axes[int(rng.integers(len(axes)))]
        if axis == "h":
            return "h", int(rng.integers(r.s1 + 1, r.t1))
        return "v", int(rng.integers(r.s2 + 1, r.t2))
    return choose


SPLIT_STRATEGIES: Dict[str, Callable[[Optional[np.random.Generator]], Chooser]] = {
    "leftmost": _leftmost,
    "midpoint": _midpoint,
    "random": _random,
}


def free_lift(
    grid: TwoCellGridAssignment,
    rect: Rect,
    xm: CrossedModule,
    strategy: str = "leftmost",
    seed: Optional[int] = None,
) -> TwoCell:
    """
    Value of the unique double functor on `rect` extending the grid, computed by
    recursively cutting the rectangle in two and composing the halves.

    The result does not depend on where the cuts are made; `strategy` only
    changes the bracketing.

    Raises:
        OutOfRange: if the rectangle leaves the grid
        BoundaryMismatch: if neighbouring pieces disagree on a shared edge
    """
    if not (0 <= rect.s1 and rect.t1 <= grid.m and 0 <= rect.s2 and rect.t2 <= grid.n):
        raise OutOfRange(f"{rect} not inside the {grid.m}x{grid.n} grid")
    if strategy not in SPLIT_STRATEGIES:
        raise ValidationError(
            f"unknown split strategy {strategy!r}; expected one of {sorted(SPLIT_STRATEGIES)}"
        )
    rng = np.random.default_rng(seed) if strategy == "random" else None
    choose = SPLIT_STRATEGIES[strategy](rng)

    def lift_rect(r: Rect) -> TwoCell:
        if r.width == 0:
            return identity_h(grid.v_edge(r.s1, r.s2, r.t2, xm), xm)
        if r.height == 0:
            return identity_v(grid.h_edge(r.s2, r.s1, r.t1, xm), xm)
        if r.width == 1 and r.height == 1:
            return grid.cell(r.s1, r.s2)
        axis, cut = choose(r)
        if axis == "h":
            return compose_h(
                lift_rect(Rect(r.s1, cut, r.s2, r.t2)), lift_rect(Rect(cut, r.t1, r.s2, r.t2)), xm
            )
        return compose_v(
            lift_rect(Rect(r.s1, r.t1, r.s2, cut)), lift_rect(Rect(r.s1, r.t1, cut, r.t2)), xm
        )

    return lift_rect(rect)


def check_interchange(
    quad: Sequence[TwoCell], xm: CrossedModule, tol: float = CHECK_TOLERANCE
) -> bool:
    """
    quad = (alpha, beta, gamma, delta) laid out as

        gamma | delta
        ------+------
        alpha | beta

    True iff composing rows first agrees with composing columns first.
    """
    alpha, beta, gamma, delta = quad
    rows_first = compose_v(compose_h(alpha, beta, xm), compose_h(gamma, delta, xm), xm)
    columns_first = compose_h(compose_v(alpha, gamma, xm), compose_v(beta, delta, xm), xm)
    return two_cell_distance(rows_first, columns_first, xm) <= tol


@dataclass
class AxiomResult:
    name: str
    max_violation: float = 0.0
    count_failed: int = 0
    samples: int = 0

    def record(self, violation: float, tol: float) -> None:
        self.samples += 1
        if not np.isfinite(violation) or violation > tol:
            self.count_failed += 1
        if np.isnan(violation):
            violation = float("inf")
        self.max_violation = max(self.max_violation, float(violation))

    @property
    def passed(self) -> bool:
        return self.count_failed == 0


@dataclass
class CheckReport:
    """Maximum violation and failure count per axiom."""
    results: List[AxiomResult] = field(default_factory=list)

    def axiom(self, name: str) -> AxiomResult:
        for result in self.results:
            if result.name == name:
                return result
        result = AxiomResult(name)
        self.results.append(result)
        return result

    def extend(self, other: "CheckReport") -> "CheckReport":
        self.results.extend(other.results)
        return self

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)


def check_crossed_module(
    xm: CrossedModule, samples: int = 100, seed: int = 0, tol: float = CHECK_TOLERANCE
) -> CheckReport:
    """Evaluate the crossed-module axioms on `samples` random seeded tuples."""
    rng = np.random.default_rng(seed)
    report = CheckReport()
    for name in ("FEEDBACK_HOM", "ACTION_HOM", "ACTION_COMPOSE", "ACTION_UNIT", "EQUI", "PEIF"):
        report.axiom(name)

    for _ in range(samples):
        g1, g2 = xm.sample_g(rng), xm.sample_g(rng)
        h1, h2 = xm.sample_h(rng), xm.sample_h(rng)

        report.axiom("FEEDBACK_HOM").record(
            xm.g_distance(xm.feedback(xm.h_mul(h1, h2)), xm.g_mul(xm.feedback(h1), xm.feedback(h2))),
            tol,
        )
        report.axiom("ACTION_HOM").record(
            xm.h_distance(xm.act(g1, xm.h_mul(h1, h2)), xm.h_mul(xm.act(g1, h1), xm.act(g1, h2))),
            tol,
        )
        report.axiom("ACTION_COMPOSE").record(
            xm.h_distance(xm.act(xm.g_mul(g1, g2), h1), xm.act(g1, xm.act(g2, h1))), tol
        )
        report.axiom("ACTION_UNIT").record(xm.h_distance(xm.act(xm.g_unit(), h1), h1), tol)
        report.axiom("EQUI").record(
            xm.g_distance(xm.feedback(xm.act(g1, h1)), xm.g_conj(g1, xm.feedback(h1))), tol
        )
        report.axiom("PEIF").record(
            xm.h_distance(xm.act(xm.feedback(h1), h2), xm.h_conj(h1, h2)), tol
        )

    failed = [r.name for r in report.results if not r.passed]
    if failed:
        logger.warning(f"{xm.name}: axioms failed: {', '.join(failed)}")
    return report


def check_double_category(
    xm: CrossedModule, samples: int = 100, seed: int = 0, tol: float = CHECK_TOLERANCE
) -> CheckReport:
    """
    Boundary law of composites, associativity, unit laws and interchange of
    the delooping, sampled on random boundary-consistent 3 × 3 grids.
    """
    rng = np.random.default_rng(seed)
    report = CheckReport()
    for _ in range(samples):
        grid = random_grid(xm, 3, 3, rng)
        c = [[grid.cell(i, j) for j in range(3)] for i in range(3)]

        h01 = compose_h(c[0][0], c[1][0], xm)
        v01 = compose_v(c[0][0], c[0][1], xm)
        report.axiom("BOUNDARY_H").record(boundary_violation(h01, xm), tol)
        report.axiom("BOUNDARY_V").record(boundary_violation(v01, xm), tol)

        report.axiom("ASSOC_H").record(
            two_cell_distance(
                compose_h(h01, c[2][0], xm),
                compose_h(c[0][0], compose_h(c[1][0], c[2][0], xm), xm),
                xm,
            ),
            tol,
        )
        report.axiom("ASSOC_V").record(
            two_cell_distance(
                compose_v(v01, c[0][2], xm),
                compose_v(c[0][0], compose_v(c[0][1], c[0][2], xm), xm),
                xm,
            ),
            tol,
        )
        cell = c[1][1]
        report.axiom("UNIT_H").record(
            max(
                two_cell_distance(compose_h(cell, identity_h(cell.east, xm), xm), cell, xm),
                two_cell_distance(compose_h(identity_h(cell.west, xm), cell, xm), cell, xm),
            ),
            tol,
        )
        report.axiom("UNIT_V").record(
            max(
                two_cell_distance(compose_v(cell, identity_v(cell.north, xm), xm), cell, xm),
                two_cell_distance(compose_v(identity_v(cell.south, xm), cell, xm), cell, xm),
            ),
            tol,
        )
        quad = (c[0][0], c[1][0], c[0][1], c[1][1])
        rows_first = compose_v(compose_h(quad[0], quad[1], xm), compose_h(quad[2], quad[3], xm), xm)
        columns_first = compose_h(compose_v(quad[0], quad[2], xm), compose_v(quad[1], quad[3], xm), xm)
        report.axiom("INTERCHANGE").record(two_cell_distance(rows_first, columns_first, xm), tol)
    return report
