"""
Concrete crossed modules and the grid constructors built on them.

* AbelianCrossedModule: A -> 1 for (R, +) and the (R ∪ {-inf}, max) monoid.
* NormalSubgroupCrossedModule: SL_e (or GL_e itself) inside GL_e, acted on by conjugation.
* GLCrossedModule: the general linear crossed module GL^{n,p,q}.
* image_grid_assignment: RGB pixels to a GL^{2,1,3} grid, edges from eta and
  faces solved from their boundary.
"""
import math
from dataclasses import dataclass, field
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from category import UNIT
from double_category import CrossedModule, TwoCellGridAssignment
from numeric import DenseMatrix, as_matrix, mat_exp, mat_inv, max_deviation
from utils.errors import (
    DimensionMismatch,
    NonFinite,
    NotInFeedbackImage,
    ValidationError,
)
from utils.logging_utils import get_logger

logger = get_logger(__name__)

FACE_TOLERANCE = 1e-8
P_AGREEMENT_TOLERANCE = 1e-9
COMMUTE_TOLERANCE = 1e-10


class AbelianCrossedModule(CrossedModule):
    """
    The crossed module A -> 1: G is trivial and every face is a scalar.

    `op="sum"` is the group (R, +); `op="max"` is the monoid (R ∪ {-inf}, max),
    which has no inverses and is only ever composed, never inverted.
    """
    OPS = ("sum", "max")

    def __init__(self, op: str = "sum"):
        if op not in self.OPS:
            raise ValidationError(f"unknown abelian operation {op!r}; expected one of {self.OPS}")
        self.op = op
        self.name = f"abelian-{op}"

    def g_mul(self, a: Any, b: Any) -> str:
        return UNIT

    def g_inv(self, a: Any) -> str:
        return UNIT

    def g_unit(self) -> str:
        return UNIT

    def h_mul(self, a: Any, b: Any) -> Any:
        return a + b if self.op == "sum" else max(a, b)

    def h_inv(self, a: Any) -> Any:
        if self.op == "max":
            raise ValidationError("the max monoid has no inverses")
        return -a

    def h_unit(self) -> Any:
        return 0 if self.op == "sum" else -math.inf

    def h_conj(self, h: Any, y: Any) -> Any:
        return y

    def feedback(self, h: Any) -> str:
        return UNIT

    def act(self, g: Any, h: Any) -> Any:
        return h

    def g_distance(self, a: Any, b: Any) -> float:
        return 0.0 if a == b else math.inf

    def h_distance(self, a: Any, b: Any) -> float:
        if a == b:
            return 0.0
        return abs(a - b)

    def sample_g(self, rng: np.random.Generator) -> str:
        return UNIT

    def sample_h(self, rng: np.random.Generator) -> int:
        return int(rng.integers(-10, 11))


class NormalSubgroupCrossedModule(CrossedModule):
    """
    A normal subgroup N of G = GL_e(R): the feedback is the inclusion N -> G
    and G acts on N by conjugation, act(g, h) = g h g^-1.

    `subgroup="special"` is SL_e (determinant one); `subgroup="general"` is
    N = G, the identity crossed module.
    """
    SUBGROUPS = ("special", "general")

    def __init__(self, size: int = 2, subgroup: str = "special", tol: float = 1e-9):
        if size < 1:
            raise ValidationError(f"matrix size must be positive, got {size}")
        if subgroup not in self.SUBGROUPS:
            raise ValidationError(f"unknown subgroup {subgroup!r}; expected one of {self.SUBGROUPS}")
        self.size = size
        self.subgroup = subgroup
        self.tol = tol
        self.name = f"{'sl' if subgroup == 'special' else 'gl'}{size}-in-gl{size}"

    def g_mul(self, a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
        return a @ b

    def g_inv(self, a: DenseMatrix) -> DenseMatrix:
        return mat_inv(a)

    def g_unit(self) -> DenseMatrix:
        return np.eye(self.size)

    def h_mul(self, a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
        return a @ b

    def h_inv(self, a: DenseMatrix) -> DenseMatrix:
        return mat_inv(a)

    def h_unit(self) -> DenseMatrix:
        return np.eye(self.size)

    def feedback(self, h: DenseMatrix) -> DenseMatrix:
        return h

    def act(self, g: DenseMatrix, h: DenseMatrix) -> DenseMatrix:
        return g @ h @ mat_inv(g)

    def g_distance(self, a: DenseMatrix, b: DenseMatrix) -> float:
        return max_deviation(a, b)

    def h_distance(self, a: DenseMatrix, b: DenseMatrix) -> float:
        return max_deviation(a, b)

    def g_equal(self, a: DenseMatrix, b: DenseMatrix) -> bool:
        scale = max(1.0, float(np.max(np.abs(a))))
        return self.g_distance(a, b) <= self.tol * scale

    def contains(self, h: DenseMatrix) -> bool:
        """True iff `h` is an element of N."""
        h = np.asarray(h, dtype=float)
        if h.shape != (self.size, self.size) or not np.all(np.isfinite(h)):
            return False
        det = float(np.linalg.det(h))
        if self.subgroup == "special":
            return abs(det - 1.0) <= self.tol * max(1.0, float(np.max(np.abs(h))) ** self.size)
        return det != 0.0

    def sample_g(self, rng: np.random.Generator) -> DenseMatrix:
        return _conditioned(rng, self.size)

    def sample_h(self, rng: np.random.Generator) -> DenseMatrix:
        h = _conditioned(rng, self.size)
        if self.subgroup == "special":
            # diagonally dominant with a positive diagonal, so det(h) > 0
            h = h / np.linalg.det(h) ** (1.0 / self.size)
        return h


def abelian_grid_assignment(values: Any, op: str = "sum") -> Tuple[TwoCellGridAssignment, AbelianCrossedModule]:
    """Trivial edges, faces[i][j] = values[i][j]."""
    table = [list(row) for row in values]
    m = len(table)
    n = len(table[0]) if m else 0
    for i, row in enumerate(table):
        if len(row) != n:
            raise DimensionMismatch(n, len(row), index=i)
    hcells = [[UNIT] * (n + 1) for _ in range(m)]
    vcells = [[UNIT] * n for _ in range(m + 1)]
    return TwoCellGridAssignment(m, n, hcells, vcells, table), AbelianCrossedModule(op)


class GLDims(NamedTuple):
    n: int
    p: int
    q: int


@dataclass(frozen=True, eq=False)
class GLGroupElement:
    """U = [[P, 0], [R, S]] of size n+p and V = [[P, B], [0, D]] of size n+q."""
    U: DenseMatrix
    V: DenseMatrix


@dataclass(frozen=True, eq=False)
class GLHElement:
    """The (n+p) × (n+q) block [[P - I, B], [R, N]]."""
    block: DenseMatrix


def _split(h: GLHElement, dims: GLDims) -> Tuple[DenseMatrix, DenseMatrix, DenseMatrix, DenseMatrix]:
    n = dims.n
    if h.block.shape != (dims.n + dims.p, dims.n + dims.q):
        raise DimensionMismatch((dims.n + dims.p, dims.n + dims.q), h.block.shape)
    block = h.block
    return block[:n, :n] + np.eye(n), block[:n, n:], block[n:, :n], block[n:, n:]


def _assemble(P: DenseMatrix, B: DenseMatrix, R: DenseMatrix, N: DenseMatrix) -> GLHElement:
    return GLHElement(np.block([[P - np.eye(P.shape[0]), B], [R, N]]))


def gl_h_mul(h1: GLHElement, h2: GLHElement, dims: GLDims) -> GLHElement:
    """[[P'P - I, P'B + B'], [R'P + R, R'B + N + N']] with h2 = (P', B', R', N')."""
    P, B, R, N = _split(h1, dims)
    P2, B2, R2, N2 = _split(h2, dims)
    return _assemble(P2 @ P, P2 @ B + B2, R2 @ P + R, R2 @ B + N + N2)


def gl_h_inv(h: GLHElement, dims: GLDims) -> GLHElement:
    """
    Raises:
        Singular: if P is not invertible
    """
    P, B, R, N = _split(h, dims)
    P_inv = mat_inv(P)
    return _assemble(P_inv, -P_inv @ B, -R @ P_inv, -N + R @ P_inv @ B)


def gl_feedback(h: GLHElement, dims: GLDims) -> GLGroupElement:
    P, B, R, _ = _split(h, dims)
    U = np.block([[P, np.zeros((dims.n, dims.p))], [R, np.eye(dims.p)]])
    V = np.block([[P, B], [np.zeros((dims.q, dims.n)), np.eye(dims.q)]])
    return GLGroupElement(U, V)


def gl_action(g: GLGroupElement, h: GLHElement, dims: GLDims) -> GLHElement:
    """U^-1 · h̃ · V on the raw rectangular block h̃ = [[P - I, B], [R, N]]."""
    _split(h, dims)
    return GLHElement(mat_inv(g.U) @ h.block @ g.V)


def gl_g_mul(a: GLGroupElement, b: GLGroupElement) -> GLGroupElement:
    """a then b: (U_b · U_a, V_b · V_a)."""
    return GLGroupElement(b.U @ a.U, b.V @ a.V)


def check_group_element(g: GLGroupElement, dims: GLDims, tol: float = P_AGREEMENT_TOLERANCE) -> None:
    """
    Raises:
        DimensionMismatch: if U or V has the wrong size
        ValidationError: if the block shape or the shared P block is violated
    """
    n, p, q = dims
    if g.U.shape != (n + p, n + p):
        raise DimensionMismatch((n + p, n + p), g.U.shape)
    if g.V.shape != (n + q, n + q):
        raise DimensionMismatch((n + q, n + q), g.V.shape)
    if np.max(np.abs(g.U[:n, n:]), initial=0.0) > tol:
        raise ValidationError("U is not block lower triangular")
    if np.max(np.abs(g.V[n:, :n]), initial=0.0) > tol:
        raise ValidationError("V is not block upper triangular")
    if max_deviation(g.U[:n, :n], g.V[:n, :n]) > tol:
        raise ValidationError("U and V do not share their P block")


def _conditioned(rng: np.random.Generator, size: int) -> DenseMatrix:
    """Identity plus a small uniform perturbation: diagonally dominant, so invertible."""
    return np.eye(size) + rng.uniform(-1.0, 1.0, (size, size)) / (2 * size)


class GLCrossedModule(CrossedModule):
    """GL^{n,p,q}: pairs (U, V) sharing their P block, acting on rectangular blocks."""

    def __init__(self, n: int = 2, p: int = 1, q: int = 3, tol: float = 1e-9):
        if min(n, p, q) < 1:
            raise ValidationError(f"GL dimensions must be positive, got ({n}, {p}, {q})")
        self.dims = GLDims(n, p, q)
        self.tol = tol
        self.name = f"gl-{n}-{p}-{q}"

    def g_mul(self, a: GLGroupElement, b: GLGroupElement) -> GLGroupElement:
        return gl_g_mul(a, b)

    def g_inv(self, a: GLGroupElement) -> GLGroupElement:
        return GLGroupElement(mat_inv(a.U), mat_inv(a.V))

    def g_unit(self) -> GLGroupElement:
        n, p, q = self.dims
        return GLGroupElement(np.eye(n + p), np.eye(n + q))

    def h_mul(self, a: GLHElement, b: GLHElement) -> GLHElement:
        return gl_h_mul(a, b, self.dims)

    def h_inv(self, a: GLHElement) -> GLHElement:
        return gl_h_inv(a, self.dims)

    def h_unit(self) -> GLHElement:
        n, p, q = self.dims
        return GLHElement(np.zeros((n + p, n + q)))

    def feedback(self, h: GLHElement) -> GLGroupElement:
        return gl_feedback(h, self.dims)

    def act(self, g: GLGroupElement, h: GLHElement) -> GLHElement:
        return gl_action(g, h, self.dims)

    def g_distance(self, a: GLGroupElement, b: GLGroupElement) -> float:
        return max(max_deviation(a.U, b.U), max_deviation(a.V, b.V))

    def h_distance(self, a: GLHElement, b: GLHElement) -> float:
        return max_deviation(a.block, b.block)

    def g_equal(self, a: GLGroupElement, b: GLGroupElement) -> bool:
        scale = max(1.0, float(np.max(np.abs(a.U))), float(np.max(np.abs(a.V))))
        return self.g_distance(a, b) <= self.tol * scale

    def sample_g(self, rng: np.random.Generator) -> GLGroupElement:
        n, p, q = self.dims
        P = _conditioned(rng, n)
        R = rng.uniform(-1.0, 1.0, (p, n))
        B = rng.uniform(-1.0, 1.0, (n, q))
        U = np.block([[P, np.zeros((n, p))], [R, _conditioned(rng, p)]])
        V = np.block([[P, B], [np.zeros((q, n)), _conditioned(rng, q)]])
        return GLGroupElement(U, V)

    def sample_h(self, rng: np.random.Generator) -> GLHElement:
        n, p, q = self.dims
        P = _conditioned(rng, n)
        B = rng.uniform(-1.0, 1.0, (n, q))
        R = rng.uniform(-1.0, 1.0, (p, n))
        N = rng.uniform(-1.0, 1.0, (p, q))
        return _assemble(P, B, R, N)


IMAGE_DIMS = GLDims(2, 1, 3)


def _default_A() -> List[DenseMatrix]:
    return [
        0.1 * np.array([[0.0, 1.0], [-1.0, 0.0]]),
        0.1 * np.array([[0.0, 1.0], [0.0, 0.0]]),
        0.1 * np.array([[0.0, 0.0], [1.0, 0.0]]),
    ]


def _default_Q() -> List[DenseMatrix]:
    return [0.1 * np.diag(np.eye(3)[k]) for k in range(3)]


@dataclass
class ImageParams:
    """
    Coefficients of the pixel-difference map eta. The Q_k must commute
    pairwise, otherwise face boundaries leave the image of the feedback.
    """
    A: List[DenseMatrix] = field(default_factory=_default_A)
    Q: List[DenseMatrix] = field(default_factory=_default_Q)
    s: List[float] = field(default_factory=lambda: [0.1, 0.2, 0.3])

    def __post_init__(self):
        self.A = [as_matrix(a) for a in self.A]
        self.Q = [as_matrix(q) for q in self.Q]
        self.s = [float(x) for x in self.s]
        for name, mats, size in (("A", self.A, 2), ("Q", self.Q, 3)):
            if len(mats) != 3:
                raise DimensionMismatch(3, len(mats), index=name)
            for k, mat in enumerate(mats):
                if mat.shape != (size, size):
                    raise DimensionMismatch((size, size), mat.shape, index=f"{name}_{k + 1}")
        if len(self.s) != 3:
            raise DimensionMismatch(3, len(self.s), index="s")
        for a in range(3):
            for b in range(a + 1, 3):
                commutator = self.Q[a] @ self.Q[b] - self.Q[b] @ self.Q[a]
                if np.max(np.abs(commutator)) > COMMUTE_TOLERANCE:
                    raise ValidationError(f"Q_{a + 1} and Q_{b + 1} do not commute")


def image_edge_eta(z: Sequence[float], zbar: Sequence[float], params: ImageParams) -> GLGroupElement:
    """The GL^{2,1,3} element attached to the step from pixel zbar to pixel z."""
    dz = np.asarray(z, dtype=float) - np.asarray(zbar, dtype=float)
    if not np.all(np.isfinite(dz)):
        raise NonFinite("pixel difference")
    P = mat_exp(np.tensordot(dz, np.stack(params.A), axes=1))
    R = np.array([[math.sin(dz[0]), math.cos(dz[2])]])
    S = np.array([[math.exp(float(np.dot(params.s, dz)))]])
    B = np.array([[0.0, dz[0], 0.0], [dz[2], 0.0, dz[1]]])
    D = mat_exp(np.tensordot(dz, np.stack(params.Q), axes=1))
    U = np.block([[P, np.zeros((2, 1))], [R, S]])
    V = np.block([[P, B], [np.zeros((3, 2)), D]])
    return GLGroupElement(U, V)


def face_matrix_n(pixels: np.ndarray, i: int, j: int) -> DenseMatrix:
    """The free 1 × 3 block N of the face [i, i+1] × [j, j+1]."""
    top = pixels[i + 1, j + 1]
    first = float(np.sum((top - pixels[i, j]) ** 2))
    third = float(np.sum((top - pixels[i + 1, j]) * (top - pixels[i, j + 1])))
    return np.array([[first, 0.0, third]])


def _solve_face(
    xm: GLCrossedModule, cell: Tuple[int, int], south, east, north, west, tol: float
) -> Tuple[DenseMatrix, DenseMatrix, DenseMatrix]:
    """P, B, R of the face whose feedback equals south · east · north^-1 · west^-1."""
    n = xm.dims.n
    target = xm.g_mul(xm.g_mul(xm.g_mul(south, east), xm.g_inv(north)), xm.g_inv(west))
    deviation = max(
        max_deviation(target.U[n:, n:], np.eye(xm.dims.p)),
        max_deviation(target.V[n:, n:], np.eye(xm.dims.q)),
    )
    if deviation > tol:
        raise NotInFeedbackImage(cell, deviation)
    P_u, P_v = target.U[:n, :n], target.V[:n, :n]
    disagreement = max_deviation(P_u, P_v)
    if disagreement > P_AGREEMENT_TOLERANCE:
        raise NotInFeedbackImage(cell, disagreement)
    return (P_u + P_v) / 2, target.V[:n, n:], target.U[n:, :n]


def image_grid_assignment(
    image: Any,
    params: Optional[ImageParams] = None,
    tol: float = FACE_TOLERANCE,
    edge_tol: float = 1e-9,
) -> Tuple[TwoCellGridAssignment, GLCrossedModule]:
    """
    Build the GL^{2,1,3} grid of an m × n × 3 image: a grid of (m-1) × (n-1)
    faces whose edges come from eta on neighbouring pixels. `tol` bounds the
    face solve and `edge_tol` is the relative edge equality used when gluing.

    Raises:
        DimensionMismatch: if the image is not m × n × 3
        NotInFeedbackImage: if a face boundary has no preimage under the feedback
    """
    pixels = np.asarray(image, dtype=float)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise DimensionMismatch("an m x n x 3 image", pixels.shape)
    if pixels.shape[0] < 1 or pixels.shape[1] < 1:
        raise DimensionMismatch("at least one pixel", pixels.shape)
    params = params or ImageParams()
    xm = GLCrossedModule(*IMAGE_DIMS, tol=edge_tol)

    m, n = pixels.shape[0] - 1, pixels.shape[1] - 1
    hcells = [
        [image_edge_eta(pixels[i + 1, j], pixels[i, j], params) for j in range(n + 1)]
        for i in range(m)
    ]
    vcells = [
        [image_edge_eta(pixels[i, j + 1], pixels[i, j], params) for j in range(n)]
        for i in range(m + 1)
    ]
    faces = []
    for i in range(m):
        column = []
        for j in range(n):
            P, B, R = _solve_face(
                xm, (i, j), hcells[i][j], vcells[i + 1][j], hcells[i][j + 1], vcells[i][j], tol
            )
            column.append(_assemble(P, B, R, face_matrix_n(pixels, i, j)))
        faces.append(column)
    logger.debug(f"Built {m}x{n} image grid")
    return TwoCellGridAssignment(m, n, hcells, vcells, faces), xm
