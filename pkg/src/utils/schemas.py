"""
Configuration models for aggregation runs.
"""
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, PrivateAttr, field_validator

# A matrix is either a path to a matrix literal file or an inline nested list
MatrixSource = Union[str, List[List[float]]]

Instance = Literal["sum", "max", "product", "ssm", "iss", "iis", "mat", "abelian2d", "glimage"]

ONE_PARAM_INSTANCES = ("sum", "max", "product", "ssm", "iss", "iis", "mat")
TWO_PARAM_INSTANCES = ("abelian2d", "glimage")


class Tolerance(BaseModel):
    """Comparison tolerances."""
    rel: float = Field(default=1e-9, gt=0, description="Relative tolerance for float equality")
    abs_: float = Field(default=1e-12, ge=0, alias="abs", description="Absolute floor")
    boundary: float = Field(
        default=1e-8, gt=0, description="Boundary-law and axiom-check tolerance"
    )

    model_config = {"populate_by_name": True, "extra": "forbid"}


class SSMSection(BaseModel):
    """Linear state-space model coefficients A_1..A_d."""
    A: Optional[List[MatrixSource]] = Field(
        default=None, description="Coefficient matrices; defaults to scaled antisymmetric ones"
    )
    state_dim: int = Field(default=2, gt=0, description="State size when A is defaulted")
    scale: float = Field(default=0.1, description="Scale of the default coefficients")

    model_config = {"extra": "forbid"}


class MatSection(BaseModel):
    """Object sizes and embedding templates for the matrix-category instance."""
    dims: List[int] = Field(
        default_factory=lambda: [1],
        min_length=1,
        description="Object size per grid point, repeated cyclically along the series",
    )
    templates: Dict[str, MatrixSource] = Field(
        default_factory=dict,
        description="Embedding matrices keyed 'rows x cols'; missing ones are filled with the semiring's one",
    )

    model_config = {"extra": "forbid"}

    @field_validator("dims")
    @classmethod
    def positive_dims(cls, value: List[int]) -> List[int]:
        if any(d < 1 for d in value):
            raise ValueError(f"object sizes must be positive, got {value}")
        return value

    @field_validator("templates")
    @classmethod
    def template_keys(cls, value: Dict[str, MatrixSource]) -> Dict[str, MatrixSource]:
        for key in value:
            parts = key.lower().split("x")
            if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
                raise ValueError(f"template key {key!r} is not of the form 'rows x cols'")
        return value


class ImageSection(BaseModel):
    """Overrides for the pixel-difference map; unset fields keep the defaults."""
    A: Optional[List[MatrixSource]] = Field(default=None, description="Three 2x2 matrices")
    Q: Optional[List[MatrixSource]] = Field(
        default=None, description="Three pairwise commuting 3x3 matrices"
    )
    s: Optional[List[float]] = Field(default=None, description="Three scalars")

    model_config = {"extra": "forbid"}


class CrossedModuleSection(BaseModel):
    """Crossed module examined by the `check` subcommand."""
    kind: Literal["gl", "abelian", "normal"] = Field(default="gl")
    n: int = Field(default=2, gt=0)
    p: int = Field(default=1, gt=0)
    q: int = Field(default=3, gt=0)
    size: int = Field(default=2, gt=0, description="Matrix size of the normal-subgroup module")
    subgroup: Literal["special", "general"] = Field(
        default="special", description="Normal subgroup of GL_size: SL_size or GL_size itself"
    )

    model_config = {"extra": "forbid"}


class RunConfig(BaseModel):
    """Main configuration of an aggregation run."""
    instance: Instance = Field(..., description="Aggregation instance")
    truncation: int = Field(
        default=4, ge=1, le=20, description="Truncation level for signature instances"
    )
    workers: Optional[int] = Field(default=None, ge=1, description="Scan worker count")
    chunk_size: int = Field(
        default=64, ge=1, description="Cells per parallel scan chunk"
    )
    seed: int = Field(default=0, description="Seed for random sampling")
    tolerance: Tolerance = Field(default_factory=Tolerance)
    semiring: Literal["real", "tropical"] = Field(
        default="real", description="Scalar semiring of the matrix-category instance"
    )
    ssm: SSMSection = Field(default_factory=SSMSection)
    mat: MatSection = Field(default_factory=MatSection)
    image: ImageSection = Field(default_factory=ImageSection)
    crossed_module: CrossedModuleSection = Field(default_factory=CrossedModuleSection)
    abelian_op: Literal["sum", "max"] = Field(default="sum")

    model_config = {"validate_assignment": True, "extra": "forbid"}

    _base_dir: Path = PrivateAttr(default_factory=Path.cwd)

    @property
    def base_dir(self) -> Path:
        """Directory that relative matrix paths resolve against."""
        return self._base_dir

    def with_base_dir(self, base_dir: Path) -> "RunConfig":
        self._base_dir = Path(base_dir)
        return self

