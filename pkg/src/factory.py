"""
Builds assignments, grids and crossed modules from a run configuration.
"""
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np

from category import Category, IntervalAssignment
from crossed_modules import (
    AbelianCrossedModule,
    GLCrossedModule,
    ImageParams,
    NormalSubgroupCrossedModule,
    abelian_grid_assignment,
    image_grid_assignment,
)
from double_category import CrossedModule, TwoCellGridAssignment
from instances import (
    DimProfile,
    SSMParams,
    make_iis_assignment,
    make_iss_assignment,
    make_mat_assignment,
    make_max_assignment,
    make_product_assignment,
    make_ssm_assignment,
    make_sum_assignment,
)
from numeric import SEMIRINGS
from utils.errors import DimensionMismatch, ValidationError
from utils.loaders import load_matrix
from utils.logging_utils import log_message
from utils.schemas import ONE_PARAM_INSTANCES, TWO_PARAM_INSTANCES, RunConfig

Built = Tuple[IntervalAssignment, Category]


def _scalars(series: Sequence[Any], instance: str) -> List[Any]:
    if any(isinstance(x, (list, tuple)) for x in series):
        raise DimensionMismatch(f"a scalar series for {instance}", "multi-column rows")
    return list(series)


def ssm_params(config: RunConfig, input_dim: int) -> SSMParams:
    """Configured coefficients, or the scaled antisymmetric default."""
    section = config.ssm
    if section.A is None:
        return SSMParams.antisymmetric(section.state_dim, input_dim, section.scale)
    return SSMParams([load_matrix(a, config.base_dir) for a in section.A])


def mat_profile(config: RunConfig, length: int) -> DimProfile:
    """Object sizes for `length` cells, repeating the configured pattern."""
    pattern = config.mat.dims
    dims = [pattern[i % len(pattern)] for i in range(length + 1)]
    templates = {}
    for key, source in config.mat.templates.items():
        rows, cols = (int(part) for part in key.lower().split("x"))
        templates[(rows, cols)] = load_matrix(source, config.base_dir)
    return DimProfile(dims, templates)


def image_params(config: RunConfig) -> ImageParams:
    section = config.image
    overrides: Dict[str, Any] = {}
    if section.A is not None:
        overrides["A"] = [load_matrix(a, config.base_dir) for a in section.A]
    if section.Q is not None:
        overrides["Q"] = [load_matrix(q, config.base_dir) for q in section.Q]
    if section.s is not None:
        overrides["s"] = section.s
    return ImageParams(**overrides)


def _build_ssm(config: RunConfig, series: Sequence[Any]) -> Built:
    path = np.asarray(series, dtype=float)
    input_dim = 1 if path.ndim == 1 else path.shape[1]
    return make_ssm_assignment(path, ssm_params(config, input_dim))


BUILDERS: Dict[str, Callable[[RunConfig, Sequence[Any]], Built]] = {
    "sum": lambda config, series: make_sum_assignment(_scalars(series, "sum")),
    "max": lambda config, series: make_max_assignment(_scalars(series, "max")),
    "product": lambda config, series: make_product_assignment(_scalars(series, "product")),
    "ssm": _build_ssm,
    "iss": lambda config, series: make_iss_assignment(_scalars(series, "iss"), config.truncation),
    "iis": lambda config, series: make_iis_assignment(series, config.truncation),
    "mat": lambda config, series: make_mat_assignment(
        _scalars(series, "mat"),
        mat_profile(config, len(series)),
        SEMIRINGS[config.semiring],
    ),
}


def build_assignment(config: RunConfig, series: Sequence[Any]) -> Built:
    """
    Raises:
        ValidationError: if the instance is not a one-parameter instance
    """
    if config.instance not in ONE_PARAM_INSTANCES:
        raise ValidationError(f"{config.instance} is not a one-parameter instance")
    asg, cat = BUILDERS[config.instance](config, series)
    cat = cat.with_tolerance(config.tolerance.rel, config.tolerance.abs_)
    log_message(f"Built {config.instance} assignment with {len(asg)} cells", "info")
    return asg, cat


def build_grid(config: RunConfig, image: np.ndarray) -> Tuple[TwoCellGridAssignment, CrossedModule]:
    """
    abelian2d expects one channel, glimage three.

    Raises:
        ValidationError: if the instance is not a two-parameter instance
        DimensionMismatch: if the image has the wrong channel count
    """
    if config.instance not in TWO_PARAM_INSTANCES:
        raise ValidationError(f"{config.instance} is not a two-parameter instance")
    if config.instance == "abelian2d":
        if image.shape[2] != 1:
            raise DimensionMismatch("1 channel for abelian2d", image.shape[2])
        grid, xm = abelian_grid_assignment(image[:, :, 0].tolist(), config.abelian_op)
    else:
        if image.shape[2] != 3:
            raise DimensionMismatch("3 channels for glimage", image.shape[2])
        grid, xm = image_grid_assignment(
            image, image_params(config), config.tolerance.boundary, edge_tol=config.tolerance.rel
        )
    log_message(f"Built {config.instance} grid of {grid.m}x{grid.n} faces", "info")
    return grid, xm


def build_crossed_module(config: RunConfig) -> CrossedModule:
    """The crossed module that `check` samples."""
    if config.instance == "abelian2d":
        return AbelianCrossedModule(config.abelian_op)
    if config.instance == "glimage":
        return GLCrossedModule(2, 1, 3, tol=config.tolerance.rel)
    section = config.crossed_module
    if section.kind == "abelian":
        return AbelianCrossedModule(config.abelian_op)
    if section.kind == "normal":
        return NormalSubgroupCrossedModule(section.size, section.subgroup, tol=config.tolerance.rel)
    return GLCrossedModule(section.n, section.p, section.q, tol=config.tolerance.rel)
