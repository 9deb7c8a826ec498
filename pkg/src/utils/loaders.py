"""
Readers for run configurations, series CSVs, images and matrix literal files.
"""
from pathlib import Path
from typing import Any, List, Union

import numpy as np
import pydantic
import yaml

from numeric import DenseMatrix, as_matrix
from utils.errors import ConfigError, InputFormatError
from utils.logging_utils import get_logger
from utils.schemas import MatrixSource, RunConfig

logger = get_logger(__name__)

PathLike = Union[str, Path]


def load_config(file_path: PathLike) -> RunConfig:
    """
    Load and validate a run configuration. JSON documents are accepted as well,
    being a subset of YAML.

    Raises:
        ConfigError: if the file is missing, unparsable or fails validation
    """
    path = Path(file_path)
    try:
        with open(path, "r") as file:
            config_dict = yaml.safe_load(file)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse config {path}: {e}") from e

    if not isinstance(config_dict, dict):
        raise ConfigError(f"config {path} must be a mapping")
    try:
        config = RunConfig(**config_dict)
    except pydantic.ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"invalid config {path}: {problems}") from e
    logger.debug(f"Loaded {config.instance} config from {path}")
    return config.with_base_dir(path.resolve().parent)


def _read_lines(path: PathLike) -> List[str]:
    """Non-blank lines without '#' comments."""
    try:
        with open(path, "r") as file:
            raw = file.read().splitlines()
    except OSError as e:
        raise InputFormatError(f"cannot read {path}: {e.strerror}") from e
    return [line.strip() for line in raw if line.strip() and not line.lstrip().startswith("#")]


def parse_scalar(token: str) -> Union[int, float]:
    """Integers stay integers so that exact instances stay exact."""
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise InputFormatError(f"not a number: {token!r}") from None


def _tokens(line: str) -> List[str]:
    return line.replace(",", " ").split()


def read_series_csv(file_path: PathLike) -> List[Any]:
    """
    A single comma-separated row is a scalar series. Otherwise every row is one
    time point: rows with one column give a scalar series, wider rows a
    d-dimensional one.
    """
    lines = _read_lines(file_path)
    if not lines:
        return []
    if len(lines) == 1:
        return [parse_scalar(t) for t in _tokens(lines[0])]

    rows = [[parse_scalar(t) for t in _tokens(line)] for line in lines]
    width = len(rows[0])
    for k, row in enumerate(rows):
        if len(row) != width:
            raise InputFormatError(f"{file_path}: row {k} has {len(row)} columns, expected {width}")
    if width == 1:
        return [row[0] for row in rows]
    return rows


def read_matrix_file(file_path: PathLike) -> DenseMatrix:
    """
    Matrix literal: a "rows cols" header, then one line of space separated
    decimals per row. "inf" and "-inf" are accepted.
    """
    lines = _read_lines(file_path)
    if not lines:
        raise InputFormatError(f"{file_path}: empty matrix file")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except ValueError:
        raise InputFormatError(f"{file_path}: header must be 'rows cols'") from None
    body = lines[1:]
    if len(body) != rows:
        raise InputFormatError(f"{file_path}: expected {rows} rows, found {len(body)}")
    entries = []
    for k, line in enumerate(body):
        values = [float(parse_scalar(t)) for t in line.split()]
        if len(values) != cols:
            raise InputFormatError(f"{file_path}: row {k} has {len(values)} entries, expected {cols}")
        entries.append(values)
    return as_matrix(entries)


def load_matrix(source: MatrixSource, base_dir: PathLike) -> DenseMatrix:
    """A matrix given inline or as a path relative to `base_dir`."""
    if isinstance(source, str):
        path = Path(source)
        if not path.is_absolute():
            path = Path(base_dir) / path
        return read_matrix_file(path)
    return as_matrix(source)


def read_ppm(file_path: PathLike) -> np.ndarray:
    """Binary 8-bit PPM (P6) as an (height, width, 3) array scaled to [0, 1]."""
    try:
        data = Path(file_path).read_bytes()
    except OSError as e:
        raise InputFormatError(f"cannot read {file_path}: {e.strerror}") from e

    # header: magic, width, height, maxval separated by whitespace, '#' comments allowed
    fields: List[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise InputFormatError(f"{file_path}: truncated PPM header")
        fields.append(data[start:pos])
    pos += 1  # single whitespace byte before the raster

    if fields[0] != b"P6":
        raise InputFormatError(f"{file_path}: not a binary PPM (P6) file")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise InputFormatError(f"{file_path}: malformed PPM header") from None
    if not 0 < maxval < 256:
        raise InputFormatError(f"{file_path}: only 8-bit PPM is supported, maxval={maxval}")

    size = width * height * 3
    if len(data) - pos < size:
        raise InputFormatError(f"{file_path}: PPM raster is shorter than {width}x{height}x3")
    raster = np.frombuffer(data, dtype=np.uint8, count=size, offset=pos)
    return raster.reshape(height, width, 3).astype(float) / maxval


def read_image_csv(file_path: PathLike) -> np.ndarray:
    """Header "m n c", then m·n row-major lines of c decimals each."""
    lines = _read_lines(file_path)
    if not lines:
        raise InputFormatError(f"{file_path}: empty image file")
    try:
        m, n, c = (int(t) for t in _tokens(lines[0]))
    except ValueError:
        raise InputFormatError(f"{file_path}: header must be 'm n c'") from None
    body = lines[1:]
    if len(body) != m * n:
        raise InputFormatError(f"{file_path}: expected {m * n} pixel lines, found {len(body)}")
    pixels = []
    for k, line in enumerate(body):
        values = [float(parse_scalar(t)) for t in _tokens(line)]
        if len(values) != c:
            raise InputFormatError(f"{file_path}: pixel line {k} has {len(values)} values, expected {c}")
        pixels.append(values)
    return np.array(pixels, dtype=float).reshape(m, n, c)


def read_image(file_path: PathLike) -> np.ndarray:
    """An (m, n, c) float image from a CSV or a binary PPM file."""
    path = Path(file_path)
    try:
        with open(path, "rb") as file:
            magic = file.read(2)
    except OSError as e:
        raise InputFormatError(f"cannot read {path}: {e.strerror}") from e
    if magic == b"P6":
        return read_ppm(path)
    return read_image_csv(path)
