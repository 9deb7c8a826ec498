"""
Plain-text renderings of scan results, 2-cells and axiom reports.

Output uses '.' decimals, ',' separators and '\n' line ends. Floats are
printed with repr, which is the shortest string that round-trips.
"""
import numbers
from typing import Any, Iterable, List

import numpy as np

from crossed_modules import GLGroupElement, GLHElement
from double_category import CheckReport, TwoCell
from scan import PrefixGrid, ScanResult
from tensor_algebra import TensorElement


def format_scalar(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, numbers.Integral):
        return str(int(x))
    if isinstance(x, numbers.Rational):
        return str(x)
    return repr(float(x))


def is_scalar(x: Any) -> bool:
    return isinstance(x, numbers.Number) or (isinstance(x, np.ndarray) and x.ndim == 0)


def format_matrix(matrix: Any) -> List[str]:
    return [",".join(format_scalar(x) for x in row) for row in np.asarray(matrix)]


def format_word(word: Iterable[int]) -> str:
    """Letters joined by '.', the empty word as 'e'."""
    word = tuple(word)
    return ".".join(str(letter) for letter in word) if word else "e"


def format_value(label: str, value: Any) -> List[str]:
    """A labeled block: one header line, then the value's rows."""
    if is_scalar(value):
        return [f"{label},{format_scalar(value)}"]
    if isinstance(value, TensorElement):
        return [f"{label} words={len(value.terms)}"] + [
            f"{format_word(word)},{format_scalar(value[word])}" for word in value
        ]
    if isinstance(value, GLHElement):
        return format_value(label, value.block)
    if isinstance(value, GLGroupElement):
        return format_value(f"{label} U", value.U) + format_value(f"{label} V", value.V)
    matrix = np.asarray(value)
    return [f"{label} {matrix.shape[0]}x{matrix.shape[1]}"] + format_matrix(matrix)


def format_prefixes(result: ScanResult) -> List[str]:
    """Scalar prefixes on one line; anything else as one block per prefix."""
    if all(is_scalar(p) for p in result.prefixes):
        return [",".join(format_scalar(p) for p in result.prefixes)]
    lines: List[str] = []
    for k, prefix in enumerate(result.prefixes):
        lines.extend(format_value(f"[{result.offset},{result.offset + k}]", prefix))
    return lines


def format_single(value: Any) -> List[str]:
    """One aggregate without a label when it is a scalar."""
    if is_scalar(value):
        return [format_scalar(value)]
    return format_value("value", value)


def format_two_cell(label: str, cell: TwoCell) -> List[str]:
    if is_scalar(cell.face):
        return [f"{label},{format_scalar(cell.face)}"]
    return format_value(label, cell.face)


def format_prefix_grid(grid: PrefixGrid) -> List[str]:
    """
    Scalar faces as m+1 lines of n+1 values (line i holds F([0,i] × [0,j]));
    matrix faces as one labeled block per cell.
    """
    if all(is_scalar(cell.face) for row in grid.cells for cell in row):
        return [",".join(format_scalar(cell.face) for cell in row) for row in grid.cells]
    lines: List[str] = []
    for i, row in enumerate(grid.cells):
        for j, cell in enumerate(row):
            lines.extend(format_two_cell(f"[0,{i}]x[0,{j}]", cell))
    return lines


def format_check_report(report: CheckReport) -> List[str]:
    """One "AXIOM max_violation count_failed" line per axiom."""
    return [
        f"{result.name} {result.max_violation:.3e} {result.count_failed}"
        for result in report.results
    ]
