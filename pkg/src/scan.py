"""
Prefix aggregation over interval assignments and 2-cell grids.

Every scan returns all n + 1 prefixes F([0, k]). The parallel variants hand
independent pieces of work to a ParallelScanProcessor; composition order is
fixed by the algorithm, so results never depend on the worker count.
"""
import asyncio
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from category import Category, Interval, IntervalAssignment, fold, require_valid
from double_category import (
    CrossedModule,
    HorizontalFaceCategory,
    TwoCell,
    TwoCellGridAssignment,
    VerticalFaceCategory,
)
from scan_processor import ParallelScanProcessor, ScanConfig, chunk_ranges
from utils.errors import OutOfRange
from utils.logging_utils import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ScanResult:
    """prefixes[k] == F([offset, offset + k]); prefixes[0] is an identity."""
    prefixes: Tuple[Any, ...]
    offset: int = 0

    def __len__(self) -> int:
        return len(self.prefixes)

    def __getitem__(self, k: int) -> Any:
        return self.prefixes[k]

    @property
    def total(self) -> Any:
        return self.prefixes[-1]


@dataclass(frozen=True)
class SweepTree:
    """
    levels[i][k] aggregates the dyadic block [k·2^i, (k+1)·2^i], clipped to
    the assignment's length. Level i holds ceil(n / 2^i) blocks.
    """
    levels: Tuple[Tuple[Any, ...], ...]
    objects: Tuple[Any, ...]
    offset: int = 0

    @property
    def size(self) -> int:
        return len(self.objects) - 1

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def root(self) -> Any:
        return self.levels[-1][0] if self.size else None

    def block(self, i: int, k: int) -> Tuple[int, int]:
        return k << i, min((k + 1) << i, self.size)


def _processor(workers: Optional[int], chunk_size: Optional[int] = None) -> ParallelScanProcessor:
    options = {}
    if workers:
        options["workers"] = workers
    if chunk_size:
        options["chunk_size"] = chunk_size
    return ParallelScanProcessor(ScanConfig(**options))


def _running(seed: Any, cells: Sequence[Any], cat: Category) -> List[Any]:
    """seed, seed·c0, seed·c0·c1, ..."""
    out = [seed]
    acc = seed
    for cell in cells:
        acc = cat.compose(acc, cell)
        out.append(acc)
    return out


def scan_serial(asg: IntervalAssignment, cat: Category) -> ScanResult:
    """F([0,k]) = F([0,k-1]) then F([k-1,k]), one composition per cell."""
    require_valid(asg, cat)
    return ScanResult(tuple(_running(cat.identity(asg.objects[0]), asg.cells, cat)), asg.offset)


async def up_sweep_async(
    asg: IntervalAssignment, cat: Category, processor: ParallelScanProcessor
) -> SweepTree:
    require_valid(asg, cat)
    level = list(asg.cells)
    levels = [tuple(level)]
    pad = cat.identity(asg.objects[-1])
    while len(level) > 1:
        # odd levels borrow an identity at the final object for their last pair
        padded = level + [pad] if len(level) % 2 else level
        pairs = [(padded[2 * k], padded[2 * k + 1]) for k in range(len(padded) // 2)]
        level = await processor.process_items(pairs, lambda pair: cat.compose(*pair))
        levels.append(tuple(level))
    return SweepTree(tuple(levels), tuple(asg.objects), asg.offset)


def up_sweep(asg: IntervalAssignment, cat: Category, workers: Optional[int] = None) -> SweepTree:
    """
    Aggregate neighbouring blocks level by level; blocks within a level are
    computed independently. The root equals the lift over the whole range.

    Raises:
        EndpointMismatch: if the assignment is not composable
    """
    with _processor(workers) as processor:
        return asyncio.run(up_sweep_async(asg, cat, processor))


async def down_sweep_async(
    tree: SweepTree, cat: Category, processor: ParallelScanProcessor
) -> ScanResult:
    start = cat.identity(tree.objects[0])
    if tree.size == 0:
        return ScanResult((start,), tree.offset)

    # pre[k] == F([0, min(k·2^i, n)]) at the current level i
    pre = [start, tree.root]
    for i in range(tree.depth - 2, -1, -1):
        level = tree.levels[i]
        upper = pre

        def job(k: int, level=level, upper=upper) -> Any:
            if k % 2 == 0:
                return upper[k // 2]
            return cat.compose(upper[k // 2], level[k - 1])

        pre = await processor.process_items(range(len(level) + 1), job)
    return ScanResult(tuple(pre), tree.offset)


def down_sweep(tree: SweepTree, cat: Category, workers: Optional[int] = None) -> ScanResult:
    """Every prefix F([0,k]) from the up-sweep tree, one tree level at a time."""
    with _processor(workers) as processor:
        return asyncio.run(down_sweep_async(tree, cat, processor))


async def scan_blelloch_async(
    asg: IntervalAssignment, cat: Category, processor: ParallelScanProcessor
) -> ScanResult:
    tree = await up_sweep_async(asg, cat, processor)
    return await down_sweep_async(tree, cat, processor)


def scan_blelloch(
    asg: IntervalAssignment, cat: Category, workers: Optional[int] = None
) -> ScanResult:
    with _processor(workers) as processor:
        return asyncio.run(scan_blelloch_async(asg, cat, processor))


def range_query(tree: SweepTree, iv: Interval, cat: Category) -> Any:
    """
    Lift over an arbitrary sub-interval from O(log n) dyadic blocks of the tree.

    Raises:
        OutOfRange: if the interval leaves the tree's span
    """
    lo, hi = iv.lo - tree.offset, iv.hi - tree.offset
    if lo < 0 or hi > tree.size:
        raise OutOfRange(
            f"[{iv.lo},{iv.hi}] not inside [{tree.offset},{tree.offset + tree.size}]"
        )
    if lo == hi:
        return cat.identity(tree.objects[lo])

    pieces: List[Any] = []

    def collect(i: int, k: int) -> None:
        start, stop = tree.block(i, k)
        if stop <= lo or start >= hi:
            return
        if lo <= start and stop <= hi:
            pieces.append(tree.levels[i][k])
            return
        collect(i - 1, 2 * k)
        collect(i - 1, 2 * k + 1)

    collect(tree.depth - 1, 0)
    return fold(pieces, cat)


async def scan_parallel_async(
    asg: IntervalAssignment, cat: Category, processor: ParallelScanProcessor
) -> ScanResult:
    require_valid(asg, cat)
    n = len(asg)
    start = cat.identity(asg.objects[0])
    if n == 0:
        return ScanResult((start,), asg.offset)

    cells = asg.cells
    # chunk boundaries depend on n alone; workers only schedule the chunks
    chunks = chunk_ranges(n, processor.config.chunk_size)
    logger.debug(f"Scanning {n} cells in {len(chunks)} chunks")

    # 1. fold each chunk
    aggregates = await processor.process_items(chunks, lambda r: fold(cells[r[0]:r[1]], cat))

    # 2. exclusive prefix of the chunk aggregates through a log-depth tree
    boundaries = tuple(asg.objects[a] for a, _ in chunks) + (asg.objects[n],)
    chunk_asg = IntervalAssignment(tuple(aggregates), boundaries)
    seeds = (await scan_blelloch_async(chunk_asg, cat, processor)).prefixes

    # 3. serial prefix inside each chunk, seeded by everything before it
    parts = await processor.process_items(
        list(zip(chunks, seeds)),
        lambda item: _running(item[1], cells[item[0][0]:item[0][1]], cat)[1:],
    )
    prefixes = [start]
    for part in parts:
        prefixes.extend(part)
    return ScanResult(tuple(prefixes), asg.offset)


def scan_parallel(
    asg: IntervalAssignment,
    cat: Category,
    workers: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> ScanResult:
    """
    Chunked parallel scan: fold contiguous chunks of `chunk_size` cells,
    combine the chunk aggregates, then finish each chunk from its seed.
    Equal to scan_serial, and identical for every worker count.

    Raises:
        EndpointMismatch: if the assignment is not composable
    """
    with _processor(workers, chunk_size) as processor:
        result = asyncio.run(scan_parallel_async(asg, cat, processor))
        processor.log_stats()
    return result


@dataclass(frozen=True)
class PrefixGrid:
    """cells[i][j] == F([0,i] × [0,j]) for 0 <= i <= m, 0 <= j <= n."""
    cells: Tuple[Tuple[TwoCell, ...], ...]

    @property
    def m(self) -> int:
        return len(self.cells) - 1

    @property
    def n(self) -> int:
        return len(self.cells[0]) - 1

    def __getitem__(self, ij: Tuple[int, int]) -> TwoCell:
        i, j = ij
        return self.cells[i][j]


async def scan_2d_async(
    grid: TwoCellGridAssignment, xm: CrossedModule, processor: ParallelScanProcessor
) -> PrefixGrid:
    hcat = HorizontalFaceCategory(xm)
    vcat = VerticalFaceCategory(xm)

    # row phase: strips[j][i] == F([0,i] × [j, j+1])
    rows = [
        IntervalAssignment(
            tuple(grid.cell(i, j) for i in range(grid.m)),
            tuple(grid.vcells[i][j] for i in range(grid.m + 1)),
        )
        for j in range(grid.n)
    ]
    strips = await processor.process_items(rows, lambda row: scan_serial(row, hcat).prefixes)

    # column phase: stack the strips of every column i
    columns = []
    for i in range(grid.m + 1):
        pieces = tuple(strips[j][i] for j in range(grid.n))
        bottom = grid.h_edge(0, 0, i, xm)
        columns.append(IntervalAssignment(pieces, (bottom,) + tuple(p.north for p in pieces)))
    stacks = await processor.process_items(columns, lambda col: scan_serial(col, vcat).prefixes)
    return PrefixGrid(tuple(tuple(stack) for stack in stacks))


def scan_2d(
    grid: TwoCellGridAssignment, xm: CrossedModule, workers: Optional[int] = None
) -> PrefixGrid:
    """
    Two-phase scan of a 2-cell grid: every row is scanned horizontally (rows in
    parallel), then the resulting strips are composed vertically up each
    column (columns in parallel).

    Raises:
        BoundaryMismatch: if neighbouring cells disagree on a shared edge
    """
    with _processor(workers) as processor:
        prefix = asyncio.run(scan_2d_async(grid, xm, processor))
        processor.log_stats()
    return prefix


def summed_area_table(values: Any) -> np.ndarray:
    """Classical integral image with a zero first row and column: shape (m+1, n+1)."""
    values = np.asarray(values)
    table = np.zeros((values.shape[0] + 1, values.shape[1] + 1), dtype=values.dtype)
    table[1:, 1:] = values.cumsum(axis=0).cumsum(axis=1)
    return table


def rect_sum(table: np.ndarray, s1: int, t1: int, s2: int, t2: int) -> Any:
    """Sum over [s1, t1] × [s2, t2] from four table lookups."""
    return table[t1, t2] - table[s1, t2] - table[t1, s2] + table[s1, s2]
