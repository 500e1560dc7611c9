"""Khovanov 可解立方体（Z/2 系数）及其环形三重分次版本

生成元由 (r, s) 表示：r 为可解（第 c 位是第 c 个交叉的光滑化），
s 为各圆周的标号位集（第 t 位为 1 表示 v₊）。
分次约定: i = |r| - n₋, j = deg + |r| + n₊ - 2n₋, k = 本质圆上 v₊ 数 - v₋ 数。
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np

from main_logic.errors import IntegrityError, ResourceLimitError
from main_logic.gf2linalg import SparseBitMatrix
from main_logic.linkdiag import AnnularDiagram, PlanarDiagram, annular_to_planar

logger = logging.getLogger(__name__)

DEFAULT_CROSSING_LIMIT = 20


@dataclass(frozen=True)
class Resolution:
    """可解：长度为交叉数的位向量"""

    mask: int
    length: int

    @classmethod
    def from_string(cls, bits: str) -> "Resolution":
        """由 "10" 这样的串构造，第 c 个字符对应第 c 个交叉"""
        mask = 0
        for c, ch in enumerate(bits):
            if ch not in "01":
                raise ValueError(f"可解串只能含 0/1: {bits!r}")
            if ch == "1":
                mask |= 1 << c
        return cls(mask, len(bits))

    @property
    def weight(self) -> int:
        return self.mask.bit_count()

    def bit(self, crossing: int) -> int:
        return (self.mask >> crossing) & 1


@dataclass(frozen=True)
class StateCircles:
    """完全光滑化后的圆周

    Attributes:
        circle_count: 圆周数
        arc_circle: 弧标号 → 圆周编号（按圆周中最小弧排序）
        essential: 各圆周是否绕轴
    """

    circle_count: int
    arc_circle: Dict[int, int] = field(compare=False)
    essential: Tuple[bool, ...]


class Generator(NamedTuple):
    resolution: int
    labels: int
    i: int
    j: int
    k: int


@dataclass
class ComplexBlock:
    """一个分次块：各同调次数的生成元与边缘映射

    generators[i] 为 (dim, 2) 数组，每行是 (可解, 标号)，按可解再按标号排列；
    differentials[i] 为 C_i → C_{i+1}
    """

    grading: Tuple[int, ...]
    generators: Dict[int, np.ndarray] = field(default_factory=dict)
    differentials: Dict[int, SparseBitMatrix] = field(default_factory=dict)

    def dim(self, i: int) -> int:
        return len(self.generators.get(i, ()))

    def degrees(self) -> List[int]:
        return sorted(self.generators)

    def differential(self, i: int) -> SparseBitMatrix:
        """C_i → C_{i+1}，缺省为零映射"""
        matrix = self.differentials.get(i)
        if matrix is None:
            return SparseBitMatrix.zero(self.dim(i + 1), self.dim(i))
        return matrix


@dataclass
class ChainComplex:
    """按 (j) 或 (j, k) 分块的链复形"""

    annular: bool
    crossing_count: int
    n_plus: int
    n_minus: int
    blocks: Dict[Tuple[int, ...], ComplexBlock] = field(default_factory=dict)

    def total_generators(self) -> int:
        return sum(block.dim(i) for block in self.blocks.values() for i in block.generators)


class _CircleTable(NamedTuple):
    """一组可解的圆周信息（按可解下标排列的数组）"""

    counts: np.ndarray
    arc_circle: np.ndarray
    essential: np.ndarray
    rep_arc: np.ndarray


class _CubeContext:
    """预处理后的图：弧下标、交叉的弧下标、闭包缝"""

    def __init__(self, diagram: PlanarDiagram, crossing_limit: int):
        n = diagram.crossing_count
        if n > crossing_limit:
            raise ResourceLimitError(n, crossing_limit)
        self.diagram = diagram
        self.n = n
        self.labels = diagram.arcs()
        self.index = {arc: i for i, arc in enumerate(self.labels)}
        self.crossing_arcs = np.array(
            [[self.index[a] for a in x.arcs] for x in diagram.crossings], dtype=np.int64
        ).reshape(n, 4)
        self.seam = np.array([arc in diagram.seam_arcs for arc in self.labels], dtype=bool)
        self.n_plus = diagram.n_plus
        self.n_minus = diagram.n_minus

    def circle_table(self, masks: np.ndarray) -> _CircleTable:
        """对一组可解同时求圆周

        每条弧的标记取所在圆周的最小弧下标：沿光滑化连接反复取较小值，再做指针跳跃直到不变。
        圆周按最小弧下标排序编号，与遍历顺序无关。

        Args:
            masks: 可解位集数组

        Returns:
            圆周数、弧所属圆周、本质圆位集、各圆周的代表弧（最小弧）
        """
        masks = np.asarray(masks, dtype=np.int64)
        arc_count = len(self.labels)
        base = np.arange(masks.size, dtype=np.int64)[:, None] * arc_count
        parent = np.arange(masks.size * arc_count, dtype=np.int64)
        if self.n:
            bits = ((masks[:, None] >> np.arange(self.n)) & 1).astype(bool)
            a, b, c, d = self.crossing_arcs.T
            # 0-光滑化连 (a,b)(c,d)，1-光滑化连 (a,d)(b,c)
            ends = np.concatenate([np.broadcast_to(a, bits.shape), np.broadcast_to(c, bits.shape)], axis=1)
            partners = np.concatenate([np.where(bits, d, b), np.where(bits, b, d)], axis=1)
            ends = (base + ends).ravel()
            partners = (base + partners).ravel()
            while True:
                previous = parent
                low = np.minimum(parent[ends], parent[partners])
                parent = parent.copy()
                np.minimum.at(parent, ends, low)
                np.minimum.at(parent, partners, low)
                parent = parent[parent]
                if np.array_equal(parent, previous):
                    break
        label = (parent.reshape(masks.size, arc_count) - base).astype(np.int64)
        is_root = label == np.arange(arc_count)
        root_rank = np.cumsum(is_root, axis=1) - 1
        arc_circle = np.take_along_axis(root_rank, label, axis=1)
        counts = is_root.sum(axis=1).astype(np.int64)
        # 环面上的简单闭曲线圈数为 0 或 ±1，且与穿缝次数同奇偶
        seam = np.flatnonzero(self.seam)
        if seam.size:
            essential = np.bitwise_xor.reduce(np.left_shift(1, arc_circle[:, seam]), axis=1)
        else:
            essential = np.zeros(masks.size, dtype=np.int64)
        rep_arc = np.zeros((masks.size, max(int(counts.max(initial=0)), 1)), dtype=np.int64)
        which, arcs = np.nonzero(is_root)
        rep_arc[which, root_rank[which, arcs]] = arcs
        return _CircleTable(counts, arc_circle, essential.astype(np.int64), rep_arc)


def smooth(diagram: PlanarDiagram, resolution: Resolution) -> StateCircles:
    """按可解光滑化所有交叉

    Args:
        diagram: 平面图
        resolution: 可解，长度须等于交叉数

    Returns:
        圆周及其本质性
    """
    if resolution.length != diagram.crossing_count:
        raise ValueError(
            f"可解长度 {resolution.length} ≠ 交叉数 {diagram.crossing_count}"
        )
    ctx = _CubeContext(diagram, max(diagram.crossing_count, 1))
    table = ctx.circle_table(np.array([resolution.mask]))
    count = int(table.counts[0])
    essential = int(table.essential[0])
    return StateCircles(
        count,
        {label: int(table.arc_circle[0, i]) for i, label in enumerate(ctx.labels)},
        tuple(bool((essential >> t) & 1) for t in range(count)),
    )


def _popcount(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values).astype(np.int64)


def _edge_entries(
    ctx: _CubeContext, table: _CircleTable, crossing: int, gen_mask: np.ndarray,
    gen_labels: np.ndarray, offsets: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """交叉 crossing 方向上所有立方体边 r → r' 的矩阵元

    Returns:
        (源生成元全局下标, 靶生成元全局下标)
    """
    a, b, c, _ = ctx.crossing_arcs[crossing].tolist()
    bit = 1 << crossing
    arc_circle = table.arc_circle

    vertices = np.flatnonzero((np.arange(table.counts.size) & bit) == 0)
    merging = arc_circle[vertices, a] != arc_circle[vertices, c]
    expected = table.counts[vertices] + np.where(merging, -1, 1)
    split_apart = merging | (arc_circle[vertices | bit, a] != arc_circle[vertices | bit, b])
    if (table.counts[vertices | bit] != expected).any() or not split_apart.all():
        raise IntegrityError(f"交叉 {crossing} 的边上圆周数不是 ±1")

    gens = np.flatnonzero((gen_mask & bit) == 0)
    mask = gen_mask[gens]
    labels = gen_labels[gens]
    target = mask | bit
    circle_a = arc_circle[mask, a]
    circle_c = arc_circle[mask, c]

    # 非受影响圆周的标号搬到靶端
    carried = np.zeros_like(labels)
    for t in range(table.rep_arc.shape[1]):
        untouched = (circle_a != t) & (circle_c != t)
        moved = ((labels >> t) & 1) * untouched
        carried |= moved << arc_circle[target, table.rep_arc[mask, t]]

    first = (labels >> circle_a) & 1
    second = (labels >> circle_c) & 1
    target_a = arc_circle[target, a]
    merge = circle_a != circle_c
    # 合并: v₊v₊ → v₊, v₊v₋ → v₋, v₋v₋ → 0
    live = merge & ((first | second) == 1)
    merged = carried[live] | ((first & second)[live] << target_a[live])
    # 分裂: v₊ → v₊v₋ + v₋v₊, v₋ → v₋v₋
    split = ~merge
    split_first = carried[split] | (first[split] << target_a[split])
    plus = split & (first == 1)
    split_second = carried[plus] | np.left_shift(1, arc_circle[target[plus], b])

    sources = np.concatenate([gens[live], gens[split], gens[plus]])
    target_labels = np.concatenate([merged, split_first, split_second])
    target_masks = np.concatenate([target[live], target[split], target[plus]])
    return sources, offsets[target_masks] + target_labels


def _build(diagram: PlanarDiagram, annular: bool, crossing_limit: int) -> ChainComplex:
    ctx = _CubeContext(diagram, crossing_limit)
    n = ctx.n
    masks = np.arange(1 << n, dtype=np.int64)
    table = ctx.circle_table(masks)

    # 生成元全局下标：按可解再按标号排列
    sizes = np.left_shift(1, table.counts)
    offsets = np.cumsum(sizes) - sizes
    total = int(sizes.sum())
    gen_mask = np.repeat(masks, sizes)
    gen_labels = np.arange(total, dtype=np.int64) - np.repeat(offsets, sizes)

    weight = _popcount(gen_mask)
    degree_i = weight - ctx.n_minus
    degree_j = (
        2 * _popcount(gen_labels) - table.counts[gen_mask] + weight
        + ctx.n_plus - 2 * ctx.n_minus
    )
    keys = [degree_j]
    if annular:
        essential = table.essential[gen_mask]
        degree_k = 2 * _popcount(gen_labels & essential) - _popcount(essential)
        keys.append(degree_k)
    keys.append(degree_i)

    cells, group = np.unique(np.column_stack(keys), axis=0, return_inverse=True)
    group = group.reshape(-1)
    order = np.argsort(group, kind="stable")
    group_sizes = np.bincount(group, minlength=len(cells))
    group_starts = np.cumsum(group_sizes) - group_sizes
    position = np.empty(total, dtype=np.int64)
    position[order] = np.arange(total) - np.repeat(group_starts, group_sizes)

    complex_ = ChainComplex(annular, n, ctx.n_plus, ctx.n_minus)
    cell_keys: List[Tuple[Tuple[int, ...], int]] = []
    for g, row in enumerate(cells.tolist()):
        grading, i = tuple(row[:-1]), row[-1]
        cell_keys.append((grading, i))
        block = complex_.blocks.get(grading)
        if block is None:
            block = complex_.blocks[grading] = ComplexBlock(grading)
        members = order[group_starts[g]:group_starts[g] + group_sizes[g]]
        block.generators[i] = np.column_stack((gen_mask[members], gen_labels[members]))

    sources: List[np.ndarray] = []
    targets: List[np.ndarray] = []
    dropped = 0
    for crossing in range(n):
        src, dst = _edge_entries(ctx, table, crossing, gen_mask, gen_labels, offsets)
        bad = (degree_j[dst] != degree_j[src]) | (degree_i[dst] != degree_i[src] + 1)
        if bad.any():
            first = int(np.flatnonzero(bad)[0])
            raise IntegrityError(
                f"边缘映射不保持 j 分次: {cell_keys[group[src[first]]]} → {cell_keys[group[dst[first]]]}"
            )
        if annular:
            drop = degree_k[src] - degree_k[dst]
            bad = (drop < 0) | (drop % 2 == 1)
            if bad.any():
                first = int(np.flatnonzero(bad)[0])
                raise IntegrityError(
                    f"边缘映射使 k 从 {degree_k[src[first]]} 变为 {degree_k[dst[first]]}"
                )
            keep = drop == 0
            dropped += int(keep.size - keep.sum())
            src, dst = src[keep], dst[keep]
        sources.append(src)
        targets.append(dst)

    if sources:
        src = np.concatenate(sources)
        dst = np.concatenate(targets)
        edge_order = np.argsort(group[src], kind="stable")
        src, dst = src[edge_order], dst[edge_order]
        edge_groups, edge_starts = np.unique(group[src], return_index=True)
        bounds = np.append(edge_starts, src.size).tolist()
        for g, start, stop in zip(edge_groups.tolist(), bounds[:-1], bounds[1:]):
            grading, i = cell_keys[g]
            block = complex_.blocks[grading]
            block.differentials[i] = SparseBitMatrix.from_coo(
                block.dim(i + 1), block.dim(i), position[dst[start:stop]], position[src[start:stop]]
            )

    for grading, block in complex_.blocks.items():
        logger.debug(
            "块 %s: 维数 %s", grading, {i: block.dim(i) for i in block.degrees()}
        )
    if annular:
        logger.debug("环形分次丢弃了 %d 个降 k 的矩阵元", dropped)
    return complex_


def build_kh_complex(
    diagram: PlanarDiagram, crossing_limit: int = DEFAULT_CROSSING_LIMIT
) -> ChainComplex:
    """Khovanov 链复形（按 j 分块）

    Raises:
        ResourceLimitError: 交叉数超过上限
    """
    return _build(diagram, annular=False, crossing_limit=crossing_limit)


def build_akh_complex(
    diagram: AnnularDiagram, crossing_limit: int = DEFAULT_CROSSING_LIMIT
) -> ChainComplex:
    """环形 Khovanov 链复形（按 (j, k) 分块）

    与平面化的 Khovanov 复形有相同的生成元；改变 k 的矩阵元置零
    """
    return _build(annular_to_planar(diagram), annular=True, crossing_limit=crossing_limit)


def resolution_counts(
    diagram: PlanarDiagram, crossing_limit: int = DEFAULT_CROSSING_LIMIT
) -> Dict[Tuple[int, int], int]:
    """统计每个 (|r|, 圆周数) 出现的可解个数，供态和使用"""
    ctx = _CubeContext(diagram, crossing_limit)
    masks = np.arange(1 << ctx.n, dtype=np.int64)
    table = ctx.circle_table(masks)
    return dict(Counter(zip(_popcount(masks).tolist(), table.counts.tolist())))


def check_square_zero(complex_: ChainComplex) -> None:
    """逐块检查 d∘d = 0

    Raises:
        IntegrityError: 某块 d∘d ≠ 0
    """
    for grading, block in complex_.blocks.items():
        for i in block.degrees():
            square = block.differential(i + 1).compose(block.differential(i))
            if not square.is_zero():
                raise IntegrityError(f"块 {grading} 在 i={i} 处 d∘d ≠ 0")


def iter_generators(complex_: ChainComplex) -> Iterator[Generator]:
    for grading, block in sorted(complex_.blocks.items()):
        k = grading[1] if complex_.annular else 0
        for i in block.degrees():
            for mask, labels in block.generators[i].tolist():
                yield Generator(mask, labels, i, grading[0], k)


def dump_complex(complex_: ChainComplex, limit: Optional[int] = None) -> str:
    """调试输出：生成元列表和矩阵三元组 (行, 列, 1)"""
    lines = [
        f"# complex annular={complex_.annular} crossings={complex_.crossing_count} "
        f"n+={complex_.n_plus} n-={complex_.n_minus} generators={complex_.total_generators()}"
    ]
    width = complex_.crossing_count
    for grading, block in sorted(complex_.blocks.items()):
        lines.append(f"block {grading}")
        for i in block.degrees():
            gens = block.generators[i]
            shown = gens if limit is None else gens[:limit]
            rendered = " ".join(
                f"{format(mask, f'0{width}b')[::-1] if width else '-'}:{labels:b}"
                for mask, labels in shown.tolist()
            )
            suffix = "" if len(shown) == len(gens) else f" ... (+{len(gens) - len(shown)})"
            lines.append(f"  C[{i}] dim={len(gens)}: {rendered}{suffix}")
        for i in sorted(block.differentials):
            matrix = block.differentials[i]
            triples = [
                f"({r},{c},1)"
                for r, row in enumerate(matrix.row_indices())
                for c in row
            ]
            lines.append(f"  d[{i}] {matrix.row_count}x{matrix.col_count}: {' '.join(triples)}")
    return "\n".join(lines)
