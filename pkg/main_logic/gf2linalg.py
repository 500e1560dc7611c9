"""二元域 GF(2) 上的稀疏线性代数

矩阵表示从列空间（源）到行空间（靶）的线性映射：rows = dim 靶，cols = dim 源。
存储为 numpy 的 (行, 列) 下标数组；求秩时先成批剥去单元素行列，余下部分把每行压成 uint64 字，按行整体异或。
"""

import logging
from typing import Iterable, List, Optional, Sequence

import numpy as np

from main_logic.errors import IntegrityError

logger = logging.getLogger(__name__)

WORD_BITS = 64


class SparseBitMatrix:
    """GF(2) 矩阵

    构造后不可变；非零元按 (行, 列) 字典序存放，重复出现偶数次的元素相消
    """

    __slots__ = ("row_count", "col_count", "_rows", "_cols", "_rank")

    def __init__(self, row_count: int, col_count: int, rows: Sequence[Iterable[int]] = ()):
        """初始化矩阵

        Args:
            row_count: 行数
            col_count: 列数
            rows: 每行取值为 1 的列下标；同一下标出现偶数次则相消
        """
        rows = list(rows)
        if len(rows) > max(row_count, 0):
            raise ValueError(f"给出 {len(rows)} 行，超过行数 {row_count}")
        row_ids: List[int] = []
        col_ids: List[int] = []
        for r, row in enumerate(rows):
            for c in row:
                row_ids.append(r)
                col_ids.append(c)
        self._assign(row_count, col_count, np.asarray(row_ids, dtype=np.int64),
                     np.asarray(col_ids, dtype=np.int64))

    @classmethod
    def from_coo(cls, row_count: int, col_count: int, rows, cols) -> "SparseBitMatrix":
        """由行、列下标数组构造

        Args:
            row_count: 行数
            col_count: 列数
            rows: 非零元的行下标
            cols: 非零元的列下标（与 rows 等长）
        """
        matrix = cls.__new__(cls)
        matrix._assign(row_count, col_count, np.asarray(rows, dtype=np.int64),
                       np.asarray(cols, dtype=np.int64))
        return matrix

    def _assign(self, row_count: int, col_count: int, rows: np.ndarray, cols: np.ndarray) -> None:
        if row_count < 0 or col_count < 0:
            raise ValueError(f"矩阵尺寸非法: {row_count}×{col_count}")
        if rows.shape != cols.shape:
            raise ValueError(f"行下标与列下标长度不同: {rows.shape} vs {cols.shape}")
        if rows.size:
            if rows.min() < 0 or rows.max() >= row_count:
                raise ValueError(f"行下标越界（行数 {row_count}）")
            if cols.min() < 0 or cols.max() >= col_count:
                raise ValueError(f"列下标越界（列数 {col_count}）")
            keys, counts = np.unique(rows * col_count + cols, return_counts=True)
            keys = keys[counts % 2 == 1]
            rows, cols = keys // col_count, keys % col_count
        self.row_count = row_count
        self.col_count = col_count
        self._rows = rows
        self._cols = cols
        self._rank: Optional[int] = None

    @classmethod
    def zero(cls, row_count: int, col_count: int) -> "SparseBitMatrix":
        return cls(row_count, col_count)

    @classmethod
    def identity(cls, size: int) -> "SparseBitMatrix":
        diagonal = np.arange(size, dtype=np.int64)
        return cls.from_coo(size, size, diagonal, diagonal)

    @classmethod
    def from_dense(cls, array) -> "SparseBitMatrix":
        """从 0/1 数组构造（按模 2 取值）"""
        array = np.asarray(array, dtype=np.int64) % 2
        if array.ndim != 2:
            raise ValueError(f"需要二维数组，得到 {array.ndim} 维")
        rows, cols = np.nonzero(array)
        return cls.from_coo(array.shape[0], array.shape[1], rows, cols)

    @property
    def shape(self):
        return self.row_count, self.col_count

    @property
    def nnz(self) -> int:
        return int(self._rows.size)

    def row_indices(self) -> List[tuple]:
        """每行非零列下标（升序）"""
        bounds = np.searchsorted(self._rows, np.arange(self.row_count + 1))
        cols = self._cols.tolist()
        return [tuple(cols[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]

    def to_words(self) -> np.ndarray:
        """按行压缩成 (行数, ⌈列数/64⌉) 的 uint64 数组"""
        width = (self.col_count + WORD_BITS - 1) // WORD_BITS
        words = np.zeros((self.row_count, width), dtype=np.uint64)
        if self.nnz:
            bits = np.left_shift(np.uint64(1), (self._cols % WORD_BITS).astype(np.uint64))
            np.bitwise_or.at(words, (self._rows, self._cols // WORD_BITS), bits)
        return words

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.row_count, self.col_count), dtype=np.uint8)
        dense[self._rows, self._cols] = 1
        return dense

    def transpose(self) -> "SparseBitMatrix":
        return SparseBitMatrix.from_coo(self.col_count, self.row_count, self._cols, self._rows)

    def compose(self, first: "SparseBitMatrix") -> "SparseBitMatrix":
        """复合 self ∘ first（先作用 first）"""
        if first.row_count != self.col_count:
            raise IntegrityError(
                f"无法复合: {self.row_count}×{self.col_count} ∘ {first.row_count}×{first.col_count}"
            )
        if not self.nnz or not first.nnz:
            return SparseBitMatrix.zero(self.row_count, first.col_count)
        # self 的每个元 (r, m) 与 first 第 m 行的每个元 (m, c) 配对，得到 (r, c)
        row_len = np.bincount(first._rows, minlength=first.row_count)
        row_start = np.cumsum(row_len) - row_len
        repeats = row_len[self._cols]
        total = int(repeats.sum())
        offsets = np.repeat(np.cumsum(repeats) - repeats, repeats)
        picked = np.repeat(row_start[self._cols], repeats) + np.arange(total) - offsets
        return SparseBitMatrix.from_coo(
            self.row_count, first.col_count, np.repeat(self._rows, repeats), first._cols[picked]
        )

    def is_zero(self) -> bool:
        return not self.nnz

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseBitMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self._rows, other._rows)
            and np.array_equal(self._cols, other._cols)
        )

    def __hash__(self):
        return hash((self.shape, self._rows.tobytes(), self._cols.tobytes()))

    def __repr__(self) -> str:
        return f"SparseBitMatrix({self.row_count}×{self.col_count}, nnz={self.nnz})"


def _peel_once(lines: np.ndarray, others: np.ndarray):
    """消去一批只含一个非零元的线（列或行）

    这些线是互不相同的单位向量，各贡献秩 1；消去后删掉它们以及所对的另一维

    Returns:
        (本轮主元数, 剩余 lines, 剩余 others)
    """
    counts = np.bincount(lines)
    single = counts[lines] == 1
    if not single.any():
        return 0, lines, others
    partners, first = np.unique(others[single], return_index=True)
    dead_lines = np.zeros(counts.size, dtype=bool)
    dead_lines[lines[single][first]] = True
    dead_others = np.zeros(int(others.max()) + 1, dtype=bool)
    dead_others[partners] = True
    keep = ~(dead_lines[lines] | dead_others[others])
    return int(partners.size), lines[keep], others[keep]


def _rank_words(words: np.ndarray) -> int:
    """按列找主元的消元，每个主元用一次整行异或清掉下方的该列"""
    work = words.copy()
    row_count, width = work.shape
    pivots = 0
    for w in range(width):
        for bit in range(WORD_BITS):
            if pivots == row_count:
                return pivots
            hits = np.flatnonzero(work[pivots:, w] & np.uint64(1 << bit))
            if not hits.size:
                continue
            pivot = pivots + hits[0]
            if hits[0]:
                work[[pivots, pivot]] = work[[pivot, pivots]]
            below = pivots + hits[1:]
            if below.size:
                work[below, w:] ^= work[pivots, w:]
            pivots += 1
    return pivots


def rank(matrix: SparseBitMatrix) -> int:
    """GF(2) 上的秩

    先反复消去单元素列与单元素行，剩下的部分压缩后以较短的一维为列做消元

    Args:
        matrix: 矩阵（不会被修改）

    Returns:
        秩
    """
    if matrix._rank is None:
        rows, cols = matrix._rows, matrix._cols
        value = 0
        while rows.size:
            by_col, cols, rows = _peel_once(cols, rows)
            by_row, rows, cols = _peel_once(rows, cols) if rows.size else (0, rows, cols)
            if not by_col and not by_row:
                break
            value += by_col + by_row
        if rows.size:
            _, rows = np.unique(rows, return_inverse=True)
            _, cols = np.unique(cols, return_inverse=True)
            rows, cols = rows.reshape(-1), cols.reshape(-1)
            row_count, col_count = int(rows.max()) + 1, int(cols.max()) + 1
            logger.debug("rank %r: 剥离 %d 个主元后剩 %d×%d", matrix, value, row_count, col_count)
            if col_count > row_count:
                rows, cols = cols, rows
                row_count, col_count = col_count, row_count
            residue = SparseBitMatrix.from_coo(row_count, col_count, rows, cols)
            value += _rank_words(residue.to_words())
        matrix._rank = value
    return matrix._rank


def homology_dims(d_in: SparseBitMatrix, d_out: SparseBitMatrix) -> int:
    """C_{i-1} → C_i → C_{i+1} 在 C_i 处的同调维数

    Args:
        d_in: C_{i-1} → C_i
        d_out: C_i → C_{i+1}

    Returns:
        dim C_i - rank(d_out) - rank(d_in)

    Raises:
        IntegrityError: 维数不匹配或 d_out ∘ d_in ≠ 0
    """
    if d_in.row_count != d_out.col_count:
        raise IntegrityError(
            f"维数不匹配: d_in 的靶维数 {d_in.row_count} ≠ d_out 的源维数 {d_out.col_count}"
        )
    if not d_out.compose(d_in).is_zero():
        raise IntegrityError("d_out ∘ d_in ≠ 0，链复形构造有误")
    return d_out.col_count - rank(d_out) - rank(d_in)
