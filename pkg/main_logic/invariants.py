import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple, Union

import sympy as sp

from main_logic.config import CONVENTION_TAG
from main_logic.cube import (
    DEFAULT_CROSSING_LIMIT,
    ChainComplex,
    build_akh_complex,
    build_kh_complex,
    resolution_counts,
)
from main_logic.errors import IntegrityError
from main_logic.gf2linalg import homology_dims
from main_logic.linkdiag import AnnularDiagram, PlanarDiagram, annular_to_planar, diagram_hash

logger = logging.getLogger(__name__)

q = sp.Symbol("q")

Grading = Tuple[int, ...]


@dataclass(frozen=True)
class GradedDims:
    """分次维数：(i, j) 或 (i, j, k) → 正维数

    相等性只比较维数表和约定标签，不比较图哈希
    """

    entries: Tuple[Tuple[Grading, int], ...]
    convention: str = CONVENTION_TAG
    diagram_hash: str = field(default="", compare=False)

    @classmethod
    def from_mapping(
        cls,
        dims: Mapping[Grading, int],
        diagram_hash: str = "",
        convention: str = CONVENTION_TAG,
    ) -> "GradedDims":
        entries = tuple(sorted((tuple(g), int(d)) for g, d in dims.items() if d))
        for grading, dim in entries:
            if dim < 0:
                raise ValueError(f"维数不能为负: {grading} → {dim}")
        lengths = {len(g) for g, _ in entries}
        if len(lengths) > 1:
            raise ValueError(f"分次长度不一致: {sorted(lengths)}")
        return cls(entries, convention, diagram_hash)

    @property
    def dims(self) -> Dict[Grading, int]:
        return dict(self.entries)

    @property
    def annular(self) -> bool:
        return bool(self.entries) and len(self.entries[0][0]) == 3

    @property
    def total_dim(self) -> int:
        return sum(d for _, d in self.entries)

    def to_json_obj(self) -> list:
        """[{"i","j","k","dim"}, ...]，按分次字典序"""
        rows = []
        for grading, dim in self.entries:
            k = grading[2] if len(grading) == 3 else None
            rows.append({"i": grading[0], "j": grading[1], "k": k, "dim": dim})
        return rows

    def to_json(self) -> str:
        payload = {
            "convention": self.convention,
            "diagram_hash": self.diagram_hash,
            "dims": self.to_json_obj(),
        }
        return json.dumps(payload, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "GradedDims":
        payload = json.loads(text)
        dims = {}
        for row in payload["dims"]:
            grading = (row["i"], row["j"]) if row.get("k") is None else (row["i"], row["j"], row["k"])
            dims[grading] = row["dim"]
        return cls.from_mapping(dims, payload.get("diagram_hash", ""), payload["convention"])


@dataclass(frozen=True)
class LaurentPolynomial:
    """整系数 Laurent 多项式，terms 为 (指数, 非零系数)"""

    terms: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def from_mapping(cls, coefficients: Mapping[int, int]) -> "LaurentPolynomial":
        return cls(tuple(sorted((e, c) for e, c in coefficients.items() if c)))

    @classmethod
    def from_expr(cls, expr) -> "LaurentPolynomial":
        """由 q 的 sympy 表达式构造"""
        coefficients: Dict[int, int] = defaultdict(int)
        for term, coeff in sp.expand(expr).as_coefficients_dict().items():
            exponent = term.as_powers_dict().get(q, 0) if term != 1 else 0
            coefficients[int(exponent)] += int(coeff)
        return cls.from_mapping(coefficients)

    @property
    def coefficients(self) -> Dict[int, int]:
        return dict(self.terms)

    def to_expr(self):
        return sum((c * q ** e for e, c in self.terms), sp.Integer(0))

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        return str(self.to_expr())


def _complex_homology(complex_: ChainComplex, diagram_key: str) -> GradedDims:
    dims: Dict[Grading, int] = {}
    for grading, block in complex_.blocks.items():
        for i in block.degrees():
            dim = homology_dims(block.differential(i - 1), block.differential(i))
            if dim < 0:
                raise IntegrityError(f"块 {grading} 在 i={i} 处同调维数为负")
            if dim:
                dims[(i,) + grading] = dim
    return GradedDims.from_mapping(dims, diagram_key)


def kh(diagram: PlanarDiagram, crossing_limit: int = DEFAULT_CROSSING_LIMIT) -> GradedDims:
    """Khovanov 同调 Kh(L; Z/2) 的 (i, j) 维数"""
    complex_ = build_kh_complex(diagram, crossing_limit)
    result = _complex_homology(complex_, diagram_hash(diagram))
    logger.info("Kh: %d 个交叉, %d 个生成元, 总维数 %d",
                diagram.crossing_count, complex_.total_generators(), result.total_dim)
    return result


def akh(diagram: AnnularDiagram, crossing_limit: int = DEFAULT_CROSSING_LIMIT) -> GradedDims:
    """环形 Khovanov 同调 AKh(L; Z/2) 的 (i, j, k) 维数"""
    complex_ = build_akh_complex(diagram, crossing_limit)
    result = _complex_homology(complex_, diagram_hash(diagram))
    logger.info("AKh: %d 个交叉, %d 个生成元, 总维数 %d",
                diagram.crossing_count, complex_.total_generators(), result.total_dim)
    return result


def marginalize_k(dims: GradedDims) -> GradedDims:
    """对 k 求和得到 (i, j) 维数"""
    if not dims.annular:
        return dims
    summed: Dict[Grading, int] = defaultdict(int)
    for (i, j, _), dim in dims.entries:
        summed[(i, j)] += dim
    return GradedDims.from_mapping(summed, dims.diagram_hash, dims.convention)


def mirror_dims(dims: GradedDims) -> GradedDims:
    """镜像的同调维数: (i, j[, k]) ↦ (-i, -j[, -k])"""
    return GradedDims.from_mapping(
        {tuple(-g for g in grading): dim for grading, dim in dims.entries},
        dims.diagram_hash,
        dims.convention,
    )


def graded_euler(dims: GradedDims) -> LaurentPolynomial:
    """分次 Euler 示性数 Σ (-1)^i q^j dim"""
    coefficients: Dict[int, int] = defaultdict(int)
    for grading, dim in dims.entries:
        i, j = grading[0], grading[1]
        coefficients[j] += (-1) ** (i % 2) * dim
    return LaurentPolynomial.from_mapping(coefficients)


def _state_sum(diagram: PlanarDiagram, crossing_limit: int):
    counts = resolution_counts(diagram, crossing_limit)
    total = sp.Integer(0)
    for (weight, circles), count in counts.items():
        total += count * (-q) ** weight * (q + 1 / q) ** circles
    n_plus, n_minus = diagram.n_plus, diagram.n_minus
    return sp.expand((-1) ** n_minus * q ** (n_plus - 2 * n_minus) * total)


def chain_euler(
    diagram: PlanarDiagram, crossing_limit: int = DEFAULT_CROSSING_LIMIT
) -> LaurentPolynomial:
    """态和形式的分次 Euler 示性数，不经过任何秩计算

    (-1)^{n₋} q^{n₊-2n₋} Σ_r (-q)^{|r|} (q + q⁻¹)^{#圆周(r)}
    """
    return LaurentPolynomial.from_expr(_state_sum(diagram, crossing_limit))


def jones_polynomial(
    diagram: Union[PlanarDiagram, AnnularDiagram],
    crossing_limit: int = DEFAULT_CROSSING_LIMIT,
) -> LaurentPolynomial:
    """Jones 多项式（q 变量，未归一化的态和除以 q + q⁻¹，平凡纽结为 1）"""
    if isinstance(diagram, AnnularDiagram):
        diagram = annular_to_planar(diagram)
    quotient = sp.cancel(_state_sum(diagram, crossing_limit) / (q + 1 / q))
    return LaurentPolynomial.from_expr(sp.expand(quotient))


def same_invariant(first: GradedDims, second: GradedDims) -> bool:
    """比较两个同调（同一约定下维数表相等即同构）

    Raises:
        IntegrityError: 约定标签不同，拒绝比较
    """
    if first.convention != second.convention:
        raise IntegrityError(
            f"约定标签不同，拒绝比较: {first.convention} vs {second.convention}"
        )
    return first.entries == second.entries


def describe(dims: Optional[GradedDims]) -> str:
    if dims is None:
        return "-"
    return ", ".join(f"{grading}:{dim}" for grading, dim in dims.entries) or "0"
