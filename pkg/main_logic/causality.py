"""因果判定：把天空对的同调与模型链环比较

两条路线：
- AKh 路线: 比较 AKh(L) 与 AKh(U2)
- Kh 路线: 加入经线 μ 后比较 Kh(L ∪ μ) 与 Kh(P3)
两者都相等时事件无因果关系。
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional

from main_logic.cube import DEFAULT_CROSSING_LIMIT
from main_logic.errors import HypothesisError, IntegrityError
from main_logic.invariants import GradedDims, akh, kh, same_invariant
from main_logic.linkdiag import (
    AnnularDiagram,
    PlanarDiagram,
    augment_with_meridian,
    model_link,
)

logger = logging.getLogger(__name__)


class Route(Enum):
    AKH = "akh"
    KH = "kh"
    SKY_INTERSECTION = "sky_intersection"


@dataclass(frozen=True)
class Verdict:
    """判定结果

    Attributes:
        related: 是否有因果关系
        route: 判定路线
        computed: 输入链环的同调（天空相交时为 None）
        model_dims: 模型链环的同调
        model_name: U2、P3 或 none
        witness_theta: 天空交点的 θ
        cross_check: route=both 时另一条路线的结果
    """

    related: bool
    route: Route
    computed: Optional[GradedDims] = None
    model_dims: Optional[GradedDims] = None
    model_name: str = "none"
    witness_theta: Optional[float] = None
    cross_check: Optional["Verdict"] = None

    def __post_init__(self):
        if self.route is Route.SKY_INTERSECTION:
            if not self.related:
                raise IntegrityError("天空相交的判定必须是有因果关系")
        elif self.computed is None or self.model_dims is None:
            raise IntegrityError(f"{self.route.value} 路线的判定缺少同调证据")

    def to_dict(self) -> dict:
        result = {
            "related": self.related,
            "route": self.route.value,
            "model": self.model_name,
            "computed": None if self.computed is None else self.computed.to_json_obj(),
            "model_dims": None if self.model_dims is None else self.model_dims.to_json_obj(),
        }
        if self.witness_theta is not None:
            result["witness_theta"] = self.witness_theta
        if self.cross_check is not None:
            result["cross_check"] = self.cross_check.to_dict()
        return result


class HomologyEngine:
    """计算 Kh/AKh 的入口，缓存版本在 view_models 中继承它"""

    def __init__(self, crossing_limit: int = DEFAULT_CROSSING_LIMIT):
        self.crossing_limit = crossing_limit
        self._references: Dict[str, GradedDims] = {}

    def kh(self, diagram: PlanarDiagram) -> GradedDims:
        return kh(diagram, self.crossing_limit)

    def akh(self, diagram: AnnularDiagram) -> GradedDims:
        return akh(diagram, self.crossing_limit)

    def reference(self, name: str) -> GradedDims:
        """模型链环 U2（AKh）或 P3（Kh）的同调

        经由本引擎的 akh/kh 计算，受同一交叉数上限约束；带缓存的引擎会把结果写入缓存。
        同一引擎内只算一次。
        """
        if name not in self._references:
            model = model_link(name)
            self._references[name] = self.akh(model) if name == "U2" else self.kh(model)
        return self._references[name]


def validate_sky_pair(diagram: AnnularDiagram) -> List[dict]:
    """检查环形图是否满足一对天空的前提

    Returns:
        违反项列表，空列表表示满足前提
    """
    violations = []
    count = diagram.component_count
    if count != 2:
        noun = "component" if count == 1 else "components"
        violations.append(
            {"code": "component_count", "message": f"{count} {noun}, expected 2"}
        )
    for index, winding in enumerate(diagram.component_windings):
        if winding != 1:
            violations.append(
                {
                    "code": "winding",
                    "message": f"component {index} has winding {winding}, expected 1",
                }
            )
    return violations


def _require_sky_pair(diagram: AnnularDiagram) -> None:
    violations = validate_sky_pair(diagram)
    if violations:
        raise HypothesisError(violations)


def decide_akh(diagram: AnnularDiagram, engine: Optional[HomologyEngine] = None) -> Verdict:
    """AKh 路线：AKh(L) ≅ AKh(U2) 当且仅当无因果关系

    Raises:
        HypothesisError: 输入不是一对天空
    """
    engine = engine or HomologyEngine()
    _require_sky_pair(diagram)
    computed = engine.akh(diagram)
    model = engine.reference("U2")
    related = not same_invariant(computed, model)
    logger.info("AKh 路线: 总维数 %d / 模型 %d → related=%s",
                computed.total_dim, model.total_dim, related)
    return Verdict(related, Route.AKH, computed, model, "U2")


def decide_kh(diagram: AnnularDiagram, engine: Optional[HomologyEngine] = None) -> Verdict:
    """Kh 路线：Kh(L ∪ μ) ≅ Kh(P3) 当且仅当无因果关系

    Raises:
        HypothesisError: 输入不是一对天空
    """
    engine = engine or HomologyEngine()
    _require_sky_pair(diagram)
    computed = engine.kh(augment_with_meridian(diagram))
    model = engine.reference("P3")
    related = not same_invariant(computed, model)
    logger.info("Kh 路线: 总维数 %d / 模型 %d → related=%s",
                computed.total_dim, model.total_dim, related)
    return Verdict(related, Route.KH, computed, model, "P3")


def decide(
    diagram: AnnularDiagram, route: str = "akh", engine: Optional[HomologyEngine] = None
) -> Verdict:
    """按路线判定；route="both" 时两条路线都算并要求一致

    Raises:
        IntegrityError: 两条路线结论不同
        ValueError: 未知路线
    """
    if route == "akh":
        return decide_akh(diagram, engine)
    if route == "kh":
        return decide_kh(diagram, engine)
    if route == "both":
        primary = decide_akh(diagram, engine)
        secondary = decide_kh(diagram, engine)
        if primary.related != secondary.related:
            raise IntegrityError(
                f"两条路线结论不同: akh related={primary.related}, kh related={secondary.related}"
            )
        return Verdict(
            primary.related,
            primary.route,
            primary.computed,
            primary.model_dims,
            primary.model_name,
            cross_check=secondary,
        )
    raise ValueError(f"未知路线: {route}")
