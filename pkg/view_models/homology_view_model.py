import logging
from typing import Any, Dict, Optional

from main_logic.causality import HomologyEngine
from main_logic.config import RunConfig
from main_logic.cube import build_akh_complex, build_kh_complex, dump_complex
from main_logic.errors import DiagramParseError
from main_logic.invariants import GradedDims, akh, graded_euler, jones_polynomial, kh
from main_logic.linkdiag import (
    AnnularDiagram,
    PlanarDiagram,
    annular_to_planar,
    braid_closure,
    diagram_hash,
    parse_braid,
    parse_pd,
)
from manager.cache_manager import ResultCacheManager

logger = logging.getLogger(__name__)


class CachedHomologyEngine(HomologyEngine):
    """先查结果缓存再计算的同调引擎"""

    def __init__(self, crossing_limit: int, cache: Optional[ResultCacheManager] = None):
        super().__init__(crossing_limit)
        self.cache = cache

    def _cached(self, kind: str, diagram, compute) -> GradedDims:
        if self.cache is None:
            return compute(diagram, self.crossing_limit)
        key = diagram_hash(diagram)
        dims = self.cache.get(kind, key)
        if dims is None:
            dims = compute(diagram, self.crossing_limit)
            self.cache.put(kind, dims)
        return dims

    def kh(self, diagram: PlanarDiagram) -> GradedDims:
        return self._cached("kh", diagram, kh)

    def akh(self, diagram: AnnularDiagram) -> GradedDims:
        return self._cached("akh", diagram, akh)


def open_cache(config: RunConfig) -> Optional[ResultCacheManager]:
    """按配置打开缓存，未配置缓存目录时返回 None"""
    path = config.cache_db_path()
    if path is None:
        return None
    return ResultCacheManager(path)


class HomologyViewModel:
    """同调视图模型

    负责 kh / akh 命令：解析输入、查缓存、计算并整理成可渲染的字典
    """

    def __init__(self, config: RunConfig):
        """初始化同调视图模型

        Args:
            config: 运行配置
        """
        self.config = config
        self.cache = open_cache(config)
        self.engine = CachedHomologyEngine(config.crossing_limit, self.cache)

    def load_planar(self, pd_text: Optional[str] = None, braid_text: Optional[str] = None,
                    strands: Optional[int] = None) -> PlanarDiagram:
        """由 PD 码或辫子词得到平面图

        Raises:
            DiagramParseError: 两种输入都没有或都给出，或解析失败
        """
        if (pd_text is None) == (braid_text is None):
            raise DiagramParseError("需要且只能给出 --pd 或 --braid 之一")
        if pd_text is not None:
            return parse_pd(pd_text)
        return annular_to_planar(self.load_annular(braid_text, strands))

    def load_annular(self, braid_text: Optional[str], strands: Optional[int]) -> AnnularDiagram:
        if braid_text is None:
            raise DiagramParseError("需要 --braid")
        if strands is None:
            raise DiagramParseError("--braid 需要同时给出 --strands")
        return braid_closure(parse_braid(braid_text, strands))

    def compute_kh(self, diagram: PlanarDiagram, dump: bool = False) -> Dict[str, Any]:
        """计算 Kh 并整理结果

        Args:
            diagram: 平面图
            dump: 是否附上链复形的调试输出

        Returns:
            结果字典
        """
        dims = self.engine.kh(diagram)
        result = {
            "invariant": "kh",
            "crossings": diagram.crossing_count,
            "components": diagram.component_count,
            "dims": dims,
            "euler": str(graded_euler(dims)),
            "jones": str(jones_polynomial(diagram, self.config.crossing_limit)),
        }
        if dump:
            result["complex"] = dump_complex(build_kh_complex(diagram, self.config.crossing_limit))
        return result

    def compute_akh(self, diagram: AnnularDiagram, dump: bool = False) -> Dict[str, Any]:
        """计算 AKh 并整理结果"""
        dims = self.engine.akh(diagram)
        result = {
            "invariant": "akh",
            "crossings": diagram.crossing_count,
            "components": diagram.component_count,
            "windings": list(diagram.component_windings),
            "dims": dims,
            "euler": str(graded_euler(dims)),
        }
        if dump:
            result["complex"] = dump_complex(build_akh_complex(diagram, self.config.crossing_limit))
        return result

    def close(self) -> None:
        """关闭数据库连接
        """
        if self.cache is not None:
            self.cache.close()
