import logging
import math
import random
import tempfile
import time
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from main_logic.causality import HomologyEngine, decide_akh, decide_kh
from main_logic.config import RunConfig
from main_logic.corpus import random_braid_word, random_moves, sky_pair_corpus, standard_corpus
from main_logic.cube import build_akh_complex, build_kh_complex, check_square_zero
from main_logic.errors import CausalityAssistError
from main_logic.invariants import (
    GradedDims,
    akh,
    chain_euler,
    graded_euler,
    kh,
    marginalize_k,
    mirror_dims,
)
from main_logic.linkdiag import annular_to_planar, braid_closure, mirror, model_link, serialize_braid
from main_logic.skies import end_to_end, random_event_pair
from manager.cache_manager import ResultCacheManager
from view_models.homology_view_model import CachedHomologyEngine

logger = logging.getLogger(__name__)

SUITES = ("models", "euler", "invariance", "integrity", "routes", "oracle", "mirror", "cache")

# 不变性套件：随机辫子词的最大字母数与每个词上的变换次数
WORD_LETTERS = 8
MOVES_PER_WORD = 3


class SuiteResult:
    """一个自检套件的结果"""

    def __init__(self, name: str):
        self.name = name
        self.checks = 0
        self.failures: List[Dict[str, Any]] = []
        self.skipped = 0

    def check(self, ok: bool, case: str, detail: str = "") -> bool:
        self.checks += 1
        if not ok:
            self.failures.append({"case": case, "detail": detail})
            logger.warning("[%s] 失败: %s %s", self.name, case, detail)
        return ok

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "skipped": self.skipped,
            "failures": self.failures,
        }


def _dims_text(dims: GradedDims) -> str:
    return ",".join(f"{g}:{d}" for g, d in dims.entries)


class VerifyViewModel:
    """自检视图模型

    负责 verify 命令：运行各套件并汇总成机器可读的报告
    """

    def __init__(self, config: RunConfig, max_crossings: int = 12, pairs: int = 200,
                 words: int = 50):
        """初始化自检视图模型

        Args:
            config: 运行配置（seed、epsilon、delta、crossing_limit）
            max_crossings: 图库的交叉数上限
            pairs: oracle/routes 套件的随机事件对数
            words: invariance 套件的随机辫子数
        """
        self.config = config
        self.max_crossings = min(max_crossings, config.crossing_limit)
        self.pairs = pairs
        self.words = words
        self.engine = HomologyEngine(config.crossing_limit)
        self._runners: Dict[str, Callable[[SuiteResult], None]] = {
            "models": self._run_models,
            "euler": self._run_euler,
            "invariance": self._run_invariance,
            "integrity": self._run_integrity,
            "routes": self._run_routes,
            "oracle": self._run_oracle,
            "mirror": self._run_mirror,
            "cache": self._run_cache,
        }

    def run(self, suites: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        """运行套件

        Args:
            suites: 套件名列表，None 表示全部

        Returns:
            {"seed", "passed", "suites": [...]}
        """
        names = list(suites) if suites else list(SUITES)
        unknown = [n for n in names if n not in self._runners]
        if unknown:
            raise ValueError(f"未知套件: {', '.join(unknown)}")
        results = []
        for name in names:
            result = SuiteResult(name)
            start = time.perf_counter()
            try:
                self._runners[name](result)
            except CausalityAssistError as e:
                result.check(False, "exception", f"{type(e).__name__}: {e}")
            # 耗时只写日志，报告内容只取决于输入和种子
            logger.info("套件 %s: %d 项检查, %d 项失败, %.2fs",
                        name, result.checks, len(result.failures), time.perf_counter() - start)
            results.append(result.to_dict())
        return {
            "seed": self.config.seed,
            "passed": all(r["passed"] for r in results),
            "suites": results,
        }

    def _run_models(self, result: SuiteResult) -> None:
        unknot = kh(model_link("unknot"))
        result.check(unknot.dims == {(0, 1): 1, (0, -1): 1}, "kh(unknot)", _dims_text(unknot))

        hopf = kh(model_link("hopf_positive"))
        expected = {(0, 0): 1, (0, 2): 1, (2, 4): 1, (2, 6): 1}
        result.check(hopf.dims == expected, "kh(hopf_positive)", _dims_text(hopf))
        negative = kh(model_link("hopf_negative"))
        result.check(negative == mirror_dims(hopf), "kh(hopf_negative)", _dims_text(negative))

        u2 = akh(model_link("U2"))
        expected = {(0, 2, 2): 1, (0, 0, 0): 2, (0, -2, -2): 1}
        result.check(u2.dims == expected, "akh(U2)", _dims_text(u2))
        verdict = decide_akh(model_link("U2"), self.engine)
        result.check(not verdict.related, "decide_akh(U2)")

        p3 = model_link("P3")
        p3_dims = kh(p3)
        result.check(p3_dims.total_dim == 8, "kh(P3) total", str(p3_dims.total_dim))
        result.check(graded_euler(p3_dims) == chain_euler(p3), "euler(P3)")

    def _run_euler(self, result: SuiteResult) -> None:
        for name, diagram in standard_corpus(self.max_crossings):
            dims = self.engine.kh(diagram)
            result.check(graded_euler(dims) == chain_euler(diagram, self.config.crossing_limit),
                         f"euler({name})")
            result.check(dims.total_dim >= 2 ** diagram.component_count,
                         f"lower_bound({name})", str(dims.total_dim))
        for name, diagram in sky_pair_corpus():
            summed = marginalize_k(self.engine.akh(diagram))
            result.check(graded_euler(summed) == chain_euler(annular_to_planar(diagram)),
                         f"annular_euler({name})")

    def _run_invariance(self, result: SuiteResult) -> None:
        rng = random.Random(self.config.seed)
        for _ in range(self.words):
            word = random_braid_word(rng, max_letters=WORD_LETTERS)
            moved, _ = random_moves(rng, word, MOVES_PER_WORD)
            if max(len(word), len(moved)) > self.config.crossing_limit:
                result.skipped += 1
                continue
            before, after = braid_closure(word), braid_closure(moved)
            case = f"{word.strand_count}:[{serialize_braid(word)}] → [{serialize_braid(moved)}]"
            result.check(sorted(before.component_windings) == sorted(after.component_windings),
                         f"windings {case}")
            result.check(self.engine.akh(before) == self.engine.akh(after), f"akh {case}")
            result.check(
                self.engine.kh(annular_to_planar(before)) == self.engine.kh(annular_to_planar(after)),
                f"kh {case}",
            )

    def _run_integrity(self, result: SuiteResult) -> None:
        for name, diagram in standard_corpus(self.max_crossings):
            check_square_zero(build_kh_complex(diagram, self.config.crossing_limit))
            result.check(True, f"d²=0 kh({name})")
        for name, diagram in sky_pair_corpus():
            check_square_zero(build_akh_complex(diagram, self.config.crossing_limit))
            result.check(True, f"d²=0 akh({name})")

    def _run_routes(self, result: SuiteResult) -> None:
        for name, diagram in sky_pair_corpus():
            first = decide_akh(diagram, self.engine)
            second = decide_kh(diagram, self.engine)
            result.check(first.related == second.related, f"routes({name})")
        rng = np.random.default_rng(self.config.seed)
        for _ in range(self.pairs):
            x, y = random_event_pair(rng)
            first = end_to_end(x, y, "akh", epsilon=self.config.epsilon,
                               delta=self.config.delta, engine=self.engine)
            second = end_to_end(x, y, "kh", epsilon=self.config.epsilon,
                                delta=self.config.delta, engine=self.engine)
            result.check(first.verdict.related == second.verdict.related, f"routes({x};{y})")

    def _run_oracle(self, result: SuiteResult) -> None:
        rng = np.random.default_rng(self.config.seed)
        for _ in range(self.pairs):
            x, y = random_event_pair(rng)
            report = end_to_end(x, y, self.config.route if self.config.route != "both" else "akh",
                                epsilon=self.config.epsilon, delta=self.config.delta,
                                engine=self.engine)
            result.check(report.agrees, f"oracle({x};{y})",
                         f"{report.oracle.kind} vs related={report.verdict.related}")
            angle = float(rng.uniform(0.0, 2.0 * math.pi))
            rotated = end_to_end(x, y, "akh", direction=(math.cos(angle), math.sin(angle)),
                                 epsilon=self.config.epsilon, delta=self.config.delta,
                                 engine=self.engine)
            result.check(rotated.verdict.related == report.verdict.related,
                         f"direction({x};{y})", f"angle={angle:.4f}")
            shift = rng.uniform(-5.0, 5.0, size=3)
            moved = end_to_end(x.translated((shift[0], shift[1]), shift[2]),
                               y.translated((shift[0], shift[1]), shift[2]),
                               "akh", epsilon=self.config.epsilon, delta=self.config.delta,
                               engine=self.engine)
            result.check(moved.verdict.related == report.verdict.related, f"translation({x};{y})")

    def _run_mirror(self, result: SuiteResult) -> None:
        for name, diagram in standard_corpus(self.max_crossings):
            result.check(self.engine.kh(mirror(diagram)) == mirror_dims(self.engine.kh(diagram)),
                         f"mirror({name})")

    def _run_cache(self, result: SuiteResult) -> None:
        with tempfile.TemporaryDirectory() as directory:
            cache = ResultCacheManager(f"{directory}/verify_cache.db")
            try:
                engine = CachedHomologyEngine(self.config.crossing_limit, cache)
                for name, diagram in standard_corpus(min(self.max_crossings, 8)):
                    first = engine.kh(diagram)
                    second = engine.kh(diagram)
                    fresh = kh(diagram, self.config.crossing_limit)
                    result.check(first == second == fresh, f"cache kh({name})")
                for name, diagram in sky_pair_corpus():
                    result.check(engine.akh(diagram) == engine.akh(diagram) == akh(diagram),
                                 f"cache akh({name})")
                result.check(cache.count() > 0, "cache populated", str(cache.count()))
            finally:
                cache.close()
