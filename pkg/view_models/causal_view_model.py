import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

from main_logic.batch_importer import BatchImporter
from main_logic.causality import decide
from main_logic.config import RunConfig
from main_logic.errors import CausalityAssistError
from main_logic.linkdiag import braid_closure, parse_braid
from main_logic.skies import Event, end_to_end, parse_event_pair
from manager.cache_manager import ResultCacheManager
from view_models.homology_view_model import CachedHomologyEngine, open_cache

logger = logging.getLogger(__name__)

# 每个工作进程一个引擎（及其缓存连接）
_worker_engines: Dict[Tuple[int, Optional[str]], CachedHomologyEngine] = {}


def _worker_engine(crossing_limit: int, cache_path: Optional[str]) -> CachedHomologyEngine:
    key = (crossing_limit, cache_path)
    engine = _worker_engines.get(key)
    if engine is None:
        cache = ResultCacheManager(cache_path) if cache_path else None
        engine = CachedHomologyEngine(crossing_limit, cache)
        _worker_engines[key] = engine
    return engine


def decide_pair_task(task: Tuple[int, Event, Event, RunConfig]) -> Dict[str, Any]:
    """批量模式的工作函数（顶层函数，便于多进程序列化）

    Args:
        task: (行号, 事件, 事件, 配置)

    Returns:
        该行的结果字典；业务异常记为 error 而不中断整批
    """
    config = task[3]
    return _decide_pair(task, _worker_engine(config.crossing_limit, config.cache_db_path()))


def _decide_pair(task: Tuple[int, Event, Event, RunConfig], engine: CachedHomologyEngine) -> Dict[str, Any]:
    line_no, x, y, config = task
    try:
        report = end_to_end(x, y, config.route, epsilon=config.epsilon,
                            delta=config.delta, engine=engine)
    except CausalityAssistError as e:
        return {"line": line_no, "events": [str(x), str(y)], "error": str(e),
                "exit_code": e.exit_code}
    result = {"line": line_no}
    result.update(report.to_dict())
    result["agrees_with_oracle"] = report.agrees
    return result


class CausalViewModel:
    """因果判定视图模型

    负责 causal 命令：单个事件对、辫子词或批量文件
    """

    def __init__(self, config: RunConfig):
        """初始化因果判定视图模型

        Args:
            config: 运行配置
        """
        self.config = config
        self.cache = open_cache(config)
        self.engine = CachedHomologyEngine(config.crossing_limit, self.cache)
        self.batch_importer = BatchImporter()

    def decide_events(self, text: str) -> Dict[str, Any]:
        """判定 "px,py,t;qx,qy,s" 给出的一对事件

        Returns:
            判定结果字典，related 字段决定退出码
        """
        x, y = parse_event_pair(text)
        report = end_to_end(x, y, self.config.route, epsilon=self.config.epsilon,
                            delta=self.config.delta, engine=self.engine)
        result = report.to_dict()
        result["agrees_with_oracle"] = report.agrees
        return result

    def decide_braid(self, braid_text: str, strands: int) -> Dict[str, Any]:
        """判定辫子闭包给出的一对天空

        Raises:
            HypothesisError: 闭包不是一对天空
        """
        diagram = braid_closure(parse_braid(braid_text, strands))
        verdict = decide(diagram, self.config.route, self.engine)
        result = verdict.to_dict()
        result["word"] = list(diagram.presentation.letters)
        return result

    def decide_batch(self, path: str) -> Dict[str, Any]:
        """批量判定文件中的事件对，结果顺序与输入顺序一致

        Args:
            path: 事件对文件

        Returns:
            {"results", "failed_records", "success", "failed"}
        """
        imported = self.batch_importer.import_pairs(path)
        if "error" in imported:
            return {"results": [], "failed_records": [], "success": 0, "failed": 0,
                    "error": imported["error"]}
        tasks = [(line_no, x, y, self.config) for line_no, x, y in imported["pairs"]]
        logger.info("批量判定 %d 对事件，%d 个进程", len(tasks), self.config.workers)
        results: List[Dict[str, Any]]
        if self.config.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self.config.workers) as executor:
                results = list(executor.map(decide_pair_task, tasks, chunksize=8))
        else:
            results = [_decide_pair(task, self.engine) for task in tasks]
        return {
            "results": results,
            "failed_records": imported["failed_records"],
            "success": sum(1 for r in results if "error" not in r),
            "failed": imported["failed"] + sum(1 for r in results if "error" in r),
        }

    def write_template(self, path: Optional[str] = None) -> str:
        return self.batch_importer.generate_pairs_template(path)

    def close(self) -> None:
        """关闭数据库连接
        """
        if self.cache is not None:
            self.cache.close()
