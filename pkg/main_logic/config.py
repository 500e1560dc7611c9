import os
from dataclasses import dataclass, replace
from typing import Optional

from main_logic.errors import ConfigError

# 约定标签：分次规范或算法改变时必须修改，缓存中旧标签的结果会被拒绝
CONVENTION_TAG = "z2-ij-k:v1"
CODE_VERSION = "1.0.0"

CACHE_DIR_ENV = "CAUSALITY_ASSIST_CACHE_DIR"
CACHE_DB_NAME = "causality_cache.db"

ROUTES = ("akh", "kh", "both")
OUTPUTS = ("json", "text")


@dataclass(frozen=True)
class RunConfig:
    """运行配置

    默认值即命令行默认值；cache_dir 可由环境变量覆盖
    """

    crossing_limit: int = 20
    epsilon: float = 1e-9
    delta: float = 1e-9
    route: str = "akh"
    output: str = "json"
    cache_dir: Optional[str] = None
    seed: int = 0
    workers: int = 1
    use_cache: bool = True

    def validate(self) -> "RunConfig":
        """检查配置合法性

        Returns:
            配置本身，便于链式调用

        Raises:
            ConfigError: 任一字段非法
        """
        if self.crossing_limit < 1:
            raise ConfigError(f"crossing_limit 必须 ≥ 1，当前为 {self.crossing_limit}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon 必须 > 0，当前为 {self.epsilon}")
        if not self.delta > 0:
            raise ConfigError(f"delta 必须 > 0，当前为 {self.delta}")
        if self.workers < 1:
            raise ConfigError(f"workers 必须 ≥ 1，当前为 {self.workers}")
        if self.route not in ROUTES:
            raise ConfigError(f"未知路线: {self.route}")
        if self.output not in OUTPUTS:
            raise ConfigError(f"未知输出格式: {self.output}")
        return self

    def with_env(self) -> "RunConfig":
        """应用环境变量覆盖

        Returns:
            新的配置对象
        """
        env_dir = os.environ.get(CACHE_DIR_ENV)
        if env_dir and self.cache_dir is None:
            return replace(self, cache_dir=env_dir)
        return self

    def cache_db_path(self) -> Optional[str]:
        """缓存数据库路径，未配置缓存目录时返回 None"""
        if not self.use_cache or not self.cache_dir:
            return None
        return os.path.join(self.cache_dir, CACHE_DB_NAME)
