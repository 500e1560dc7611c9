from typing import List, Optional


class CausalityAssistError(Exception):
    """所有业务异常的基类

    exit_code 为命令行退出码（见 app.py 的约定）
    """

    exit_code = 2


class DiagramParseError(CausalityAssistError):
    """辫子词、PD 码或事件文本无法解析"""

    def __init__(self, message: str, token: Optional[str] = None):
        """初始化解析异常

        Args:
            message: 错误信息
            token: 出错的输入片段
        """
        super().__init__(message)
        self.token = token


class MoveError(CausalityAssistError):
    """辫子变换的位置或生成元非法"""


class DegenerateInputError(CausalityAssistError):
    """退化输入（例如两个事件完全相同）"""


class HypothesisError(CausalityAssistError):
    """输入不是一对天空（定理的前提不成立）"""

    def __init__(self, violations: List[dict]):
        """初始化前提异常

        Args:
            violations: 违反项列表，每项包含 code 和 message
        """
        self.violations = list(violations)
        super().__init__("; ".join(v["message"] for v in self.violations))


class ConfigError(CausalityAssistError):
    """运行配置非法"""


class GenericityError(CausalityAssistError):
    """旋转投影方向后仍无法达到一般位置"""

    exit_code = 3

    def __init__(self, message: str, margin: float):
        super().__init__(f"{message} (margin={margin:.3e})")
        self.margin = margin


class ResourceLimitError(CausalityAssistError):
    """交叉点数超过配置上限"""

    exit_code = 3

    def __init__(self, crossings: int, limit: int):
        super().__init__(f"图有 {crossings} 个交叉点，超过上限 crossing_limit={limit}")
        self.crossings = crossings
        self.limit = limit


class IntegrityError(CausalityAssistError):
    """内部一致性检查失败（d∘d≠0 等），说明链复形构造有缺陷"""

    exit_code = 3
