import os
from typing import Any, Dict, List, Optional, Tuple

from charset_normalizer import from_bytes

from main_logic.errors import CausalityAssistError
from main_logic.skies import Event, parse_event_pair


class BatchImporter:
    """事件对批量导入类

    用于生成事件对文件模板和批量读取事件对
    文件格式：每行一对事件 "px,py,t;qx,qy,s"，空行和 # 开头的行忽略
    """

    def __init__(self, template_dir: str = "template"):
        """初始化批量导入类

        Args:
            template_dir: 模板目录
        """
        self.template_dir = template_dir

    def _ensure_template_dir(self) -> None:
        """确保模板目录存在
        """
        if not os.path.exists(self.template_dir):
            os.makedirs(self.template_dir)

    def _detect_encoding(self, file_path: str) -> str:
        """检测文件编码

        Args:
            file_path: 文件路径

        Returns:
            检测到的编码
        """
        with open(file_path, 'rb') as f:
            content = f.read()
            result = from_bytes(content).best()
            if result:
                return result.encoding

        return 'utf-8'

    def generate_pairs_template(self, path: Optional[str] = None) -> str:
        """生成事件对模板

        Args:
            path: 模板文件路径，默认写到模板目录下的 pairs_template.txt

        Returns:
            模板文件路径
        """
        if path is None:
            self._ensure_template_dir()
            path = os.path.join(self.template_dir, "pairs_template.txt")

        # 示例数据：类时、类空、类光各一对
        lines = [
            "# 每行一对事件: px,py,t;qx,qy,s",
            "0,0,0;0.5,0,1",
            "0,0,0;3,0,1",
            "0,0,0;1,0,1",
        ]
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")

        return path

    def import_pairs(self, path: str) -> Dict[str, Any]:
        """从文件批量读取事件对

        Args:
            path: 事件对文件路径

        Returns:
            导入结果，pairs 为 (行号, 事件, 事件) 列表，另含成功和失败的数量
        """
        pairs: List[Tuple[int, Event, Event]] = []
        failed_records = []

        try:
            # 检测文件编码
            encoding = self._detect_encoding(path)
            with open(path, "r", encoding=encoding) as f:
                for line_no, raw in enumerate(f, start=1):
                    row = raw.strip().lstrip("\ufeff")
                    if not row or row.startswith("#"):
                        continue
                    try:
                        x, y = parse_event_pair(row)
                        pairs.append((line_no, x, y))
                    except CausalityAssistError as e:
                        failed_records.append({"line": line_no, "row": row, "error": str(e)})

        except OSError as e:
            return {"success": 0, "failed": 0, "pairs": [], "error": str(e)}

        return {
            "success": len(pairs),
            "failed": len(failed_records),
            "pairs": pairs,
            "failed_records": failed_records,
        }
