import hashlib
import logging
import os
from datetime import datetime
from typing import Any, Dict, Optional

from db.sqlite_db import SQLiteDB
from main_logic.config import CODE_VERSION, CONVENTION_TAG
from main_logic.invariants import GradedDims

logger = logging.getLogger(__name__)


class ResultCacheManager:
    """同调结果缓存管理类

    用于管理 graded_dims 表，包含增删查功能；
    键由 (种类, 图哈希, 约定标签, 代码版本) 决定
    """

    def __init__(self, db_path: str, convention: str = CONVENTION_TAG,
                 code_version: str = CODE_VERSION):
        """初始化缓存管理类

        Args:
            db_path: 数据库文件路径，所在目录不存在时创建
            convention: 约定标签
            code_version: 代码版本
        """
        directory = os.path.dirname(db_path)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
        self.db = SQLiteDB(db_path)
        self.convention = convention
        self.code_version = code_version
        self._init_cache_table()

    def _init_cache_table(self) -> None:
        """初始化缓存表
        """
        columns = {
            "id": "INTEGER PRIMARY KEY AUTOINCREMENT",
            "cache_key": "TEXT NOT NULL UNIQUE",
            "diagram_hash": "TEXT NOT NULL",
            "convention": "TEXT NOT NULL",
            "code_version": "TEXT NOT NULL",
            "payload": "TEXT NOT NULL",
            "created_at": "TEXT NOT NULL"
        }
        self.db.create_table("graded_dims", columns)

    def make_key(self, kind: str, diagram_hash: str) -> str:
        """缓存键

        Args:
            kind: kh 或 akh
            diagram_hash: 图哈希

        Returns:
            sha256 十六进制串
        """
        text = f"{kind}|{diagram_hash}|{self.convention}|{self.code_version}"
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def get(self, kind: str, diagram_hash: str) -> Optional[GradedDims]:
        """查询缓存

        Args:
            kind: kh 或 akh
            diagram_hash: 图哈希

        Returns:
            命中时返回同调维数，否则返回 None
        """
        sql = "SELECT * FROM graded_dims WHERE cache_key = ?"
        row = self.db.fetch_one(sql, (self.make_key(kind, diagram_hash),))
        if row is None:
            logger.info("缓存未命中: %s %s", kind, diagram_hash[:12])
            return None
        if row["convention"] != self.convention or row["code_version"] != self.code_version:
            logger.info("缓存约定不符，拒绝使用: %s/%s", row["convention"], row["code_version"])
            return None
        dims = GradedDims.from_json(row["payload"])
        if dims.convention != self.convention:
            logger.info("缓存内容的约定标签不符，拒绝使用: %s", dims.convention)
            return None
        logger.info("缓存命中: %s %s", kind, diagram_hash[:12])
        return dims

    def put(self, kind: str, dims: GradedDims) -> int:
        """写入缓存（同键覆盖）

        Args:
            kind: kh 或 akh
            dims: 同调维数，diagram_hash 不能为空

        Returns:
            行 ID
        """
        if not dims.diagram_hash:
            raise ValueError("缺少图哈希的结果不能写入缓存")
        sql = (
            "INSERT OR REPLACE INTO graded_dims "
            "(cache_key, diagram_hash, convention, code_version, payload, created_at) "
            "VALUES (?, ?, ?, ?, ?, ?)"
        )
        cursor = self.db.execute(sql, (
            self.make_key(kind, dims.diagram_hash),
            dims.diagram_hash,
            dims.convention,
            self.code_version,
            dims.to_json(),
            datetime.now().isoformat(timespec="seconds"),
        ))
        return cursor.lastrowid

    def delete(self, kind: str, diagram_hash: str) -> bool:
        """删除一条缓存

        Returns:
            是否删除成功
        """
        sql = "DELETE FROM graded_dims WHERE cache_key = ?"
        cursor = self.db.execute(sql, (self.make_key(kind, diagram_hash),))
        return cursor.rowcount > 0

    def count(self) -> int:
        row = self.db.fetch_one("SELECT COUNT(*) AS n FROM graded_dims")
        return row["n"] if row else 0

    def get_all_entries(self) -> list:
        """查询所有缓存记录（不含结果内容）"""
        sql = ("SELECT id, cache_key, diagram_hash, convention, code_version, created_at "
               "FROM graded_dims ORDER BY id")
        return self.db.fetch_all(sql)

    def clear(self) -> int:
        """清空缓存

        Returns:
            删除的行数
        """
        cursor = self.db.execute("DELETE FROM graded_dims")
        return cursor.rowcount

    def stats(self) -> Dict[str, Any]:
        return {"entries": self.count(), "convention": self.convention,
                "code_version": self.code_version, "path": self.db.db_path}

    def close(self) -> None:
        """关闭数据库连接
        """
        self.db.close()
