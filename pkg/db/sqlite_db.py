import logging
import sqlite3
from typing import Any, Dict, List, Optional, Sequence

logger = logging.getLogger(__name__)


class SQLiteDB:
    """同调结果缓存的 SQLite 存储层

    只负责连接和执行语句；键的组成、约定标签校验和 JSON 编解码都在
    ResultCacheManager 中。批量模式的多个工作进程会同时打开同一个文件，
    写锁冲突时按 timeout 等待。":memory:" 用于测试。
    """

    def __init__(self, db_path: str, timeout: float = 30.0):
        """记录缓存文件位置，首次执行语句时才打开连接

        Args:
            db_path: 缓存数据库文件路径（由 RunConfig.cache_db_path 给出）
            timeout: 等待其他工作进程释放写锁的秒数
        """
        self.db_path = db_path
        self.timeout = timeout
        self.connection: Optional[sqlite3.Connection] = None

    def connect(self) -> None:
        """打开缓存文件，不存在则新建；行以 sqlite3.Row 返回，便于按列名取值"""
        self.connection = sqlite3.connect(self.db_path, timeout=self.timeout)
        self.connection.row_factory = sqlite3.Row
        logger.debug("打开缓存数据库 %s", self.db_path)

    def close(self) -> None:
        if self.connection:
            self.connection.close()
            self.connection = None

    def __enter__(self) -> "SQLiteDB":
        if not self.connection:
            self.connect()
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()

    def execute(self, sql: str, params: Optional[Sequence[Any]] = None) -> sqlite3.Cursor:
        """执行一条语句并立即提交

        每次写入（缓存条目的插入、替换、删除）单独提交，
        其他进程随后读取即可看到

        Args:
            sql: 带 ? 占位符的语句
            params: 占位符参数

        Returns:
            游标，可读取 rowcount
        """
        if not self.connection:
            self.connect()

        cursor = self.connection.cursor()
        cursor.execute(sql, tuple(params) if params else ())
        self.connection.commit()
        return cursor

    def fetch_all(self, sql: str, params: Optional[Sequence[Any]] = None) -> List[Dict[str, Any]]:
        """查询全部匹配的缓存行，每行转成 {列名: 值}"""
        cursor = self.execute(sql, params)
        return [dict(row) for row in cursor.fetchall()]

    def fetch_one(self, sql: str, params: Optional[Sequence[Any]] = None) -> Optional[Dict[str, Any]]:
        """查询一条缓存行，未命中返回 None"""
        cursor = self.execute(sql, params)
        row = cursor.fetchone()
        return dict(row) if row else None

    def create_table(self, table_name: str, columns: Dict[str, str]) -> None:
        """建立缓存表（已存在则保持不动）

        Args:
            table_name: 表名
            columns: {列名: 列类型与约束}
        """
        columns_str = ", ".join(f"{col} {col_type}" for col, col_type in columns.items())
        self.execute(f"CREATE TABLE IF NOT EXISTS {table_name} ({columns_str})")
