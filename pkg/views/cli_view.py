import json
import sys
from typing import Any, Dict, List, TextIO

from main_logic.invariants import GradedDims


def to_jsonable(value: Any) -> Any:
    """把结果中的 GradedDims 等对象转换成可 JSON 序列化的结构"""
    if isinstance(value, GradedDims):
        return value.to_json_obj()
    if isinstance(value, dict):
        return {k: to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


class CliView:
    """终端视图

    只负责把视图模型给出的字典写到 stdout，日志走 stderr
    """

    def __init__(self, output: str = "json", stream: TextIO = None):
        """初始化终端视图

        Args:
            output: json 或 text
            stream: 输出流，默认 stdout
        """
        self.output = output
        self.stream = stream or sys.stdout

    def _write(self, text: str) -> None:
        self.stream.write(text)
        if not text.endswith("\n"):
            self.stream.write("\n")

    def _json(self, payload: Any) -> None:
        self._write(json.dumps(to_jsonable(payload), ensure_ascii=False, indent=2))

    def show_homology(self, result: Dict[str, Any]) -> None:
        """显示 kh / akh 结果"""
        if self.output == "json":
            self._json({k: v for k, v in result.items() if k != "complex"})
        else:
            dims: GradedDims = result["dims"]
            lines = [
                f"{result['invariant'].upper()}  crossings={result['crossings']}  "
                f"components={result['components']}  total={dims.total_dim}"
            ]
            lines.extend(self._dims_table(dims))
            lines.append(f"euler: {result['euler']}")
            if "jones" in result:
                lines.append(f"jones: {result['jones']}")
            self._write("\n".join(lines))
        if "complex" in result:
            # 调试输出固定为文本
            self._write(result["complex"])

    def show_verdict(self, result: Dict[str, Any]) -> None:
        """显示单个判定结果"""
        if self.output == "json":
            self._json(result)
            return
        self._write("\n".join(self._verdict_lines(result)))

    def show_batch(self, result: Dict[str, Any]) -> None:
        """显示批量判定结果"""
        if self.output == "json":
            self._json(result)
            return
        lines = []
        for row in result["results"]:
            if "error" in row:
                lines.append(f"line {row['line']}: error: {row['error']}")
                continue
            oracle = row["oracle"]["class"]
            mark = "ok" if row["agrees_with_oracle"] else "MISMATCH"
            lines.append(
                f"line {row['line']}: {' ; '.join(row['events'])}  "
                f"related={row['related']}  route={row['route']}  oracle={oracle}  {mark}"
            )
        for record in result["failed_records"]:
            lines.append(f"line {record['line']}: skipped: {record['error']}")
        lines.append(f"success={result['success']}  failed={result['failed']}")
        self._write("\n".join(lines))

    def show_report(self, report: Dict[str, Any]) -> None:
        """显示自检报告"""
        if self.output == "json":
            self._json(report)
            return
        lines = [f"seed={report['seed']}  passed={report['passed']}"]
        for suite in report["suites"]:
            status = "PASS" if suite["passed"] else "FAIL"
            lines.append(
                f"  {status} {suite['suite']:<11} checks={suite['checks']} "
                f"skipped={suite['skipped']}"
            )
            for failure in suite["failures"]:
                lines.append(f"      {failure['case']} {failure['detail']}")
        self._write("\n".join(lines))

    def show_template(self, path: str) -> None:
        if self.output == "json":
            self._json({"template": path})
        else:
            self._write(f"模板已写入 {path}")

    def show_error(self, error: Exception, exit_code: int) -> None:
        """错误信息写到 stderr；JSON 模式下 stdout 也给出结构化错误"""
        sys.stderr.write(f"错误: {error}\n")
        if self.output == "json":
            payload = {"error": type(error).__name__, "message": str(error), "exit_code": exit_code}
            violations = getattr(error, "violations", None)
            if violations:
                payload["violations"] = violations
            self._json(payload)

    @staticmethod
    def _dims_table(dims: GradedDims) -> List[str]:
        rows = []
        for grading, dim in dims.entries:
            if len(grading) == 3:
                rows.append(f"  i={grading[0]:>3}  j={grading[1]:>3}  k={grading[2]:>3}  dim={dim}")
            else:
                rows.append(f"  i={grading[0]:>3}  j={grading[1]:>3}  dim={dim}")
        return rows

    @staticmethod
    def _verdict_lines(result: Dict[str, Any]) -> List[str]:
        lines = [f"related={result['related']}  route={result['route']}  model={result['model']}"]
        if "events" in result:
            lines.append(f"events: {' ; '.join(result['events'])}")
            lines.append(f"oracle: {result['oracle']['class']} (margin={result['oracle']['margin']:.3g})")
        if result.get("word") is not None:
            lines.append(f"word: {' '.join(str(g) for g in result['word']) or '(empty)'}")
        if "witness_theta" in result:
            lines.append(f"skies meet at θ={result['witness_theta']:.6f}")
        if result.get("cross_check"):
            lines.append(f"cross-check ({result['cross_check']['route']}): "
                         f"related={result['cross_check']['related']}")
        return lines
