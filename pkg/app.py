import argparse
import logging
import sys
from typing import List, Optional

from main_logic.config import OUTPUTS, ROUTES, RunConfig
from main_logic.errors import CausalityAssistError
from view_models.causal_view_model import CausalViewModel
from view_models.homology_view_model import HomologyViewModel
from view_models.verify_view_model import SUITES, VerifyViewModel
from views.cli_view import CliView

logger = logging.getLogger("causality_assist")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_RELATED = 10


def setup_logging(verbosity: int) -> None:
    """日志写到 stderr：默认 WARNING，-v 为 INFO，-vv 为 DEBUG"""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v 输出 INFO，-vv 输出 DEBUG")
    common.add_argument("--cache-dir", default=None, help="结果缓存目录（也可用环境变量设置）")
    common.add_argument("--no-cache", action="store_true", help="不读写结果缓存")
    common.add_argument("--crossing-limit", type=int, default=RunConfig.crossing_limit,
                        help="交叉点数上限")
    common.add_argument("--output", choices=OUTPUTS, default=RunConfig.output)
    common.add_argument("--epsilon", type=float, default=RunConfig.epsilon, help="类光边界相对容差")
    common.add_argument("--delta", type=float, default=RunConfig.delta, help="切触判据阈值")

    parser = argparse.ArgumentParser(
        prog="causality-assist",
        description="用 Khovanov / 环形 Khovanov 同调判定 2+1 维时空中事件的因果关系",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    kh_parser = commands.add_parser("kh", parents=[common], help="计算 Kh(L; Z/2)")
    kh_parser.add_argument("--pd", default=None, help='PD 码，例如 "X(1,3,2,4) X(3,1,4,2)"')
    kh_parser.add_argument("--braid", default=None, help='辫子词，例如 "1 1"')
    kh_parser.add_argument("--strands", type=int, default=None)
    kh_parser.add_argument("--dump-complex", action="store_true", help="附带链复形调试输出")

    akh_parser = commands.add_parser("akh", parents=[common], help="计算 AKh(L; Z/2)")
    akh_parser.add_argument("--braid", required=True)
    akh_parser.add_argument("--strands", type=int, required=True)
    akh_parser.add_argument("--dump-complex", action="store_true")

    causal_parser = commands.add_parser("causal", parents=[common], help="判定因果关系")
    source = causal_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--events", help='"px,py,t;qx,qy,s"')
    source.add_argument("--braid", help="一对天空的 2 股辫子词")
    source.add_argument("--batch", help="事件对文件，每行一对")
    source.add_argument("--write-template", metavar="PATH", nargs="?", const="",
                        help="写出事件对文件模板")
    causal_parser.add_argument("--strands", type=int, default=2)
    causal_parser.add_argument("--route", choices=ROUTES, default=RunConfig.route)
    causal_parser.add_argument("--workers", type=int, default=RunConfig.workers)

    verify_parser = commands.add_parser("verify", parents=[common], help="运行自检套件")
    verify_parser.add_argument("--suite", action="append", choices=SUITES, default=None,
                               help="可重复；缺省运行全部套件")
    verify_parser.add_argument("--max-crossings", type=int, default=12)
    verify_parser.add_argument("--pairs", type=int, default=200)
    verify_parser.add_argument("--words", type=int, default=50)
    verify_parser.add_argument("--seed", type=int, default=RunConfig.seed)
    verify_parser.add_argument("--route", choices=ROUTES, default=RunConfig.route)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """默认值 → 环境变量 → 命令行参数"""
    config = RunConfig(
        crossing_limit=args.crossing_limit,
        epsilon=args.epsilon,
        delta=args.delta,
        route=getattr(args, "route", RunConfig.route),
        output=args.output,
        cache_dir=args.cache_dir,
        seed=getattr(args, "seed", RunConfig.seed),
        workers=getattr(args, "workers", RunConfig.workers),
        use_cache=not args.no_cache,
    )
    return config.with_env().validate()


class CausalityApp:
    """因果助手命令行应用程序主类
    """

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = config_from_args(args)
        self.view = CliView(self.config.output)

    def run(self) -> int:
        """执行子命令

        Returns:
            退出码
        """
        handler = getattr(self, f"cmd_{self.args.command}")
        return handler()

    def cmd_kh(self) -> int:
        view_model = HomologyViewModel(self.config)
        try:
            diagram = view_model.load_planar(self.args.pd, self.args.braid, self.args.strands)
            self.view.show_homology(view_model.compute_kh(diagram, self.args.dump_complex))
        finally:
            view_model.close()
        return EXIT_OK

    def cmd_akh(self) -> int:
        view_model = HomologyViewModel(self.config)
        try:
            diagram = view_model.load_annular(self.args.braid, self.args.strands)
            self.view.show_homology(view_model.compute_akh(diagram, self.args.dump_complex))
        finally:
            view_model.close()
        return EXIT_OK

    def cmd_causal(self) -> int:
        view_model = CausalViewModel(self.config)
        try:
            if self.args.write_template is not None:
                self.view.show_template(view_model.write_template(self.args.write_template or None))
                return EXIT_OK
            if self.args.batch is not None:
                result = view_model.decide_batch(self.args.batch)
                self.view.show_batch(result)
                if "error" in result or result["failed"]:
                    return CausalityAssistError.exit_code
                return EXIT_OK
            if self.args.events is not None:
                result = view_model.decide_events(self.args.events)
            else:
                result = view_model.decide_braid(self.args.braid, self.args.strands)
            self.view.show_verdict(result)
            return EXIT_RELATED if result["related"] else EXIT_OK
        finally:
            view_model.close()

    def cmd_verify(self) -> int:
        view_model = VerifyViewModel(
            self.config,
            max_crossings=self.args.max_crossings,
            pairs=self.args.pairs,
            words=self.args.words,
        )
        report = view_model.run(self.args.suite)
        self.view.show_report(report)
        return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    view = CliView(getattr(args, "output", "json"))
    try:
        return CausalityApp(args).run()
    except CausalityAssistError as e:
        logger.debug("命令失败", exc_info=True)
        view.show_error(e, e.exit_code)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
