# -*- coding: utf-8 -*-
"""
whittle-access コマンドラインのエントリーポイント

サブコマンド:
    index     チャネルごとの Whittle インデックス表
    bound     緩和問題による最適性能の上界
    simulate  方策のモンテカルロ比較
    verify    インデックス可能性と価値反復オラクルとの一致の検査
    figure    組み込みプリセットから図のプロットデータを作る

終了コード: 0 成功 / 2 設定エラー / 3 数値的前提の違反 / 4 全探索の規模超過
"""

import argparse
import logging
import sys

from src.core.controller import BOUND_METHODS, ExperimentController, require_passed, setup_logging
from src.core.errors import ConfigError, WhittleAccessError
from src.core.run_config import RunConfig, load_preset, load_run_config
from src.report.writer import FORMATS, emit, render_record, write_table

logger = logging.getLogger(__name__)

COMMANDS = ("index", "bound", "simulate", "verify", "figure")


class _ArgumentParser(argparse.ArgumentParser):
    """引数エラーを SystemExit ではなく ConfigError として送出する"""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="whittle-access", description="Whittle index for multichannel access")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    for name in COMMANDS:
        sub = commands.add_parser(name)
        sub.add_argument("--config", help="実行設定 (JSON)")
        sub.add_argument("--preset", help="組み込みプリセット名")
        sub.add_argument("--out", help="出力先 (省略時は標準出力)")
        sub.add_argument("--format", choices=FORMATS, help="出力形式")
        sub.add_argument("--seed", type=int, help="シード (設定より優先)")
        sub.add_argument("--log-level", help="ログレベル (DEBUG / INFO / WARNING / ERROR)")
        if name == "index":
            sub.add_argument("--grid", type=int, help="ω グリッドの点数")
        if name in ("bound", "figure", "simulate"):
            sub.add_argument("--epsilon", type=float, help="上界の要求精度")
        if name == "bound":
            sub.add_argument("--method", choices=BOUND_METHODS, default="breakpoints")
        if name in ("simulate", "figure"):
            sub.add_argument("--policies", help="方策名のカンマ区切り")
            sub.add_argument("--replications", type=int, help="レプリケーション数")
            sub.add_argument("--workers", type=int, help="並列数")
    return parser


def _load_config(args) -> RunConfig:
    if args.config and args.preset:
        raise ConfigError("--config と --preset は同時に指定できません")
    if args.config:
        config = load_run_config(args.config)
    elif args.preset:
        config = load_preset(args.preset)
    else:
        raise ConfigError(f"{args.command} には --config か --preset が必要です")
    policies = getattr(args, "policies", None)
    if policies:
        config = config.with_overrides(policies=tuple(p.strip() for p in policies.split(",") if p.strip()))
    return config


def _dispatch(args, controller: ExperimentController) -> None:
    if args.command == "verify" and not (args.config or args.preset):
        configs = controller.all_presets()
        base = None
    else:
        base = _load_config(args)
        configs = [base]

    options = controller.options.merged(
        base,
        seed=args.seed,
        format=args.format,
        grid=getattr(args, "grid", None),
        epsilon=getattr(args, "epsilon", None),
        replications=getattr(args, "replications", None),
        workers=getattr(args, "workers", None),
    )
    out = args.out or (base.output if base is not None else None)

    if args.command == "index":
        write_table(controller.run_index(base, options), options.format, out)
    elif args.command == "bound":
        record = controller.run_bound(base, options, args.method)
        provenance = {"preset": base.preset, "seed": options.seed, "command": "bound"}
        emit(render_record(record, provenance, options.format), out)
    elif args.command == "simulate":
        write_table(controller.run_simulate(base, options), options.format, out)
    elif args.command == "verify":
        table, passed = controller.run_verify(configs, options)
        write_table(table, options.format, out)
        require_passed(passed)
    elif args.command == "figure":
        write_table(controller.run_figure(base, options), options.format, out)


def run_cli(argv: list[str] | None = None) -> int:
    """
    コマンドラインを解釈して実行し、終了コードを返す。

    Returns:
        int: 0 成功 / 2 設定エラー / 3 数値的前提の違反 / 4 全探索の規模超過
    """
    try:
        args = build_parser().parse_args(argv)
        controller = ExperimentController()
        setup_logging(controller.settings, args.log_level)
        _dispatch(args, controller)
    except WhittleAccessError as e:
        logger.error("%s: %s", type(e).__name__, e)
        sys.stderr.write(f"error: {e}\n")
        return e.exit_code
    return 0


def main():
    """Application Entry Point"""
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
