"""
表データの CSV / JSON 出力

設計意図:
- すべての表は先頭に来歴コメント行（プリセット名・シード・コマンド）を持つ
- CSV は RFC 4180 形式（行末 CRLF）で、同じ入力からは常に同じバイト列になる
- 出力先が指定されなければ標準出力に書く
"""
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Any

from src.core.errors import ConfigError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


@dataclass
class Table:
    """
    列名つきの表。

    Attributes:
        columns: 列名
        rows: 行（columns と同じ長さ）
        provenance: 来歴（preset, seed, command など）
    """
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    provenance: dict[str, Any] = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, expected {len(self.columns)}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        position = self.columns.index(name)
        return [row[position] for row in self.rows]


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def provenance_line(provenance: dict[str, Any]) -> str:
    ordered = ["preset", "seed", "command"]
    keys = ordered + sorted(k for k in provenance if k not in ordered)
    return "# " + " ".join(f"{key}={_cell(provenance.get(key))}" for key in keys)


def render_csv(table: Table) -> str:
    buffer = io.StringIO(newline="")
    buffer.write(provenance_line(table.provenance) + "\r\n")
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def render_json(table: Table) -> str:
    document = {
        "provenance": table.provenance,
        "columns": list(table.columns),
        "rows": [list(row) for row in table.rows],
    }
    return json.dumps(document, ensure_ascii=False, indent=2) + "\n"


def render_record(record: dict[str, Any], provenance: dict[str, Any], fmt: str) -> str:
    """1件の結果（上界など）を出力する。JSON はキーをトップレベルに置く。"""
    if fmt == "json":
        return json.dumps({**record, "provenance": provenance}, ensure_ascii=False, indent=2) + "\n"
    table = Table(tuple(record), provenance=provenance)
    table.add(*(json.dumps(v) if isinstance(v, dict) else v for v in record.values()))
    return render_csv(table)


def render(table: Table, fmt: str) -> str:
    if fmt == "csv":
        return render_csv(table)
    if fmt == "json":
        return render_json(table)
    raise ConfigError(f"未知の出力形式です: {fmt} (選択肢: {', '.join(FORMATS)})")


def emit(text: str, out: str | None) -> None:
    """out が None なら標準出力、そうでなければファイルに書く"""
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise ConfigError(f"出力ファイルに書き込めません: {out} ({e})") from e
    logger.info("wrote %s", out)


def write_table(table: Table, fmt: str, out: str | None) -> None:
    emit(render(table, fmt), out)
