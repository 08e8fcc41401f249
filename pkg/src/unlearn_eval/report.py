"""Metric tables: writing per-command outputs and joining them into one report."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .datamodel import MetricReport, MetricRow
from .languages import LanguageTag

KEY_COLUMNS = ["model_id", "query_language", "split"]
SCORE_COLUMNS = KEY_COLUMNS + ["em", "km", "n_records"]
NMIX_COLUMNS = KEY_COLUMNS + ["nmix_avg", "n_records", "n_skipped"]
JUDGE_COLUMNS = KEY_COLUMNS + ["judge_ratio", "n_yes", "n_no", "n_ambiguous", "n_records", "prompt_sha256"]
REPORT_COLUMNS = KEY_COLUMNS + ["em", "km", "nmix_avg", "judge_ratio", "n_records"]
METRICS = ("em", "km", "nmix_avg", "judge_ratio")
FORMATS = ("csv", "json", "md")

Row = Mapping[str, object]

_LANG_ORDER = {t.value: i for i, t in enumerate(LanguageTag)}
_SPLIT_ORDER = {"forget": 0, "retain": 1}


def sort_key(row: Row) -> tuple:
    return (
        str(row["model_id"]),
        _SPLIT_ORDER.get(str(row["split"]), 9),
        _LANG_ORDER.get(str(row["query_language"]), 99),
        str(row["query_language"]),
    )


def _cell(value: object) -> object:
    if isinstance(value, float):
        if math.isnan(value):
            return None
        return round(value, 6)
    return value


def _text(value: object) -> str:
    value = _cell(value)
    return "" if value is None else str(value)


def render_csv(rows: Sequence[Row], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_text(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(rows: Sequence[Row], columns: Sequence[str]) -> str:
    data = [{c: _cell(row.get(c)) for c in columns} for row in rows]
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def render_flat_md(rows: Sequence[Row], columns: Sequence[str]) -> str:
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    for row in rows:
        lines.append("| " + " | ".join(_fmt_md(row.get(c)) for c in columns) + " |")
    return "\n".join(lines) + "\n"


def _fmt_md(value: object) -> str:
    value = _cell(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def render_table_md(rows: Sequence[Row]) -> str:
    """Wide layout: one row per (model, split), one column group per query language.

    Only metrics present in at least one row get a column.
    """
    metrics = [m for m in METRICS if any(_cell(r.get(m)) is not None for r in rows)] or ["em", "km"]
    langs = sorted({str(r["query_language"]) for r in rows}, key=lambda l: (_LANG_ORDER.get(l, 99), l))
    headers = {"em": "EM", "km": "KM", "nmix_avg": "N-Mix", "judge_ratio": "Judge"}
    head = ["Model", "Split"] + [f"{lang} {headers[m]}" for lang in langs for m in metrics]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    index = {(str(r["model_id"]), str(r["split"]), str(r["query_language"])): r for r in rows}
    groups = sorted({(str(r["model_id"]), str(r["split"])) for r in rows}, key=lambda g: (g[0], _SPLIT_ORDER.get(g[1], 9)))
    for model, split in groups:
        cells = [model, split]
        for lang in langs:
            row = index.get((model, split, lang), {})
            cells.extend(_fmt_md(row.get(m)) for m in metrics)
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render(rows: Sequence[Row], columns: Sequence[str], fmt: str, wide_md: bool = False) -> str:
    rows = sorted(rows, key=sort_key)
    if fmt == "csv":
        return render_csv(rows, columns)
    if fmt == "json":
        return render_json(rows, columns)
    if fmt == "md":
        return render_table_md(rows) if wide_md else render_flat_md(rows, columns)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def read_table(path: str | Path) -> list[dict[str, object]]:
    """Read a metric table written as CSV or JSON. Blank CSV cells become ``None``."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        data = json.loads(text)
        if not isinstance(data, list) or not all(isinstance(r, dict) for r in data):
            raise ValueError(f"{path}: expected a JSON list of row objects")
        return [dict(r) for r in data]
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ValueError(f"{path}: empty table")
    missing = [c for c in KEY_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise ValueError(f"{path}: missing key column(s) {', '.join(missing)}")
    rows = []
    for raw in reader:
        row: dict[str, object] = {}
        for k, v in raw.items():
            if k in KEY_COLUMNS or k == "prompt_sha256":
                row[k] = v
            elif v is None or v == "":
                row[k] = None
            else:
                try:
                    row[k] = int(v) if k.startswith("n_") else float(v)
                except ValueError:
                    raise ValueError(f"{path}: column {k} has non-numeric value {v!r}") from None
        rows.append(row)
    return rows


def join_tables(tables: Iterable[Sequence[Row]]) -> MetricReport:
    """Merge metric tables on (model_id, query_language, split).

    A metric missing from every input stays blank. A metric present in two
    inputs must agree.
    """
    merged: dict[tuple[str, str, str], dict[str, object]] = {}
    for table in tables:
        for row in table:
            key = tuple(str(row[c]) for c in KEY_COLUMNS)
            slot = merged.setdefault(key, {})
            for m in METRICS + ("n_records",):
                value = _cell(row.get(m))
                if value is None:
                    continue
                if m in slot and slot[m] != value and m != "n_records":
                    raise ValueError(f"conflicting {m} for {key}: {slot[m]} vs {value}")
                slot.setdefault(m, value)
    rows = [
        MetricRow(
            model_id=k[0],
            query_language=k[1],
            split=k[2],
            em=v.get("em"),
            km=v.get("km"),
            nmix_avg=v.get("nmix_avg"),
            judge_ratio=v.get("judge_ratio"),
            n_records=v.get("n_records"),
        )
        for k, v in merged.items()
    ]
    return MetricReport(tuple(rows))


def report_rows(report: MetricReport) -> list[dict[str, object]]:
    return [{c: getattr(r, c) for c in REPORT_COLUMNS} for r in report.rows]


def matrix_rows(matrix: Mapping[tuple, float], languages: Sequence[LanguageTag]) -> tuple[list[str], list[dict]]:
    """Square matrix as rows: first column is the row language, then one column per column language."""
    cols = ["language"] + [l.value for l in languages]
    rows = []
    for la in languages:
        row: dict[str, object] = {"language": la.value}
        for lb in languages:
            row[lb.value] = matrix[(la, lb)]
        rows.append(row)
    return cols, rows


def render_plain(rows: Sequence[Row], columns: Sequence[str], fmt: str) -> str:
    """Render without the metric-table sort order (for matrices and CKA tables)."""
    if fmt == "csv":
        return render_csv(rows, columns)
    if fmt == "json":
        return render_json(rows, columns)
    if fmt == "md":
        return render_flat_md(rows, columns)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
