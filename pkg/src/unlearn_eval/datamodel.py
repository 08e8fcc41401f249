"""Record types, JSON-lines schemas and dataset-level validation.

Every record type round-trips through :func:`write_records` and
:func:`read_records`; fields the schema does not know about are kept in
``extra`` and written back out unchanged. Text fields are NFC-normalized on
read so that string equality behaves the same on every platform.
"""

from __future__ import annotations

import json
import math
import re
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any, Iterable, Mapping

from .languages import ATTRIBUTES, AttributeKey, LanguageTag, SplitLabel

BIRTHDAY_MIN_YEAR = 1950
BIRTHDAY_MAX_YEAR = 2010
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


class SchemaError(ValueError):
    """A JSON-lines record does not match its schema."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def make_pair_id(profile_id: int, attribute: AttributeKey | str, language: LanguageTag | str) -> str:
    return f"{profile_id}-{attribute}-{language}"


def check_birthday(value: str) -> None:
    if not _DATE_RE.match(value):
        raise ValueError(f"birthday {value!r} must be formatted YYYY-MM-DD")
    try:
        parsed = date.fromisoformat(value)
    except ValueError as exc:
        raise ValueError(f"birthday {value!r} is not a calendar date") from exc
    if not BIRTHDAY_MIN_YEAR <= parsed.year <= BIRTHDAY_MAX_YEAR:
        raise ValueError(f"birthday year {parsed.year} outside [{BIRTHDAY_MIN_YEAR}, {BIRTHDAY_MAX_YEAR}]")


@dataclass(frozen=True)
class Profile:
    profile_id: int
    name: str
    # attribute -> language -> rendered value
    attributes: Mapping[AttributeKey, Mapping[LanguageTag, str]]
    extra: Mapping[str, Any] = field(default_factory=dict, compare=True)

    def __post_init__(self) -> None:
        if self.profile_id < 0:
            raise ValueError("profile_id must be >= 0")
        keys = set(self.attributes)
        if keys != set(ATTRIBUTES):
            missing = [a.value for a in ATTRIBUTES if a not in keys]
            raise ValueError(f"profile must carry exactly the 7 attributes; missing {missing}")
        birthdays = set(self.attributes[AttributeKey.BIRTHDAY].values())
        if len(birthdays) != 1:
            raise ValueError("birthday must be identical across languages")
        check_birthday(next(iter(birthdays)))

    @property
    def languages(self) -> tuple[LanguageTag, ...]:
        return tuple(self.attributes[AttributeKey.GENDER])

    def value(self, attribute: AttributeKey, language: LanguageTag) -> str:
        return self.attributes[attribute][language]

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "profile_id": self.profile_id,
            "name": self.name,
            "attributes": {
                a.value: {lang.value: v for lang, v in self.attributes[a].items()} for a in ATTRIBUTES
            },
        }
        return {**out, **self.extra}


@dataclass(frozen=True)
class QAPair:
    pair_id: str
    profile_id: int
    attribute: AttributeKey
    language: LanguageTag
    question: str
    answer: str
    split: SplitLabel
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.question:
            raise ValueError("question must be nonempty")
        if not self.answer:
            raise ValueError("answer must be nonempty")

    def to_json(self) -> dict[str, Any]:
        out = {
            "pair_id": self.pair_id,
            "profile_id": self.profile_id,
            "attribute": self.attribute.value,
            "language": self.language.value,
            "question": self.question,
            "answer": self.answer,
            "split": self.split.value,
        }
        return {**out, **self.extra}


@dataclass(frozen=True)
class GenerationRecord:
    pair_id: str
    query_language: LanguageTag
    question: str
    reference: str
    output: str
    model_id: str
    split: SplitLabel
    extra: Mapping[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        out = {
            "pair_id": self.pair_id,
            "query_language": self.query_language.value,
            "question": self.question,
            "reference": self.reference,
            "output": self.output,
            "model_id": self.model_id,
            "split": self.split.value,
        }
        return {**out, **self.extra}


@dataclass(frozen=True)
class LogProbRecord:
    pair_id: str
    split: SplitLabel
    log_likelihood: float
    extra: Mapping[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        out = {"pair_id": self.pair_id, "split": self.split.value, "log_likelihood": self.log_likelihood}
        return {**out, **self.extra}


# ---------------------------------------------------------------------------
# JSON-lines I/O
# ---------------------------------------------------------------------------

_STR, _INT, _FLOAT, _OBJ = "string", "integer", "number", "object"

SCHEMAS: dict[str, dict[str, str]] = {
    "profiles": {"profile_id": _INT, "name": _STR, "attributes": _OBJ},
    "qa": {
        "pair_id": _STR,
        "profile_id": _INT,
        "attribute": _STR,
        "language": _STR,
        "question": _STR,
        "answer": _STR,
        "split": _STR,
    },
    "generations": {
        "pair_id": _STR,
        "query_language": _STR,
        "question": _STR,
        "reference": _STR,
        "output": _STR,
        "model_id": _STR,
        "split": _STR,
    },
    "logprobs": {"pair_id": _STR, "split": _STR, "log_likelihood": _FLOAT},
}


def _check_type(obj: dict, name: str, kind: str, line: int) -> Any:
    value = obj[name]
    ok = {
        _STR: isinstance(value, str),
        _INT: isinstance(value, int) and not isinstance(value, bool),
        _FLOAT: isinstance(value, (int, float)) and not isinstance(value, bool),
        _OBJ: isinstance(value, dict),
    }[kind]
    if not ok:
        raise SchemaError(f"expected {kind}, got {type(value).__name__}", line=line, field=name)
    if kind == _STR:
        return nfc(value)
    if kind == _FLOAT:
        if not math.isfinite(value):
            raise SchemaError("must be finite", line=line, field=name)
        return float(value)
    return value


def _enum(cls, value: str, line: int, name: str):
    try:
        return cls(value)
    except ValueError:
        raise SchemaError(f"invalid value {value!r}", line=line, field=name) from None


def _parse_profile(fields: dict, extra: dict, line: int) -> Profile:
    attrs_in = fields["attributes"]
    attrs: dict[AttributeKey, dict[LanguageTag, str]] = {}
    for key in ATTRIBUTES:
        if key.value not in attrs_in:
            raise SchemaError("missing attribute", line=line, field=f"attributes.{key.value}")
    for raw_key, per_lang in attrs_in.items():
        key = _enum(AttributeKey, raw_key, line, f"attributes.{raw_key}")
        if not isinstance(per_lang, dict):
            raise SchemaError("expected object", line=line, field=f"attributes.{raw_key}")
        values: dict[LanguageTag, str] = {}
        for code, text in per_lang.items():
            path = f"attributes.{raw_key}.{code}"
            lang = _enum(LanguageTag, code, line, path)
            if not isinstance(text, str):
                raise SchemaError("expected string", line=line, field=path)
            if key is AttributeKey.BIRTHDAY:
                try:
                    check_birthday(text)
                except ValueError as exc:
                    raise SchemaError(str(exc), line=line, field=path) from None
            values[lang] = nfc(text)
        attrs[key] = values
    try:
        return Profile(fields["profile_id"], fields["name"], attrs, extra)
    except ValueError as exc:
        raise SchemaError(str(exc), line=line) from None


def _parse(schema: str, obj: dict, line: int):
    spec = SCHEMAS[schema]
    for name in spec:
        if name not in obj:
            raise SchemaError("missing required field", line=line, field=name)
    fields = {name: _check_type(obj, name, kind, line) for name, kind in spec.items()}
    extra = {k: v for k, v in obj.items() if k not in spec}
    if schema == "profiles":
        return _parse_profile(fields, extra, line)
    if "split" in fields:
        fields["split"] = _enum(SplitLabel, fields["split"], line, "split")
    try:
        if schema == "qa":
            fields["attribute"] = _enum(AttributeKey, fields["attribute"], line, "attribute")
            fields["language"] = _enum(LanguageTag, fields["language"], line, "language")
            return QAPair(**fields, extra=extra)
        if schema == "generations":
            fields["query_language"] = _enum(LanguageTag, fields["query_language"], line, "query_language")
            return GenerationRecord(**fields, extra=extra)
        return LogProbRecord(**fields, extra=extra)
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(str(exc), line=line) from None


def read_records(path: str | Path, schema: str) -> list:
    """Read a JSON-lines file of ``schema`` records. Blank lines are ignored."""
    if schema not in SCHEMAS:
        raise ValueError(f"unknown schema {schema!r}; expected one of {sorted(SCHEMAS)}")
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"malformed JSON: {exc.msg}", line=lineno) from None
            if not isinstance(obj, dict):
                raise SchemaError("record must be a JSON object", line=lineno)
            records.append(_parse(schema, obj, lineno))
    return records


def dumps_record(record) -> str:
    return json.dumps(record.to_json(), ensure_ascii=False, sort_keys=False)


def write_records(path: str | Path, records: Iterable) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps_record(rec))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Dataset validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str  # missing-variant | split-inconsistency | duplicate-pair-id | empty-text
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    languages: tuple[LanguageTag, ...]
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def count(self, kind: str) -> int:
        return sum(1 for v in self.violations if v.kind == kind)


def validate_dataset(pairs: list[QAPair]) -> ValidationReport:
    """Check that ``pairs`` form a parallel corpus with a clean forget/retain partition.

    The language set is inferred as every language seen in the data. Problems
    are collected, never raised.
    """
    if not pairs:
        raise ValueError("validate_dataset needs at least one pair")
    violations: list[Violation] = []
    languages = tuple(sorted({p.language for p in pairs}, key=lambda t: list(LanguageTag).index(t)))

    ids = Counter(p.pair_id for p in pairs)
    for pid, n in sorted(ids.items()):
        if n > 1:
            violations.append(Violation("duplicate-pair-id", f"{pid} appears {n} times"))

    for p in pairs:
        if not p.question.strip() or not p.answer.strip():
            violations.append(Violation("empty-text", p.pair_id))

    cells: dict[tuple[int, AttributeKey], set[LanguageTag]] = defaultdict(set)
    splits: dict[int, set[SplitLabel]] = defaultdict(set)
    for p in pairs:
        cells[(p.profile_id, p.attribute)].add(p.language)
        splits[p.profile_id].add(p.split)
    for (pid, attr), langs in sorted(cells.items(), key=lambda kv: (kv[0][0], ATTRIBUTES.index(kv[0][1]))):
        for lang in languages:
            if lang not in langs:
                violations.append(Violation("missing-variant", make_pair_id(pid, attr, lang)))
    for pid, labels in sorted(splits.items()):
        if len(labels) > 1:
            violations.append(Violation("split-inconsistency", f"profile {pid} has pairs in both splits"))
    return ValidationReport(languages, tuple(violations))


def check_generations(generations: list[GenerationRecord], pairs: list[QAPair]) -> list[str]:
    """Cross-check generation records against the dataset they claim to answer.

    Returns human-readable problems (unknown pair ids, language or split
    mismatches); an empty list means the files agree.
    """
    by_id = {p.pair_id: p for p in pairs}
    problems = []
    for g in generations:
        pair = by_id.get(g.pair_id)
        if pair is None:
            problems.append(f"{g.pair_id}: not in dataset")
            continue
        if pair.language != g.query_language:
            problems.append(f"{g.pair_id}: query_language {g.query_language} != {pair.language}")
        if pair.split != g.split:
            problems.append(f"{g.pair_id}: split {g.split} != {pair.split}")
    return problems


# ---------------------------------------------------------------------------
# Metric report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricRow:
    model_id: str
    query_language: str
    split: str
    em: float | None = None
    km: float | None = None
    nmix_avg: float | None = None
    judge_ratio: float | None = None
    n_records: int | None = None

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.model_id, self.query_language, self.split)


_RANGES = {"em": (0.0, 1.0), "km": (0.0, 1.0), "nmix_avg": (0.0, 100.0), "judge_ratio": (0.0, 1.0)}


@dataclass(frozen=True)
class MetricReport:
    rows: tuple[MetricRow, ...]

    def __post_init__(self) -> None:
        seen = set()
        for row in self.rows:
            if row.key in seen:
                raise ValueError(f"duplicate report row {row.key}")
            seen.add(row.key)
            for name, (lo, hi) in _RANGES.items():
                value = getattr(row, name)
                if value is not None and not lo - 1e-9 <= value <= hi + 1e-9:
                    raise ValueError(f"{name}={value} outside [{lo}, {hi}] in row {row.key}")
