"""Deterministic synthesis of the parallel multilingual PII QA dataset.

Profiles are drawn from a seeded ``random.Random``; each categorical
attribute indexes into per-language pools whose entries are translations of
one another, so rendering the same profile in every language yields a
parallel corpus by construction.

The English pools reproduce the published attribute lists. Translations for
the other seven languages are shipped in ``data/tables.json`` and are this
package's own; any cell can be overridden with a translation-table file.
"""

from __future__ import annotations

import json
import logging
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from .datamodel import QAPair, Profile, make_pair_id, nfc
from .languages import (
    ATTRIBUTES,
    LANGUAGE_SET_1,
    AttributeKey,
    LanguageTag,
    SplitLabel,
)

log = logging.getLogger(__name__)

BIRTHDAY_RANGE = (date(1950, 1, 1), date(2010, 12, 31))
ENGLISH_POOL_SIZES = {
    AttributeKey.GENDER: 2,
    AttributeKey.EMPLOYMENT: 20,
    AttributeKey.RESIDENCE: 10,
    AttributeKey.RELIGION: 3,
    AttributeKey.EDUCATION: 3,
    AttributeKey.HOBBY: 16,
}
CATEGORICAL = tuple(ENGLISH_POOL_SIZES)
MAX_RESAMPLES = 1000


class TableError(ValueError):
    """A translation table is malformed or inconsistent with the English pools."""

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}")


@dataclass(frozen=True)
class AttributePool:
    attribute: AttributeKey
    values: Mapping[LanguageTag, tuple[str, ...]]
    kind: str = "categorical"  # or "date-range"


@dataclass(frozen=True)
class QATemplate:
    attribute: AttributeKey
    language: LanguageTag
    question_template: str
    answer_template: str

    def __post_init__(self) -> None:
        where = f"templates.{self.attribute.value}.{self.language.value}"
        if self.question_template.count("{name}") != 1:
            raise TableError(where + ".q", "must contain {name} exactly once")
        for ph in ("{name}", "{value}"):
            if self.answer_template.count(ph) != 1:
                raise TableError(where + ".a", f"must contain {ph} exactly once")

    def question(self, name: str) -> str:
        return self.question_template.replace("{name}", name)

    def answer(self, name: str, value: str) -> str:
        # substitute name last so a value never gets re-expanded
        return self.answer_template.replace("{value}", value).replace("{name}", name)


@dataclass(frozen=True)
class Tables:
    pools: Mapping[AttributeKey, AttributePool]
    templates: Mapping[tuple[AttributeKey, LanguageTag], QATemplate]

    def languages(self) -> tuple[LanguageTag, ...]:
        """Languages with a complete set of pools and templates."""
        return tuple(lang for lang in LanguageTag if not self.missing_cells([lang]))

    def missing_cells(self, languages: Sequence[LanguageTag]) -> list[str]:
        missing = []
        for lang in languages:
            for attr in CATEGORICAL:
                if lang not in self.pools[attr].values:
                    missing.append(f"pools.{attr.value}.{lang.value}")
            for attr in ATTRIBUTES:
                if (attr, lang) not in self.templates:
                    missing.append(f"templates.{attr.value}.{lang.value}")
        return missing

    def to_json(self, languages: Sequence[LanguageTag] | None = None) -> dict[str, Any]:
        keep = set(languages) if languages is not None else set(LanguageTag)
        pools = {
            attr.value: {
                lang.value: list(vals) for lang, vals in self.pools[attr].values.items() if lang in keep
            }
            for attr in CATEGORICAL
        }
        templates: dict[str, dict[str, dict[str, str]]] = {}
        for (attr, lang), tpl in self.templates.items():
            if lang in keep:
                templates.setdefault(attr.value, {})[lang.value] = {
                    "q": tpl.question_template,
                    "a": tpl.answer_template,
                }
        return {"pools": pools, "templates": templates}


@dataclass(frozen=True)
class GenSpec:
    seed: int = 0
    n_profiles: int = 40
    languages: tuple[LanguageTag, ...] = LANGUAGE_SET_1
    forget_profiles: int = 2
    name_pool: tuple[str, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if not self.name_pool:
            object.__setattr__(self, "name_pool", load_name_pool())
        object.__setattr__(self, "languages", tuple(LanguageTag(x) for x in self.languages))
        if self.n_profiles < 1:
            raise ValueError("n_profiles must be >= 1")
        if not 0 <= self.forget_profiles < self.n_profiles:
            raise ValueError("forget_profiles must satisfy 0 <= forget_profiles < n_profiles")
        if LanguageTag.EN not in self.languages:
            raise ValueError("languages must include en")
        if len(set(self.languages)) != len(self.languages):
            raise ValueError("duplicate language in GenSpec.languages")
        if not -(2**63) <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def load_name_pool() -> tuple[str, ...]:
    text = resources.files("unlearn_eval").joinpath("data/names.txt").read_text(encoding="utf-8")
    return tuple(line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#"))


def _parse_tables(raw: Any, base: Tables | None) -> Tables:
    if not isinstance(raw, dict):
        raise TableError("$", "expected a JSON object with 'pools' and 'templates'")
    for key in raw:
        if key not in ("pools", "templates"):
            raise TableError(key, "unknown top-level key")

    pools: dict[AttributeKey, dict[LanguageTag, tuple[str, ...]]] = {
        attr: dict(base.pools[attr].values) if base else {} for attr in CATEGORICAL
    }
    templates = dict(base.templates) if base else {}

    raw_pools = raw.get("pools", {})
    if not isinstance(raw_pools, dict):
        raise TableError("pools", "expected object")
    for attr_s, per_lang in raw_pools.items():
        try:
            attr = AttributeKey(attr_s)
        except ValueError:
            raise TableError(f"pools.{attr_s}", "unknown attribute") from None
        if attr not in CATEGORICAL:
            raise TableError(f"pools.{attr_s}", "not a categorical attribute")
        if not isinstance(per_lang, dict):
            raise TableError(f"pools.{attr_s}", "expected object keyed by language")
        for lang_s, values in per_lang.items():
            path = f"pools.{attr_s}.{lang_s}"
            try:
                lang = LanguageTag(lang_s)
            except ValueError:
                raise TableError(path, "unknown language") from None
            if not isinstance(values, list):
                raise TableError(path, "expected list")
            for i, v in enumerate(values):
                if not isinstance(v, str) or not v.strip():
                    raise TableError(f"{path}[{i}]", "missing or empty value")
            pools[attr][lang] = tuple(nfc(v) for v in values)

    raw_tpl = raw.get("templates", {})
    if not isinstance(raw_tpl, dict):
        raise TableError("templates", "expected object")
    for attr_s, per_lang in raw_tpl.items():
        try:
            attr = AttributeKey(attr_s)
        except ValueError:
            raise TableError(f"templates.{attr_s}", "unknown attribute") from None
        if not isinstance(per_lang, dict):
            raise TableError(f"templates.{attr_s}", "expected object keyed by language")
        for lang_s, cell in per_lang.items():
            path = f"templates.{attr_s}.{lang_s}"
            try:
                lang = LanguageTag(lang_s)
            except ValueError:
                raise TableError(path, "unknown language") from None
            if not isinstance(cell, dict):
                raise TableError(path, "expected object with 'q' and 'a'")
            for k in ("q", "a"):
                if not isinstance(cell.get(k), str):
                    raise TableError(f"{path}.{k}", "missing template string")
            templates[(attr, lang)] = QATemplate(attr, lang, nfc(cell["q"]), nfc(cell["a"]))

    for attr in CATEGORICAL:
        en_vals = pools[attr].get(LanguageTag.EN)
        if en_vals is None:
            raise TableError(f"pools.{attr.value}.en", "English pool is required")
        for lang, vals in pools[attr].items():
            if len(vals) != len(en_vals):
                raise TableError(
                    f"pools.{attr.value}.{lang.value}",
                    f"length {len(vals)} does not match English length {len(en_vals)}",
                )
    return Tables(
        pools={attr: AttributePool(attr, pools[attr]) for attr in CATEGORICAL}
        | {AttributeKey.BIRTHDAY: AttributePool(AttributeKey.BIRTHDAY, {}, kind="date-range")},
        templates=templates,
    )


def bundled_tables() -> Tables:
    raw = json.loads(
        resources.files("unlearn_eval").joinpath("data/tables.json").read_text(encoding="utf-8")
    )
    tables = _parse_tables(raw, None)
    for attr, size in ENGLISH_POOL_SIZES.items():
        assert len(tables.pools[attr].values[LanguageTag.EN]) == size
    return tables


def load_translation_tables(path: str | Path, base: Tables | None = None) -> Tables:
    """Load a translation-table file, layered over ``base`` when given.

    Without ``base`` the file must be self-contained (English pools included).
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TableError("$", f"malformed JSON: {exc.msg} at line {exc.lineno}") from None
    return _parse_tables(raw, base)


def export_english_defaults(path: str | Path) -> None:
    """Write the English pools and templates as a translation worksheet."""
    payload = bundled_tables().to_json([LanguageTag.EN])
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


def _draw(rng: random.Random, tables: Tables) -> tuple[int, ...]:
    lo, hi = BIRTHDAY_RANGE
    picks = []
    for attr in ATTRIBUTES:
        if attr is AttributeKey.BIRTHDAY:
            picks.append(rng.randint(0, (hi - lo).days))
        else:
            picks.append(rng.randrange(len(tables.pools[attr].values[LanguageTag.EN])))
    return tuple(picks)


def generate_profiles(spec: GenSpec, tables: Tables | None = None) -> list[Profile]:
    tables = tables or bundled_tables()
    missing = tables.missing_cells(spec.languages)
    missing = [m for m in missing if m.startswith("pools.")]
    if missing:
        raise TableError(missing[0], "no pool for this language")
    if len(spec.name_pool) < spec.n_profiles:
        raise ValueError(
            f"name pool has {len(spec.name_pool)} entries, need at least {spec.n_profiles}"
        )
    rng = random.Random(spec.seed)
    names = rng.sample(list(spec.name_pool), spec.n_profiles)
    seen: set[tuple[int, ...]] = set()
    profiles = []
    for pid, name in enumerate(names):
        for _ in range(MAX_RESAMPLES):
            picks = _draw(rng, tables)
            if picks not in seen:
                break
        else:
            raise ValueError(f"could not draw a unique attribute combination after {MAX_RESAMPLES} tries")
        seen.add(picks)
        attrs: dict[AttributeKey, dict[LanguageTag, str]] = {}
        for attr, idx in zip(ATTRIBUTES, picks):
            if attr is AttributeKey.BIRTHDAY:
                day = (BIRTHDAY_RANGE[0] + timedelta(days=idx)).isoformat()
                attrs[attr] = {lang: day for lang in spec.languages}
            else:
                pool = tables.pools[attr].values
                attrs[attr] = {lang: pool[lang][idx] for lang in spec.languages}
        profiles.append(Profile(pid, name, attrs))
    return profiles


def render_qa(
    profiles: Sequence[Profile],
    tables: Tables | None = None,
    languages: Sequence[LanguageTag] | None = None,
) -> list[QAPair]:
    """Fill the QA templates for every profile, attribute and language.

    Pairs come out ordered by profile, attribute, then language, all labelled
    ``retain``; :func:`assign_split` sets the forget profiles.
    """
    tables = tables or bundled_tables()
    pairs = []
    for prof in profiles:
        langs = tuple(languages) if languages is not None else prof.languages
        for attr in ATTRIBUTES:
            for lang in langs:
                tpl = tables.templates.get((attr, lang))
                if tpl is None:
                    raise TableError(f"templates.{attr.value}.{lang.value}", "missing template cell")
                value = prof.value(attr, lang)
                pairs.append(
                    QAPair(
                        pair_id=make_pair_id(prof.profile_id, attr, lang),
                        profile_id=prof.profile_id,
                        attribute=attr,
                        language=lang,
                        question=tpl.question(prof.name),
                        answer=tpl.answer(prof.name, value),
                        split=SplitLabel.RETAIN,
                    )
                )
    return pairs


def forget_profile_ids(profile_ids: Sequence[int], spec: GenSpec) -> set[int]:
    ids = sorted(set(profile_ids))
    rng = random.Random(f"split:{spec.seed}")
    rng.shuffle(ids)
    return set(ids[: spec.forget_profiles])


def assign_split(pairs: Sequence[QAPair], spec: GenSpec) -> list[QAPair]:
    forget = forget_profile_ids([p.profile_id for p in pairs], spec)
    out = [
        replace(p, split=SplitLabel.FORGET if p.profile_id in forget else SplitLabel.RETAIN)
        for p in pairs
    ]
    for lang, n in sorted(forget_counts(out).items()):
        log.info("forget pairs in %s: %d", lang, n)
    return out


def forget_counts(pairs: Sequence[QAPair]) -> dict[str, int]:
    counts = Counter(p.language.value for p in pairs if p.split is SplitLabel.FORGET)
    return {lang.value: counts.get(lang.value, 0) for lang in dict.fromkeys(p.language for p in pairs)}


def generate(spec: GenSpec, tables: Tables | None = None) -> tuple[list[Profile], list[QAPair]]:
    tables = tables or bundled_tables()
    profiles = generate_profiles(spec, tables)
    pairs = assign_split(render_qa(profiles, tables, spec.languages), spec)
    return profiles, pairs
