"""Closed vocabularies shared across the package: languages, scripts, attributes, splits."""

from __future__ import annotations

from enum import Enum


class ScriptClass(str, Enum):
    LATIN = "Latin"
    HAN = "Han"
    HANGUL = "Hangul"
    CYRILLIC = "Cyrillic"
    DEVANAGARI = "Devanagari"
    THAI = "Thai"


class LanguageTag(str, Enum):
    """The eight supported languages. ``LanguageTag("xx")`` raises ``ValueError``."""

    EN = "en"
    DE = "de"
    ES = "es"
    ZH = "zh"
    RU = "ru"
    KO = "ko"
    HI = "hi"
    TH = "th"

    @property
    def script(self) -> ScriptClass:
        return _SCRIPT_OF_LANGUAGE[self]

    def __str__(self) -> str:
        return self.value


_SCRIPT_OF_LANGUAGE = {
    LanguageTag.EN: ScriptClass.LATIN,
    LanguageTag.DE: ScriptClass.LATIN,
    LanguageTag.ES: ScriptClass.LATIN,
    LanguageTag.ZH: ScriptClass.HAN,
    LanguageTag.KO: ScriptClass.HANGUL,
    LanguageTag.RU: ScriptClass.CYRILLIC,
    LanguageTag.HI: ScriptClass.DEVANAGARI,
    LanguageTag.TH: ScriptClass.THAI,
}

# Scripts owned by exactly one supported language.
UNIQUE_SCRIPT_LANGUAGE = {
    ScriptClass.HAN: LanguageTag.ZH,
    ScriptClass.HANGUL: LanguageTag.KO,
    ScriptClass.CYRILLIC: LanguageTag.RU,
    ScriptClass.DEVANAGARI: LanguageTag.HI,
    ScriptClass.THAI: LanguageTag.TH,
}

# Tie-break order for Latin candidates.
LATIN_ORDER = (LanguageTag.EN, LanguageTag.DE, LanguageTag.ES)

# Tie-break order for the script vote.
SCRIPT_ORDER = (
    ScriptClass.HAN,
    ScriptClass.HANGUL,
    ScriptClass.CYRILLIC,
    ScriptClass.DEVANAGARI,
    ScriptClass.THAI,
    ScriptClass.LATIN,
)

LANGUAGE_SET_1 = (LanguageTag.EN, LanguageTag.DE, LanguageTag.ZH, LanguageTag.RU, LanguageTag.KO)
LANGUAGE_SET_2 = (LanguageTag.EN, LanguageTag.DE, LanguageTag.HI, LanguageTag.ES, LanguageTag.TH)


class AttributeKey(str, Enum):
    GENDER = "gender"
    BIRTHDAY = "birthday"
    EMPLOYMENT = "employment"
    RESIDENCE = "residence"
    RELIGION = "religion"
    EDUCATION = "education"
    HOBBY = "hobby"

    def __str__(self) -> str:
        return self.value


ATTRIBUTES = tuple(AttributeKey)


class SplitLabel(str, Enum):
    FORGET = "forget"
    RETAIN = "retain"

    def __str__(self) -> str:
        return self.value


def parse_languages(spec: str | list[str] | tuple) -> tuple[LanguageTag, ...]:
    """Parse ``"en,de,zh"`` (or an iterable of codes) into unique tags, order kept."""
    items = spec.split(",") if isinstance(spec, str) else list(spec)
    out: list[LanguageTag] = []
    for item in items:
        code = str(item).strip().lower()
        if not code:
            continue
        tag = LanguageTag(code)
        if tag not in out:
            out.append(tag)
    if not out:
        raise ValueError("empty language set")
    return tuple(out)
