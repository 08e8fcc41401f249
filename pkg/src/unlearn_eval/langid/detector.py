"""Two-stage language identification restricted to a candidate set.

Stage 1 votes by script. Han, Hangul, Cyrillic, Devanagari and Thai each
belong to a single supported language, so any of them present (and claimed
by a candidate) decides the fragment; among several, the most frequent wins,
ties going to the earlier script in ``SCRIPT_ORDER``. Latin-script runs do
not outvote them: in Chinese, Korean or Russian text a Latin run is almost
always an embedded name, and names stay in English across this dataset.

Stage 2 separates the Latin candidates (en, de, es) with a linear score per
language: 3 x marker-character weight + 2 x stopword weight + the mean
log-frequency of the text's space-padded character trigrams.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable, Mapping

from ..languages import (
    LATIN_ORDER,
    SCRIPT_ORDER,
    UNIQUE_SCRIPT_LANGUAGE,
    LanguageTag,
    ScriptClass,
    parse_languages,
)
from ..scripts import script_of
from ..segmenter import tokenize

PROFILE_FORMAT_VERSION = 1

MARKER_WEIGHT = 3.0
STOPWORD_WEIGHT = 2.0

Detector = Callable[[str], "LanguageTag | None"]


@dataclass(frozen=True)
class FrequencyProfile:
    language: LanguageTag
    marker_chars: Mapping[str, float]
    stopwords: Mapping[str, float]
    trigram_logfreq: Mapping[str, float]
    unseen_logfreq: float
    note: str = ""

    def trigram(self, gram: str) -> float:
        return self.trigram_logfreq.get(gram, self.unseen_logfreq)

    def to_json(self) -> dict:
        return {
            "format_version": PROFILE_FORMAT_VERSION,
            "language": self.language.value,
            "note": self.note,
            "markers": dict(sorted(self.marker_chars.items())),
            "stopwords": dict(sorted(self.stopwords.items())),
            "unseen_logfreq": self.unseen_logfreq,
            "trigrams": dict(sorted(self.trigram_logfreq.items())),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FrequencyProfile":
        if obj.get("format_version") != PROFILE_FORMAT_VERSION:
            raise ValueError(f"unsupported profile format {obj.get('format_version')!r}")
        return cls(
            language=LanguageTag(obj["language"]),
            marker_chars={k: float(v) for k, v in obj["markers"].items()},
            stopwords={k: float(v) for k, v in obj["stopwords"].items()},
            trigram_logfreq={k: float(v) for k, v in obj["trigrams"].items()},
            unseen_logfreq=float(obj["unseen_logfreq"]),
            note=obj.get("note", ""),
        )


def load_bundled_profile(lang: LanguageTag) -> FrequencyProfile:
    path = resources.files("unlearn_eval").joinpath(f"data/langid/{lang.value}.json")
    return FrequencyProfile.from_json(json.loads(path.read_text(encoding="utf-8")))


@dataclass(frozen=True)
class DetectorConfig:
    candidates: frozenset[LanguageTag]
    latin_profiles: Mapping[LanguageTag, FrequencyProfile]
    min_alphabetic_chars: int = 1
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError("candidates must be nonempty")
        for lang in self.candidates:
            LanguageTag(lang)
            if lang.script is ScriptClass.LATIN and lang not in self.latin_profiles:
                raise ValueError(f"no frequency profile for Latin candidate {lang.value}")
        if self.min_alphabetic_chars < 0:
            raise ValueError("min_alphabetic_chars must be >= 0")

    @classmethod
    def for_languages(cls, languages: Iterable[LanguageTag] | str, min_alphabetic_chars: int = 1) -> "DetectorConfig":
        langs = frozenset(parse_languages(languages))
        profiles = {
            lang: load_bundled_profile(lang) for lang in LATIN_ORDER if lang in langs
        }
        return cls(langs, profiles, min_alphabetic_chars)

    def __call__(self, text: str) -> LanguageTag | None:
        return detect(text, self)


def latin_scores(text: str, config: DetectorConfig) -> dict[LanguageTag, float]:
    """Stage-2 score of every Latin candidate for ``text``."""
    lowered = text.lower()
    words = [tok.lower() for tok in tokenize(text) if script_of(tok[0]) is ScriptClass.LATIN]
    grams: list[str] = []
    for w in words:
        padded = f" {w} "
        grams.extend(padded[i : i + 3] for i in range(len(padded) - 2))
    scores = {}
    for lang in LATIN_ORDER:
        if lang not in config.candidates:
            continue
        prof = config.latin_profiles[lang]
        markers = sum(prof.marker_chars.get(ch, 0.0) for ch in lowered)
        stops = sum(prof.stopwords.get(w, 0.0) for w in words)
        tri = sum(prof.trigram(g) for g in grams) / len(grams) if grams else 0.0
        scores[lang] = MARKER_WEIGHT * markers + STOPWORD_WEIGHT * stops + tri
    return scores


def _detect(text: str, config: DetectorConfig) -> LanguageTag | None:
    counts = Counter(s for s in map(script_of, text) if s is not None)
    if sum(counts.values()) < max(config.min_alphabetic_chars, 1):
        return None
    claimed = [
        s
        for s in SCRIPT_ORDER
        if s is not ScriptClass.LATIN and counts[s] and UNIQUE_SCRIPT_LANGUAGE[s] in config.candidates
    ]
    if claimed:
        best = max(claimed, key=lambda s: (counts[s], -SCRIPT_ORDER.index(s)))
        return UNIQUE_SCRIPT_LANGUAGE[best]
    if not counts[ScriptClass.LATIN]:
        return None
    scores = latin_scores(text, config)
    if not scores:
        return None
    # max() keeps the first maximum, so LATIN_ORDER breaks ties
    return max(scores, key=lambda lang: scores[lang])


def detect(text: str, config: DetectorConfig) -> LanguageTag | None:
    """Detect the language of ``text`` among ``config.candidates``.

    Returns ``None`` when the text holds fewer than
    ``config.min_alphabetic_chars`` scripted codepoints, or when none of its
    scripts belongs to a candidate. Pure: results are memoized per config.
    """
    cache = config._cache
    try:
        return cache[text]
    except KeyError:
        pass
    result = _detect(text, config)
    cache[text] = result
    return result
