"""N-gram language-mix score.

For a sentence and a query language, ``nmix_n`` splits the sentence into
overlapping n-token fragments, detects the language of each, and returns the
percentage of fragments whose language differs from the query language.
``nmix_avg`` averages that over several n. Fragments the detector cannot
place (digits, punctuation) are dropped from numerator and denominator.
"""

from __future__ import annotations

import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .datamodel import GenerationRecord, QAPair
from .langid import Detector
from .languages import LanguageTag
from .segmenter import Tokenizer, ngrams, tokenize

DEFAULT_LEVELS = (3, 4, 5, 6)


@dataclass(frozen=True)
class FragmentCount:
    mismatched: int
    retained: int
    dropped: int


@dataclass(frozen=True)
class NMixResult:
    per_n: Mapping[int, float]
    avg: float | None
    fragments_scored: Mapping[int, int] = field(default_factory=dict)

    @property
    def skipped(self) -> bool:
        return not self.per_n


def fragment_counts(
    sentence: str,
    n: int,
    query_lang: LanguageTag,
    detector: Detector,
    tokenizer: Tokenizer = tokenize,
) -> FragmentCount:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    mismatched = retained = dropped = 0
    for frag in ngrams(tokenizer(sentence), n):
        lang = detector(frag)
        if lang is None:
            dropped += 1
            continue
        retained += 1
        if lang != query_lang:
            mismatched += 1
    return FragmentCount(mismatched, retained, dropped)


def nmix_n(
    sentence: str,
    n: int,
    query_lang: LanguageTag,
    detector: Detector,
    tokenizer: Tokenizer = tokenize,
) -> float | None:
    """Percentage of detectable n-gram fragments not in ``query_lang``; ``None`` if none are detectable."""
    if n < 3:
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        warnings.warn(f"n={n}: uni- and bi-gram fragments are too short for reliable detection", stacklevel=2)
    counts = fragment_counts(sentence, n, LanguageTag(query_lang), detector, tokenizer)
    if counts.retained == 0:
        return None
    return 100.0 * counts.mismatched / counts.retained


def nmix_avg(
    sentence: str,
    query_lang: LanguageTag,
    detector: Detector,
    levels: Iterable[int] = DEFAULT_LEVELS,
    tokenizer: Tokenizer = tokenize,
) -> NMixResult:
    levels = sorted(set(levels))
    if not levels:
        raise ValueError("levels must be nonempty")
    query_lang = LanguageTag(query_lang)
    per_n: dict[int, float] = {}
    scored: dict[int, int] = {}
    for n in levels:
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if n < 3:
            warnings.warn(f"n={n}: uni- and bi-gram fragments are too short for reliable detection", stacklevel=2)
        counts = fragment_counts(sentence, n, query_lang, detector, tokenizer)
        scored[n] = counts.retained
        if counts.retained:
            per_n[n] = 100.0 * counts.mismatched / counts.retained
    avg = sum(per_n.values()) / len(per_n) if per_n else None
    return NMixResult(per_n, avg, scored)


@dataclass(frozen=True)
class GroupNMix:
    mean: float | None
    n_records: int
    n_skipped: int


def nmix_corpus(
    records: Sequence[GenerationRecord],
    detector: Detector,
    levels: Iterable[int] = DEFAULT_LEVELS,
    tokenizer: Tokenizer = tokenize,
) -> dict[tuple[LanguageTag, str], GroupNMix]:
    """Mean per-record N-Mix average for each (query language, split) group.

    Each record's multi-level average is computed first, then averaged over
    records. Records with no detectable fragment are counted as skipped and
    left out of the mean.
    """
    if not records:
        raise ValueError("nmix_corpus needs at least one record")
    levels = tuple(levels)
    sums: dict[tuple, float] = defaultdict(float)
    scored: dict[tuple, int] = defaultdict(int)
    skipped: dict[tuple, int] = defaultdict(int)
    keys: dict[tuple, None] = {}
    for rec in records:
        key = (rec.query_language, rec.split.value)
        keys[key] = None
        res = nmix_avg(rec.output, rec.query_language, detector, levels, tokenizer)
        if res.skipped:
            skipped[key] += 1
        else:
            sums[key] += res.avg
            scored[key] += 1
    out = {}
    for key in keys:
        n = scored[key]
        out[key] = GroupNMix(sums[key] / n if n else None, n + skipped[key], skipped[key])
    return out


def validation_matrix(
    pairs: Sequence[QAPair],
    languages: Sequence[LanguageTag],
    detector: Detector,
    levels: Iterable[int] = DEFAULT_LEVELS,
) -> dict[tuple[LanguageTag, LanguageTag], float]:
    """Score every ground-truth answer written in language a against query language b.

    Returns the mean N-Mix average per (answer language, query language).
    A well-behaved score is near 0 on the diagonal and near 100 elsewhere.
    """
    levels = tuple(levels)
    out = {}
    for la in languages:
        answers = [p.answer for p in pairs if p.language == la]
        for lb in languages:
            vals = [r.avg for r in (nmix_avg(a, lb, detector, levels) for a in answers) if not r.skipped]
            out[(la, lb)] = sum(vals) / len(vals) if vals else float("nan")
    return out
