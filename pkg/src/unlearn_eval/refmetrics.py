"""Reference-based metrics (exact match, ROUGE-L knowledge memorization) and the GA/GD loss audit."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Sequence

from .datamodel import GenerationRecord, LogProbRecord, nfc
from .languages import LanguageTag, SplitLabel
from .segmenter import tokenize


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float
    lcs_len: int


def exact_match(output: str, reference: str) -> int:
    """1 iff the NFC-normalized, whitespace-trimmed strings are identical. Case-sensitive."""
    return int(nfc(output).strip() == nfc(reference).strip())


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_tokens(text: str, lowercase: bool = True, keep_punct: bool = False) -> list[str]:
    toks = list(tokenize(nfc(text), keep_punct=keep_punct))
    return [t.lower() for t in toks] if lowercase else toks


def rouge_from_tokens(out_toks: Sequence[str], ref_toks: Sequence[str]) -> RougeScore:
    lcs = lcs_length(out_toks, ref_toks)
    p = lcs / len(out_toks) if out_toks else 0.0
    r = lcs / len(ref_toks) if ref_toks else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return RougeScore(p, r, f1, lcs)


def rouge_l(
    output: str,
    reference: str,
    lang: LanguageTag | None = None,
    *,
    lowercase: bool = True,
    keep_punct: bool = False,
) -> RougeScore:
    """ROUGE-L between ``output`` and ``reference`` over segmenter tokens.

    Han and Thai are compared per codepoint, everything else per word.
    ``lang`` is accepted for interface symmetry; tokenization already
    follows each character's script, so it does not change the result.
    """
    if lang is not None:
        LanguageTag(lang)
    return rouge_from_tokens(
        rouge_tokens(output, lowercase, keep_punct), rouge_tokens(reference, lowercase, keep_punct)
    )


GroupKey = tuple[LanguageTag, str]


def _group_mean(records: Sequence[GenerationRecord], score: Callable[[GenerationRecord], float]) -> dict[GroupKey, float]:
    if not records:
        raise ValueError("need at least one record")
    sums: dict[GroupKey, float] = defaultdict(float)
    counts: dict[GroupKey, int] = defaultdict(int)
    for rec in records:
        key = (rec.query_language, rec.split.value)
        sums[key] += score(rec)
        counts[key] += 1
    return {k: sums[k] / counts[k] for k in sums}


def em_score(records: Sequence[GenerationRecord]) -> dict[GroupKey, float]:
    return _group_mean(records, lambda r: exact_match(r.output, r.reference))


def km_score(
    records: Sequence[GenerationRecord],
    *,
    use_recall: bool = False,
    lowercase: bool = True,
    keep_punct: bool = False,
) -> dict[GroupKey, float]:
    """Mean ROUGE-L F1 (or recall) per (query language, split). Empty outputs score 0."""

    def one(rec: GenerationRecord) -> float:
        s = rouge_l(rec.output, rec.reference, rec.query_language, lowercase=lowercase, keep_punct=keep_punct)
        return s.recall if use_recall else s.f1

    return _group_mean(records, one)


@dataclass(frozen=True)
class LossAudit:
    variant: str  # "GA" | "GD"
    alpha: float
    forget_term: float
    retain_term: float
    total: float
    n_forget: int
    n_retain: int


def loss_audit(logprobs: Sequence[LogProbRecord], alpha: float, variant: str) -> LossAudit:
    """Evaluate the GA or GD unlearning objective from recorded log-likelihoods.

    GA: ``alpha * mean(log p | forget)``. GD subtracts ``mean(log p | retain)``.
    Only bookkeeping over the supplied numbers; no model is involved.
    """
    variant = variant.upper()
    if variant not in ("GA", "GD"):
        raise ValueError(f"variant must be GA or GD, got {variant!r}")
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be a positive finite number, got {alpha}")
    forget = [r.log_likelihood for r in logprobs if r.split is SplitLabel.FORGET]
    retain = [r.log_likelihood for r in logprobs if r.split is SplitLabel.RETAIN]
    if not forget:
        raise ValueError("no records in split 'forget'")
    forget_term = math.fsum(forget) / len(forget)
    if variant == "GA":
        return LossAudit("GA", alpha, forget_term, 0.0, alpha * forget_term, len(forget), len(retain))
    if not retain:
        raise ValueError("no records in split 'retain' (required for GD)")
    retain_term = math.fsum(retain) / len(retain)
    return LossAudit("GD", alpha, forget_term, retain_term, alpha * forget_term - retain_term, len(forget), len(retain))
