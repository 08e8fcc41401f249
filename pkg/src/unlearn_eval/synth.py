"""Synthetic "models": deterministic generation files that stand in for unlearned LLMs.

Behaviors
---------
identity        output = reference
confused:<L>    output = the parallel reference in language L, whatever the query language
refusal         output = a fixed refusal sentence in the query language
forget-aware    reference for retain pairs, refusal for forget pairs
forget-aware+X  refusal for forget pairs, behavior X for retain pairs
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .datamodel import GenerationRecord, QAPair, make_pair_id
from .languages import LanguageTag, SplitLabel

REFUSALS = {
    LanguageTag.EN: "I don't know.",
    LanguageTag.DE: "Das weiß ich leider nicht.",
    LanguageTag.ES: "Lo siento, no lo sé.",
    LanguageTag.ZH: "我不知道。",
    LanguageTag.RU: "Я этого не знаю.",
    LanguageTag.KO: "잘 모르겠습니다.",
    LanguageTag.HI: "मुझे यह नहीं पता।",
    LanguageTag.TH: "ฉันไม่ทราบข้อมูลนี้",
}


class BehaviorError(ValueError):
    pass


@dataclass(frozen=True)
class Behavior:
    kind: str  # identity | confused | refusal
    target: LanguageTag | None = None
    forget_aware: bool = False

    @classmethod
    def parse(cls, text: str) -> "Behavior":
        text = text.strip()
        forget_aware = False
        if text == "forget-aware":
            return cls("identity", forget_aware=True)
        if text.startswith("forget-aware+"):
            forget_aware = True
            text = text[len("forget-aware+"):]
        if text in ("identity", "refusal"):
            return cls(text, forget_aware=forget_aware)
        if text.startswith("confused:"):
            code = text.split(":", 1)[1]
            try:
                return cls("confused", LanguageTag(code), forget_aware)
            except ValueError:
                raise BehaviorError(f"unknown language {code!r} in behavior") from None
        raise BehaviorError(f"unknown behavior {text!r}")

    def __str__(self) -> str:
        base = f"confused:{self.target.value}" if self.kind == "confused" else self.kind
        if self.forget_aware:
            return "forget-aware" if base == "identity" else f"forget-aware+{base}"
        return base


def synth_generations(
    pairs: Sequence[QAPair],
    behavior: Behavior | str,
    model_id: str | None = None,
    seed: int = 0,
) -> list[GenerationRecord]:
    """Produce one generation record per QA pair.

    Every behavior is deterministic; ``seed`` is accepted so callers can log it
    in a run manifest, and never changes the output.
    """
    if isinstance(behavior, str):
        behavior = Behavior.parse(behavior)
    model_id = model_id or str(behavior)
    answers: dict[str, str] = {p.pair_id: p.answer for p in pairs}
    if behavior.kind == "confused":
        present = {p.language for p in pairs}
        if behavior.target not in present:
            raise BehaviorError(f"confusion target {behavior.target.value} not in dataset languages")

    out = []
    for p in pairs:
        if behavior.forget_aware and p.split is SplitLabel.FORGET:
            output = REFUSALS[p.language]
        elif behavior.kind == "identity":
            output = p.answer
        elif behavior.kind == "refusal":
            output = REFUSALS[p.language]
        else:
            output = answers[make_pair_id(p.profile_id, p.attribute, behavior.target)]
        out.append(
            GenerationRecord(
                pair_id=p.pair_id,
                query_language=p.language,
                question=p.question,
                reference=p.answer,
                output=output,
                model_id=model_id,
                split=p.split,
            )
        )
    return out
