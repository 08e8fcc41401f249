"""Tokenization and overlapping n-gram windows.

Space-delimited scripts (Latin, Cyrillic, Devanagari, Hangul) are split into
words; Han and Thai are split into single codepoints, since neither marks
word boundaries and codepoints are the only unit that needs no dictionary.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator

from .languages import ScriptClass
from .scripts import script_of


class Joiner(str, Enum):
    SPACE = "space"
    CONCAT = "concat"


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    joiners: tuple[Joiner, ...]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.joiners):
            raise ValueError("tokens and joiners differ in length")
        for tok in self.tokens:
            if not tok or not tok.strip():
                raise ValueError("empty or whitespace-only token")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def __getitem__(self, item) -> "TokenSequence":
        if isinstance(item, slice):
            return TokenSequence(self.tokens[item], self.joiners[item])
        raise TypeError("TokenSequence supports slicing only")

    def render(self) -> str:
        parts: list[str] = []
        for i, (tok, join) in enumerate(zip(self.tokens, self.joiners)):
            if i and not (join is Joiner.CONCAT and self.joiners[i - 1] is Joiner.CONCAT):
                parts.append(" ")
            parts.append(tok)
        return "".join(parts)


Tokenizer = Callable[[str], TokenSequence]

_WORD_SCRIPTS = {ScriptClass.LATIN, ScriptClass.CYRILLIC, ScriptClass.DEVANAGARI}
_INTERNAL = {"'", "’", "-", "‐", "‑"}

# Character kinds used while scanning.
_DIGIT = "digit"
_OTHER = "other-letter"


def _kind(ch: str):
    script = script_of(ch)
    if script is not None:
        return script
    cat = unicodedata.category(ch)
    if cat == "Nd":
        return _DIGIT
    if cat[0] == "L":
        return _OTHER
    return None


def tokenize(text: str, keep_punct: bool = False) -> TokenSequence:
    """Split ``text`` into tokens.

    Runs of Latin, Cyrillic or Devanagari letters form one token each, keeping
    apostrophes and hyphens that sit between two letters of the run. Hangul
    runs, digit runs and runs of letters from unhandled scripts are tokens too.
    Every Han or Thai codepoint is its own (concatenated) token. Punctuation
    is dropped unless ``keep_punct`` is set, in which case each punctuation or
    symbol character becomes its own token.
    """
    tokens: list[str] = []
    joiners: list[Joiner] = []
    buf: list[str] = []
    buf_kind = None

    def flush() -> None:
        nonlocal buf, buf_kind
        if buf:
            tokens.append("".join(buf))
            joiners.append(Joiner.SPACE)
        buf = []
        buf_kind = None

    n = len(text)
    for i, ch in enumerate(text):
        kind = _kind(ch)
        if kind in (ScriptClass.HAN, ScriptClass.THAI):
            flush()
            tokens.append(ch)
            joiners.append(Joiner.CONCAT)
            continue
        if kind is None:
            cat = unicodedata.category(ch)
            if cat[0] == "M" and buf:
                # stray combining mark continues the current run
                buf.append(ch)
                continue
            if (
                ch in _INTERNAL
                and buf
                and buf_kind in _WORD_SCRIPTS
                and i + 1 < n
                and _kind(text[i + 1]) == buf_kind
            ):
                buf.append(ch)
                continue
            flush()
            if keep_punct and not ch.isspace() and cat[0] in "PS":
                tokens.append(ch)
                joiners.append(Joiner.SPACE)
            continue
        if kind != buf_kind:
            flush()
            buf_kind = kind
        buf.append(ch)
    flush()
    return TokenSequence(tuple(tokens), tuple(joiners))


def ngrams(seq: TokenSequence, n: int) -> list[str]:
    """Overlapping windows of ``n`` tokens, rendered back to text.

    A nonempty sequence shorter than ``n`` yields a single fragment holding
    the whole sequence, so that a short sentence is still scorable.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    k = len(seq)
    if k == 0:
        return []
    if k < n:
        return [seq.render()]
    return [seq[i : i + n].render() for i in range(k - n + 1)]
