"""Codepoint -> script classification by Unicode block."""

from __future__ import annotations

import bisect
import unicodedata
from functools import lru_cache

from .languages import ScriptClass

_L, _H, _K, _C, _D, _T = (
    ScriptClass.LATIN,
    ScriptClass.HAN,
    ScriptClass.HANGUL,
    ScriptClass.CYRILLIC,
    ScriptClass.DEVANAGARI,
    ScriptClass.THAI,
)

# (first, last, script), sorted by first codepoint.
_BLOCKS = sorted(
    [
        (0x0041, 0x005A, _L),
        (0x0061, 0x007A, _L),
        (0x00AA, 0x00AA, _L),
        (0x00BA, 0x00BA, _L),
        (0x00C0, 0x024F, _L),  # Latin-1 letters, Extended-A/B
        (0x0250, 0x02AF, _L),  # IPA extensions
        (0x0400, 0x052F, _C),  # Cyrillic + Supplement
        (0x0900, 0x097F, _D),
        (0x0E00, 0x0E7F, _T),
        (0x1100, 0x11FF, _K),  # Hangul Jamo
        (0x1C80, 0x1C8F, _C),
        (0x1E00, 0x1EFF, _L),  # Latin Extended Additional
        (0x2C60, 0x2C7F, _L),
        (0x2DE0, 0x2DFF, _C),
        (0x3130, 0x318F, _K),  # Hangul Compatibility Jamo
        (0x3400, 0x4DBF, _H),  # CJK Extension A
        (0x4E00, 0x9FFF, _H),  # CJK Unified Ideographs
        (0xA640, 0xA69F, _C),
        (0xA720, 0xA7FF, _L),
        (0xA8E0, 0xA8FF, _D),
        (0xA960, 0xA97F, _K),
        (0xAB30, 0xAB6F, _L),
        (0xAC00, 0xD7AF, _K),  # Hangul Syllables
        (0xD7B0, 0xD7FF, _K),
        (0xF900, 0xFAFF, _H),  # CJK Compatibility Ideographs
        (0xFF21, 0xFF3A, _L),
        (0xFF41, 0xFF5A, _L),
        (0x20000, 0x2FA1F, _H),  # CJK Extensions B.. and Compatibility Supplement
        (0x30000, 0x323AF, _H),
    ]
)
_STARTS = [b[0] for b in _BLOCKS]


@lru_cache(maxsize=65536)
def script_of(ch: str) -> ScriptClass | None:
    """Return the script of a single character, or ``None`` for script-neutral ones.

    Digits, punctuation, symbols, whitespace and codepoints outside the six
    handled scripts all map to ``None``.
    """
    cp = ord(ch)
    i = bisect.bisect_right(_STARTS, cp) - 1
    if i < 0:
        return None
    first, last, script = _BLOCKS[i]
    if cp > last:
        return None
    if unicodedata.category(ch)[0] not in "LM":
        return None
    return script
