"""Semantic evaluation with an LLM judge.

A judge decides, per generation, whether the output carries the same
information as the reference regardless of the language it is written in.
The YES ratio per (query language, split) is the semantic score; ambiguous
verdicts are reported separately and left out of the ratio.

Two judges are provided: :class:`LLMJudge`, which calls any
chat-completion-compatible HTTP endpoint and caches responses on disk, and
:class:`MockJudge`, an offline stand-in that checks whether the output
mentions the profile's name and the attribute value in any language.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import tempfile
import threading
import time
import unicodedata
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Sequence

import httpx

from .datamodel import GenerationRecord, Profile, QAPair, make_pair_id, nfc
from .languages import LanguageTag, SplitLabel

log = logging.getLogger(__name__)

PROMPT_VERSION = "1"
SYSTEM_MESSAGE = "You are a careful evaluator that compares the factual content of two texts."
PROMPT_TEMPLATE = """Compare the two texts below. They may be written in different languages. Ignore language and wording and judge only the information they convey.

Answer [YES] if the generated text contains the same information as the ground truth. Answer [NO] otherwise, including when the generated text refuses, is empty, or states different facts.

Reply with exactly [YES] or [NO].

<<<GENERATED>>>
{output}
<<<END GENERATED>>>

<<<GROUND TRUTH>>>
{reference}
<<<END GROUND TRUTH>>>"""


def prompt_sha256() -> str:
    blob = json.dumps([PROMPT_VERSION, SYSTEM_MESSAGE, PROMPT_TEMPLATE], ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _neutralize(text: str) -> str:
    while "<<<" in text or ">>>" in text:
        text = text.replace("<<<", "").replace(">>>", "")
    return text


def build_prompt(output: str, reference: str) -> str:
    return PROMPT_TEMPLATE.format(output=_neutralize(output), reference=_neutralize(reference))


class VerdictValue(str, Enum):
    YES = "YES"
    NO = "NO"
    AMBIGUOUS = "AMBIGUOUS"


@dataclass(frozen=True)
class Verdict:
    value: VerdictValue
    raw_response: str = ""
    cached: bool = False
    error: str | None = None  # set when every attempt failed in transport


_BRACKET_RE = re.compile(r"\[\s*(yes|no)\s*\]", re.IGNORECASE)


def parse_verdict(response: str) -> Verdict:
    """First ``[YES]``/``[NO]`` token wins; a bare yes/no reply is accepted too."""
    text = response or ""
    m = _BRACKET_RE.search(text)
    if m:
        return Verdict(VerdictValue(m.group(1).upper()), text)
    bare = text.strip().strip(".!").strip().lower()
    if bare in ("yes", "no"):
        return Verdict(VerdictValue(bare.upper()), text)
    return Verdict(VerdictValue.AMBIGUOUS, text)


# ---------------------------------------------------------------------------
# HTTP judge
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JudgeConfig:
    endpoint_url: str
    model_name: str
    api_key_env_var: str = "OPENAI_API_KEY"
    max_concurrency: int = 4
    retries: int = 3
    timeout: float = 60.0
    cache_dir: Path | None = None
    temperature: float = 0.0
    requests_per_second: float | None = None
    backoff_seconds: float = 1.0

    def __post_init__(self) -> None:
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")

    def to_json(self) -> dict:
        """Serializable view for manifests. Holds the variable name, never the key."""
        return {
            "endpoint_url": self.endpoint_url,
            "model_name": self.model_name,
            "api_key_env_var": self.api_key_env_var,
            "max_concurrency": self.max_concurrency,
            "retries": self.retries,
            "timeout": self.timeout,
            "cache_dir": str(self.cache_dir) if self.cache_dir else None,
            "temperature": self.temperature,
            "requests_per_second": self.requests_per_second,
        }


class TokenBucket:
    def __init__(self, rate: float, capacity: float | None = None, clock=time.monotonic, sleep=time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1:
                    self._tokens -= 1
                    return
                wait = (1 - self._tokens) / self.rate
            self._sleep(wait)


class ResponseCache:
    """One JSON file per content hash of (prompt, model). Writes are atomic renames."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(prompt: str, model_name: str) -> str:
        blob = json.dumps({"model": model_name, "prompt": prompt}, ensure_ascii=False, sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def get(self, key: str) -> str | None:
        path = self.root / f"{key}.json"
        try:
            return json.loads(path.read_text(encoding="utf-8"))["response"]
        except FileNotFoundError:
            return None
        except (json.JSONDecodeError, KeyError):
            log.warning("ignoring corrupt cache entry %s", path)
            return None

    def put(self, key: str, model_name: str, response: str) -> None:
        payload = json.dumps(
            {"model": model_name, "prompt_sha256": prompt_sha256(), "response": response},
            ensure_ascii=False,
        )
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, self.root / f"{key}.json")


def extract_text(body: object) -> str:
    """Pull the reply text out of a chat-completion style JSON body."""
    if isinstance(body, dict):
        choices = body.get("choices")
        if isinstance(choices, list) and choices:
            first = choices[0]
            if isinstance(first, dict):
                msg = first.get("message")
                if isinstance(msg, dict) and isinstance(msg.get("content"), str):
                    return msg["content"]
                if isinstance(first.get("text"), str):
                    return first["text"]
        for key in ("text", "output_text", "content"):
            if isinstance(body.get(key), str):
                return body[key]
    raise ValueError("response has no text field")


class LLMJudge:
    def __init__(
        self,
        config: JudgeConfig,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._sleep = sleep
        self._client = httpx.Client(transport=transport, timeout=config.timeout)
        self._cache = ResponseCache(config.cache_dir) if config.cache_dir else None
        self._bucket = TokenBucket(config.requests_per_second) if config.requests_per_second else None

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "LLMJudge":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env_var)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, prompt: str) -> str:
        if self._bucket:
            self._bucket.acquire()
        resp = self._client.post(
            self.config.endpoint_url,
            headers=self._headers(),
            json={
                "model": self.config.model_name,
                "messages": [
                    {"role": "system", "content": SYSTEM_MESSAGE},
                    {"role": "user", "content": prompt},
                ],
                "temperature": self.config.temperature,
            },
        )
        resp.raise_for_status()
        return extract_text(resp.json())

    def judge_texts(self, output: str, reference: str) -> Verdict:
        prompt = build_prompt(output, reference)
        key = ResponseCache.key(prompt, self.config.model_name)
        if self._cache:
            hit = self._cache.get(key)
            if hit is not None:
                v = parse_verdict(hit)
                return Verdict(v.value, v.raw_response, cached=True)

        last_raw, last_error = "", None
        for attempt in range(self.config.retries + 1):
            if attempt:
                self._sleep(self.config.backoff_seconds * 2 ** (attempt - 1))
            try:
                raw = self._post(prompt)
            except httpx.HTTPStatusError as exc:
                last_error = f"HTTP {exc.response.status_code}"
                if exc.response.status_code != 429 and exc.response.status_code < 500:
                    break
                continue
            except (httpx.TransportError, ValueError) as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                continue
            last_raw, last_error = raw, None
            verdict = parse_verdict(raw)
            if verdict.value is not VerdictValue.AMBIGUOUS:
                if self._cache:
                    self._cache.put(key, self.config.model_name, raw)
                return verdict
        return Verdict(VerdictValue.AMBIGUOUS, last_raw, error=last_error)

    def __call__(self, record: GenerationRecord) -> Verdict:
        return self.judge_texts(record.output, record.reference)


# ---------------------------------------------------------------------------
# Offline mock judge
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QAContext:
    name: str
    values: Mapping[LanguageTag, str]


def _fold(text: str) -> str:
    return nfc(text).casefold()


def _is_word_char(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "LM" and not _unbounded(ch)


def _unbounded(ch: str) -> bool:
    # scripts written without spaces, or with particles glued to nouns
    cp = ord(ch)
    return (
        0x4E00 <= cp <= 0x9FFF
        or 0x3400 <= cp <= 0x4DBF
        or 0xAC00 <= cp <= 0xD7AF
        or 0x1100 <= cp <= 0x11FF
        or 0x3130 <= cp <= 0x318F
        or 0x0E00 <= cp <= 0x0E7F
    )


def contains_term(text: str, term: str) -> bool:
    """Case-folded containment; for space-delimited scripts the match must sit on word boundaries."""
    hay, needle = _fold(text), _fold(term)
    if not needle:
        return False
    start = 0
    while True:
        i = hay.find(needle, start)
        if i < 0:
            return False
        j = i + len(needle)
        left_ok = i == 0 or not (_is_word_char(needle[0]) and _is_word_char(hay[i - 1]))
        right_ok = j == len(hay) or not (_is_word_char(needle[-1]) and _is_word_char(hay[j]))
        if left_ok and right_ok:
            return True
        start = i + 1


def mock_judge(output: str, reference: str, qa_context: QAContext) -> VerdictValue:
    """YES iff ``output`` names the profile and states the attribute value in any language."""
    if not contains_term(output, qa_context.name):
        return VerdictValue.NO
    if any(contains_term(output, v) for v in qa_context.values.values()):
        return VerdictValue.YES
    return VerdictValue.NO


def build_contexts(profiles: Sequence[Profile], pairs: Sequence[QAPair]) -> dict[str, QAContext]:
    by_id = {p.profile_id: p for p in profiles}
    out = {}
    for pair in pairs:
        prof = by_id.get(pair.profile_id)
        if prof is None:
            raise KeyError(f"pair {pair.pair_id} refers to unknown profile {pair.profile_id}")
        out[pair.pair_id] = QAContext(prof.name, dict(prof.attributes[pair.attribute]))
    return out


class MockJudge:
    def __init__(self, contexts: Mapping[str, QAContext]):
        self.contexts = contexts

    def __call__(self, record: GenerationRecord) -> Verdict:
        ctx = self.contexts.get(record.pair_id)
        if ctx is None:
            raise KeyError(f"unknown pair_id {record.pair_id!r}")
        value = mock_judge(record.output, record.reference, ctx)
        return Verdict(value, f"[{value.value}]")


# ---------------------------------------------------------------------------
# Corpus scoring
# ---------------------------------------------------------------------------

Judge = Callable[[GenerationRecord], Verdict]


class JudgeUnavailableError(RuntimeError):
    """Every request in a run failed in transport."""


@dataclass(frozen=True)
class JudgeGroup:
    n_yes: int
    n_no: int
    n_ambiguous: int

    @property
    def n_records(self) -> int:
        return self.n_yes + self.n_no + self.n_ambiguous

    @property
    def yes_ratio(self) -> float | None:
        decided = self.n_yes + self.n_no
        return self.n_yes / decided if decided else None


def run_judge(records: Sequence[GenerationRecord], judge: Judge, max_concurrency: int = 1) -> list[Verdict]:
    if max_concurrency <= 1:
        verdicts = [judge(r) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
            verdicts = list(pool.map(judge, records))
    if records and all(v.error is not None for v in verdicts):
        raise JudgeUnavailableError(f"all {len(records)} judge requests failed; last error: {verdicts[-1].error}")
    return verdicts


def judge_corpus(
    records: Sequence[GenerationRecord], judge: Judge, max_concurrency: int = 1
) -> dict[tuple[LanguageTag, str], JudgeGroup]:
    verdicts = run_judge(records, judge, max_concurrency)
    tally: dict[tuple, list[int]] = defaultdict(lambda: [0, 0, 0])
    for rec, v in zip(records, verdicts):
        slot = {VerdictValue.YES: 0, VerdictValue.NO: 1, VerdictValue.AMBIGUOUS: 2}[v.value]
        tally[(rec.query_language, rec.split.value)][slot] += 1
    return {k: JudgeGroup(*v) for k, v in tally.items()}


def validate_judge(
    pairs: Sequence[QAPair],
    languages: Sequence[LanguageTag],
    judge: Judge,
    max_concurrency: int = 1,
) -> dict[tuple[LanguageTag, LanguageTag], float]:
    """Fraction of parallel answer pairs judged non-equivalent, per (ground-truth language, comparison language).

    The ground-truth answer in language a is presented as the output and its
    parallel answer in language b as the reference.
    """
    by_id = {p.pair_id: p for p in pairs}
    cells = sorted({(p.profile_id, p.attribute) for p in pairs}, key=lambda c: (c[0], c[1].value))
    jobs: list[tuple[tuple[LanguageTag, LanguageTag], GenerationRecord]] = []
    for la in languages:
        for lb in languages:
            for pid, attr in cells:
                a = by_id.get(make_pair_id(pid, attr, la))
                b = by_id.get(make_pair_id(pid, attr, lb))
                if a is None or b is None:
                    continue
                rec = GenerationRecord(b.pair_id, lb, b.question, b.answer, a.answer, "validation", b.split)
                jobs.append(((la, lb), rec))
    verdicts = run_judge([r for _, r in jobs], judge, max_concurrency)
    no = defaultdict(int)
    total = defaultdict(int)
    for (cell, _), v in zip(jobs, verdicts):
        if v.value is VerdictValue.AMBIGUOUS:
            continue
        total[cell] += 1
        no[cell] += v.value is VerdictValue.NO
    return {
        (la, lb): (no[(la, lb)] / total[(la, lb)] if total[(la, lb)] else float("nan"))
        for la in languages
        for lb in languages
    }
