import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unlearn_eval.segmenter import Joiner, TokenSequence, ngrams, tokenize


@pytest.mark.parametrize(
    "text, tokens",
    [
        ("abc def ghi jk", ("abc", "def", "ghi", "jk")),
        ("今天天气好", ("今", "天", "天", "气", "好")),
        ("don't stop", ("don't", "stop")),
        ("1987-03-02", ("1987", "03", "02")),
        ("안녕하세요 세계", ("안녕하세요", "세계")),
        ("Hello, world!", ("Hello", "world")),
        ("well-known rock’n’roll", ("well-known", "rock’n’roll")),
        ("нижний-новгород, да", ("нижний-новгород", "да")),
        ("नमस्ते दुनिया", ("नमस्ते", "दुनिया")),
        ("日本語abc", ("日", "本", "語", "abc")),
        ("", ()),
        ("   \t\n", ()),
        ("-- 'quoted' --", ("quoted",)),
    ],
)
def test_tokenize_examples(text, tokens):
    assert tokenize(text).tokens == tokens


def test_han_and_thai_tokens_concatenate():
    seq = tokenize("ภาษา ok 今天")
    assert seq.joiners[0] is Joiner.CONCAT
    assert seq.render() == "ภาษา ok 今天"


def test_keep_punct():
    assert tokenize("Hello, world!", keep_punct=True).tokens == ("Hello", ",", "world", "!")


def test_token_sequence_rejects_blank_tokens():
    with pytest.raises(ValueError):
        TokenSequence((" ",), (Joiner.SPACE,))
    with pytest.raises(ValueError):
        TokenSequence(("a",), ())


def test_ngrams_examples():
    four = tokenize("abc def ghi jk")
    assert ngrams(four, 3) == ["abc def ghi", "def ghi jk"]
    assert ngrams(tokenize("ab cd"), 3) == ["ab cd"]
    assert ngrams(tokenize("今天天气好"), 3) == ["今天天", "天天气", "天气好"]
    assert ngrams(tokenize(""), 3) == []


def test_ngrams_mixed_joiners():
    assert ngrams(tokenize("the cat 今天"), 3) == ["the cat 今", "cat 今天"]


def test_ngrams_rejects_zero():
    with pytest.raises(ValueError):
        ngrams(tokenize("a b"), 0)


words = st.lists(st.sampled_from(["alpha", "beta", "gamma", "дом", "집", "नमस्ते", "42", "今", "ไ"]), max_size=14)


@settings(max_examples=200)
@given(words, st.integers(1, 7))
def test_ngram_count_law(ws, n):
    seq = tokenize(" ".join(ws))
    frags = ngrams(seq, n)
    k = len(seq)
    assert len(frags) == max(k - n + 1, min(k, 1))


@settings(max_examples=200)
@given(st.lists(st.sampled_from(["alpha", "beta", "gamma", "дом", "집", "42"]), min_size=1, max_size=14), st.integers(1, 6))
def test_windows_overlap_and_reconstruct(ws, n):
    seq = tokenize(" ".join(ws))
    frags = ngrams(seq, n)
    if len(seq) < n:
        assert frags == [seq.render()]
        return
    split = [f.split(" ") for f in frags]
    assert all(len(f) == n for f in split)
    for a, b in zip(split, split[1:]):
        assert a[1:] == b[:-1]
    rebuilt = split[0] + [f[-1] for f in split[1:]]
    assert tuple(rebuilt) == seq.tokens


@settings(max_examples=200)
@given(st.text(max_size=40))
def test_render_is_idempotent(text):
    once = tokenize(text)
    again = tokenize(once.render())
    assert again.tokens == once.tokens
    assert tokenize(again.render()).render() == again.render()


@settings(max_examples=200)
@given(st.text(max_size=60))
def test_tokens_never_blank(text):
    for tok in tokenize(text, keep_punct=True):
        assert tok and tok.strip()
