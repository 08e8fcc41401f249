import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unlearn_eval.datamodel import GenerationRecord, LogProbRecord
from unlearn_eval.languages import LanguageTag, SplitLabel
from unlearn_eval.refmetrics import em_score, exact_match, km_score, lcs_length, loss_audit, rouge_from_tokens, rouge_l
from unlearn_eval.synth import synth_generations

F, R = SplitLabel.FORGET, SplitLabel.RETAIN


def brute_lcs(a, b):
    """Longest common subsequence by enumerating every subsequence of the shorter side."""
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)

    def is_subseq(sub, seq):
        it = iter(seq)
        return all(tok in it for tok in sub)

    for k in range(len(short), 0, -1):
        for idx in itertools.combinations(range(len(short)), k):
            if is_subseq([short[i] for i in idx], long_):
                return k
    return 0


def test_exact_match_examples():
    assert exact_match("Kim was born on 1987-03-02.", "Kim was born on 1987-03-02.") == 1
    assert exact_match("kim was born on 1987-03-02.", "Kim was born on 1987-03-02.") == 0
    assert exact_match("  X ", "X") == 1
    assert exact_match("José", "José") == 1
    assert exact_match("", "X") == 0


def test_rouge_examples():
    s = rouge_l("a b c d", "a c d e")
    assert (s.lcs_len, s.precision, s.recall, s.f1) == (3, 0.75, 0.75, 0.75)
    assert brute_lcs("a b c d".split(), "a c d e".split()) == 3
    same = rouge_l("The cat sat.", "the cat sat")
    assert same.f1 == same.precision == same.recall == 1.0
    assert rouge_l("alpha beta", "gamma delta").f1 == 0.0
    assert rouge_l("", "gamma delta").f1 == 0.0
    assert rouge_l("", "").f1 == 0.0


def test_rouge_cjk_is_per_codepoint():
    s = rouge_l("我不知道", "我知道", LanguageTag.ZH)
    assert s.lcs_len == 3
    assert s.f1 == pytest.approx(2 * 0.75 * 1.0 / 1.75)


def test_rouge_flags():
    assert rouge_l("The Cat", "the cat", lowercase=False).f1 == 0.0
    assert rouge_l("a , b", "a b", keep_punct=True).lcs_len == 2
    assert rouge_l("a , b", "a b", keep_punct=True).precision == pytest.approx(2 / 3)


def test_rouge_rejects_unknown_language():
    with pytest.raises(ValueError):
        rouge_l("a", "a", "xx")


def test_identity_scores_one(pairs):
    gens = synth_generations(pairs, "identity")
    assert set(em_score(gens).values()) == {1.0}
    assert set(km_score(gens).values()) == {1.0}


def test_confused_em_zero_off_language(pairs):
    em = em_score(synth_generations(pairs, "confused:zh"))
    for (lang, _), v in em.items():
        assert v == (1.0 if lang is LanguageTag.ZH else 0.0)


def test_nine_of_fourteen(pairs):
    forget = [p for p in pairs if p.language is LanguageTag.EN and p.split is F]
    assert len(forget) == 14
    gens = [
        GenerationRecord(p.pair_id, p.language, p.question, p.answer, p.answer if i < 9 else "", "m", p.split)
        for i, p in enumerate(forget)
    ]
    assert em_score(gens)[(LanguageTag.EN, "forget")] == pytest.approx(9 / 14)
    assert round(9 / 14, 2) == 0.64


def test_recall_flag_and_empty_input():
    recs = [GenerationRecord("0-hobby-en", LanguageTag.EN, "q", "a b c d", "a b", "m", R)]
    assert km_score(recs, use_recall=True)[(LanguageTag.EN, "retain")] == 0.5
    assert km_score(recs)[(LanguageTag.EN, "retain")] == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        km_score([])
    with pytest.raises(ValueError):
        em_score([])


def test_means_are_permutation_invariant(pairs):
    gens = synth_generations(pairs[:200], "confused:de")
    shuffled = list(gens)
    random.Random(3).shuffle(shuffled)
    assert km_score(gens) == pytest.approx(km_score(shuffled))
    assert em_score(gens) == em_score(shuffled)


def lp(split, value, i=0):
    return LogProbRecord(f"{i}-hobby-en", split, value)


def test_loss_audit_examples():
    assert loss_audit([lp(F, -2.0)], 1.0, "GA").total == -2.0
    gd = loss_audit([lp(F, -2.0), lp(R, -0.5)], 0.5, "gd")
    assert (gd.forget_term, gd.retain_term, gd.total) == (-2.0, -0.5, -0.5)
    assert loss_audit([lp(F, -2.0), lp(R, -0.5)], 0.5, "GA").retain_term == 0.0


def test_loss_audit_errors():
    with pytest.raises(ValueError, match="retain"):
        loss_audit([lp(F, -1.0)], 1.0, "GD")
    with pytest.raises(ValueError, match="forget"):
        loss_audit([lp(R, -1.0)], 1.0, "GA")
    with pytest.raises(ValueError):
        loss_audit([lp(F, -1.0)], 0.0, "GA")
    with pytest.raises(ValueError):
        loss_audit([lp(F, -1.0)], 1.0, "NPO")


tokens = st.lists(st.sampled_from("abcde"), max_size=10)


@settings(max_examples=300)
@given(tokens, tokens)
def test_lcs_matches_brute_force(a, b):
    assert lcs_length(a, b) == brute_lcs(a, b)


@settings(max_examples=300)
@given(tokens, tokens)
def test_rouge_symmetry_and_bounds(a, b):
    ab, ba = rouge_from_tokens(a, b), rouge_from_tokens(b, a)
    assert ab.lcs_len == ba.lcs_len <= min(len(a), len(b))
    assert ab.f1 == pytest.approx(ba.f1)
    assert 0.0 <= ab.f1 <= 1.0
    assert (ab.f1 == 1.0) == (a == b and len(a) > 0)


@settings(max_examples=200)
@given(st.text(max_size=30))
def test_exact_match_implies_full_rouge(text):
    if exact_match(text, text) and rouge_l(text, text).lcs_len:
        assert rouge_l(text, text).f1 == 1.0


@settings(max_examples=200)
@given(
    st.lists(st.floats(-50, 0), min_size=1, max_size=20),
    st.lists(st.floats(-50, 0), min_size=1, max_size=20),
    st.floats(0.01, 10),
)
def test_gd_plus_retain_equals_ga(forget, retain, alpha):
    recs = [lp(F, v, i) for i, v in enumerate(forget)] + [lp(R, v, i) for i, v in enumerate(retain)]
    ga, gd = loss_audit(recs, alpha, "GA"), loss_audit(recs, alpha, "GD")
    assert abs(gd.total + gd.retain_term - ga.total) <= 1e-12
