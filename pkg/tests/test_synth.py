import pytest

from unlearn_eval.languages import LanguageTag, SplitLabel
from unlearn_eval.synth import REFUSALS, Behavior, BehaviorError, synth_generations

ZH = LanguageTag.ZH


@pytest.mark.parametrize(
    "text",
    ["identity", "refusal", "confused:zh", "forget-aware", "forget-aware+confused:de", "forget-aware+refusal"],
)
def test_behavior_parse_roundtrip(text):
    assert str(Behavior.parse(text)) == text


@pytest.mark.parametrize("text", ["", "confused", "confused:xx", "forget-aware+nothing", "echo"])
def test_behavior_parse_errors(text):
    with pytest.raises(BehaviorError):
        Behavior.parse(text)


def test_identity_and_refusal(pairs):
    ident = synth_generations(pairs, "identity")
    assert all(g.output == g.reference for g in ident)
    assert {g.model_id for g in ident} == {"identity"}
    refusal = synth_generations(pairs, "refusal", model_id="r")
    assert all(g.output == REFUSALS[g.query_language] for g in refusal)


def test_confused_output_is_byte_equal_to_target_answer(pairs):
    zh = {(p.profile_id, p.attribute): p.answer for p in pairs if p.language is ZH}
    for g, p in zip(synth_generations(pairs, "confused:zh"), pairs):
        assert g.output == zh[(p.profile_id, p.attribute)]
        assert g.pair_id == p.pair_id and g.split is p.split


def test_forget_aware_composite(pairs):
    gens = synth_generations(pairs, "forget-aware+confused:zh")
    for g in gens:
        if g.split is SplitLabel.FORGET:
            assert g.output == REFUSALS[g.query_language]
        else:
            assert g.output != REFUSALS[g.query_language]


def test_seed_never_changes_output(pairs):
    assert synth_generations(pairs, "confused:zh", seed=0) == synth_generations(pairs, "confused:zh", seed=99)


def test_target_must_be_in_dataset(pairs):
    with pytest.raises(BehaviorError):
        synth_generations(pairs, "confused:th")
