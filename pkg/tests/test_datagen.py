import json
from collections import Counter
from datetime import date

import pytest

from unlearn_eval import datagen
from unlearn_eval.datagen import (
    ENGLISH_POOL_SIZES,
    GenSpec,
    QATemplate,
    TableError,
    assign_split,
    bundled_tables,
    export_english_defaults,
    forget_counts,
    generate,
    generate_profiles,
    load_name_pool,
    load_translation_tables,
    render_qa,
)
from unlearn_eval.datamodel import dumps_record, validate_dataset
from unlearn_eval.languages import (
    ATTRIBUTES,
    LANGUAGE_SET_1,
    LANGUAGE_SET_2,
    AttributeKey,
    LanguageTag,
    SplitLabel,
)

EN, DE = LanguageTag.EN, LanguageTag.DE


def test_english_pools_and_sizes():
    tables = bundled_tables()
    sizes = {a: len(tables.pools[a].values[EN]) for a in ENGLISH_POOL_SIZES}
    assert sizes == {
        AttributeKey.GENDER: 2, AttributeKey.EMPLOYMENT: 20, AttributeKey.RESIDENCE: 10,
        AttributeKey.RELIGION: 3, AttributeKey.EDUCATION: 3, AttributeKey.HOBBY: 16,
    }
    en = {a: tables.pools[a].values[EN] for a in ENGLISH_POOL_SIZES}
    assert set(en[AttributeKey.GENDER]) == {"male", "female"}
    assert {"software developer", "doctor", "artist"} <= set(en[AttributeKey.EMPLOYMENT])
    assert {"Brazil", "Canada", "Egypt", "Germany"} <= set(en[AttributeKey.RESIDENCE])
    assert set(en[AttributeKey.RELIGION]) == {"non-religious", "Christian", "Buddhist"}
    assert set(en[AttributeKey.EDUCATION]) == {"middle school", "high school", "university"}
    assert {"skydiving", "soccer", "skiing"} <= set(en[AttributeKey.HOBBY])


def test_bundled_tables_cover_all_languages():
    tables = bundled_tables()
    assert set(tables.languages()) == set(LanguageTag)
    assert tables.missing_cells(list(LanguageTag)) == []


def test_name_pool():
    names = load_name_pool()
    assert len(names) >= 200
    assert len(set(names)) == len(names)
    assert all(n.isascii() and len(n.split()) == 2 for n in names)


def test_default_dataset(dataset):
    profiles, pairs = dataset
    assert len(profiles) == 40
    assert len(pairs) == 1400
    assert validate_dataset(pairs).ok
    tuples = {tuple(p.value(a, EN) for a in ATTRIBUTES) for p in profiles}
    assert len(tuples) == 40
    for p in profiles:
        year = int(p.value(AttributeKey.BIRTHDAY, EN)[:4])
        assert 1950 <= year <= 2010
    assert forget_counts(pairs) == {lang.value: 14 for lang in LANGUAGE_SET_1}
    per_lang = Counter((p.language, p.split) for p in pairs)
    assert all(per_lang[(lang, SplitLabel.RETAIN)] == 266 for lang in LANGUAGE_SET_1)


def test_same_seed_same_bytes():
    a = generate(GenSpec(seed=7))
    b = generate(GenSpec(seed=7))
    c = generate(GenSpec(seed=8))
    dump = lambda d: "\n".join(dumps_record(r) for part in d for r in part)
    assert dump(a) == dump(b)
    assert dump(a) != dump(c)


def test_names_identical_across_languages(pairs, profiles):
    by_pid = {p.profile_id: p.name for p in profiles}
    for pair in pairs:
        assert by_pid[pair.profile_id] in pair.question
        assert by_pid[pair.profile_id] in pair.answer


def test_parallel_values_are_index_aligned(profiles):
    tables = bundled_tables()
    for prof in profiles:
        for attr in ENGLISH_POOL_SIZES:
            idx = tables.pools[attr].values[EN].index(prof.value(attr, EN))
            for lang in LANGUAGE_SET_1:
                assert prof.value(attr, lang) == tables.pools[attr].values[lang][idx]


def test_language_set_two(dataset2):
    profiles, pairs = dataset2
    assert len(pairs) == 1400
    assert validate_dataset(pairs).ok
    assert {p.language for p in pairs} == set(LANGUAGE_SET_2)


def test_product_formula():
    profiles, pairs = generate(GenSpec(n_profiles=1, languages=(EN,), forget_profiles=0))
    assert len(pairs) == 7


def test_small_name_pool_is_rejected():
    with pytest.raises(ValueError):
        generate_profiles(GenSpec(n_profiles=3, name_pool=("A B", "C D")))


def test_degenerate_pools_exhaust_uniqueness(tmp_path, monkeypatch):
    raw = bundled_tables().to_json()
    for attr in ENGLISH_POOL_SIZES:
        for lang in raw["pools"][attr]:
            raw["pools"][attr][lang] = raw["pools"][attr][lang][:1]
    path = tmp_path / "t.json"
    path.write_text(json.dumps(raw, ensure_ascii=False), encoding="utf-8")
    tiny = load_translation_tables(path)
    # one value per pool and a one-day birthday range leave a single combination
    monkeypatch.setattr(datagen, "BIRTHDAY_RANGE", (date(1990, 1, 1), date(1990, 1, 1)))
    with pytest.raises(ValueError, match="unique"):
        generate_profiles(GenSpec(n_profiles=2, forget_profiles=0), tiny)


def test_spec_validation():
    with pytest.raises(ValueError):
        GenSpec(n_profiles=2, forget_profiles=2)
    with pytest.raises(ValueError):
        GenSpec(languages=(DE, LanguageTag.ZH))
    with pytest.raises(ValueError):
        GenSpec(seed=2**64)


def test_split_boundaries():
    _, pairs = generate(GenSpec(forget_profiles=0))
    assert all(p.split is SplitLabel.RETAIN for p in pairs)
    _, pairs = generate(GenSpec(n_profiles=5, forget_profiles=4))
    retain = {p.profile_id for p in pairs if p.split is SplitLabel.RETAIN}
    assert len(retain) == 1


def test_split_is_function_of_seed():
    spec = GenSpec(seed=11)
    profiles = generate_profiles(spec)
    pairs = render_qa(profiles, languages=spec.languages)
    assert assign_split(pairs, spec) == assign_split(list(reversed(pairs)), spec)[::-1]


def test_template_placeholders():
    with pytest.raises(ValueError):
        QATemplate(AttributeKey.HOBBY, EN, "What does {name} do?", "{name} likes it.")
    with pytest.raises(ValueError):
        QATemplate(AttributeKey.HOBBY, EN, "{name} {name}?", "{name}: {value}")
    t = QATemplate(AttributeKey.HOBBY, EN, "Hobby of {name}?", "{name} enjoys {value}.")
    assert t.answer("Ann Lee", "chess") == "Ann Lee enjoys chess."


def test_missing_template_cell_is_named(profiles):
    tables = bundled_tables()
    del tables.templates[(AttributeKey.HOBBY, DE)]
    with pytest.raises(TableError) as info:
        render_qa(profiles[:1], tables, (EN, DE))
    assert "templates.hobby.de" in str(info.value)


def test_table_null_cell_is_named(tmp_path):
    raw = bundled_tables().to_json()
    raw["pools"]["hobby"]["de"][7] = None
    path = tmp_path / "t.json"
    path.write_text(json.dumps(raw, ensure_ascii=False), encoding="utf-8")
    with pytest.raises(TableError) as info:
        load_translation_tables(path)
    assert info.value.key_path == "pools.hobby.de[7]"


def test_table_length_mismatch_is_named(tmp_path):
    raw = bundled_tables().to_json()
    del raw["pools"]["hobby"]["de"][7]
    path = tmp_path / "t.json"
    path.write_text(json.dumps(raw, ensure_ascii=False), encoding="utf-8")
    with pytest.raises(TableError) as info:
        load_translation_tables(path)
    assert info.value.key_path == "pools.hobby.de"


def test_malformed_table_json(tmp_path):
    path = tmp_path / "t.json"
    path.write_text("{oops", encoding="utf-8")
    with pytest.raises(TableError):
        load_translation_tables(path)


def test_export_then_reload_is_identity(tmp_path):
    path = tmp_path / "en.json"
    export_english_defaults(path)
    reloaded = load_translation_tables(path)
    original = bundled_tables()
    assert reloaded.to_json([EN]) == original.to_json([EN])
    assert set(reloaded.languages()) == {EN}


def test_override_layers_over_base(tmp_path):
    path = tmp_path / "o.json"
    path.write_text(json.dumps({"templates": {"hobby": {"de": {"q": "Hobby von {name}?", "a": "{name}: {value}"}}}}))
    tables = load_translation_tables(path, base=bundled_tables())
    assert tables.templates[(AttributeKey.HOBBY, DE)].question("X") == "Hobby von X?"
    assert tables.templates[(AttributeKey.HOBBY, EN)] == bundled_tables().templates[(AttributeKey.HOBBY, EN)]
