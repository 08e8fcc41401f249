"""Regenerate the bundled Latin frequency profiles and the labeled snippet corpus.

Run ``python -m unlearn_eval.langid.build`` after editing the word lists or
the translation tables. Output is byte-stable: the test suite rebuilds both
artifacts in memory and compares them with the shipped files.

Trigram tables are trained on the translation tables (attribute values and
templates with placeholders removed), the word lists below, and the name
pool. Names are English in every language, so every profile sees them once,
which keeps them from pulling fragments towards English.
"""

from __future__ import annotations

import json
import math
import random
import sys
from collections import Counter
from importlib import resources
from pathlib import Path

from ..datagen import CATEGORICAL, GenSpec, bundled_tables, generate, load_name_pool
from ..languages import LATIN_ORDER, LanguageTag, ScriptClass
from ..scripts import script_of
from ..segmenter import ngrams, tokenize
from .detector import FrequencyProfile

EN, DE, ES = LATIN_ORDER

# Common function words. A word listed for several languages gets half weight in each.
FUNCTION_WORDS = {
    EN: """the of and a an to in is are was were be been being for on that with as it its at by from
        this these those or not but have has had do does did what when where who whom which why how
        he she they we you i me him her them us my your his their our there here than then so if
        into about over after before under between through during without within would could should
        can may might must will shall just only also very more most some any each every all both
        other such no yes lives works live work born gender birthday occupation religion highest
        level education hobby name one two three up out off down again once same own too while""",
    DE: """der die das den dem des ein eine einer eines einem einen und oder aber ist sind war waren
        sein wird werden wurde wurden hat haben hatte von zu mit auf für an aus bei nach über unter
        vor zwischen durch ohne gegen um im am zum zur vom ins nicht kein keine auch noch schon nur
        sehr mehr wie wo wann was wer welche welcher welches welchen warum ich du er sie es wir ihr
        mich mir dich dir sich uns euch sein seine ihre ihren dass weil wenn ob als auch dort hier
        heute immer wohnt lebt arbeitet geboren geschlecht geburtstag beruf religion höchste
        höchster bildungsabschluss hobby""",
    ES: """el la los las un una unos unas y o pero es son era eran ser está están estaba fue fueron
        de del al a en con por para sin sobre entre hasta desde hacia según que qué cual cuál cuales
        cuándo cuando dónde donde quién quien cómo como porque muy más menos también ya no sí yo tú
        él ella ellos ellas nosotros usted ustedes me te se nos le les lo su sus mi mis tu este esta
        estos estas ese esa eso aquí allí hay tiene tienen vive trabaja nació género cumpleaños
        profesión religión nivel educativo alto pasatiempo""",
}

# Everyday vocabulary so that text outside the dataset templates still scores sensibly.
GENERAL_WORDS = {
    EN: """people time year day way man woman child children world life hand part place case week
        company system program question government number night point home water room mother father
        area money story fact month lot right study book eye job word business issue side kind head
        house service friend power hour game line end member law car city community president team
        minute idea kid body information back parent face others level office door health person art
        war history party result change morning reason research girl guy moment air teacher force
        quick brown fox jumps lazy dog cat sat mat good new first last long great little own old big
        high different small large next early young important few public bad able know think take
        see come want look use find give tell ask seem feel try leave call keep let begin help show
        hear play run move like believe hold bring happen write provide sit stand lose pay meet
        include continue set learn lead understand watch follow stop create speak read allow add
        spend grow open walk win offer remember love consider appear buy wait serve die send expect
        build stay fall cut reach kill remain suggest raise pass sell require report decide pull""",
    DE: """leute zeit jahr tag weg mann frau kind kinder welt leben hand teil platz fall woche firma
        system programm frage regierung nummer nacht punkt zuhause wasser zimmer mutter vater gebiet
        geld geschichte tatsache monat recht studie buch auge arbeit wort geschäft seite art kopf
        haus dienst freund macht stunde spiel linie ende mitglied gesetz auto stadt gemeinschaft
        präsident mannschaft minute idee körper information eltern gesicht büro tür gesundheit
        person kunst krieg partei ergebnis änderung morgen grund forschung mädchen moment luft
        lehrer kraft hund katze straße läuft schnell braun fuchs springt faul gut neu erste letzte
        lang groß klein alt hoch verschieden wichtig wenige öffentlich schlecht wissen denken nehmen
        sehen kommen wollen schauen benutzen finden geben sagen fragen scheinen fühlen versuchen
        verlassen rufen halten beginnen helfen zeigen hören spielen laufen bewegen mögen glauben
        bringen passieren schreiben sitzen stehen verlieren zahlen treffen lernen führen verstehen
        folgen aufhören sprechen lesen erlauben wachsen öffnen gehen gewinnen erinnern lieben kaufen
        warten dienen schicken erwarten bauen bleiben fallen erreichen bleibt schön grün müde""",
    ES: """gente tiempo año día camino hombre mujer niño niña niños mundo vida mano parte lugar caso
        semana empresa sistema programa pregunta gobierno número noche punto casa agua habitación
        madre padre zona dinero historia hecho mes derecho estudio libro ojo trabajo palabra negocio
        lado tipo cabeza servicio amigo poder hora juego línea final miembro ley coche ciudad
        comunidad presidente equipo minuto idea cuerpo información padres cara oficina puerta salud
        persona arte guerra partido resultado cambio mañana razón investigación chica momento aire
        maestro fuerza perro gato calle pequeña pequeño rápido marrón zorro salta perezoso bueno
        nuevo primero último largo grande viejo importante pocos público malo saber pensar tomar
        ver venir querer mirar usar encontrar dar decir preguntar parecer sentir intentar dejar
        llamar mantener empezar ayudar mostrar oír jugar correr mover gustar creer traer pasar
        escribir sentarse perder pagar conocer aprender llevar entender seguir hablar leer permitir
        crecer abrir caminar ganar recordar amar comprar esperar servir enviar construir quedarse
        caer alcanzar también señor señora años bonita verde cansado""",
}

MARKERS = {
    EN: {},
    DE: {"ä": 1.0, "ö": 1.0, "ü": 1.0, "ß": 1.0},
    ES: {"ñ": 1.0, "á": 1.0, "é": 1.0, "í": 1.0, "ó": 1.0, "ú": 1.0, "¿": 1.0, "¡": 1.0},
}

NOTES = {
    EN: "No marker characters. Words shared with de/es lists ('in', 'a', 'no', ...) carry weight 0.5.",
    DE: "Markers: umlauts and eszett. Shared words ('in', 'es', 'was', ...) carry weight 0.5.",
    ES: "Markers: tilde-n, acute vowels, inverted marks. Shared words carry weight 0.5.",
}

SNIPPETS_PER_LANGUAGE = 300
SNIPPET_SEEDS = (101, 202, 303)
# Hand-written phrases outside the dataset templates.
EXTRA_SNIPPETS = {
    EN: ["the quick brown fox jumps", "she works in a small city office", "we will meet them after work"],
    DE: ["der Hund läuft über die Straße", "wir treffen uns morgen im Büro", "das Buch ist sehr gut"],
    ES: ["la niña pequeña está aquí", "el perro corre por la calle", "nosotros vivimos en una casa grande"],
}
NON_LATIN = (LanguageTag.ZH, LanguageTag.RU, LanguageTag.KO, LanguageTag.HI, LanguageTag.TH)


def _words(text: str) -> list[str]:
    return [t.lower() for t in tokenize(text) if script_of(t[0]) is ScriptClass.LATIN]


def _training_text(lang: LanguageTag) -> list[str]:
    tables = bundled_tables()
    words: list[str] = []
    for attr in CATEGORICAL:
        for value in tables.pools[attr].values[lang]:
            words.extend(_words(value))
    for (attr, tl), tpl in tables.templates.items():
        if tl is lang:
            for t in (tpl.question_template, tpl.answer_template):
                words.extend(_words(t.replace("{name}", " ").replace("{value}", " ")))
    words.extend(_words(FUNCTION_WORDS[lang]))
    words.extend(_words(GENERAL_WORDS[lang]))
    for name in load_name_pool():
        words.extend(_words(name))
    return words


def build_profiles() -> dict[LanguageTag, FrequencyProfile]:
    counts: dict[LanguageTag, Counter] = {}
    for lang in LATIN_ORDER:
        c: Counter = Counter()
        for w in _training_text(lang):
            padded = f" {w} "
            c.update(padded[i : i + 3] for i in range(len(padded) - 2))
        counts[lang] = c
    tables = {
        lang: {g: round(math.log(n / sum(c.values())), 6) for g, n in c.items()} for lang, c in counts.items()
    }
    # One shared floor so unseen trigrams (names, mostly) favour no language.
    unseen = round(min(min(t.values()) for t in tables.values()) - 1.0, 6)

    stop_sets = {lang: set(FUNCTION_WORDS[lang].split()) for lang in LATIN_ORDER}
    profiles = {}
    for lang in LATIN_ORDER:
        stop = {}
        for w in sorted(stop_sets[lang]):
            shared = any(w in stop_sets[o] for o in LATIN_ORDER if o is not lang)
            stop[w] = 0.5 if shared else 1.0
        profiles[lang] = FrequencyProfile(
            language=lang,
            marker_chars=MARKERS[lang],
            stopwords=stop,
            trigram_logfreq=tables[lang],
            unseen_logfreq=unseen,
            note=NOTES[lang],
        )
    return profiles


def _has_content(fragment: str, name_tokens: set[str]) -> bool:
    for tok in tokenize(fragment):
        if tok in name_tokens or tok.isdigit():
            continue
        return True
    return False


def build_snippets() -> list[tuple[LanguageTag, int, str]]:
    """Labeled fragments: language, token count, text.

    Latin fragments are 3-6 token windows of rendered questions and answers
    (plus whole sentences) holding at least one token that is neither a name
    nor a number. Non-Latin fragments are single-script attribute values.
    """
    rows: list[tuple[LanguageTag, int, str]] = []
    for lang in LATIN_ORDER:
        candidates: set[str] = set()
        for seed in SNIPPET_SEEDS:
            profiles, pairs = generate(GenSpec(seed=seed, languages=(EN, lang) if lang is not EN else (EN,)))
            names = {tok for p in profiles for tok in p.name.split()}
            for pair in pairs:
                if pair.language is not lang:
                    continue
                for sentence in (pair.question, pair.answer):
                    seq = tokenize(sentence)
                    candidates.add(seq.render())
                    for n in range(3, 7):
                        if len(seq) >= n:
                            candidates.update(f for f in ngrams(seq, n) if _has_content(f, names))
        pool = sorted(c for c in candidates if len(tokenize(c)) >= 3)
        picked = random.Random(f"snippets:{lang.value}").sample(pool, min(SNIPPETS_PER_LANGUAGE, len(pool)))
        picked = sorted(picked) + EXTRA_SNIPPETS[lang]
        rows.extend((lang, len(tokenize(s)), s) for s in picked)
    tables = bundled_tables()
    for lang in NON_LATIN:
        for attr in CATEGORICAL:
            for value in tables.pools[attr].values[lang]:
                rows.append((lang, len(tokenize(value)), value))
    return rows


def render_profile(profile: FrequencyProfile) -> str:
    return json.dumps(profile.to_json(), ensure_ascii=False, indent=0, sort_keys=False) + "\n"


def render_snippets(rows) -> str:
    lines = ["# language\ttokens\ttext"]
    lines.extend(f"{lang.value}\t{n}\t{text}" for lang, n, text in rows)
    return "\n".join(lines) + "\n"


def data_dir() -> Path:
    return Path(str(resources.files("unlearn_eval").joinpath("data/langid")))


def main(out_dir: str | None = None) -> int:
    target = Path(out_dir) if out_dir else data_dir()
    target.mkdir(parents=True, exist_ok=True)
    for lang, prof in build_profiles().items():
        (target / f"{lang.value}.json").write_text(render_profile(prof), encoding="utf-8")
    (target / "snippets.tsv").write_text(render_snippets(build_snippets()), encoding="utf-8")
    print(f"wrote profiles and snippets to {target}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main(*sys.argv[1:2]))
