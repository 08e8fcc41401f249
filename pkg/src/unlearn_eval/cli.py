"""``unlearn-eval`` command line.

Relative paths resolve against ``--out-dir``. An input that does not exist
there is looked up relative to the working directory. Every command that
writes a file also writes ``<output>.manifest.json`` beside it.

Exit codes: 0 ok, 2 bad flags or failed validation, 3 I/O, 4 schema,
5 judge endpoint unreachable for every request.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from collections import defaultdict
from pathlib import Path
from typing import Sequence

from . import __version__
from .cka import cka_table
from .datagen import (
    GenSpec,
    TableError,
    bundled_tables,
    export_english_defaults,
    forget_counts,
    generate,
    load_translation_tables,
)
from .datamodel import SchemaError, check_generations, read_records, validate_dataset, write_records
from .judge import (
    JudgeConfig,
    JudgeUnavailableError,
    LLMJudge,
    MockJudge,
    build_contexts,
    judge_corpus,
    prompt_sha256,
    validate_judge,
)
from .langid import DetectorConfig
from .languages import LANGUAGE_SET_1, LANGUAGE_SET_2, LanguageTag, parse_languages
from .nmix import DEFAULT_LEVELS, nmix_corpus, validation_matrix
from .refmetrics import em_score, km_score, loss_audit
from .report import (
    JUDGE_COLUMNS,
    NMIX_COLUMNS,
    REPORT_COLUMNS,
    SCORE_COLUMNS,
    join_tables,
    matrix_rows,
    read_table,
    render,
    render_plain,
    report_rows,
)
from .synth import Behavior, BehaviorError, synth_generations

log = logging.getLogger("unlearn_eval")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SCHEMA, EXIT_NETWORK = 0, 2, 3, 4, 5
ALL_LANGUAGES = tuple(LanguageTag)


class UsageError(Exception):
    """Bad flag value or failed validation (exit 2)."""


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def lang_set(value: str | None) -> tuple[LanguageTag, ...] | None:
    if value is None:
        return None
    if value == "1":
        return LANGUAGE_SET_1
    if value == "2":
        return LANGUAGE_SET_2
    if value == "all":
        return ALL_LANGUAGES
    try:
        return parse_languages(value)
    except ValueError as exc:
        raise UsageError(f"--lang-set: {exc}") from None


def out_path(args, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else Path(args.out_dir) / p


def in_path(args, name: str) -> Path:
    p = Path(name)
    if p.is_absolute():
        return p
    under_out = Path(args.out_dir) / p
    return under_out if under_out.exists() else p


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _config_echo(args) -> dict:
    skip = {"func", "log_level", "api_key"}
    echo = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, (list, tuple)):
            v = [str(x) for x in v]
        elif v is not None and not isinstance(v, (int, float, bool, str)):
            v = str(v)
        echo[k] = v
    return echo


def write_output(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def write_manifest(args, primary: Path, outputs: Sequence[Path], inputs: Sequence[Path], extra: dict | None = None) -> Path:
    manifest = {
        "tool": "unlearn-eval",
        "version": __version__,
        "command": args.command,
        "config": _config_echo(args),
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {p.name: sha256_file(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    path = primary.with_name(primary.name + ".manifest.json")
    write_output(path, json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n")
    return path


def _ext(fmt: str) -> str:
    return {"csv": ".csv", "json": ".json", "md": ".md"}[fmt]


def default_output(args, stem: str) -> Path:
    return out_path(args, args.output or f"{stem}{_ext(args.format)}")


def read_generations(args, names: Sequence[str]):
    paths = [in_path(args, n) for n in names]
    records = []
    for p in paths:
        records.extend(_read(p, "generations"))
    if not records:
        raise UsageError("--generations: no records found")
    return paths, records


def _read(path: Path, schema: str):
    try:
        return read_records(path, schema)
    except SchemaError as exc:
        err = SchemaError(f"{path}: {exc}")
        err.line, err.field = exc.line, exc.field
        raise err from None


def by_model(records):
    groups = defaultdict(list)
    for rec in records:
        groups[rec.model_id].append(rec)
    return groups


def _detector_for(args, records) -> DetectorConfig:
    langs = lang_set(args.lang_set) or tuple(dict.fromkeys(r.query_language for r in records))
    return DetectorConfig.for_languages(langs)


def _levels(text: str) -> tuple[int, ...]:
    try:
        levels = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"--levels: expected comma-separated integers, got {text!r}") from None
    if not levels or min(levels) < 1:
        raise UsageError("--levels: every level must be an integer >= 1")
    return levels


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    languages = lang_set(args.languages or args.lang_set) or LANGUAGE_SET_1
    try:
        spec = GenSpec(seed=args.seed, n_profiles=args.n_profiles, languages=languages, forget_profiles=args.forget_profiles)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    inputs = []
    tables = bundled_tables()
    if args.tables:
        tpath = in_path(args, args.tables)
        tables = load_translation_tables(tpath)
        inputs.append(tpath)
    missing = tables.missing_cells(languages)
    if missing:
        raise UsageError("translation tables are missing cells: " + ", ".join(missing[:10]))
    profiles, pairs = generate(spec, tables)
    report = validate_dataset(pairs)
    if not report.ok:
        for v in report.violations[:20]:
            log.error("%s: %s", v.kind, v.detail)
        raise UsageError(f"generated dataset has {len(report.violations)} violation(s)")
    prof_path, qa_path = out_path(args, "profiles.jsonl"), out_path(args, "qa.jsonl")
    write_records(prof_path, profiles)
    write_records(qa_path, pairs)
    write_manifest(args, qa_path, [prof_path, qa_path], inputs, {"forget_pairs_per_language": forget_counts(pairs)})
    print(f"wrote {len(profiles)} profiles and {len(pairs)} QA pairs to {Path(args.out_dir)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    qa = in_path(args, args.qa)
    pairs = _read(qa, "qa")
    if not pairs:
        raise UsageError(f"{qa}: no records")
    report = validate_dataset(pairs)
    problems = []
    if args.generations:
        _, gens = read_generations(args, args.generations)
        problems = check_generations(gens, pairs)
    for v in report.violations:
        print(f"{v.kind}\t{v.detail}")
    for p in problems:
        print(f"generation\t{p}")
    n = len(report.violations) + len(problems)
    print(f"{len(pairs)} pairs, languages {','.join(l.value for l in report.languages)}, {n} problem(s)", file=sys.stderr)
    return EXIT_OK if n == 0 else EXIT_USAGE


def cmd_export_tables(args) -> int:
    path = out_path(args, args.output or "tables.en.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    export_english_defaults(path)
    write_manifest(args, path, [path], [])
    print(f"wrote {path}")
    return EXIT_OK


def cmd_synth_model(args) -> int:
    try:
        behavior = Behavior.parse(args.behavior)
    except BehaviorError as exc:
        raise UsageError(f"--behavior: {exc}") from None
    qa = in_path(args, args.qa)
    pairs = _read(qa, "qa")
    try:
        gens = synth_generations(pairs, behavior, model_id=args.model_id, seed=args.seed)
    except BehaviorError as exc:
        raise UsageError(f"--behavior: {exc}") from None
    safe = str(behavior).replace(":", "-").replace("+", "_")
    path = out_path(args, args.output or f"generations.{safe}.jsonl")
    write_records(path, gens)
    write_manifest(args, path, [path], [qa])
    print(f"wrote {len(gens)} generations to {path}")
    return EXIT_OK


def cmd_score(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    if not metrics or any(m not in ("em", "km") for m in metrics):
        raise UsageError(f"--metrics: expected a comma list drawn from em,km, got {args.metrics!r}")
    paths, records = read_generations(args, args.generations)
    rows = []
    for model_id, recs in by_model(records).items():
        scores = {}
        if "em" in metrics:
            scores["em"] = em_score(recs)
        if "km" in metrics:
            scores["km"] = km_score(
                recs, use_recall=args.use_recall, lowercase=not args.case_sensitive, keep_punct=args.keep_punct
            )
        counts = defaultdict(int)
        for r in recs:
            counts[(r.query_language, r.split.value)] += 1
        for key, n in counts.items():
            row = {"model_id": model_id, "query_language": key[0].value, "split": key[1], "n_records": n}
            row.update({m: table[key] for m, table in scores.items()})
            rows.append(row)
    out = default_output(args, "score")
    columns = [c for c in SCORE_COLUMNS if c not in ("em", "km") or c in metrics]
    write_output(out, render(rows, columns, args.format))
    write_manifest(args, out, [out], paths)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_nmix(args) -> int:
    levels = _levels(args.levels)
    written = []
    inputs = []
    if args.generations:
        paths, records = read_generations(args, args.generations)
        inputs.extend(paths)
        detector = _detector_for(args, records)
        rows = []
        for model_id, recs in by_model(records).items():
            for key, g in nmix_corpus(recs, detector, levels).items():
                rows.append(
                    {"model_id": model_id, "query_language": key[0].value, "split": key[1],
                     "nmix_avg": g.mean, "n_records": g.n_records, "n_skipped": g.n_skipped}
                )
        out = default_output(args, "nmix")
        write_output(out, render(rows, NMIX_COLUMNS, args.format))
        write_manifest(args, out, [out], paths)
        written.append(out)
    if args.validate_qa:
        qa = in_path(args, args.validate_qa)
        pairs = _read(qa, "qa")
        langs = lang_set(args.lang_set) or tuple(dict.fromkeys(p.language for p in pairs))
        matrix = validation_matrix(pairs, langs, DetectorConfig.for_languages(langs), levels)
        cols, rows = matrix_rows(matrix, langs)
        out = out_path(args, f"nmix_validation{_ext(args.format)}")
        write_output(out, render_plain(rows, cols, args.format))
        write_manifest(args, out, [out], [qa])
        written.append(out)
    if not written:
        raise UsageError("nmix needs --generations and/or --validate-qa")
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


def _judge(args, pairs):
    if args.mock:
        if pairs is None:
            raise UsageError("--mock needs --qa (and --profiles) to know each pair's values")
        if not args.profiles:
            raise UsageError("--mock needs --profiles")
        profiles = _read(in_path(args, args.profiles), "profiles")
        return MockJudge(build_contexts(profiles, pairs)), {"judge": "mock"}
    if not args.endpoint or not args.model:
        raise UsageError("network judge needs --endpoint and --model (or pass --mock)")
    cfg = JudgeConfig(
        endpoint_url=args.endpoint,
        model_name=args.model,
        api_key_env_var=args.api_key_env,
        max_concurrency=args.max_concurrency,
        retries=args.retries,
        timeout=args.timeout,
        cache_dir=out_path(args, args.cache) if args.cache else None,
        requests_per_second=args.rps,
    )
    return LLMJudge(cfg), {"judge": cfg.to_json()}


def cmd_judge(args) -> int:
    if args.max_concurrency < 1:
        raise UsageError("--max-concurrency must be >= 1")
    inputs = []
    pairs = None
    if args.qa:
        qa = in_path(args, args.qa)
        pairs = _read(qa, "qa")
        inputs.append(qa)
    if args.mock and args.profiles:
        inputs.append(in_path(args, args.profiles))
    judge, judge_info = _judge(args, pairs)
    extra = {"judge_prompt_sha256": prompt_sha256(), **judge_info}
    written = []
    try:
        if args.generations:
            paths, records = read_generations(args, args.generations)
            rows = []
            for model_id, recs in by_model(records).items():
                for key, g in judge_corpus(recs, judge, args.max_concurrency).items():
                    rows.append(
                        {"model_id": model_id, "query_language": key[0].value, "split": key[1],
                         "judge_ratio": g.yes_ratio, "n_yes": g.n_yes, "n_no": g.n_no,
                         "n_ambiguous": g.n_ambiguous, "n_records": g.n_records,
                         "prompt_sha256": prompt_sha256()}
                    )
            out = default_output(args, "judge")
            write_output(out, render(rows, JUDGE_COLUMNS, args.format))
            write_manifest(args, out, [out], inputs + paths, extra)
            written.append(out)
        if args.validate:
            if pairs is None:
                raise UsageError("--validate needs --qa")
            langs = lang_set(args.lang_set) or tuple(dict.fromkeys(p.language for p in pairs))
            matrix = validate_judge(pairs, langs, judge, args.max_concurrency)
            cols, rows = matrix_rows(matrix, langs)
            out = out_path(args, f"judge_validation{_ext(args.format)}")
            write_output(out, render_plain(rows, cols, args.format))
            write_manifest(args, out, [out], inputs, extra)
            written.append(out)
    finally:
        if isinstance(judge, LLMJudge):
            judge.close()
    if not written:
        raise UsageError("judge needs --generations and/or --validate")
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_cka(args) -> int:
    d = in_path(args, args.dir)
    if not d.is_dir():
        raise FileNotFoundError(f"--dir: {d} is not a directory")
    try:
        table = cka_table(d, args.base)
    except FileNotFoundError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    cols = ["base"] + list(table.cells) + ["avg"]
    row = {"base": table.base, **table.cells, "avg": table.avg}
    out = default_output(args, "cka")
    write_output(out, render_plain([row], cols, args.format))
    write_manifest(args, out, [out], sorted(p for p in d.iterdir() if p.is_file()))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_report(args) -> int:
    paths = [in_path(args, n) for n in args.inputs]
    for p in paths:
        if p.suffix not in (".csv", ".json"):
            raise UsageError(f"--inputs: {p} must be a .csv or .json metric table")
    try:
        report = join_tables(read_table(p) for p in paths)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    out = default_output(args, "report")
    write_output(out, render(report_rows(report), REPORT_COLUMNS, args.format, wide_md=True))
    write_manifest(args, out, [out], paths)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_detect(args) -> int:
    langs = lang_set(args.lang_set) or ALL_LANGUAGES
    detector = DetectorConfig.for_languages(langs)
    stream = open(in_path(args, args.input), encoding="utf-8") if args.input else sys.stdin
    try:
        for line in stream:
            line = line.rstrip("\n")
            tag = detector(line)
            sys.stdout.write(f"{tag.value if tag else 'und'}\t{line}\n")
    finally:
        if stream is not sys.stdin:
            stream.close()
    return EXIT_OK


def cmd_loss_audit(args) -> int:
    path = in_path(args, args.logprobs)
    records = _read(path, "logprobs")
    variants = ("GA", "GD") if args.variant == "BOTH" else (args.variant,)
    rows = []
    for variant in variants:
        try:
            a = loss_audit(records, args.alpha, variant)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rows.append(
            {"variant": a.variant, "alpha": a.alpha, "forget_term": a.forget_term, "retain_term": a.retain_term,
             "loss": a.total, "n_forget": a.n_forget, "n_retain": a.n_retain}
        )
    cols = ["variant", "alpha", "forget_term", "retain_term", "loss", "n_forget", "n_retain"]
    out = default_output(args, "loss_audit")
    write_output(out, render_plain(rows, cols, args.format))
    write_manifest(args, out, [out], [path])
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    common.add_argument("--lang-set", help="1, 2, all, or a comma list such as en,de,zh")
    common.add_argument("--out-dir", default=".", help="base directory for relative paths (default .)")
    common.add_argument("--format", choices=("csv", "json", "md"), default="csv")
    common.add_argument("--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR"))

    parser = argparse.ArgumentParser(prog="unlearn-eval", description="Multilingual unlearning evaluation toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gen", parents=[common], help="generate the parallel QA dataset")
    p.add_argument("--languages", help="language list (overrides --lang-set)")
    p.add_argument("--n-profiles", type=int, default=40)
    p.add_argument("--forget-profiles", type=int, default=2)
    p.add_argument("--tables", help="translation table JSON layered over the bundled tables")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", parents=[common], help="check a QA file (and optionally generations) for consistency")
    p.add_argument("--qa", default="qa.jsonl")
    p.add_argument("--generations", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export-tables", parents=[common], help="write the English pools and templates as a translation worksheet")
    p.add_argument("--output", "--out", dest="output")
    p.set_defaults(func=cmd_export_tables)

    p = sub.add_parser("synth-model", parents=[common], help="write generations from a synthetic model behavior")
    p.add_argument("--qa", default="qa.jsonl")
    p.add_argument("--behavior", required=True, help="identity | refusal | confused:<lang> | forget-aware[+<behavior>]")
    p.add_argument("--model-id")
    p.add_argument("--output", "--out", dest="output")
    p.set_defaults(func=cmd_synth_model)

    p = sub.add_parser("score", parents=[common], help="exact match and ROUGE-L per language and split")
    p.add_argument("--generations", nargs="+", required=True)
    p.add_argument("--output", "--out", dest="output")
    p.add_argument("--metrics", default="em,km", help="comma list drawn from em,km")
    p.add_argument("--use-recall", action="store_true", help="report ROUGE-L recall instead of F1")
    p.add_argument("--case-sensitive", action="store_true")
    p.add_argument("--keep-punct", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("nmix", parents=[common], help="N-Mix language-confusion score")
    p.add_argument("--generations", nargs="+")
    p.add_argument("--validate-qa", help="also score every QA answer against every query language")
    p.add_argument("--levels", default=",".join(map(str, DEFAULT_LEVELS)))
    p.add_argument("--output", "--out", dest="output")
    p.set_defaults(func=cmd_nmix)

    p = sub.add_parser("judge", parents=[common], help="semantic YES ratio from an LLM judge")
    p.add_argument("--generations", nargs="+")
    p.add_argument("--mock", action="store_true", help="offline judge; needs --qa and --profiles")
    p.add_argument("--qa")
    p.add_argument("--profiles")
    p.add_argument("--validate", action="store_true", help="judge every parallel answer pair (needs --qa)")
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--api-key-env", default="OPENAI_API_KEY", help="name of the variable holding the API key")
    p.add_argument("--cache", help="response cache directory")
    p.add_argument("--max-concurrency", type=int, default=4)
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--rps", type=float, help="request rate limit per second")
    p.add_argument("--output", "--out", dest="output")
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("cka", parents=[common], help="linear CKA of each language's embeddings against a base language")
    p.add_argument("--dir", required=True)
    p.add_argument("--base", default="en")
    p.add_argument("--output", "--out", dest="output")
    p.set_defaults(func=cmd_cka)

    p = sub.add_parser("report", parents=[common], help="join metric tables into one report")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--output", "--out", dest="output")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("detect", parents=[common], help="print 'tag<TAB>line' for each input line")
    p.add_argument("--input", help="read from a file instead of stdin")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("loss-audit", parents=[common], help="GA/GD objective from recorded log-likelihoods")
    p.add_argument("--logprobs", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--variant", type=str.upper, choices=("GA", "GD", "BOTH"), default="BOTH")
    p.add_argument("--output", "--out", dest="output")
    p.set_defaults(func=cmd_loss_audit)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, TableError) as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except JudgeUnavailableError as exc:
        print(f"judge error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
