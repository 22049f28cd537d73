"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data/validation error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .alignment import align_bilingual, load_map, save_map
from .dictionaries import join_on_pivot, load_dictionary, save_dictionary, split, subsample
from .embeddings import DEFAULT_RECIPE, load_embeddings, load_frequencies, normalize, parse_recipe, save_embeddings
from .errors import DataError, NumericError
from .evaluation import (
    HYPERNYM_GOLD_CAP, eval_dict_induction, eval_hypernym, eval_word_similarity, knn,
    load_hypernym_dataset, load_similarity_dataset, train_hypernym_map,
)
from .harness import DIAG_SCALED, ORTHOGONAL, SynthConfig, generate_pair, run_ablation, summarize, write_ablation
from .meemi import MultiSpace, meemi_bilingual, meemi_multilingual

log = logging.getLogger("xlalign")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _lang_path(text):
    lang, sep, path = text.partition("=")
    if not sep or not lang or not path:
        raise argparse.ArgumentTypeError(f"expected LANG=PATH, got {text!r}")
    return lang, path


def _recipe(text):
    try:
        return parse_recipe(text)
    except DataError as e:
        raise argparse.ArgumentTypeError(str(e))


def _require_files(*paths):
    for p in paths:
        if p is not None and not os.path.isfile(p):
            raise DataError(f"no such file: {p}")


def _write_report(path, report: dict, inputs: dict):
    """Write ``{"report": ..., "metadata": ...}``; only metadata varies between runs."""
    doc = {
        "report": report,
        "metadata": {
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "version": __version__,
            "inputs": {k: os.path.abspath(v) for k, v in inputs.items() if v},
        },
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def _base(path):
    return os.path.basename(path) if path else None


def cmd_align(args):
    _require_files(args.src, args.tgt, args.dict)
    src = load_embeddings(args.src, args.limit, args.lowercase, args.src_lang)
    tgt = load_embeddings(args.tgt, args.limit, args.lowercase, args.tgt_lang)
    dictionary = load_dictionary(args.dict, (args.src_lang, args.tgt_lang))
    if args.train_size is not None:
        dictionary = subsample(dictionary, args.train_size, args.seed)
    if args.normalize:
        src, tgt = normalize(src, args.normalize), normalize(tgt, args.normalize)
    aligned, W = align_bilingual(src, tgt, dictionary)
    os.makedirs(args.out, exist_ok=True)
    save_embeddings(aligned, os.path.join(args.out, f"{args.src_lang}.vec"))
    save_embeddings(tgt, os.path.join(args.out, f"{args.tgt_lang}.vec"))
    save_map(W, os.path.join(args.out, f"map_{args.src_lang}-{args.tgt_lang}.txt"))
    report = {
        "command": "align",
        "config": {"src_lang": args.src_lang, "tgt_lang": args.tgt_lang,
                   "normalize": list(args.normalize), "train_size": args.train_size,
                   "seed": args.seed, "dict": _base(args.dict)},
        "trained_on": W.trained_on,
        "dictionary_tuples": len(dictionary),
        "rank_deficient": W.rank_deficient,
    }
    _write_report(os.path.join(args.out, "align.json"), report,
                  {"src": args.src, "tgt": args.tgt, "dict": args.dict})
    print(f"aligned {args.src_lang}->{args.tgt_lang} on {W.trained_on} pairs; wrote {args.out}")
    return 0


def cmd_meemi(args):
    spaces_arg = dict(args.space)
    if len(spaces_arg) != len(args.space):
        raise UsageError("a language was given more than once in --space")
    if len(spaces_arg) < 2:
        raise UsageError("need at least two --space LANG=PATH arguments")
    langs = args.langs.split(",") if args.langs else list(spaces_arg)
    if sorted(langs) != sorted(spaces_arg):
        raise UsageError(f"--langs {langs} does not match --space languages {list(spaces_arg)}")
    multilingual = len(langs) > 2
    if args.weighted and multilingual:
        raise UsageError("--weighted is only available for two languages")
    hub = args.hub or langs[-1]
    if hub not in langs:
        raise UsageError(f"--hub {hub} is not one of {langs}")
    if bool(args.dict) == bool(args.pivot_dict):
        raise UsageError("give exactly one of --dict or --pivot-dict")
    freq_arg = dict(args.freq or [])
    if args.weighted and set(freq_arg) != set(langs):
        raise UsageError("--weighted needs --freq LANG=PATH for both languages")
    _require_files(*spaces_arg.values(), args.dict, *(p for _, p in args.pivot_dict or []),
                   *freq_arg.values())

    spaces = {lang: load_embeddings(spaces_arg[lang], args.limit, args.lowercase, lang) for lang in langs}
    if args.dict:
        dictionary = load_dictionary(args.dict, langs)
    else:
        bis = [load_dictionary(p, (lang, hub)) for lang, p in args.pivot_dict]
        dictionary = join_on_pivot(bis) if len(bis) > 1 else bis[0]
        if set(dictionary.langs) != set(langs):
            raise UsageError(f"pivot dictionaries cover {dictionary.langs}, spaces cover {langs}")
    if args.train_size is not None:
        dictionary = subsample(dictionary, args.train_size, args.seed)
    for lang, path in freq_arg.items():
        spaces[lang] = load_frequencies(spaces[lang], path)

    if multilingual:
        ms = MultiSpace(hub, {lang: spaces[lang] for lang in dictionary.langs})
        out_ms, maps = meemi_multilingual(ms, dictionary, ridge=args.ridge)
        out_spaces = out_ms.spaces
    else:
        a, b = dictionary.langs
        res = meemi_bilingual(spaces[a], spaces[b], dictionary, weighted=args.weighted,
                              ridge=args.ridge)
        out_spaces = {a: res.src, b: res.tgt}
        maps = {a: res.src_map, b: res.tgt_map}

    os.makedirs(args.out, exist_ok=True)
    for lang in langs:
        save_embeddings(out_spaces[lang], os.path.join(args.out, f"{lang}.vec"))
        save_map(maps[lang], os.path.join(args.out, f"map_{lang}.txt"))
    report = {
        "command": "meemi",
        "config": {"langs": langs, "hub": hub, "weighted": args.weighted, "ridge": args.ridge,
                   "train_size": args.train_size, "seed": args.seed,
                   "mode": "multilingual" if multilingual else "bilingual"},
        "trained_on": {lang: maps[lang].trained_on for lang in langs},
        "dictionary_tuples": len(dictionary),
    }
    _write_report(os.path.join(args.out, "meemi.json"), report,
                  dict(spaces_arg, dict=args.dict))
    print(f"fitted {len(maps)} maps ({report['config']['mode']}); wrote {args.out}")
    return 0


def cmd_eval(args):
    if args.task == "dict":
        if not (args.src and args.tgt and args.dict):
            raise UsageError("dict task needs --src, --tgt and --dict")
        _require_files(args.src, args.tgt, args.dict)
        src = load_embeddings(args.src, args.limit, args.lowercase, args.src_lang)
        tgt = load_embeddings(args.tgt, args.limit, args.lowercase, args.tgt_lang)
        test = load_dictionary(args.dict, (args.src_lang, args.tgt_lang))
        report = eval_dict_induction(test, src, tgt, ks=args.ks)
        report.config["dataset"] = _base(args.dict)
        inputs = {"src": args.src, "tgt": args.tgt, "dict": args.dict}
    elif args.task == "sim":
        if not (args.space_a and args.dataset):
            raise UsageError("sim task needs --space-a and --dataset")
        _require_files(args.space_a, args.space_b, args.dataset)
        sa = load_embeddings(args.space_a, args.limit, args.lowercase, args.src_lang)
        sb = load_embeddings(args.space_b, args.limit, args.lowercase, args.tgt_lang) if args.space_b else None
        report = eval_word_similarity(load_similarity_dataset(args.dataset), sa, sb)
        report.config["dataset"] = _base(args.dataset)
        inputs = {"space_a": args.space_a, "space_b": args.space_b, "dataset": args.dataset}
    else:
        if not (args.query_space and args.test and (args.train or args.map)):
            raise UsageError("hyper task needs --query-space, --test and --train or --map")
        _require_files(args.query_space, args.candidate_space, args.test, args.train, args.map)
        qs = load_embeddings(args.query_space, args.limit, args.lowercase, args.src_lang)
        cs = load_embeddings(args.candidate_space, args.limit, args.lowercase, args.tgt_lang) \
            if args.candidate_space else qs
        if args.map:
            M = load_map(args.map)
        else:
            pairs = [(t, h) for t, hs in load_hypernym_dataset(args.train) for h in hs]
            M = train_hypernym_map(pairs, qs, ridge=args.ridge)
        report = eval_hypernym(load_hypernym_dataset(args.test), M, qs, cs, k=args.k)
        report.config["dataset"] = _base(args.test)
        inputs = {"query_space": args.query_space, "candidate_space": args.candidate_space,
                  "test": args.test, "train": args.train, "map": args.map}
    report.config["seed"] = args.seed
    print(report.to_text())
    if args.out:
        _write_report(args.out, report.to_dict(), inputs)
    return 0


def cmd_translate(args):
    _require_files(args.src, args.tgt)
    src = load_embeddings(args.src, args.limit, args.lowercase, args.src_lang)
    tgt = load_embeddings(args.tgt, args.limit, args.lowercase, args.tgt_lang)
    word = args.word.lower() if args.lowercase else args.word
    if word not in src:
        raise DataError(f"word {args.word!r} is out of vocabulary")
    for rank, (w, score) in enumerate(knn(src.vector(word), tgt, args.k), start=1):
        print(f"{rank} {w} {score:.6f}")
    return 0


def _synth_config(args):
    return SynthConfig(vocab_size=args.vocab_size, d=args.dim, noise_sigma=args.noise,
                       distortion=args.distortion, seed=args.seed)


def cmd_synth(args):
    config = _synth_config(args)
    src, tgt, gold = generate_pair(config)
    os.makedirs(args.out, exist_ok=True)
    save_embeddings(src, os.path.join(args.out, "src.vec"))
    save_embeddings(tgt, os.path.join(args.out, "tgt.vec"))
    save_dictionary(gold, os.path.join(args.out, "gold.tsv"))
    train, test = split(gold, args.test_fraction, args.seed)
    save_dictionary(train, os.path.join(args.out, "train.tsv"))
    save_dictionary(test, os.path.join(args.out, "test.tsv"))
    report = {"command": "synth", "config": dict(vars(config), test_fraction=args.test_fraction),
              "train_tuples": len(train), "test_tuples": len(test)}
    _write_report(os.path.join(args.out, "synth.json"), report, {})
    print(f"wrote synthetic pair ({config.vocab_size} words, d={config.d}) to {args.out}")
    return 0


def cmd_ablate(args):
    if args.src or args.tgt or args.dict:
        if not (args.src and args.tgt and args.dict):
            raise UsageError("real-data ablation needs --src, --tgt and --dict")
        _require_files(args.src, args.tgt, args.dict)
        src = load_embeddings(args.src, args.limit, args.lowercase, "src")
        tgt = load_embeddings(args.tgt, args.limit, args.lowercase, "tgt")
        gold = load_dictionary(args.dict, ("src", "tgt"))
        data = {"dict": _base(args.dict)}
    else:
        config = _synth_config(args)
        src, tgt, gold = generate_pair(config)
        data = {"synthetic": vars(config)}
    rows = run_ablation(src, tgt, gold, args.sizes, trials=args.trials, seed=args.seed,
                        recipe=args.normalize, weighted=False, ridge=args.ridge,
                        test_fraction=args.test_fraction)
    os.makedirs(args.out, exist_ok=True)
    config = {"sizes": args.sizes, "trials": args.trials, "seed": args.seed,
              "normalize": list(args.normalize), "ridge": args.ridge,
              "test_fraction": args.test_fraction, "data": data}
    write_ablation(rows, os.path.join(args.out, "ablation.csv"),
                   os.path.join(args.out, "ablation.json"), config)
    for size, s in summarize(rows).items():
        print(f"size {size}: base P@1 {s['base']:.4f}  meemi P@1 {s['meemi']:.4f}  delta {s['delta']:+.4f}")
    return 0


def _common(p, langs=True):
    p.add_argument("--limit", type=int, help="read at most this many vectors per file")
    p.add_argument("--lowercase", action="store_true", help="lowercase tokens on load")
    p.add_argument("--seed", type=int, default=0)
    if langs:
        p.add_argument("--src-lang", default="src")
        p.add_argument("--tgt-lang", default="tgt")


def _synth_args(p):
    p.add_argument("--vocab-size", type=int, default=2000)
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--noise", type=float, default=0.02)
    p.add_argument("--distortion", choices=[ORTHOGONAL, DIAG_SCALED], default=DIAG_SCALED)
    p.add_argument("--test-fraction", type=float, default=0.2)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xlalign", description="Align and fine-tune cross-lingual word embeddings.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    recipe = ",".join(DEFAULT_RECIPE)

    p = sub.add_parser("align", help="orthogonal Procrustes alignment of src onto tgt")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--dict", required=True, help="training dictionary TSV (src, tgt)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--normalize", type=_recipe, default=DEFAULT_RECIPE,
                   help=f"comma-separated steps from unit,center (default {recipe}; '' for none)")
    p.add_argument("--train-size", type=int)
    _common(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("meemi", help="fine-tune aligned spaces onto translation averages")
    p.add_argument("--space", type=_lang_path, action="append", required=True, metavar="LANG=PATH")
    p.add_argument("--langs", help="comma-separated column order of --dict (hub last)")
    p.add_argument("--dict", help="n-column tuple TSV")
    p.add_argument("--pivot-dict", type=_lang_path, action="append", metavar="LANG=PATH",
                   help="bilingual LANG-hub dictionary; several are joined on the hub")
    p.add_argument("--hub", help="hub language (default: last of --langs)")
    p.add_argument("--weighted", action="store_true", help="frequency-weighted averages (two languages only)")
    p.add_argument("--freq", type=_lang_path, action="append", metavar="LANG=PATH")
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--train-size", type=int)
    p.add_argument("--out", required=True)
    _common(p, langs=False)
    p.set_defaults(func=cmd_meemi)

    p = sub.add_parser("eval", help="dictionary induction, word similarity or hypernym discovery")
    p.add_argument("--task", choices=["dict", "sim", "hyper"], required=True)
    p.add_argument("--src")
    p.add_argument("--tgt")
    p.add_argument("--dict", help="test dictionary TSV")
    p.add_argument("--ks", type=_int_list, default=[1, 5, 10])
    p.add_argument("--space-a")
    p.add_argument("--space-b")
    p.add_argument("--dataset", help="similarity TSV word_a, word_b, score")
    p.add_argument("--query-space")
    p.add_argument("--candidate-space")
    p.add_argument("--train", help="hypernym training TSV term, hypernyms...")
    p.add_argument("--test", help="hypernym test TSV term, hypernyms...")
    p.add_argument("--map", help="pre-trained hypernym map file")
    p.add_argument("--k", type=int, default=HYPERNYM_GOLD_CAP)
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--out", help="write the JSON report here")
    _common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("translate", help="nearest target-language neighbours of a source word")
    p.add_argument("word")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--k", type=int, default=10)
    _common(p)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("synth", help="generate a synthetic source/target pair")
    _synth_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ablate", help="held-out P@1 deltas across training dictionary sizes")
    p.add_argument("--src")
    p.add_argument("--tgt")
    p.add_argument("--dict")
    p.add_argument("--sizes", type=_int_list, default=[100, 1000])
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--normalize", type=_recipe, default=DEFAULT_RECIPE)
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--out", required=True)
    _synth_args(p)
    _common(p, langs=False)
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"xlalign {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as e:
        print(f"xlalign {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, np.linalg.LinAlgError) as e:
        print(f"xlalign {args.command}: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
