"""Synthetic benchmarks and dictionary-size ablation."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .alignment import align_bilingual
from .dictionaries import TranslationDictionary, split, subsample
from .embeddings import DEFAULT_RECIPE, EmbeddingSpace, normalize, unit_rows
from .errors import DataError
from .evaluation import eval_dict_induction
from .meemi import meemi_bilingual

ORTHOGONAL = "orthogonal"
DIAG_SCALED = "orthogonal+diag-scaling"


@dataclass(frozen=True)
class SynthConfig:
    vocab_size: int = 1000
    d: int = 50
    noise_sigma: float = 0.0
    distortion: str = ORTHOGONAL
    seed: int = 0

    def __post_init__(self):
        if self.d < 2 or self.vocab_size < self.d:
            raise DataError("need vocab_size >= d >= 2")
        if not np.isfinite(self.noise_sigma) or self.noise_sigma < 0:
            raise DataError("noise_sigma must be finite and non-negative")
        if self.distortion not in (ORTHOGONAL, DIAG_SCALED):
            raise DataError(f"unknown distortion {self.distortion!r}")


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def generate_pair(config: SynthConfig):
    """Return ``(src, tgt, gold)`` where tgt is a distorted copy of src.

    ``tgt = src @ R`` (times a random diagonal scaling in [0.5, 2] for the
    diag-scaled distortion) plus Gaussian noise, rows unit-normalized. Word
    ``w<i>`` in one space translates to ``w<i>`` in the other.
    """
    rng = np.random.default_rng(config.seed)
    n, d = config.vocab_size, config.d
    X = unit_rows(rng.standard_normal((n, d)))
    R = random_orthogonal(d, rng)
    Y = X @ R
    if config.distortion == DIAG_SCALED:
        Y = Y * rng.uniform(0.5, 2.0, size=d)
    if config.noise_sigma > 0:
        Y = Y + config.noise_sigma * rng.standard_normal((n, d))
    Y = unit_rows(Y)
    width = len(str(n - 1))
    words = tuple(f"w{i:0{width}d}" for i in range(n))
    src = EmbeddingSpace("src", words, X, norm_state=("unit",))
    tgt = EmbeddingSpace("tgt", words, Y, norm_state=("unit",))
    gold = TranslationDictionary(("src", "tgt"), tuple((w, w) for w in words))
    return src, tgt, gold


def pair_cosines(src: EmbeddingSpace, tgt: EmbeddingSpace, dictionary: TranslationDictionary) -> np.ndarray:
    a = np.array([src.vector(s) for s, t in dictionary.tuples if s in src and t in tgt])
    b = np.array([tgt.vector(t) for s, t in dictionary.tuples if s in src and t in tgt])
    return np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))


def run_pipeline(src, tgt, train, test, recipe=DEFAULT_RECIPE, weighted=False, ridge=0.0):
    """Normalize, align, fine-tune and score held-out P@1 before/after."""
    src_n = normalize(src, recipe) if recipe else src
    tgt_n = normalize(tgt, recipe) if recipe else tgt
    aligned, _ = align_bilingual(src_n, tgt_n, train)
    base = eval_dict_induction(test, aligned, tgt_n, ks=(1,))
    res = meemi_bilingual(aligned, tgt_n, train, weighted=weighted, ridge=ridge)
    tuned = eval_dict_induction(test, res.src, res.tgt, ks=(1,))
    return base.metrics["P@1"], tuned.metrics["P@1"]


@dataclass(frozen=True)
class AblationRow:
    size: int
    seed: int
    metric: str
    base: float
    meemi: float

    @property
    def delta(self) -> float:
        return self.meemi - self.base


def run_ablation(src: EmbeddingSpace, tgt: EmbeddingSpace, gold: TranslationDictionary,
                 sizes: Sequence[int], trials: int = 5, seed: int = 0,
                 recipe=DEFAULT_RECIPE, weighted: bool = False, ridge: float = 0.0,
                 test_fraction: float = 0.2) -> list[AblationRow]:
    """Held-out P@1 of orthogonal alignment vs. fine-tuning per dictionary size.

    Trial ``t`` uses seed ``seed + t`` both for the train/test split and for
    subsampling the training part down to each size.
    """
    if trials < 1:
        raise DataError("trials must be at least 1")
    rows = []
    for t in range(trials):
        s = seed + t
        pool, test = split(gold, test_fraction, s)
        for size in sizes:
            if size > len(pool):
                raise DataError(
                    f"dictionary size {size} exceeds the {len(pool)} available training tuples"
                )
        for size in sizes:
            train = subsample(pool, size, s)
            base, tuned = run_pipeline(src, tgt, train, test, recipe, weighted, ridge)
            rows.append(AblationRow(size, s, "P@1", base, tuned))
    rows.sort(key=lambda r: (r.size, r.seed))
    return rows


def summarize(rows: Sequence[AblationRow]) -> dict:
    out = {}
    for size in sorted({r.size for r in rows}):
        sel = [r for r in rows if r.size == size]
        out[str(size)] = {
            "trials": len(sel),
            "base": float(np.mean([r.base for r in sel])),
            "meemi": float(np.mean([r.meemi for r in sel])),
            "delta": float(np.mean([r.delta for r in sel])),
        }
    return out


def write_ablation(rows: Sequence[AblationRow], csv_path, json_path=None, config=None) -> None:
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["size", "seed", "metric", "base", "meemi", "delta"])
        for r in rows:
            w.writerow([r.size, r.seed, r.metric, repr(r.base), repr(r.meemi), repr(r.delta)])
    if json_path is not None:
        doc = {"summary": summarize(rows), "rows": [dict(asdict(r), delta=r.delta) for r in rows],
               "config": config or {}}
        with open(json_path, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
