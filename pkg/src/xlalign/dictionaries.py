"""Translation dictionaries and the paired training matrices built from them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingSpace
from .errors import DataError


@dataclass(frozen=True)
class TranslationDictionary:
    """Ordered word tuples over ``langs``; the last language is the hub.

    A source word may appear in several tuples (several translations), but
    a fully repeated tuple is rejected.
    """

    langs: tuple[str, ...]
    tuples: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        langs = tuple(self.langs)
        if len(langs) < 2:
            raise DataError("a dictionary needs at least two languages")
        tuples = tuple(tuple(t) for t in self.tuples)
        seen = set()
        for t in tuples:
            if len(t) != len(langs):
                raise DataError(f"tuple {t!r} does not have {len(langs)} entries")
            if not all(t):
                raise DataError(f"tuple {t!r} contains an empty token")
            if t in seen:
                raise DataError(f"duplicate tuple {t!r}")
            seen.add(t)
        object.__setattr__(self, "langs", langs)
        object.__setattr__(self, "tuples", tuples)

    def __len__(self):
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)

    @property
    def arity(self) -> int:
        return len(self.langs)

    def column(self, lang_or_index) -> int:
        """Resolve a language code or (possibly negative) index to a column."""
        if isinstance(lang_or_index, str):
            try:
                return self.langs.index(lang_or_index)
            except ValueError:
                raise DataError(f"language {lang_or_index!r} not in dictionary {self.langs}") from None
        idx = int(lang_or_index)
        if not -self.arity <= idx < self.arity:
            raise DataError(f"column {idx} out of range for {self.arity} languages")
        return idx % self.arity

    def select(self, columns: Sequence) -> TranslationDictionary:
        """Project onto the given columns, dropping tuples that become duplicates."""
        cols = [self.column(c) for c in columns]
        out, seen = [], set()
        for t in self.tuples:
            p = tuple(t[c] for c in cols)
            if p not in seen:
                seen.add(p)
                out.append(p)
        return TranslationDictionary(tuple(self.langs[c] for c in cols), tuple(out))


@dataclass(frozen=True)
class PairedMatrices:
    """Row-aligned source (``A``) and target (``B``) vectors of in-vocabulary pairs."""

    A: np.ndarray
    B: np.ndarray
    kept: int
    skipped_oov: int
    pairs: tuple[tuple[str, str], ...] = ()


def _dedup(tuples):
    seen, out = set(), []
    for t in tuples:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return tuple(out)


def load_dictionary(path, langs: Sequence[str]) -> TranslationDictionary:
    """Read a tab/space separated tuple file, one tuple per line."""
    langs = tuple(langs)
    tuples = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != len(langs):
                raise DataError(
                    f"{path}:{lineno}: expected {len(langs)} tokens, got {len(parts)}"
                )
            tuples.append(tuple(parts))
    return TranslationDictionary(langs, _dedup(tuples))


def save_dictionary(dictionary: TranslationDictionary, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in dictionary.tuples:
            f.write("\t".join(t) + "\n")


def join_on_pivot(bis: Sequence[TranslationDictionary]) -> TranslationDictionary:
    """Join bilingual dictionaries that share their second (pivot) language.

    One tuple is emitted per pivot word translated in every input, in the
    order pivot words first appear in the first dictionary. Where a pivot
    word has several translations in one language, the first listed wins.
    """
    if len(bis) < 2:
        raise DataError("join_on_pivot needs at least two dictionaries")
    for b in bis:
        if b.arity != 2:
            raise DataError("join_on_pivot only accepts bilingual dictionaries")
    pivot = bis[0].langs[1]
    if any(b.langs[1] != pivot for b in bis):
        raise DataError(f"pivot languages differ: {[b.langs[1] for b in bis]}")
    lookups = []
    for b in bis:
        first = {}
        for src, piv in b.tuples:
            first.setdefault(piv, src)
        lookups.append(first)
    tuples = []
    for piv in lookups[0]:
        if all(piv in lk for lk in lookups):
            tuples.append(tuple(lk[piv] for lk in lookups) + (piv,))
    langs = tuple(b.langs[0] for b in bis) + (pivot,)
    return TranslationDictionary(langs, _dedup(tuples))


def subsample(dictionary: TranslationDictionary, size: int, seed: int) -> TranslationDictionary:
    """Uniform sample of ``size`` tuples without replacement; keeps file order."""
    if size < 0 or size > len(dictionary):
        raise DataError(f"cannot sample {size} tuples from a dictionary of {len(dictionary)}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(dictionary), size=size, replace=False))
    return TranslationDictionary(dictionary.langs, tuple(dictionary.tuples[i] for i in idx))


def split(dictionary: TranslationDictionary, test_fraction: float, seed: int,
          by_column: int = 0) -> tuple[TranslationDictionary, TranslationDictionary]:
    """Random train/test split grouped on one column.

    All tuples sharing a word in ``by_column`` land on the same side, so a
    test source word never leaks into training.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError("test_fraction must lie strictly between 0 and 1")
    col = dictionary.column(by_column)
    keys = list(dict.fromkeys(t[col] for t in dictionary.tuples))
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(keys))
    n_test = int(round(test_fraction * len(keys)))
    test_keys = {keys[i] for i in order[:n_test]}
    train = tuple(t for t in dictionary.tuples if t[col] not in test_keys)
    test = tuple(t for t in dictionary.tuples if t[col] in test_keys)
    return (TranslationDictionary(dictionary.langs, train),
            TranslationDictionary(dictionary.langs, test))


def build_pairs(dictionary: TranslationDictionary, src: EmbeddingSpace, tgt: EmbeddingSpace,
                src_col=0, tgt_col=-1) -> PairedMatrices:
    """Stack vectors for the tuples whose two words are both in vocabulary."""
    sc, tc = dictionary.column(src_col), dictionary.column(tgt_col)
    if src.d != tgt.d:
        raise DataError(f"dimension mismatch: {src.d} vs {tgt.d}")
    si, ti, pairs = [], [], []
    skipped = 0
    for t in dictionary.tuples:
        a, b = t[sc], t[tc]
        if a in src and b in tgt:
            si.append(src.index(a))
            ti.append(tgt.index(b))
            pairs.append((a, b))
        else:
            skipped += 1
    if not si:
        raise DataError(
            f"no dictionary pair is in vocabulary ({skipped} tuples skipped as OOV)"
        )
    return PairedMatrices(
        A=src.matrix[si], B=tgt.matrix[ti], kept=len(si), skipped_oov=skipped,
        pairs=tuple(pairs),
    )
