"""Monolingual embedding spaces: loading, saving, normalization, frequencies."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, NumericError

UNIT = "unit"
CENTER = "center"
DEFAULT_RECIPE = (UNIT, CENTER, UNIT)

_UNIT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class EmbeddingSpace:
    """Vocabulary-indexed word vectors for one language.

    Row ``i`` of ``matrix`` is the vector of ``words[i]``. Instances are
    immutable: the matrix is copied and flagged read-only on construction,
    and every operation in this package returns a new space.

    ``frequencies`` (optional) maps every word to its corpus occurrence
    count. ``norm_state`` records the normalization steps already applied.
    """

    lang: str
    words: tuple[str, ...]
    matrix: np.ndarray
    frequencies: Mapping[str, float] | None = None
    norm_state: tuple[str, ...] = ()
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        words = tuple(self.words)
        matrix = np.array(self.matrix, dtype=np.float64, copy=True)
        if matrix.ndim != 2:
            raise DataError(f"embedding matrix must be 2-D, got shape {matrix.shape}")
        if matrix.shape[0] != len(words):
            raise DataError(
                f"matrix has {matrix.shape[0]} rows but vocabulary has {len(words)} words"
            )
        if matrix.shape[1] < 1:
            raise DataError("embedding dimensionality must be positive")
        if not np.all(np.isfinite(matrix)):
            raise DataError("embedding matrix contains non-finite values")
        index = {}
        for i, w in enumerate(words):
            if w in index:
                raise DataError(f"duplicate token {w!r} in vocabulary")
            index[w] = i
        norm_state = tuple(self.norm_state)
        for step in norm_state:
            if step not in (UNIT, CENTER):
                raise DataError(f"unknown normalization step {step!r}")
        if norm_state and norm_state[-1] == UNIT and len(words):
            norms = np.linalg.norm(matrix, axis=1)
            if np.max(np.abs(norms - 1.0)) > _UNIT_TOL:
                raise DataError("norm_state ends with 'unit' but rows are not unit length")
        freqs = self.frequencies
        if freqs is not None:
            freqs = dict(freqs)
            missing = [w for w in words if w not in freqs]
            if missing:
                raise DataError(f"frequencies missing for {len(missing)} words, e.g. {missing[0]!r}")
            freqs = {w: freqs[w] for w in words}
        matrix.setflags(write=False)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "norm_state", norm_state)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "_index", index)

    @property
    def d(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self._index

    def index(self, word: str) -> int:
        return self._index[word]

    def vector(self, word: str) -> np.ndarray:
        return self.matrix[self._index[word]]

    def replace(self, **changes) -> EmbeddingSpace:
        """Return a copy with the given fields replaced."""
        fields = dict(
            lang=self.lang,
            words=self.words,
            matrix=self.matrix,
            frequencies=self.frequencies,
            norm_state=self.norm_state,
        )
        fields.update(changes)
        return EmbeddingSpace(**fields)


def load_embeddings(path, limit: int | None = None, lowercase: bool = False,
                    lang: str = "") -> EmbeddingSpace:
    """Read a word2vec text file.

    The first ``limit`` vector lines are read. After optional lowercasing,
    a token that repeats keeps its first occurrence only.
    """
    if limit is not None and limit < 1:
        raise DataError("limit must be a positive integer")
    words: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: malformed header, expected 'V D'")
        try:
            n_declared, dim = int(header[0]), int(header[1])
        except ValueError:
            raise DataError(f"{path}: malformed header, expected 'V D'") from None
        if n_declared < 0 or dim < 1:
            raise DataError(f"{path}: malformed header {n_declared} {dim}")
        wanted = n_declared if limit is None else min(n_declared, limit)
        n_read = 0
        for lineno, line in enumerate(f, start=2):
            if n_read >= wanted:
                break
            parts = line.rstrip("\n").rstrip(" \r").split(" ")
            if len(parts) == 1 and not parts[0]:
                continue
            if len(parts) != dim + 1:
                raise DataError(
                    f"{path}:{lineno}: expected {dim} values, got {len(parts) - 1}"
                )
            try:
                vec = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value") from None
            if not np.all(np.isfinite(vec)):
                raise DataError(f"{path}:{lineno}: non-finite value")
            n_read += 1
            word = parts[0].lower() if lowercase else parts[0]
            if word in seen:
                continue
            seen.add(word)
            words.append(word)
            rows.append(vec)
    if not words:
        raise DataError(f"{path}: empty vocabulary")
    if n_read < wanted:
        raise DataError(f"{path}: header declares {n_declared} words but file has {n_read}")
    return EmbeddingSpace(lang=lang, words=tuple(words), matrix=np.vstack(rows))


def save_embeddings(space: EmbeddingSpace, path) -> None:
    """Write ``space`` in word2vec text format with 6 decimal digits."""
    if space.matrix.ndim != 2 or space.matrix.shape[1] < 1:
        raise DataError("cannot save a space with non-positive dimensionality")
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(space.words)} {space.d}\n")
        for word, row in zip(space.words, space.matrix):
            f.write(word + " " + " ".join("%.6f" % x for x in row) + "\n")


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise NumericError("zero vector cannot be scaled to unit length")
    return matrix / norms


def normalize(space: EmbeddingSpace, steps: Sequence[str] = DEFAULT_RECIPE) -> EmbeddingSpace:
    """Apply ``unit`` / ``center`` steps in order and return a new space."""
    matrix = np.array(space.matrix)
    for step in steps:
        if step == UNIT:
            matrix = unit_rows(matrix)
        elif step == CENTER:
            matrix = matrix - matrix.mean(axis=0)
        else:
            raise DataError(f"unknown normalization step {step!r}")
    return space.replace(matrix=matrix, norm_state=space.norm_state + tuple(steps))


def parse_recipe(text: str) -> tuple[str, ...]:
    """Parse a comma-separated recipe such as ``"unit,center,unit"``."""
    steps = tuple(s.strip() for s in text.split(",") if s.strip())
    for step in steps:
        if step not in (UNIT, CENTER):
            raise DataError(f"unknown normalization step {step!r}")
    return steps


def load_frequencies(space: EmbeddingSpace, path, per_million: bool = False) -> EmbeddingSpace:
    """Attach word counts from a ``word<TAB>count`` file.

    Words of the space that the file does not list get a count of 0.
    With ``per_million`` the counts are divided by the file total and
    scaled to occurrences per million tokens.
    """
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'word<TAB>count'")
            word, raw = parts[0], parts[1].strip()
            try:
                count = int(raw)
            except ValueError:
                raise DataError(f"{path}:{lineno}: count {raw!r} is not an integer") from None
            if count < 0:
                raise DataError(f"{path}:{lineno}: negative count {count}")
            counts.setdefault(word, count)
    return attach_frequencies(space, counts, per_million=per_million)


def attach_frequencies(space: EmbeddingSpace, counts: Mapping[str, float],
                       per_million: bool = False) -> EmbeddingSpace:
    freqs = {w: counts.get(w, 0) for w in space.words}
    if per_million:
        total = sum(counts.values())
        scale = 1e6 / total if total else 0.0
        freqs = {w: c * scale for w, c in freqs.items()}
    return space.replace(frequencies=freqs)


def cosine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise cosine between two equally shaped matrices."""
    num = np.sum(a * b, axis=1)
    den = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    if np.any(den == 0):
        raise NumericError("cosine undefined for zero vectors")
    return num / den


def from_rows(lang: str, items: Iterable[tuple[str, Sequence[float]]]) -> EmbeddingSpace:
    """Build a space from ``(word, vector)`` pairs; handy for small fixtures."""
    items = list(items)
    return EmbeddingSpace(
        lang=lang,
        words=tuple(w for w, _ in items),
        matrix=np.array([list(map(float, v)) for _, v in items], dtype=np.float64),
    )


__all__ = [
    "EmbeddingSpace", "load_embeddings", "save_embeddings", "normalize",
    "load_frequencies", "attach_frequencies", "parse_recipe", "from_rows",
    "cosine_matrix", "unit_rows", "UNIT", "CENTER", "DEFAULT_RECIPE",
]
