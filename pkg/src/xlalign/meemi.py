"""Meet-in-the-middle fine-tuning of aligned spaces.

After an orthogonal alignment, each space gets its own unconstrained
linear map fitted by least squares so that dictionary words land on the
average of their translations (optionally frequency weighted), or on the
centroid of a multilingual tuple.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .alignment import UNCONSTRAINED, LinearMap, align_bilingual, apply_map
from .dictionaries import TranslationDictionary, build_pairs
from .embeddings import EmbeddingSpace
from .errors import DataError

log = logging.getLogger(__name__)


def least_squares_map(A: np.ndarray, T: np.ndarray, ridge: float = 0.0,
                      src_lang: str = "", tgt_lang: str = "") -> LinearMap:
    """Minimum-norm M minimizing sum ||a_i M - t_i||^2 (+ ridge ||M||^2).

    Solved through the SVD of ``A``: singular values below the usual
    rank cutoff are dropped, which yields the minimum-norm minimizer when
    ``A^T A`` is singular. With ``ridge > 0`` every singular value is
    damped by ``s / (s^2 + ridge)`` instead.
    """
    A = np.asarray(A, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    if A.ndim != 2 or T.ndim != 2 or A.shape[0] != T.shape[0]:
        raise DataError(f"incompatible shapes {A.shape} and {T.shape}")
    if A.shape[0] < 1:
        raise DataError("least squares needs at least one row")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(T))):
        raise DataError("least squares input contains non-finite values")
    if ridge < 0:
        raise DataError("ridge must be non-negative")
    u, s, vt = np.linalg.svd(A, full_matrices=False)
    cutoff = s[0] * max(A.shape) * np.finfo(np.float64).eps if s.size else 0.0
    keep = s > cutoff
    deficient = bool(keep.sum() < A.shape[1])
    if ridge > 0:
        inv = s / (s * s + ridge)
    else:
        inv = np.zeros_like(s)
        inv[keep] = 1.0 / s[keep]
    M = (vt.T * inv) @ (u.T @ T)
    return LinearMap(M, UNCONSTRAINED, src_lang, tgt_lang, trained_on=A.shape[0],
                     rank_deficient=deficient)


def _fit(X: np.ndarray, targets: np.ndarray, ridge: float, lang: str) -> LinearMap:
    # the identity is always feasible; at the rounding floor (spaces that
    # already coincide) the SVD solution can come out marginally worse
    fitted = least_squares_map(X, targets, ridge, lang, lang)
    if ridge == 0:
        loss = np.sum((X @ fitted.matrix - targets) ** 2)
        if np.sum((X - targets) ** 2) <= loss:
            return LinearMap(np.eye(X.shape[1]), UNCONSTRAINED, lang, lang,
                             trained_on=X.shape[0], rank_deficient=fitted.rank_deficient)
    return fitted


def pair_targets(W: np.ndarray, Wp: np.ndarray, fw=None, fwp=None) -> np.ndarray:
    """Average of paired rows, frequency weighted when counts are given.

    Rows whose two counts are both zero fall back to the plain average.
    """
    if fw is None:
        return (W + Wp) / 2.0
    fw = np.asarray(fw, dtype=np.float64)[:, None]
    fwp = np.asarray(fwp, dtype=np.float64)[:, None]
    total = fw + fwp
    both_zero = total == 0
    safe = np.where(both_zero, 1.0, total)
    weighted = (fw * W + fwp * Wp) / safe
    return np.where(both_zero, (W + Wp) / 2.0, weighted)


class BilingualResult(NamedTuple):
    src: EmbeddingSpace
    tgt: EmbeddingSpace
    src_map: LinearMap
    tgt_map: LinearMap


def meemi_bilingual(src: EmbeddingSpace, tgt: EmbeddingSpace, dictionary: TranslationDictionary,
                    weighted: bool = False, ridge: float = 0.0,
                    src_col=0, tgt_col=-1) -> BilingualResult:
    """Fit source and target maps onto pair averages and apply them.

    The two regressions are independent: the source map sends source rows
    to the targets, the target map sends target rows to the same targets.
    """
    if src.d != tgt.d:
        raise DataError(f"dimension mismatch: {src.d} vs {tgt.d}")
    if weighted and (src.frequencies is None or tgt.frequencies is None):
        raise DataError("weighted mode needs frequencies on both spaces")
    pairs = build_pairs(dictionary, src, tgt, src_col, tgt_col)
    if weighted:
        fw = [src.frequencies[a] for a, _ in pairs.pairs]
        fwp = [tgt.frequencies[b] for _, b in pairs.pairs]
        targets = pair_targets(pairs.A, pairs.B, fw, fwp)
    else:
        targets = pair_targets(pairs.A, pairs.B)
    log.info("fitting on %d pairs (%d OOV skipped)", pairs.kept, pairs.skipped_oov)
    ms = _fit(pairs.A, targets, ridge, src.lang)
    mt = _fit(pairs.B, targets, ridge, tgt.lang)
    return BilingualResult(apply_map(src, ms), apply_map(tgt, mt), ms, mt)


@dataclass(frozen=True)
class MultiSpace:
    """Spaces of several languages sharing one coordinate system and hub."""

    hub: str
    spaces: Mapping[str, EmbeddingSpace]

    def __post_init__(self):
        spaces = dict(self.spaces)
        if len(spaces) < 2:
            raise DataError("a multilingual space needs at least two languages")
        if self.hub not in spaces:
            raise DataError(f"hub {self.hub!r} is not among {sorted(spaces)}")
        dims = {s.d for s in spaces.values()}
        if len(dims) != 1:
            raise DataError(f"spaces have different dimensionalities: {sorted(dims)}")
        object.__setattr__(self, "spaces", spaces)

    @property
    def langs(self) -> tuple[str, ...]:
        return tuple(self.spaces)

    @property
    def d(self) -> int:
        return next(iter(self.spaces.values())).d

    def __getitem__(self, lang):
        return self.spaces[lang]


def build_multispace(spaces: Mapping[str, EmbeddingSpace], hub: str,
                     dictionaries: Mapping[str, TranslationDictionary]):
    """Orthogonally align every non-hub space to the hub.

    ``dictionaries[lang]`` is a bilingual (lang, hub) dictionary. The hub
    space is kept unchanged. Returns the ``MultiSpace`` and the maps.
    """
    if hub not in spaces:
        raise DataError(f"hub {hub!r} has no space")
    out, maps = {}, {}
    for lang, space in spaces.items():
        if lang == hub:
            out[lang] = space
            continue
        if lang not in dictionaries:
            raise DataError(f"no dictionary for {lang}-{hub}")
        out[lang], maps[lang] = align_bilingual(space, spaces[hub], dictionaries[lang])
    return MultiSpace(hub, out), maps


def meemi_multilingual(ms: MultiSpace, dictionary: TranslationDictionary,
                       ridge: float = 0.0) -> tuple[MultiSpace, dict[str, LinearMap]]:
    """Fit one map per language, hub included, onto tuple centroids."""
    langs = dictionary.langs
    if len(langs) != len(ms.spaces) or set(langs) != set(ms.spaces):
        raise DataError(
            f"dictionary languages {langs} do not match space languages {ms.langs}"
        )
    spaces = [ms.spaces[lang] for lang in langs]
    rows = [[] for _ in langs]
    skipped = 0
    for t in dictionary.tuples:
        if all(w in s for w, s in zip(t, spaces)):
            for j, (w, s) in enumerate(zip(t, spaces)):
                rows[j].append(s.index(w))
        else:
            skipped += 1
    if not rows[0]:
        raise DataError(f"no dictionary tuple is fully in vocabulary ({skipped} skipped)")
    members = [s.matrix[r] for s, r in zip(spaces, rows)]
    total = members[0]
    for m in members[1:]:
        total = total + m
    centroids = total / len(members)
    log.info("fitting %d maps on %d tuples (%d OOV skipped)", len(langs), len(rows[0]), skipped)
    maps, out = {}, {}
    for lang, space, X in zip(langs, spaces, members):
        maps[lang] = _fit(X, centroids, ridge, lang)
        out[lang] = apply_map(space, maps[lang])
    ordered = {lang: out[lang] for lang in ms.spaces}
    return MultiSpace(ms.hub, ordered), {lang: maps[lang] for lang in ms.spaces}
