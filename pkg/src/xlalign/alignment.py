"""Orthogonal base alignment and linear maps between embedding spaces."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .dictionaries import PairedMatrices, TranslationDictionary, build_pairs
from .embeddings import EmbeddingSpace
from .errors import DataError

log = logging.getLogger(__name__)

ORTHOGONAL = "orthogonal"
UNCONSTRAINED = "unconstrained"
_ORTHO_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A d x d matrix applied on the right of row vectors (``x @ matrix``).

    ``rank_deficient`` is set when the fitting problem had no unique
    optimum; the returned matrix is still a valid minimizer.
    """

    matrix: np.ndarray
    flavor: str
    src_lang: str = ""
    tgt_lang: str = ""
    trained_on: int = 0
    rank_deficient: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DataError(f"map matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DataError("map matrix contains non-finite values")
        if self.flavor not in (ORTHOGONAL, UNCONSTRAINED):
            raise DataError(f"unknown map flavor {self.flavor!r}")
        if self.flavor == ORTHOGONAL:
            err = np.max(np.abs(m @ m.T - np.eye(m.shape[0])))
            if err > _ORTHO_TOL:
                raise DataError(f"matrix is not orthogonal (max deviation {err:.2e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def _fix_signs(u: np.ndarray, vt: np.ndarray):
    # make the largest-magnitude entry of each left singular vector positive;
    # the right vector flips with it so u @ vt is unchanged
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, vt * signs[:, None]


def procrustes(pairs: PairedMatrices, src_lang: str = "", tgt_lang: str = "") -> LinearMap:
    """Orthogonal W minimizing sum ||a_i W - b_i||^2, via SVD of A^T B.

    With ``A^T B = U S V^T`` the optimum is ``W = U V^T``. Fewer pairs than
    dimensions is allowed but warned about; a singular ``A^T B`` leaves the
    optimum non-unique and is reported through ``rank_deficient``.
    """
    A = np.asarray(pairs.A, dtype=np.float64)
    B = np.asarray(pairs.B, dtype=np.float64)
    if A.shape != B.shape or A.ndim != 2:
        raise DataError(f"paired matrices differ in shape: {A.shape} vs {B.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise DataError("paired matrices contain non-finite values")
    k, d = A.shape
    if k < d:
        warnings.warn(f"only {k} training pairs for dimension {d}", stacklevel=2)
    u, s, vt = np.linalg.svd(A.T @ B)
    u, vt = _fix_signs(u, vt)
    W = u @ vt
    tol = s[0] * d * np.finfo(np.float64).eps if s.size and s[0] > 0 else 0.0
    deficient = bool(s.size == 0 or s[0] == 0 or s[-1] <= tol)
    if deficient:
        log.info("A^T B is rank deficient; orthogonal optimum is not unique")
    return LinearMap(W, ORTHOGONAL, src_lang, tgt_lang, trained_on=k,
                     rank_deficient=deficient)


def procrustes_objective(A: np.ndarray, B: np.ndarray, W: np.ndarray) -> float:
    return float(np.sum((A @ W - B) ** 2))


def apply_map(space: EmbeddingSpace, linear_map: LinearMap) -> EmbeddingSpace:
    """Right-multiply every row by the map; normalization history is reset."""
    if space.d != linear_map.d:
        raise DataError(f"space has d={space.d} but map has d={linear_map.d}")
    return space.replace(matrix=space.matrix @ linear_map.matrix, norm_state=())


def align_bilingual(src: EmbeddingSpace, tgt: EmbeddingSpace, dictionary: TranslationDictionary,
                    src_col=0, tgt_col=-1) -> tuple[EmbeddingSpace, LinearMap]:
    """Map ``src`` onto ``tgt`` with an orthogonal map; ``tgt`` is left as is."""
    pairs = build_pairs(dictionary, src, tgt, src_col, tgt_col)
    log.info("procrustes on %d pairs (%d OOV skipped)", pairs.kept, pairs.skipped_oov)
    W = procrustes(pairs, src.lang, tgt.lang)
    return apply_map(src, W), W


def save_map(linear_map: LinearMap, path) -> None:
    """Header ``d d flavor`` followed by d rows at 9 significant digits."""
    d = linear_map.d
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{d} {d} {linear_map.flavor}\n")
        for row in linear_map.matrix:
            f.write(" ".join("%.9g" % x for x in row) + "\n")


def load_map(path, src_lang: str = "", tgt_lang: str = "") -> LinearMap:
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 3 or header[0] != header[1]:
            raise DataError(f"{path}: malformed map header, expected 'd d flavor'")
        try:
            d = int(header[0])
        except ValueError:
            raise DataError(f"{path}: malformed map header") from None
        rows = [line.split() for line in f if line.strip()]
    if len(rows) != d or any(len(r) != d for r in rows):
        raise DataError(f"{path}: expected {d} rows of {d} values")
    try:
        m = np.array(rows, dtype=np.float64)
    except ValueError:
        raise DataError(f"{path}: non-numeric value in map") from None
    return LinearMap(m, header[2], src_lang, tgt_lang)
