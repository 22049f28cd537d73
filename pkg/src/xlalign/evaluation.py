"""Intrinsic and extrinsic evaluation of aligned spaces."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .alignment import LinearMap
from .dictionaries import TranslationDictionary
from .embeddings import EmbeddingSpace
from .errors import DataError, NumericError
from .meemi import MultiSpace, least_squares_map

HYPERNYM_GOLD_CAP = 15
_BATCH = 512
TIE_DECIMALS = 12


@dataclass
class EvalReport:
    task: str
    metrics: dict[str, float]
    coverage: dict[str, int]
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, value in self.metrics.items():
            lo = -1.0 if name in ("pearson_r", "spearman_rho") else 0.0
            if not lo - 1e-12 <= value <= 1.0 + 1e-12:
                raise NumericError(f"metric {name}={value} out of range")
        pk = sorted(
            (int(n[2:]), v) for n, v in self.metrics.items()
            if n.startswith("P@") and self.task == "dict_induction"
        )
        for (_, a), (_, b) in zip(pk, pk[1:]):
            if a > b:
                raise NumericError(f"P@k not monotone in k: {pk}")

    def to_dict(self) -> dict:
        return {"task": self.task, "metrics": self.metrics,
                "coverage": self.coverage, "config": self.config}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"task: {self.task}"]
        lines += [f"  {k:<14}{v:.4f}" for k, v in self.metrics.items()]
        lines += [f"  {k:<14}{v}" for k, v in self.coverage.items()]
        return "\n".join(lines)


def _unit_candidates(space: EmbeddingSpace) -> np.ndarray:
    norms = np.linalg.norm(space.matrix, axis=1, keepdims=True)
    # zero rows get cosine 0 against every query
    return space.matrix / np.where(norms == 0, 1.0, norms)


def _unit_queries(Q: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(Q, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise NumericError("cosine undefined for a zero query vector")
    return Q / norms


def _topk_row(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k best scores, descending, ties by ascending index.

    Scores equal to TIE_DECIMALS places count as tied, so mathematically
    equal cosines split only by rounding noise still order by word id.
    """
    key = np.round(scores, TIE_DECIMALS)
    n = key.shape[0]
    if k >= n:
        return np.lexsort((np.arange(n), -key))
    part = np.argpartition(-key, k - 1)[:k]
    threshold = key[part].min()
    cand = np.flatnonzero(key >= threshold)
    order = np.lexsort((cand, -key[cand]))
    return cand[order[:k]]


def rank_batch(Q: np.ndarray, space: EmbeddingSpace, k: int,
               exclude: Sequence[Iterable[int]] | None = None):
    """Top-k candidate ids and cosines for each query row."""
    C = _unit_candidates(space)
    Qn = _unit_queries(np.atleast_2d(np.asarray(Q, dtype=np.float64)))
    ids, scores = [], []
    for start in range(0, Qn.shape[0], _BATCH):
        S = Qn[start:start + _BATCH] @ C.T
        for j, row in enumerate(S):
            if exclude is not None:
                ex = list(exclude[start + j])
                if ex:
                    row = row.copy()
                    row[ex] = -np.inf
            top = _topk_row(row, k)
            top = top[np.isfinite(row[top])]
            ids.append(top)
            scores.append(row[top])
    return ids, scores


def knn(query, space: EmbeddingSpace, k: int, exclude=None) -> list[tuple[str, float]]:
    """Exact top-k neighbours of ``query`` in ``space`` by cosine."""
    if k < 1:
        raise DataError("k must be at least 1")
    if len(space) == 0:
        raise DataError("cannot search an empty space")
    q = np.asarray(query, dtype=np.float64).reshape(1, -1)
    if q.shape[1] != space.d:
        raise DataError(f"query has dimension {q.shape[1]}, space has {space.d}")
    ex = [[space.index(w) for w in (exclude or ()) if w in space]]
    ids, scores = rank_batch(q, space, k, ex)
    return [(space.words[i], float(s)) for i, s in zip(ids[0], scores[0])]


def eval_dict_induction(test_dict: TranslationDictionary, src: EmbeddingSpace,
                        tgt: EmbeddingSpace, ks: Sequence[int] = (1, 5, 10),
                        src_col=0, tgt_col=-1) -> EvalReport:
    """Precision at k for retrieving gold translations among target words.

    Test pairs are grouped by source word; a word succeeds at k if any of
    its gold translations is among its k nearest target words.
    """
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise DataError("ks must be positive")
    sc, tc = test_dict.column(src_col), test_dict.column(tgt_col)
    gold: dict[str, list[str]] = {}
    for t in test_dict.tuples:
        gold.setdefault(t[sc], []).append(t[tc])
    queries = [w for w in gold if w in src]
    skipped = len(gold) - len(queries)
    if not queries:
        raise DataError(f"no test source word is in vocabulary ({skipped} skipped)")
    Q = src.matrix[[src.index(w) for w in queries]]
    ids, _ = rank_batch(Q, tgt, max(ks))
    hits = np.zeros(len(ks))
    for w, top in zip(queries, ids):
        gold_ids = {tgt.index(g) for g in gold[w] if g in tgt}
        first = next((r for r, i in enumerate(top, start=1) if i in gold_ids), None)
        if first is not None:
            hits += [first <= k for k in ks]
    n = len(queries)
    return EvalReport(
        task="dict_induction",
        metrics={f"P@{k}": float(h / n) for k, h in zip(ks, hits)},
        coverage={"evaluated": n, "skipped_oov": skipped},
        config={"retrieval": "cosine", "ks": ks,
                "src_lang": src.lang, "tgt_lang": tgt.lang},
    )


def average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing the mean of their positions."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    sx = x[order]
    ranks = np.empty(len(x))
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y) or len(x) < 2:
        raise NumericError("correlation needs at least two paired values")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise NumericError("correlation undefined: a series has zero variance")
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def spearman(x, y) -> float:
    return pearson(average_ranks(x), average_ranks(y))


def eval_word_similarity(dataset: Sequence[tuple[str, str, float]], space_a: EmbeddingSpace,
                         space_b: EmbeddingSpace | None = None) -> EvalReport:
    """Correlate cosine similarity with gold scores.

    Monolingual evaluation passes a single space; cross-lingual passes the
    space of each column.
    """
    space_b = space_a if space_b is None else space_b
    gold, pred = [], []
    skipped = 0
    for a, b, score in dataset:
        if a in space_a and b in space_b:
            va, vb = space_a.vector(a), space_b.vector(b)
            na, nb = np.linalg.norm(va), np.linalg.norm(vb)
            if na == 0 or nb == 0:
                raise NumericError(f"zero vector for pair ({a}, {b})")
            pred.append(float(va @ vb) / (na * nb))
            gold.append(float(score))
        else:
            skipped += 1
    coverage = {"evaluated": len(gold), "skipped_oov": skipped}
    if len(gold) < 2:
        raise DataError(f"fewer than two in-vocabulary pairs (coverage {coverage})")
    return EvalReport(
        task="word_similarity",
        metrics={"pearson_r": pearson(pred, gold), "spearman_rho": spearman(pred, gold)},
        coverage=coverage,
        config={"retrieval": "cosine", "lang_a": space_a.lang, "lang_b": space_b.lang},
    )


def train_hypernym_map(pairs, space, ridge: float = 0.0) -> LinearMap:
    """Least-squares map from hyponym vectors to hypernym vectors.

    With a single space, ``pairs`` holds ``(hyponym, hypernym)``. With a
    ``MultiSpace`` each item is ``(lang, hyponym, hypernym)`` so training
    data from several languages of the shared space can be mixed.
    """
    A, T = [], []
    for item in pairs:
        if isinstance(space, MultiSpace):
            lang, hypo, hyper = item
            s = space.spaces.get(lang)
            if s is None:
                continue
        else:
            hypo, hyper = item
            s = space
        if hypo in s and hyper in s:
            A.append(s.vector(hypo))
            T.append(s.vector(hyper))
    if not A:
        raise DataError("no hyponym-hypernym training pair is in vocabulary")
    return least_squares_map(np.array(A), np.array(T), ridge)


def eval_hypernym(test: Sequence[tuple[str, Sequence[str]]], linear_map: LinearMap,
                  query_space: EmbeddingSpace, candidate_space: EmbeddingSpace,
                  k: int = HYPERNYM_GOLD_CAP) -> EvalReport:
    """MRR, MAP and P@5 of hypernyms retrieved for each test term.

    Each term vector is mapped, candidates are ranked by cosine (the term
    itself excluded) and the top ``k`` are scored. Gold lists are cut to
    their first 15 entries. Average precision averages precision at the
    positions of the retrieved gold hypernyms, 0 when none is retrieved.
    """
    if k < 1:
        raise DataError("k must be at least 1")
    if len(candidate_space) == 0:
        raise DataError("empty candidate space")
    terms = [(t, list(g)[:HYPERNYM_GOLD_CAP]) for t, g in test if t in query_space]
    skipped = len(test) - len(terms)
    if not terms:
        raise DataError(f"no test term is in vocabulary ({skipped} skipped)")
    Q = query_space.matrix[[query_space.index(t) for t, _ in terms]] @ linear_map.matrix
    exclude = [[candidate_space.index(t)] if t in candidate_space else [] for t, _ in terms]
    ids, _ = rank_batch(Q, candidate_space, k, exclude)
    rr, ap, p5 = [], [], []
    for (term, gold), top in zip(terms, ids):
        retrieved = [candidate_space.words[i] for i in top]
        r, a, p = hypernym_scores(retrieved, gold)
        rr.append(r)
        ap.append(a)
        p5.append(p)
    return EvalReport(
        task="hypernym",
        metrics={"MRR": float(np.mean(rr)), "MAP": float(np.mean(ap)), "P@5": float(np.mean(p5))},
        coverage={"evaluated": len(terms), "skipped_oov": skipped},
        config={"retrieval": "cosine", "k": k, "gold_cap": HYPERNYM_GOLD_CAP,
                "query_lang": query_space.lang, "candidate_lang": candidate_space.lang},
    )


def hypernym_scores(retrieved: Sequence[str], gold: Sequence[str]) -> tuple[float, float, float]:
    """Reciprocal rank, average precision and P@5 for one ranked list."""
    gold_set = set(gold)
    if not gold_set:
        return 0.0, 0.0, 0.0
    positions = [i for i, w in enumerate(retrieved, start=1) if w in gold_set]
    rr = 1.0 / positions[0] if positions else 0.0
    ap = float(np.mean([(j + 1) / pos for j, pos in enumerate(positions)])) if positions else 0.0
    p5 = sum(1 for pos in positions if pos <= 5) / min(5, len(gold_set))
    return rr, ap, p5


def load_similarity_dataset(path) -> list[tuple[str, str, float]]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 'word_a<TAB>word_b<TAB>score'")
            try:
                rows.append((parts[0], parts[1], float(parts[2])))
            except ValueError:
                raise DataError(f"{path}:{lineno}: score is not a number") from None
    return rows


def load_hypernym_dataset(path) -> list[tuple[str, list[str]]]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = [p for p in line.rstrip("\n").split("\t") if p]
            if not parts:
                continue
            if len(parts) < 2:
                raise DataError(f"{path}:{lineno}: term without hypernyms")
            rows.append((parts[0], parts[1:]))
    return rows
