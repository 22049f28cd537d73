import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from xlalign.alignment import UNCONSTRAINED, LinearMap
from xlalign.dictionaries import TranslationDictionary
from xlalign.errors import DataError, NumericError
from xlalign.evaluation import (
    EvalReport, average_ranks, eval_dict_induction, eval_hypernym, eval_word_similarity,
    hypernym_scores, knn, load_hypernym_dataset, load_similarity_dataset, pearson, spearman,
    train_hypernym_map,
)
from xlalign.meemi import MultiSpace

from conftest import make_space


def brute_force_knn(query, space, k, exclude=()):
    qn = math.sqrt(math.fsum(x * x for x in query))
    scored = []
    for i, (w, row) in enumerate(zip(space.words, space.matrix)):
        if w in exclude:
            continue
        rn = math.sqrt(math.fsum(float(x) * float(x) for x in row))
        cos = math.fsum(float(a) * float(b) for a, b in zip(query, row)) / (qn * rn)
        scored.append((-cos, i, w))
    scored.sort()
    return [(w, -c) for c, _, w in scored[:k]]


def angle_space(lang, names, degrees):
    return make_space(lang, names, [[math.cos(math.radians(a)), math.sin(math.radians(a))]
                                    for a in degrees])


# -- knn ---------------------------------------------------------------------

def test_knn_self_first(rng):
    s = make_space("x", ["dog", "cat", "car"], rng.standard_normal((3, 4)))
    top = knn(s.vector("dog"), s, 1)
    assert top[0][0] == "dog"
    assert top[0][1] == pytest.approx(1.0)


def test_knn_toy():
    s = make_space("x", ["cat", "dog", "car"], [[1, 0], [0.9, 0.1], [0, 1]])
    top = knn([1.0, 0.0], s, 2)
    assert [w for w, _ in top] == ["cat", "dog"]
    assert top[0][1] == pytest.approx(1.0)
    assert top[1][1] == pytest.approx(0.9 / math.sqrt(0.82), abs=1e-12)
    assert top[1][1] == pytest.approx(0.9939, abs=1e-4)


def test_knn_ties_by_id():
    s = make_space("x", ["b", "a", "c"], [[0, 1], [1, 0], [1, 0]])
    assert [w for w, _ in knn([1.0, 0], s, 2)] == ["a", "c"]
    assert [w for w, _ in knn([1.0, 0], s, 3)] == ["a", "c", "b"]


def test_knn_exclude():
    s = make_space("x", ["cat", "dog", "car"], [[1, 0], [0.9, 0.1], [0, 1]])
    assert [w for w, _ in knn([1.0, 0], s, 2, exclude={"cat"})] == ["dog", "car"]
    assert len(knn([1.0, 0], s, 5, exclude={"cat"})) == 2


def test_knn_errors():
    s = make_space("x", ["cat"], [[1, 0]])
    with pytest.raises(NumericError):
        knn([0.0, 0.0], s, 1)
    with pytest.raises(DataError):
        knn([1.0, 0.0], s, 0)
    with pytest.raises(DataError):
        knn([1.0, 0.0, 0.0], s, 1)


def exact_cosine_key(query, row):
    """Exact ordering key for integer vectors: sign(cos) * cos^2 * |q|^2 as a Fraction."""
    dot = sum(int(a) * int(b) for a, b in zip(query, row))
    n2 = sum(int(x) * int(x) for x in row)
    return Fraction(dot * abs(dot), n2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 12))
def test_knn_matches_exact_oracle(seed, k):
    r = np.random.default_rng(seed)
    # a small integer grid makes exact ties (and scaled duplicates) common
    M = r.integers(-2, 3, size=(30, 3)).astype(float)
    M[np.all(M == 0, axis=1)] = 1.0
    s = make_space("x", [f"w{i}" for i in range(30)], M)
    q = r.integers(-2, 3, size=3).astype(float)
    if not q.any():
        q[0] = 1.0
    order = sorted(range(30), key=lambda i: (-exact_cosine_key(q, M[i]), i))
    got = knn(q, s, k)
    assert [w for w, _ in got] == [s.words[i] for i in order[:k]]
    want = brute_force_knn(q, s, k)
    np.testing.assert_allclose([c for _, c in got], [c for _, c in want], atol=1e-12)


# -- dictionary induction ------------------------------------------------------

def test_induction_all_nearest():
    src = make_space("x", ["a", "b"], [[1, 0], [0, 1]])
    tgt = make_space("y", ["A", "B", "C"], [[1, 0], [0, 1], [1, 1]])
    d = TranslationDictionary(("x", "y"), (("a", "A"), ("b", "B")))
    r = eval_dict_induction(d, src, tgt)
    assert r.metrics == {"P@1": 1.0, "P@5": 1.0, "P@10": 1.0}


def test_induction_third_rank():
    tgt = angle_space("y", [f"t{j}" for j in range(12)], [j * 5 for j in range(12)])
    src = make_space("x", ["a"], [[1, 0]])
    r = eval_dict_induction(TranslationDictionary(("x", "y"), (("a", "t2"),)), src, tgt)
    assert (r.metrics["P@1"], r.metrics["P@5"], r.metrics["P@10"]) == (0.0, 1.0, 1.0)


def gold_rank(src_vec, tgt, golds):
    ranking = [w for w, _ in brute_force_knn(src_vec, tgt, len(tgt))]
    return min(ranking.index(g) + 1 for g in golds)


def test_induction_mixed_ranks():
    names = [f"t{j:02d}" for j in range(25)]
    tgt = angle_space("y", names, [j * 3 for j in range(25)])
    src = make_space("x", ["s1", "s2", "s3", "s4"], [[1, 0]] * 4)
    gold = {"s1": "t00", "s2": "t01", "s3": "t06", "s4": "t19"}
    assert [gold_rank([1.0, 0], tgt, [g]) for g in gold.values()] == [1, 2, 7, 20]
    r = eval_dict_induction(TranslationDictionary(("x", "y"), tuple(gold.items())), src, tgt)
    assert r.metrics["P@1"] == pytest.approx(0.25, abs=1e-12)
    assert r.metrics["P@5"] == pytest.approx(0.5, abs=1e-12)
    assert r.metrics["P@10"] == pytest.approx(0.75, abs=1e-12)


def test_induction_grouping_and_oov():
    tgt = angle_space("y", [f"t{j}" for j in range(10)], [j * 9 for j in range(10)])
    src = make_space("x", ["a", "b"], [[1, 0], [0, 1]])
    d = TranslationDictionary(("x", "y"), (
        ("a", "t5"), ("a", "t0"), ("a", "ghost"),      # any gold counts, once
        ("b", "ghost"),                                 # gold OOV: never matches
        ("zzz", "t1"),                                  # source OOV: skipped
    ))
    r = eval_dict_induction(d, src, tgt)
    assert r.coverage == {"evaluated": 2, "skipped_oov": 1}
    assert r.metrics["P@1"] == 0.5


def test_induction_no_source():
    src = make_space("x", ["a"], [[1, 0]])
    with pytest.raises(DataError):
        eval_dict_induction(TranslationDictionary(("x", "y"), (("q", "r"),)), src, src)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_induction_monotone(seed):
    r = np.random.default_rng(seed)
    src = make_space("x", [f"s{i}" for i in range(20)], r.standard_normal((20, 4)))
    tgt = make_space("y", [f"t{i}" for i in range(40)], r.standard_normal((40, 4)))
    pairs = tuple((f"s{i}", f"t{r.integers(40)}") for i in range(20))
    rep = eval_dict_induction(TranslationDictionary(("x", "y"), pairs), src, tgt, ks=(1, 5, 10))
    assert rep.metrics["P@1"] <= rep.metrics["P@5"] <= rep.metrics["P@10"]


def test_report_rejects_non_monotone():
    with pytest.raises(NumericError):
        EvalReport("dict_induction", {"P@1": 0.5, "P@5": 0.4}, {})
    with pytest.raises(NumericError):
        EvalReport("word_similarity", {"pearson_r": 1.5}, {})


# -- word similarity -----------------------------------------------------------

def test_ranks():
    np.testing.assert_array_equal(average_ranks([10, 20, 20, 5]), [2, 3.5, 3.5, 1])


def test_spearman_fixture():
    assert spearman([1, 2, 3, 4, 5], [2, 1, 3, 4, 5]) == pytest.approx(0.9, abs=1e-9)
    assert 1 - 6 * 2 / (5 * 24) == pytest.approx(0.9)
    assert stats.spearmanr([1, 2, 3, 4, 5], [2, 1, 3, 4, 5]).correlation == pytest.approx(0.9, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.floats(-10, 10)), min_size=3, max_size=30))
def test_spearman_matches_scipy(data):
    x = [a for a, _ in data]
    y = [b for _, b in data]
    if len(set(x)) < 2 or len(set(y)) < 2:
        with pytest.raises(NumericError):
            spearman(x, y)
        return
    assert spearman(x, y) == pytest.approx(stats.spearmanr(x, y).correlation, abs=1e-9)


@pytest.mark.parametrize("transform", [lambda v: v ** 3, np.exp])
def test_spearman_monotone_invariance(rng, transform):
    x, y = rng.standard_normal(40), rng.standard_normal(40)
    assert spearman(transform(x), y) == pytest.approx(spearman(x, y), abs=1e-9)


def sim_space():
    return angle_space("x", ["a", "b", "c", "d", "e"], [0, 10, 30, 60, 100])


def test_similarity_affine():
    s = sim_space()
    pairs = [("a", "b"), ("a", "c"), ("a", "d"), ("b", "e"), ("c", "e")]
    cos = [float(np.cos(np.radians(abs(x - y)))) for x, y in
           [(0, 10), (0, 30), (0, 60), (10, 100), (30, 100)]]
    data = [(a, b, 3.0 * c + 2.0) for (a, b), c in zip(pairs, cos)]
    r = eval_word_similarity(data, s)
    assert r.metrics["pearson_r"] == pytest.approx(1.0, abs=1e-12)
    assert r.metrics["spearman_rho"] == pytest.approx(1.0, abs=1e-12)


def test_similarity_reversed():
    s = sim_space()
    data = [("a", "b", 1.0), ("a", "c", 2.0), ("a", "d", 3.0), ("a", "e", 4.0)]
    assert eval_word_similarity(data, s).metrics["spearman_rho"] == pytest.approx(-1.0)


def test_similarity_cross_lingual_and_oov():
    a, b = sim_space(), sim_space().replace(lang="y")
    data = [("a", "b", 1.0), ("a", "c", 0.5), ("a", "zz", 0.1), ("b", "d", 0.2)]
    r = eval_word_similarity(data, a, b)
    assert r.coverage == {"evaluated": 3, "skipped_oov": 1}


def test_similarity_degenerate():
    s = sim_space()
    with pytest.raises(DataError):
        eval_word_similarity([("a", "b", 1.0), ("q", "r", 2.0)], s)
    with pytest.raises(NumericError):
        eval_word_similarity([("a", "b", 1.0), ("a", "c", 1.0)], s)


def test_pearson_against_numpy(rng):
    x, y = rng.standard_normal(50), rng.standard_normal(50)
    assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)


# -- hypernyms -----------------------------------------------------------------

def test_hypernym_map_identity(rng):
    s = make_space("x", [f"w{i}" for i in range(10)], rng.standard_normal((10, 3)))
    M = train_hypernym_map([(w, w) for w in s.words], s)
    assert M.flavor == UNCONSTRAINED
    assert np.max(np.abs(M.matrix - np.eye(3))) <= 1e-8


def test_hypernym_map_rank_one():
    s = make_space("x", ["dog", "animal"], [[1, 0], [0, 1]])
    M = train_hypernym_map([("dog", "animal")], s)
    np.testing.assert_allclose(M.matrix, [[0, 1], [0, 0]], atol=1e-15)


def test_hypernym_map_multispace_rows(rng):
    en = make_space("en", ["dog", "animal", "cat"], rng.standard_normal((3, 3)))
    es = make_space("es", ["perro", "animal"], rng.standard_normal((2, 3)))
    ms = MultiSpace("en", {"en": en, "es": es})
    M = train_hypernym_map([("en", "dog", "animal"), ("en", "cat", "animal"),
                            ("es", "perro", "animal"), ("es", "gato", "animal")], ms)
    assert M.trained_on == 3


def test_hypernym_map_no_pairs():
    s = make_space("x", ["dog"], [[1, 0]])
    with pytest.raises(DataError):
        train_hypernym_map([("cat", "animal")], s)


def test_ap_fixture_enumerated():
    names = ["c0", "h1", "c2", "c3", "h2", "c5", "c6", "c7", "c8", "c9"]
    cands = angle_space("y", names, [j * 8 for j in range(10)])
    ranked = [w for w, _ in brute_force_knn([1.0, 0.0], cands, 10)]
    assert ranked.index("h1") + 1 == 2 and ranked.index("h2") + 1 == 5
    assert hypernym_scores(ranked, ["h1", "h2"])[1] == pytest.approx(0.45, abs=1e-12)
    q = make_space("x", ["term"], [[1.0, 0.0]])
    r = eval_hypernym([("term", ["h1", "h2"])], LinearMap(np.eye(2), UNCONSTRAINED), q, cands, k=10)
    assert r.metrics["MAP"] == pytest.approx(0.45, abs=1e-12)
    assert r.metrics["MRR"] == pytest.approx(0.5, abs=1e-12)
    assert r.metrics["P@5"] == pytest.approx(1.0, abs=1e-12)


def test_mrr_fixture():
    names = [f"c{j}" for j in range(10)]
    cands = angle_space("y", names, [j * 8 for j in range(10)])
    q = make_space("x", ["t1", "t2", "t4"], [[1.0, 0.0]] * 3)
    test = [("t1", ["c0"]), ("t2", ["c1"]), ("t4", ["c3"])]
    r = eval_hypernym(test, LinearMap(np.eye(2), UNCONSTRAINED), q, cands)
    assert r.metrics["MRR"] == pytest.approx(7 / 12, abs=1e-12)
    assert r.config["k"] == 15


def test_hypernym_perfect():
    cands = angle_space("y", ["a", "b", "c"], [0, 40, 80])
    q = make_space("x", ["ta", "tc"], [[1.0, 0.0], [math.cos(math.radians(80)), math.sin(math.radians(80))]])
    r = eval_hypernym([("ta", ["a"]), ("tc", ["c"])], LinearMap(np.eye(2), UNCONSTRAINED), q, cands)
    assert r.metrics == {"MRR": 1.0, "MAP": 1.0, "P@5": 1.0}


def test_hypernym_term_excluded_and_oov():
    cands = angle_space("x", ["dog", "animal", "rock"], [0, 10, 90])
    r = eval_hypernym([("dog", ["animal"]), ("ghost", ["animal"])],
                      LinearMap(np.eye(2), UNCONSTRAINED), cands, cands)
    assert r.metrics["MRR"] == 1.0
    assert r.coverage == {"evaluated": 1, "skipped_oov": 1}


def test_hypernym_gold_cap():
    gold = [f"g{i}" for i in range(20)]
    retrieved = gold[15:] + ["x"] * 10
    assert hypernym_scores(retrieved, gold[:15]) == (0.0, 0.0, 0.0)
    cands = make_space("y", gold + ["x"], np.vstack([np.tile([1.0, 0.0], (15, 1)),
                                                     np.tile([0.0, 1.0], (6, 1))]))
    q = make_space("q", ["t"], [[0.0, 1.0]])
    # the five closest candidates are golds 16-20, beyond the cap
    r = eval_hypernym([("t", gold)], LinearMap(np.eye(2), UNCONSTRAINED), q, cands, k=5)
    assert r.metrics["MRR"] == 0.0


def test_hypernym_p5_normalisation():
    assert hypernym_scores(["a", "x", "b"], ["a", "b"])[2] == pytest.approx(1.0)
    assert hypernym_scores(["a", "x", "b", "y", "z"], list("abcdefg"))[2] == pytest.approx(0.4)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 20), max_size=15, unique=True), st.sets(st.integers(0, 20), min_size=1))
def test_hypernym_score_ranges(retrieved, gold):
    rr, ap, p5 = hypernym_scores([str(i) for i in retrieved], [str(g) for g in gold])
    for v in (rr, ap, p5):
        assert 0.0 <= v <= 1.0


def test_dataset_loaders(write):
    sim = load_similarity_dataset(write("s.tsv", "a\tb\t1.5\nc\td\t2\n"))
    assert sim == [("a", "b", 1.5), ("c", "d", 2.0)]
    hyp = load_hypernym_dataset(write("h.tsv", "dog\tanimal\tmammal\n"))
    assert hyp == [("dog", ["animal", "mammal"])]
    with pytest.raises(DataError):
        load_similarity_dataset(write("bad.tsv", "a\tb\n"))
    with pytest.raises(DataError):
        load_hypernym_dataset(write("bad2.tsv", "dog\n"))


def test_report_json_roundtrip():
    import json
    r = EvalReport("hypernym", {"MRR": 0.5}, {"evaluated": 2, "skipped_oov": 0}, {"k": 15})
    assert json.loads(r.to_json()) == r.to_dict()
    assert "MRR" in r.to_text()
