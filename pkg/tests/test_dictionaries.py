import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xlalign.dictionaries import (
    TranslationDictionary, build_pairs, join_on_pivot, load_dictionary, split, subsample,
)
from xlalign.errors import DataError

from conftest import make_space


def D(langs, *tuples):
    return TranslationDictionary(tuple(langs), tuple(tuples))


def test_load(write):
    d = load_dictionary(write("d.tsv", "dog\tperro\ncat\tgato\n"), ["en", "es"])
    assert d.tuples == (("dog", "perro"), ("cat", "gato"))
    assert d.langs == ("en", "es")


def test_load_dedup_and_spaces(write):
    d = load_dictionary(write("d.tsv", "dog\tperro\ndog perro\n\ndog\tcan\n"), ["en", "es"])
    assert d.tuples == (("dog", "perro"), ("dog", "can"))


def test_load_arity(write):
    with pytest.raises(DataError):
        load_dictionary(write("d.tsv", "dog\n"), ["en", "es"])


def test_invariants():
    with pytest.raises(DataError):
        D(["en"], ("a",))
    with pytest.raises(DataError):
        D(["en", "es"], ("a", "b"), ("a", "b"))
    with pytest.raises(DataError):
        D(["en", "es"], ("a", ""))


def test_join_single():
    j = join_on_pivot([D(["es", "en"], ("perro", "dog")), D(["it", "en"], ("cane", "dog"))])
    assert j.langs == ("es", "it", "en")
    assert j.tuples == (("perro", "cane", "dog"),)


def test_join_empty():
    j = join_on_pivot([D(["es", "en"], ("perro", "dog")), D(["it", "en"], ("gatto", "cat"))])
    assert len(j) == 0


def test_join_first_listed():
    j = join_on_pivot([D(["es", "en"], ("can", "dog"), ("perro", "dog")),
                       D(["it", "en"], ("cane", "dog"))])
    assert j.tuples == (("can", "cane", "dog"),)


def test_join_errors():
    with pytest.raises(DataError):
        join_on_pivot([D(["es", "en"], ("perro", "dog"))])
    with pytest.raises(DataError):
        join_on_pivot([D(["es", "en"], ("perro", "dog")), D(["it", "de"], ("cane", "hund"))])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5))
def test_join_arity(n):
    bis = [D([f"l{i}", "en"], ("x%d" % i, "dog"), ("y%d" % i, "cat")) for i in range(n)]
    j = join_on_pivot(bis)
    assert j.arity == n + 1
    assert len(j) == 2


def ten():
    return D(["a", "b"], *[(f"s{i}", f"t{i}") for i in range(10)])


def test_subsample_full():
    assert sorted(subsample(ten(), 10, 0).tuples) == sorted(ten().tuples)


def test_subsample_deterministic():
    assert subsample(ten(), 3, 7) == subsample(ten(), 3, 7)
    assert len(subsample(ten(), 3, 7)) == 3


def test_subsample_too_big():
    with pytest.raises(DataError):
        subsample(ten(), 11, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10), st.integers(0, 2**32 - 1))
def test_subsample_pure(size, seed):
    a, b = subsample(ten(), size, seed), subsample(ten(), size, seed)
    assert a == b
    assert set(a.tuples) <= set(ten().tuples)


def test_split_groups_source_words():
    d = D(["a", "b"], *[(f"s{i // 2}", f"t{i}") for i in range(40)])
    train, test = split(d, 0.25, 3)
    assert len(train) + len(test) == 40
    assert not {t[0] for t in train} & {t[0] for t in test}
    assert len({t[0] for t in test}) == 5


def spaces():
    src = make_space("en", ["dog", "cat"], [[1, 0], [0, 1]])
    tgt = make_space("es", ["perro", "gato", "dog"], [[1, 0], [0, 1], [1, 1]])
    return src, tgt


def test_build_pairs_basic():
    src, tgt = spaces()
    p = build_pairs(D(["en", "es"], ("dog", "perro")), src, tgt)
    assert (p.kept, p.skipped_oov) == (1, 0)
    np.testing.assert_array_equal(p.A, [[1, 0]])
    np.testing.assert_array_equal(p.B, [[1, 0]])


def test_build_pairs_oov():
    src, tgt = spaces()
    p = build_pairs(D(["en", "es"], ("dog", "perro"), ("unicornio_xyz", "dog")), src, tgt)
    assert (p.kept, p.skipped_oov) == (1, 1)


def test_build_pairs_all_oov():
    src, tgt = spaces()
    with pytest.raises(DataError):
        build_pairs(D(["en", "es"], ("x", "y")), src, tgt)


def test_build_pairs_columns():
    src, tgt = spaces()
    d = D(["en", "it", "es"], ("cat", "gatto", "gato"), ("dog", "cane", "perro"))
    p = build_pairs(d, src, tgt, "en", "es")
    assert p.pairs == (("cat", "gato"), ("dog", "perro"))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["dog", "cat", "x", "y"]),
                          st.sampled_from(["perro", "gato", "dog", "z"])),
                min_size=1, max_size=16, unique=True))
def test_build_pairs_count_invariant(tuples):
    src, tgt = spaces()
    d = D(["en", "es"], *tuples)
    try:
        p = build_pairs(d, src, tgt)
    except DataError:
        assert all(a not in src or b not in tgt for a, b in tuples)
        return
    assert p.kept + p.skipped_oov == len(tuples)
    assert p.A.shape == p.B.shape == (p.kept, 2)
