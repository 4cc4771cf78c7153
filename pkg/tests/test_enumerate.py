import pytest

from linlam import enumerate as E
from linlam import series as S
from linlam.maps import canonical_form
from linlam.terms import IDENTITY, classify_term, count_parameter, format_term, parse_term, term_key, term_size

EXHAUSTIVE_CLASSES = ["linear_closed", "linear_open", "affine_closed", "bridgeless_closed", "one_bridge",
                      "bridgeless_open1", "contexts_K", "contexts_Q"]


def a062980(count):
    a = [1]
    for n in range(1, count):
        a.append((6 * n - 2) * a[-1] + sum(a[k] * a[n - 1 - k] for k in range(n)))
    return a


def test_size_two_is_identity():
    assert list(E.enumerate_class("linear_closed", 2)) == [IDENTITY]


def test_size_five_closed_terms():
    ts = list(E.enumerate_class("linear_closed", 5))
    assert len(ts) == 5
    assert all(classify_term(t).is_linear and classify_term(t).is_closed for t in ts)


def test_bridgeless_size_five():
    got = {format_term(t) for t in E.enumerate_class("bridgeless_closed", 5)}
    assert got == {format_term(parse_term(r"\x.\y.x y")), format_term(parse_term(r"\x.\y.y x"))}


def test_counts_2_5_8():
    assert [E.count_class("linear_closed", n) for n in (2, 5, 8)] == [1, 5, 60]


def test_oeis_a062980():
    ref = a062980(60)
    assert [E.count_class("linear_closed", 3 * n + 2) for n in range(60) if 3 * n + 2 <= 200] == ref[:len(
        [n for n in range(60) if 3 * n + 2 <= 200])]


def test_bridgeless_initial_values():
    assert [E.count_class("bridgeless_open1", n) for n in (1, 2, 3)] == [1, 0, 0]


def test_affine_size_three():
    ts = list(E.enumerate_class("affine_closed", 3))
    assert {format_term(t) for t in ts} == {"λa.λb.a", "λa.λb.b"}
    assert E.count_class("affine_closed", 3) == 2


@pytest.mark.parametrize("cls", EXHAUSTIVE_CLASSES)
def test_stream_matches_count(cls):
    for n in range(0, 11 if cls.startswith("contexts") else 12):
        if cls.startswith("contexts") and n > 9:
            break
        objs = list(E.enumerate_class(cls, n))
        assert len(objs) == E.count_class(cls, n), (cls, n)
        assert len(set(objs)) == len(objs)


def test_streams_are_in_canonical_order():
    for n in (8, 11):
        ts = list(E.enumerate_class("linear_closed", n))
        assert ts == sorted(ts, key=term_key)


@pytest.mark.parametrize("cls", ["linear_closed", "linear_open", "affine_closed", "contexts_K"])
def test_workers_do_not_change_output(cls):
    n = 8 if cls == "contexts_K" else 10
    assert list(E.enumerate_class(cls, n, workers=1)) == list(E.enumerate_class(cls, n, workers=3))


def test_arity_selector():
    assert len(list(E.enumerate_class("linear_open", 7, k=1))) == 50
    assert E.count_class("linear-open:1", 10) == 960


def test_disjoint_bridge_classes_and_cardinality_identity():
    for n in range(2, 12):
        assert E.count_class("bridgeless_closed", n) - (n == 2) == E.count_class("one_bridge", n)


def test_B0_equals_B1_shifted():
    for n in range(2, 60):
        assert E.count_class("bridgeless_closed", n) == E.count_class("bridgeless_open1", n - 1)


class TestMaps:
    def test_rooted_13_counts(self):
        assert [E.count_class("maps_13_rooted", n) for n in range(5)] == [1, 1, 4, 7, 16]

    def test_rooted_23_counts(self):
        assert [E.count_class("maps_23_rooted", n) for n in range(7)] == [1, 1, 1, 6, 21, 51, 161]

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_rooted_maps_match_labelled_brute_force(self, n):
        for cls, deg in (("maps_13_rooted", {1, 3}), ("maps_23_rooted", {2, 3})):
            got = {canonical_form(m) for m in E.enumerate_class(cls, n)}
            assert got == E.rooted_maps_brute_force(2 * n, deg)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_disconnected_counts(self, n):
        for cls in ("maps_13_disconnected", "maps_23_disconnected"):
            assert sum(1 for _ in E.enumerate_class(cls, n)) == E.count_class(cls, n)

    def test_disconnected_arity(self):
        total = sum(E.count_class("maps_13_disconnected", 3, k) for k in range(7))
        assert total == E.count_class("maps_13_disconnected", 3)


class TestDistributions:
    def test_identity_size_two(self):
        assert E.empirical_distribution("linear_closed", "identity_subterms", 2).counts == {1: 1}

    def test_closed_proper_size_five(self):
        d = E.empirical_distribution("linear_closed", "closed_proper_subterms", 5)
        assert d.counts == {0: 2, 1: 2, 2: 1}

    def test_identity_size_five(self):
        d = E.empirical_distribution("linear_closed", "identity_subterms", 5)
        assert d.counts == {0: 2, 1: 2, 2: 1}

    def test_match_series_for_n_le_11(self):
        Tid = S.series_catalog("T_id", 12, 8)
        Ts = S.series_catalog("T_sub", 12, 8)
        T = S.series_catalog("T", 12, 13)
        A = S.series_catalog("A", 12, 12)
        for n in range(1, 12):
            d = E.empirical_distribution("linear_closed", "identity_subterms", n)
            assert d.counts == {k: Tid[n, k] for k in range(8) if Tid[n, k]}
            d = E.empirical_distribution("linear_closed", "closed_proper_subterms", n)
            assert d.counts == {k: Ts[n, k] for k in range(8) if Ts[n, k]}
            d = E.empirical_distribution("linear_open", "free_variables", n)
            assert d.counts == {k: T[n, k] for k in range(13) if T[n, k]}
            d = E.empirical_distribution("affine_closed", "unused_abstractions", n)
            assert d.counts == {k: A.formal(n, k) for k in range(12) if A.formal(n, k)}

    def test_undefined_parameter(self):
        with pytest.raises(E.EnumerationError):
            E.empirical_distribution("affine_closed", "identity_subterms", 3)


class TestErrors:
    def test_unknown_class(self):
        with pytest.raises(E.UnknownClass):
            E.count_class("planar_maps", 3)

    def test_exhaustive_bound(self):
        with pytest.raises(E.BoundExceeded):
            list(E.enumerate_class("linear_closed", 13))

    def test_series_bound(self):
        with pytest.raises(E.BoundExceeded):
            E.count_class("linear_closed", 201)

    def test_sizes_are_consistent(self):
        for t in E.enumerate_class("linear_open", 9):
            assert term_size(t) == 9
            assert count_parameter(t, "free_variables") == classify_term(t).arity
