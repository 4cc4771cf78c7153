import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linlam import enumerate as E
from linlam import series as S
from linlam.series import EXPONENTIAL, ORDINARY, TruncatedSeries as TS

# oracle: OEIS A062980, rooted trivalent maps
def a062980(count):
    a = [1]
    for n in range(1, count):
        a.append((6 * n - 2) * a[-1] + sum(a[k] * a[n - 1 - k] for k in range(n)))
    return a


A267827 = [1, 2, 20, 352, 8624, 266784]
B_FROZEN = [1, 2, 20, 352, 8624, 266784, 9896448, 426577920, 20918138624, 1149216540160]


def uni(coeffs, kind=ORDINARY, var="z"):
    return TS(list(coeffs), (var,), (kind,))


def small_series(order=6):
    return st.lists(st.integers(-20, 20), min_size=order, max_size=order).map(uni)


class TestArithmetic:
    def test_z_times_z(self):
        z = TS.monomial((1,), ("z",), (4,))
        assert (z * z) == TS.monomial((2,), ("z",), (4,))

    def test_derive(self):
        s = TS.from_terms({(1, 1): 1, (1, 2): 1}, ("z", "u"), (3, 3))
        assert s.derive("u") == TS.from_terms({(1, 0): 1, (1, 1): 2}, ("z", "u"), (3, 2))

    def test_order_is_minimum(self):
        a = uni([1, 2, 3, 4])
        b = uni([1, 1])
        assert (a + b).orders == (2,) and (a * b).orders == (2,)

    def test_variable_mismatch(self):
        with pytest.raises(S.VariableMismatch):
            uni([1, 2]) + uni([1, 2], var="u")

    def test_unknown_beyond_truncation(self):
        with pytest.raises(IndexError):
            uni([1, 2, 3])[3]

    def test_spec_named_wrappers(self):
        a, b = uni([1, 2, 3]), uni([0, 1, 1])
        assert S.series_multiply(a, b) == a * b and S.series_add(a, b) == a + b
        assert S.series_derive(a, "z") == a.derive("z")

    @given(small_series(), small_series(), small_series())
    def test_ring_laws(self, a, b, c):
        assert a * (b + c) == a * b + a * c
        assert (a * b) * c == a * (b * c)
        assert a * b == b * a

    @given(small_series(8))
    def test_inverse(self, a):
        if a[0] in (1, -1):
            one = TS.constant(1, ("z",), (8,))
            assert a * a.inverse() == one

    @given(st.lists(st.integers(-10 ** 30, 10 ** 30), min_size=1, max_size=40),
           st.lists(st.integers(-10 ** 30, 10 ** 30), min_size=1, max_size=40))
    def test_kronecker_matches_schoolbook(self, a, b):
        n = len(a) + len(b) - 1
        naive = [sum(a[i] * b[k - i] for i in range(len(a)) if 0 <= k - i < len(b)) for k in range(n)]
        assert S.kronecker_mul(a, b, n) == naive

    def test_exponential_product_is_binomial(self):
        e = uni([1] * 6, EXPONENTIAL)  # exp(z) stored as n! * 1/n!
        assert (e * e).coeffs.tolist() == [2 ** n for n in range(6)]

    def test_extremal_product(self):
        # [z^n] f^2 against the two outer terms 2 f_1 f_{n-1}: the gap shrinks with n
        T = S.series_catalog("T", 62, 62)
        t = [sum(T[n, k] for k in range(62)) for n in range(62)]

        def gap(n):
            return sum(t[i] * t[n - i] for i in range(n + 1)) / (2 * t[1] * t[n - 1]) - 1

        assert gap(60) < gap(30)
        assert float(gap(60)) == pytest.approx(0.2960655, abs=1e-6)


class TestCompose:
    def test_geometric(self):
        o = (5, 5)
        outer = TS.from_terms({2: 1}, ("y",), (5,))
        z = TS.monomial((1, 0), ("z", "t"), o)
        tz = TS.monomial((1, 1), ("z", "t"), o)
        inner = z * (1 - tz).inverse()
        got = S.series_compose(outer, inner)
        assert got == TS.from_terms({(2, 0): 1, (3, 1): 2, (4, 2): 3}, ("z", "t"), o)

    def test_identity(self):
        f = uni([3, 1, 4, 1, 5])
        assert S.series_compose(f, TS.monomial((1,), ("z",), (5,))) == f

    def test_constant_term_rejected(self):
        with pytest.raises(S.ValuationError):
            S.series_compose(uni([1, 1]), uni([1, 1]))

    def test_affine_from_composition_matches_enumeration(self):
        A = S.series_catalog("A", 12, 12)
        for n in range(1, 12):
            assert sum(A.formal(n, j) for j in range(12)) == sum(1 for _ in E.enumerate_class("affine_closed", n))


class TestLogExp:
    @given(st.lists(st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5)), min_size=6, max_size=6))
    def test_inverse_pair(self, cs):
        s = uni([0] + cs[1:])
        assert S.series_log_exp(S.series_log_exp(s, "log1p"), "exp") - 1 == s
        assert (s.exp() - 1).log1p() == s

    def test_exp_z(self):
        e = TS.monomial((1,), ("z",), (8,)).exp()
        assert [e[n] for n in range(8)] == [Fraction(1, math.factorial(n)) for n in range(8)]

    def test_valuation(self):
        with pytest.raises(S.ValuationError):
            uni([1, 1]).exp()
        with pytest.raises(S.ValuationError):
            uni([1, 1]).log1p()

    def test_log_of_disconnected_gives_connected(self):
        H = 9
        L = (S._hadamard_13(H, H) - 1).log1p()
        for h in (2, 4, 6):
            connected = sum(1 for _ in E.labelled_maps(h, {1, 3}, connected=True))
            assert sum(L[h, k] for k in range(H)) == connected


class TestHadamard:
    def test_exp_exp(self):
        e = uni([1] * 8, EXPONENTIAL)  # exp(z): every stored value is 1
        assert S.hadamard_exponential(e, e) == e

    def test_matchings(self):
        inv = S._involutions(9)
        assert inv.formal(4) == Fraction(1, 8) and inv[4] == 3

    def test_disco13_even_support(self):
        h = S._hadamard_13(12, 12)
        assert all(h[n, k] == 0 for n in range(1, 12, 2) for k in range(12))

    def test_disconnected_counts_match_brute_force(self):
        for H in (2, 4, 6):
            for d, deg in ((3, {1, 3}), (2, {2, 3})):
                assert S.disconnected_count(H, d) == sum(1 for _ in E.labelled_maps(H, deg))


class TestBorel:
    def test_factorials(self):
        s = uni([math.factorial(n) for n in range(8)])
        assert S.borel_transform(s).to_ordinary("z") == uni([1] * 8)

    def test_z(self):
        z = uni([0, 1, 0])
        assert S.borel_transform(z).to_ordinary("z") == z

    def test_lower_bound_equation(self):
        assert S.verify_formal_identity("borel_lower", 20).passed


class TestSolvers:
    def test_T_small(self):
        T = S.solve_T(6, 6)
        assert [T[2, k] for k in range(6)] == [1, 0, 0, 0, 0, 0]
        assert [T[3, k] for k in range(6)] == [0, 0, 1, 0, 0, 0]
        assert T[5, 0] == 5

    def test_T_u_degree_bounded(self):
        T = S.solve_T(20, 25)
        assert all(T[n, k] == 0 for n in range(20) for k in range(n + 1, 25))

    def test_T0_matches_oeis(self):
        ref = a062980(67)
        T0 = S.series_catalog("T0", 201)
        assert [T0[3 * n + 2] for n in range(67)] == ref

    def test_T_id(self):
        T = S.solve_T_id(12, 8)
        assert [T[2, k] for k in range(3)] == [0, 1, 0]
        assert [T[5, k] for k in range(4)] == [2, 2, 1, 0]
        assert sum(T[5, k] for k in range(8)) == 5
        assert [T[8, k] for k in range(5)] == [24, 24, 10, 2, 0]

    def test_T_sub(self):
        T = S.solve_T_sub(12, 6)
        assert T[2, 0] == 1
        assert [T[5, k] for k in range(4)] == [2, 2, 1, 0]
        assert T[8, 0] == sum(1 for _ in E.enumerate_class("bridgeless_closed", 8))

    def test_T_sub_at_one_is_T0(self):
        T = S.solve_T_sub(30, 30)
        assert all(sum(T[n, k] for k in range(30)) == S.coefficient("T", n, 0) for n in range(30))

    def test_b(self):
        b = S.solve_b(12)
        assert (b[1], b[2], b[3], b[4]) == (1, 0, 0, 2)

    def test_B_frozen(self):
        B = S.solve_B(30)
        assert [B[3 * i + 2] for i in range(10)] == B_FROZEN
        assert B_FROZEN[:6] == A267827

    def test_B_equals_Tsub_at_zero(self):
        assert S.verify_formal_identity("tsub_B", 20).passed

    def test_hadamard_T_matches_T(self):
        assert S.build_T_hadamard(31, 31) == S.solve_T(31, 31)

    def test_hadamard_initial_terms(self):
        H = S.build_T_hadamard(4, 4)
        assert H[1, 1] == 1 and H[2, 0] == 1

    def test_D_and_A(self):
        D, A = S.build_D_and_A(10, 10)
        assert A.formal(3, 1) == 2 and A.formal(2, 0) == 1
        assert all(A.formal(3, k) == (2 if k == 1 else 0) for k in range(10))

    def test_Q1(self):
        Q = S.build_Q1(10)
        assert (Q[3], Q[6], Q[9]) == (4, 34, S.coefficient("Q1", 9))

    def test_orders_validated(self):
        with pytest.raises(S.SeriesError):
            S.solve_S_sub(1, 1, 1)


IDENTITY_ORDERS = [("eq1", (40,)), ("tid", (40,)), ("diffvW", (20, 8)), ("kq_chain", (20, 8)),
                   ("bridgeless_decomp", (40,)), ("bridgeless_ogf1", (40,)), ("affine_agreement", (20,)),
                   ("affine_binom", (20,)), ("hadamard_T", (30,)), ("tsub_B", (20,)),
                   ("borel_lower", (20,)), ("s_sub", (14,))]


@pytest.mark.parametrize("name,orders", IDENTITY_ORDERS)
def test_formal_identity(name, orders):
    rep = S.verify_formal_identity(name, *orders)
    assert rep.passed, rep.to_dict()
    assert rep.residual is None


def test_identity_report_detects_corruption():
    T = S.series_catalog("T", 10, 10)
    bad = T + TS.monomial((7, 2), ("z", "u"), T.orders)
    rep = S._report("eq1", bad - T)
    assert not rep.passed and rep.residual[0] == (7, 2)


def test_unknown_identity():
    with pytest.raises(S.SeriesError):
        S.verify_formal_identity("nope", 4)


def test_affine_binom_notes_record_index_resolution():
    rep = S.verify_formal_identity("affine_binom", 16)
    assert any("i resolved as n" in n for n in rep.notes)


class TestCatalog:
    def test_aliases(self):
        assert S.series_catalog("Tsub", 8, 3) == S.series_catalog("T_sub", 8, 3)

    def test_unknown(self):
        with pytest.raises(S.SeriesError):
            S.series_catalog("W", 3)

    def test_truncation_reuse(self):
        big = S.series_catalog("T", 20, 20)
        assert S.series_catalog("T", 10, 5) == big.truncate([10, 5])

    def test_disk_cache_roundtrip(self, tmp_path, monkeypatch):
        monkeypatch.setenv(S.CACHE_ENV, str(tmp_path))
        S.clear_cache()
        a = S.series_catalog("T_sub", 15, 4)
        assert list(tmp_path.iterdir())
        S.clear_cache()
        b = S.series_catalog("T_sub", 15, 4)
        assert a == b
        S.clear_cache()

    def test_damaged_cache_is_rebuilt(self, tmp_path, monkeypatch):
        monkeypatch.setenv(S.CACHE_ENV, str(tmp_path))
        S.clear_cache()
        a = S.series_catalog("b", 12)
        for p in tmp_path.iterdir():
            p.write_text("{not json")
        S.clear_cache()
        assert S.series_catalog("b", 12) == a
        S.clear_cache()
