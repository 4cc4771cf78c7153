"""Verification suites: each returns a SuiteResult listing its individual checks."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from . import enumerate as E
from . import maps as M
from . import series as S
from . import stats as ST
from . import symbolic as SY
from .bijections import (decompose_B1, factor_context, is_B1, is_in_Q, is_in_Q_by_map, map_to_term, psi,
                         slide, term_map_statistics, term_to_map)
from .terms import IDENTITY, Abs, Var, count_parameter


@dataclass
class SuiteResult:
    suite: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def add(self, name: str, ok: bool, detail=None):
        self.checks.append({"check": name, "passed": bool(ok), "detail": detail})
        return ok

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "seconds": round(self.seconds, 3),
                "checks": self.checks}


def a062980(count: int) -> list[int]:
    """Rooted trivalent maps: a(n) = (6n-2) a(n-1) + sum_{k<n} a(k) a(n-1-k)."""
    a = [1]
    for n in range(1, count):
        a.append((6 * n - 2) * a[-1] + sum(a[k] * a[n - 1 - k] for k in range(n)))
    return a[:count]


# first terms of OEIS A267827 (bridgeless rooted trivalent maps, closed bridgeless linear terms)
_A267827 = (1, 2, 20, 352, 8624, 266784)


def a267827(count: int) -> list[int]:
    return list(_A267827[:count])


def suite_counting(size_max: int = 30, exhaustive_max: int = 11) -> SuiteResult:
    r = SuiteResult("counting")
    want = {2: 1, 5: 5, 8: 60}
    got = {n: sum(1 for _ in E.enumerate_class("linear_closed", n)) for n in want}
    r.add("enumeration_2_5_8", got == want, got)
    enum_ok = all(sum(1 for _ in E.enumerate_class("linear_closed", n)) == E.linear_count(n, 0)
                  for n in range(exhaustive_max + 1))
    r.add("memo_counter_matches_enumeration", enum_ok)
    T = S.solve_T(size_max + 1, size_max + 2)
    H = S.build_T_hadamard(size_max + 1, size_max + 2)
    dp_ok = all(T[n, k] == E.linear_count(n, k) for n in range(size_max + 1) for k in range(size_max + 2))
    r.add("eq1_series_matches_memo_counter", dp_ok, f"n <= {size_max}, all u-powers")
    r.add("hadamard_matches_eq1_series", (H - T).is_zero(), f"n <= {size_max}")
    ref = a062980(size_max // 3 + 1)
    oeis_ok = all(T[3 * n + 2, 0] == ref[n] for n in range(len(ref)) if 3 * n + 2 <= size_max)
    r.add("oeis_A062980", oeis_ok)
    return r


def suite_bridgeless(exhaustive_max: int = 11, series_max: int = 20) -> SuiteResult:
    r = SuiteResult("bridgeless")
    b = S.solve_b(max(series_max, exhaustive_max) + 1)
    r.add("initial_values", (b[1], b[2], b[3]) == (1, 0, 0), [b[1], b[2], b[3]])
    ok = True
    for n in range(1, exhaustive_max + 1):
        got = sum(1 for t in E.generate_terms(n, 1) if is_B1(t))
        ok &= got == b[n]
    r.add("b_matches_enumerated_B1", ok, f"n <= {exhaustive_max}")
    ok = all(sum(1 for _ in E.enumerate_class("bridgeless_closed", n)) == S.coefficient("B", n)
             for n in range(exhaustive_max + 1))
    r.add("B_matches_enumerated_bridgeless_closed", ok)
    ref = a267827(6)
    r.add("oeis_A267827", [S.coefficient("B", 3 * i + 2) for i in range(len(ref))] == ref, ref)
    Ts = S.solve_T_sub(series_max + 1, 1).evaluate("v", 0)
    B = S.solve_B(series_max + 1)
    r.add("B_equals_Tsub_at_v0", (Ts - B).is_zero(), f"n <= {series_max}")
    return r


def suite_bijections(size_max: int = 11, context_max: int = 9, workers: int = 1) -> SuiteResult:
    r = SuiteResult("bijections")
    tau = rooting = loops = bridges = True
    for n in range(1, size_max + 1):
        for t in E.enumerate_class("linear_open", n, workers=workers):
            m = term_to_map(t)
            tau &= map_to_term(m) == t
            if not isinstance(t, Var):
                h = M.rooting_convert(m, "open_to_half_edge")
                back = M.rooting_convert(h, "half_edge_to_open")
                rooting &= M.canonical_form(back) == M.canonical_form(m)
            st = term_map_statistics(t)
            loops &= st.loops == count_parameter(t, "identity_subterms")
            if not m.external:  # the bridge correspondence is stated for closed terms
                bridges &= st.internal_bridges == count_parameter(t, "closed_proper_subterms")
    r.add("tau_roundtrip", tau, f"all linear terms, n <= {size_max}")
    r.add("rooting_roundtrip", rooting)
    r.add("loops_are_identity_subterms", loops)
    r.add("internal_bridges_are_closed_proper_subterms", bridges, "closed terms")
    sl = card = True
    for n in range(2, size_max + 1):
        bl = list(E.enumerate_class("bridgeless_closed", n, workers=workers))
        ob = set(E.enumerate_class("one_bridge", n, workers=workers))
        image = set()
        for t in bl:
            if t == IDENTITY:
                continue
            s = slide(t, "forward")
            sl &= slide(s, "backward") == t
            image.add(s)
        sl &= image == ob
        card &= len([t for t in bl if t != IDENTITY]) == len(ob)
    r.add("slide_roundtrip", sl)
    r.add("bridgeless_minus_identity_equals_one_bridge", card, f"enumerated n <= {size_max}")
    B, Ts = S.series_catalog("B", 121), S.series_catalog("Tsub", 121, 2)
    card_series = all(B[n] - (n == 2) == Ts[n, 1] for n in range(2, 121))
    r.add("cardinality_identity_series", card_series, "n <= 120")
    ps = True
    for n in range(2, size_max + 1):
        for t in E.enumerate_class("linear_closed", n, workers=workers):
            if isinstance(t, Abs) and t != IDENTITY:
                ps &= psi(psi(t, "decompose"), "rebuild") == t
    r.add("psi_roundtrip", ps)
    kf = qmap = True
    for n in range(1, context_max + 1):
        for c in E.enumerate_class("contexts_K", n, workers=workers):
            f = factor_context(c, "factor")
            kf &= factor_context(f, "multiply") == c and all(is_in_Q(q) for q in f)
            qmap &= is_in_Q(c) == is_in_Q_by_map(c)
    r.add("K_factorization_roundtrip", kf, f"contexts of size <= {context_max}")
    r.add("Q_membership_term_vs_map", qmap)
    b1 = True
    for n in range(1, size_max + 1):
        for t in E.enumerate_class("bridgeless_open1", n, workers=workers):
            b1 &= decompose_B1(decompose_B1(t, "decompose"), "rebuild") == t
    r.add("B1_decomposition_roundtrip", b1)
    return r


IDENTITY_ORDERS = {
    "eq1": (40,), "tid": (40,), "diffvW": (20, 8), "kq_chain": (20, 8), "bridgeless_decomp": (40,),
    "bridgeless_ogf1": (40,), "affine_agreement": (20,), "affine_binom": (20,), "hadamard_T": (30,),
    "tsub_B": (20,), "borel_lower": (20,), "s_sub": (14,),
}


def suite_identities() -> SuiteResult:
    r = SuiteResult("identities")
    for name, orders in IDENTITY_ORDERS.items():
        rep = S.verify_formal_identity(name, *orders)
        r.add(name, rep.passed, {"orders": list(rep.orders),
                                 "residual": None if rep.residual is None else str(rep.residual),
                                 "notes": rep.notes})
    return r


def _trend_checks(r: SuiteResult, rep: ST.TrendReport):
    for c in rep.checks:
        r.add(f"{rep.target}:{c['check']}", c["passed"], c["detail"])
    r.checks.append({"check": f"{rep.target}:terminal", "passed": True, "detail": rep.terminal})


def suite_poisson() -> SuiteResult:
    r = SuiteResult("poisson")
    for t in ("identity_poisson", "bridges_poisson"):
        _trend_checks(r, ST.schema_conclusion_check(t))
    return r


def suite_gaussian() -> SuiteResult:
    r = SuiteResult("gaussian")
    for t in ("freevars_gaussian", "unused_gaussian"):
        _trend_checks(r, ST.schema_conclusion_check(t))
    return r


def suite_growth() -> SuiteResult:
    r = SuiteResult("growth")
    for t in ("growth_constant", "bridgeless_fraction"):
        _trend_checks(r, ST.schema_conclusion_check(t))
    return r


def suite_symbolic() -> SuiteResult:
    r = SuiteResult("symbolic")
    w1 = SY.compute_WN(1)
    r.add("W1_closed_form", w1.numerator == SY.H1 and w1.k == 1, str(w1.numerator))
    b = SY.balanced_part(SY.H1, 1)
    r.add("B1_of_h1", b == SY._P((-1, 1, 2, 0), (1, 2, 0, 0)), str(b))
    inv = SY.check_induction_invariants(5)
    r.add("induction_invariants_N_le_5", inv.passed, inv.violations or None)
    adm = all(SY.is_k_admissible(SY.compute_WN(N).numerator, 2 * N - 1) for N in range(1, 6))
    r.add("h_N_admissible_N_le_5", adm)
    for N in (1, 2, 3):
        ok, first = SY.substitution_check(N, 14)
        r.add(f"substitution_W{N}", ok, None if ok else str(first))
    return r


def suite_saddle() -> SuiteResult:
    r = SuiteResult("saddle")
    # odd coefficients of exp(z^2/2) vanish, so its comparison starts at the even n = 26
    for f, a, b in (("involutions", 26, 100), ("exp_cubic", 25, 100)):
        ea, eb = ST.relative_error(f, a), ST.relative_error(f, b)
        r.add(f"{f}_relative_error_decreases", eb < ea, {f"n={a}": ea, f"n={b}": eb})
    return r


def _fingerprint(res: SuiteResult) -> str:
    return json.dumps(res.checks, sort_keys=True, default=str)


def suite_determinism(workers: int = 2) -> SuiteResult:
    r = SuiteResult("determinism")
    same = True
    for c in ("linear_closed", "linear_open", "affine_closed", "contexts_K"):
        n = 9 if c == "contexts_K" else 11
        a = [str(t) for t in E.enumerate_class(c, n, workers=1)]
        b = [str(t) for t in E.enumerate_class(c, n, workers=workers)]
        same &= a == b
    r.add("enumeration_independent_of_workers", same, f"workers=1 vs {workers}")
    b1 = _fingerprint(suite_bijections(size_max=8, context_max=7, workers=1))
    b2 = _fingerprint(suite_bijections(size_max=8, context_max=7, workers=workers))
    r.add("bijection_suite_independent_of_workers", b1 == b2)
    c1 = _fingerprint(suite_counting())
    S.clear_cache()
    c2 = _fingerprint(suite_counting())
    r.add("counting_suite_rerun_identical", c1 == c2)
    S.clear_cache()
    s1 = S.series_catalog("T_sub", 30, 6).coeffs.tolist()
    S.clear_cache()
    s2 = S.series_catalog("T_sub", 30, 6).coeffs.tolist()
    r.add("series_rebuild_identical", s1 == s2)
    return r


SUITES = {
    "counting": suite_counting,
    "bridgeless": suite_bridgeless,
    "bijections": suite_bijections,
    "identities": suite_identities,
    "poisson": suite_poisson,
    "gaussian": suite_gaussian,
    "growth": suite_growth,
    "symbolic": suite_symbolic,
    "saddle": suite_saddle,
    "determinism": suite_determinism,
}


def run_suite(name: str, **kwargs) -> SuiteResult:
    fn = SUITES[name]
    t0 = time.perf_counter()
    res = fn(**kwargs)
    res.seconds = time.perf_counter() - t0
    return res
