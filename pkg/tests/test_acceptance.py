"""The ten acceptance criteria, each backed by one or more verification suites.

Every criterion prints a single ``criterion N: PASS|FAIL`` line.
"""

import json
import os
import subprocess
import sys

import pytest

from linlam import verification as V
from linlam.cli import _jsonable

_RESULTS: dict = {}


def suite(name):
    if name not in _RESULTS:
        _RESULTS[name] = V.run_suite(name)
    return _RESULTS[name]


def failures(res):
    return [c["check"] for c in res.checks if not c["passed"]]


def check(capsys, n, ok, detail=""):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}{' ' + detail if detail else ''}")
    assert ok, detail


def detail(res, key):
    return next(c["detail"] for c in res.checks if c["check"] == key)


def test_criterion_1_counting(capsys):
    r = suite("counting")
    assert {c["check"] for c in r.checks} >= {"enumeration_2_5_8", "memo_counter_matches_enumeration",
                                             "eq1_series_matches_memo_counter", "hadamard_matches_eq1_series",
                                             "oeis_A062980"}
    assert detail(r, "enumeration_2_5_8") == {2: 1, 5: 5, 8: 60}
    check(capsys, 1, r.passed, str(failures(r) or ""))


def test_criterion_2_bridgeless(capsys):
    r = suite("bridgeless")
    assert detail(r, "initial_values") == [1, 0, 0]
    check(capsys, 2, r.passed and len(r.checks) == 5, str(failures(r) or ""))


def test_criterion_3_bijections(capsys):
    r = suite("bijections")
    assert len(r.checks) == 11
    check(capsys, 3, r.passed and r.seconds < 600, f"{r.seconds:.1f}s {failures(r) or ''}")


def test_criterion_4_identities(capsys):
    r = suite("identities")
    names = {c["check"] for c in r.checks}
    assert names >= {"eq1", "tid", "diffvW", "kq_chain", "bridgeless_decomp", "bridgeless_ogf1",
                     "affine_agreement", "affine_binom"}
    orders_ok = all(c["detail"]["orders"][0] >= (14 if len(c["detail"]["orders"]) > 2 else 20)
                    for c in r.checks)
    check(capsys, 4, r.passed and orders_ok, str(failures(r) or ""))


def test_criterion_5_poisson(capsys):
    r = suite("poisson")
    terms = {c["check"]: c["detail"] for c in r.checks if c["check"].endswith(":terminal")}
    assert set(terms) == {"identity_poisson:terminal", "bridges_poisson:terminal"}
    check(capsys, 5, r.passed, json.dumps(_jsonable(terms), sort_keys=True))


def test_criterion_6_gaussian(capsys):
    r = suite("gaussian")
    terms = {c["check"]: c["detail"] for c in r.checks if c["check"].endswith(":terminal")}
    assert all(t["n"] == 200 for t in terms.values())
    assert any(c["check"] == "unused_gaussian:mean_dominates_lower_bound" for c in r.checks)
    check(capsys, 6, r.passed, json.dumps(_jsonable(terms), sort_keys=True))


def test_criterion_7_growth(capsys):
    r = suite("growth")
    g = detail(r, "growth_constant:terminal")
    b = detail(r, "bridgeless_fraction:terminal")
    assert g["n"] == 40
    ok = r.passed and g["gap"] < 0.02 and b["gap"] < 0.05
    check(capsys, 7, ok, f"growth gap {g['gap']:.5f}, bridgeless gap {b['gap']:.5f}")


def test_criterion_8_symbolic(capsys):
    r = suite("symbolic")
    assert len(r.checks) == 7
    check(capsys, 8, r.passed, str(failures(r) or ""))


def test_criterion_9_saddle(capsys):
    r = suite("saddle")
    check(capsys, 9, r.passed, json.dumps(_jsonable([c["detail"] for c in r.checks])))


def test_criterion_10_determinism_and_budget(capsys):
    results = [suite(name) for name in V.SUITES]
    total = sum(r.seconds for r in results)
    env = {k: v for k, v in os.environ.items() if k != "LINLAM_CACHE_DIR"}
    proc = subprocess.run([sys.executable, "-m", "linlam.cli", "verify", "--suite", "all", "--workers", "2",
                           "--format", "json"], capture_output=True, text=True, env=env, timeout=1800)
    assert proc.returncode == 0, proc.stderr
    here = []
    for r in results:
        d = _jsonable(r.to_dict())
        d.pop("seconds")
        here.append(d)
    there = json.loads(proc.stdout)["results"]
    same = json.dumps(here, sort_keys=True) == json.dumps(there, sort_keys=True)
    ok = same and total < 1800 and all(r.passed for r in results)
    check(capsys, 10, ok, f"in-process {total:.0f}s, rerun identical={same}")
