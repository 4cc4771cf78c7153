"""Sparse integer polynomials in f, z, v and the W_N derivative iteration.

W_N = h_N / g^(2N-1) represents the N-th v-derivative of T_sub, read as a
rational function of f = T_sub, z and v, with
g = f^2 v^3 z - f^2 v^2 z + v z^2 - f v + f.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache

from .series import TruncatedSeries

DEFAULT_WN_BOUND = 6


class PolyFZV:
    """Polynomial in Z[f, z, v]; monomials keyed by (f-degree, z-degree, v-degree)."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        clean = {}
        for exps, c in (terms or {}).items():
            if len(exps) != 3 or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent {exps}")
            if c:
                clean[tuple(exps)] = int(c)
        self.terms = clean

    @classmethod
    def monomial(cls, i: int = 0, l: int = 0, j: int = 0, c: int = 1) -> "PolyFZV":
        return cls({(i, l, j): c})

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = PolyFZV({(0, 0, 0): other})
        return isinstance(other, PolyFZV) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PolyFZV") -> "PolyFZV":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return PolyFZV(out)

    def __neg__(self) -> "PolyFZV":
        return PolyFZV({e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "PolyFZV") -> "PolyFZV":
        return self + (-other)

    def scale(self, k: int) -> "PolyFZV":
        return PolyFZV({e: k * c for e, c in self.terms.items()})

    def __mul__(self, other) -> "PolyFZV":
        if isinstance(other, int):
            return self.scale(other)
        out: dict = {}
        for (a1, b1, c1), x in self.terms.items():
            for (a2, b2, c2), y in other.terms.items():
                e = (a1 + a2, b1 + b2, c1 + c2)
                out[e] = out.get(e, 0) + x * y
        return PolyFZV(out)

    __rmul__ = __mul__

    def d_f(self) -> "PolyFZV":
        return PolyFZV({(i - 1, l, j): i * c for (i, l, j), c in self.terms.items() if i})

    def d_v(self) -> "PolyFZV":
        return PolyFZV({(i, l, j - 1): j * c for (i, l, j), c in self.terms.items() if j})

    def d_z(self) -> "PolyFZV":
        return PolyFZV({(i, l - 1, j): l * c for (i, l, j), c in self.terms.items() if l})

    def degree(self, var: str) -> int:
        pos = "fzv".index(var)
        return max((e[pos] for e in self.terms), default=-1)

    def sorted_terms(self) -> list[tuple[tuple, int]]:
        """Graded lex order with f > v > z, largest first."""
        return sorted(self.terms.items(),
                      key=lambda t: (-(t[0][0] + t[0][1] + t[0][2]), -t[0][0], -t[0][2], -t[0][1]))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (i, l, j), c in self.sorted_terms():
            mono = "*".join(s for s in (_pw("f", i), _pw("v", j), _pw("z", l)) if s)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__

    def to_json(self) -> list:
        return [[i, l, j, str(c)] for (i, l, j), c in self.sorted_terms()]


def _pw(x: str, e: int) -> str:
    return "" if e == 0 else x if e == 1 else f"{x}^{e}"


def poly_arith(a: PolyFZV, b: PolyFZV | None, op: str) -> PolyFZV:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "d_f":
        return a.d_f()
    if op == "d_v":
        return a.d_v()
    raise ValueError(f"unknown operation {op!r}")


def _P(*terms) -> PolyFZV:
    """_P((c, i, l, j), ...) with exponents of f, z, v."""
    out = PolyFZV()
    for c, i, l, j in terms:
        out = out + PolyFZV.monomial(i, l, j, c)
    return out


G = _P((1, 2, 1, 3), (-1, 2, 1, 2), (1, 0, 2, 1), (-1, 1, 0, 1), (1, 1, 0, 0))
H1 = _P((-1, 3, 1, 2), (-1, 1, 2, 0), (1, 2, 0, 0))


@dataclass(frozen=True)
class RatWN:
    N: int
    numerator: PolyFZV
    k: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "k", 2 * self.N - 1)

    @property
    def denominator(self) -> PolyFZV:
        return G


@lru_cache(maxsize=None)
def _h(N: int) -> PolyFZV:
    if N == 1:
        return H1
    h = _h(N - 1)
    k = 2 * (N - 1) - 1
    dg_f, dg_v = G.d_f(), G.d_v()
    return (h.d_f() * G * H1 - (h * dg_f * H1).scale(k)
            + h.d_v() * G * G - (h * dg_v * G).scale(k))


def compute_WN(N: int, bound: int = DEFAULT_WN_BOUND) -> RatWN:
    if N < 1:
        raise ValueError("N must be positive")
    if N > bound:
        raise ValueError(f"N={N} exceeds the configured bound {bound}")
    return RatWN(N, _h(N))


def balanced_part(h: PolyFZV, k: int) -> PolyFZV:
    """Monomials v^j f^i z^(2k-2(i-1)) with i <= k+1."""
    if k < -1:
        raise ValueError("k must be >= -1")
    return PolyFZV({(i, l, j): c for (i, l, j), c in h.terms.items()
                    if i <= k + 1 and l == 2 * k - 2 * (i - 1)})


def is_k_admissible(h: PolyFZV, k: int) -> bool:
    return all(l >= max(0, 2 * k - 2 * (i - 1)) for (i, l, j) in h.terms)


def balanced_coefficients(h: PolyFZV, k: int) -> dict:
    """alpha[j][i]: coefficient of v^j f^i in the balanced part."""
    out: dict = {}
    for (i, l, j), c in balanced_part(h, k).terms.items():
        out.setdefault(j, {})[i] = c
    return out


@dataclass
class InvariantReport:
    N_max: int
    passed: bool
    rows: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"N_max": self.N_max, "passed": self.passed, "rows": self.rows,
                "violations": self.violations}


def check_induction_invariants(N_max: int, bound: int = DEFAULT_WN_BOUND) -> InvariantReport:
    """Sum rules on the balanced coefficients of h_N at exponent 2N-1.

    For j = 0: sum i*alpha = 1 and sum alpha = 0; for j >= 1 both sums vanish.
    """
    rep = InvariantReport(N_max, True)
    for N in range(1, N_max + 1):
        w = compute_WN(N, bound)
        alpha = balanced_coefficients(w.numerator, w.k)
        admissible = is_k_admissible(w.numerator, w.k)
        js = sorted(set(alpha) | {0})
        for j in js:
            row = alpha.get(j, {})
            s1 = sum(i * c for i, c in row.items())
            s0 = sum(row.values())
            want1 = 1 if j == 0 else 0
            rep.rows.append({"N": N, "j": j, "sum_i_alpha": s1, "sum_alpha": s0})
            if s1 != want1 or s0 != 0:
                rep.passed = False
                rep.violations.append({"N": N, "j": j, "sum_i_alpha": s1, "sum_alpha": s0})
        if not admissible:
            rep.passed = False
            rep.violations.append({"N": N, "admissible": False})
    return rep


# ---------------------------------------------------------------- substitution

def substitute(h: PolyFZV, f: TruncatedSeries) -> TruncatedSeries:
    """h(f, z, v) with f a series in (z, v)."""
    if f.variables != ("z", "v"):
        raise ValueError("f must be a series in (z, v)")
    o = f.orders
    powers = [TruncatedSeries.constant(1, ("z", "v"), o)]
    for _ in range(h.degree("f")):
        powers.append(powers[-1] * f)
    by_f: dict = {}
    for (i, l, j), c in h.terms.items():
        by_f.setdefault(i, {})[(l, j)] = c
    out = TruncatedSeries.from_terms({}, ("z", "v"), o)
    for i, mons in by_f.items():
        coeff = TruncatedSeries.from_terms(mons, ("z", "v"), o)
        out = out + coeff * powers[i]
    return out


def substitution_check(N: int, order_z: int = 14, order_v: int = 6) -> tuple[bool, object]:
    """Compare W_N at f = T_sub with the N-th v-derivative of T_sub.

    Returns (ok, first differing monomial or None).
    """
    from .series import series_catalog
    w = compute_WN(N)
    k = w.k
    Z = order_z + 2 * k
    Ts = series_catalog("T_sub", Z, order_v + N + 1)
    hs = substitute(w.numerator, Ts).shift("z", -2 * k)
    gt = substitute(G, Ts).shift("z", -2)
    Wn = (hs * gt.inverse() ** k).truncate([order_z, order_v])
    d = Ts
    for _ in range(N):
        d = d.derive("v")
    diff = Wn - d.truncate([order_z, order_v])
    first = diff.first_nonzero()
    return first is None, first


def random_poly(rng: random.Random, terms: int = 5, deg: int = 4, coeff: int = 5) -> PolyFZV:
    out = {}
    for _ in range(terms):
        e = (rng.randint(0, deg), rng.randint(0, 2 * deg), rng.randint(0, deg))
        out[e] = out.get(e, 0) + rng.randint(-coeff, coeff)
    return PolyFZV(out)


def random_admissible(rng: random.Random, k: int, terms: int = 5, deg: int = 4) -> PolyFZV:
    out = {}
    for _ in range(terms):
        i = rng.randint(0, deg)
        low = max(0, 2 * k - 2 * (i - 1))
        e = (i, low + rng.randint(0, 2), rng.randint(0, deg))
        out[e] = out.get(e, 0) + rng.randint(-5, 5)
    return PolyFZV(out)
