from functools import lru_cache

from hypothesis import settings
from hypothesis import strategies as st

from linlam import enumerate as E
from linlam.terms import Abs, App, Var

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def raw_terms(max_depth: int = 5, free: int = 2):
    """Arbitrary de Bruijn terms (not necessarily linear) with up to ``free`` free labels."""

    def go(depth: int, binders: int):
        var = st.integers(0, binders + free - 1).map(Var) if binders + free else st.nothing()
        if depth == 0:
            return var
        sub = st.deferred(lambda: go(depth - 1, binders))
        under = st.deferred(lambda: go(depth - 1, binders + 1))
        return st.one_of(var, st.tuples(sub, sub).map(lambda p: App(*p)), under.map(Abs))

    return go(max_depth, 0)


@lru_cache(maxsize=None)
def linear_terms_upto(n: int, k: int | None = 0) -> tuple:
    out = []
    for m in range(1, n + 1):
        if k is None:
            out += E.enumerate_class("linear_open", m)
        else:
            out += E.generate_terms(m, k)
    return tuple(out)


def linear_terms(n: int = 9, k: int | None = 0):
    return st.sampled_from(linear_terms_upto(n, k))
