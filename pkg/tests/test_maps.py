import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linlam import enumerate as E
from linlam.bijections import term_to_map
from linlam.maps import (EMPTY_MAP, LOOP_MAP, ONE_EDGE_MAP, CombinatorialMap, MapError, bridges,
                         bridges_by_deletion, canonical_form, canonical_relabel, cycles, faces_and_genus,
                         inverse, map_statistics, relabel, rooting_convert, validate_map)
from linlam.terms import parse_term

from conftest import linear_terms


def test_one_edge_map_is_valid():
    rep = validate_map(ONE_EDGE_MAP)
    assert rep.valid and rep.connected
    assert rep.degree_histogram == ((1, 2),)


def test_loop_map_is_closed_rooted_trivalent():
    m = CombinatorialMap([0, 2, 3, 1], [1, 0, 3, 2], root=0)
    rep = validate_map(m)
    assert rep.valid and "open_rooted_trivalent" in rep.classes
    assert m == LOOP_MAP and m.external == ()


def test_edge_fixed_point_rejected():
    with pytest.raises(MapError):
        CombinatorialMap([0, 1], [0, 1])


def test_non_involution_rejected():
    with pytest.raises(MapError):
        CombinatorialMap([0, 1, 2, 3], [1, 2, 3, 0])


def test_cycles_and_inverse():
    p = [1, 2, 0, 4, 3]
    assert cycles(p) == [[0, 1, 2], [3, 4]]
    q = inverse(p)
    assert all(q[p[i]] == i for i in range(5))


def test_loop_map_genus():
    s = faces_and_genus(LOOP_MAP)
    assert (s.face_count, s.vertex_count, s.edge_count, s.genus) == (2, 2, 2, 0)


def test_one_edge_map_genus():
    s = faces_and_genus(ONE_EDGE_MAP)
    assert (s.face_count, s.vertex_count, s.edge_count, s.genus) == (1, 2, 1, 0)


@given(linear_terms(9, None))
def test_genus_is_nonnegative_integer(t):
    s = faces_and_genus(term_to_map(t))
    assert s.genus >= 0
    assert 2 - 2 * s.genus == s.vertex_count - s.edge_count + s.face_count


def test_loop_map_statistics():
    s = map_statistics(LOOP_MAP)
    assert (s.loops, s.internal_bridges) == (1, 0)


def test_internal_bridge_of_identity_applied():
    assert map_statistics(term_to_map(parse_term(r"\x.x (\y.y)"))).internal_bridges == 1


def test_one_edge_map_has_only_external_bridge():
    s = map_statistics(ONE_EDGE_MAP)
    assert (s.loops, s.internal_bridges) == (0, 0)
    assert len(bridges(ONE_EDGE_MAP)) == 1


@given(linear_terms(10, None))
def test_bridges_match_deletion_oracle(t):
    m = term_to_map(t)
    assert sorted(bridges(m)) == sorted(bridges_by_deletion(m))


def test_relabeled_loop_map_same_canonical_form():
    assert canonical_form(relabel(LOOP_MAP, [3, 2, 1, 0])) == canonical_form(LOOP_MAP)


@given(linear_terms(9, None), st.randoms(use_true_random=False))
def test_canonical_form_isomorphism_invariant(t, rnd):
    m = term_to_map(t)
    perm = list(range(m.half_edges))
    rnd.shuffle(perm)
    assert canonical_form(relabel(m, perm)) == canonical_form(m)


@given(linear_terms(9, None))
def test_canonical_relabel_idempotent(t):
    m = canonical_relabel(term_to_map(t))
    assert canonical_relabel(m) == m
    assert canonical_form(m) == canonical_form(term_to_map(t))


def test_distinct_closed_terms_give_distinct_maps():
    # stands in for the two prism-shaped maps: all closed maps up to 11 edges are pairwise distinct
    forms = [canonical_form(term_to_map(t)) for n in (5, 8, 11) for t in E.generate_terms(n, 0)]
    assert len(forms) == len(set(forms))


def test_json_roundtrip():
    m = term_to_map(parse_term(r"\x.\y.x (y z)"))
    assert CombinatorialMap.from_json(m.to_json()) == m


class TestRooting:
    def test_empty_map_goes_to_loop_map(self):
        out = rooting_convert(EMPTY_MAP, "half_edge_to_open")
        assert canonical_form(out) == canonical_form(LOOP_MAP)
        assert rooting_convert(LOOP_MAP, "open_to_half_edge") == EMPTY_MAP

    def test_roundtrip_all_rooted_13_maps_up_to_5_edges(self):
        for n in range(0, 6):
            seen = set()
            for h in E.enumerate_class("maps_13_rooted", n):
                seen.add(canonical_form(h))
                o = rooting_convert(h, "half_edge_to_open")
                assert o.edge_count == n + 2
                assert canonical_form(rooting_convert(o, "open_to_half_edge")) == canonical_form(h)
            assert len(seen) == E.count_class("maps_13_rooted", n)

    def test_image_is_every_rooted_13_map(self):
        # labelled brute force up to 3 edges is an independent oracle for the image
        for n in range(1, 4):
            brute = E.rooted_maps_brute_force(2 * n, {1, 3})
            image = {canonical_form(h) for h in E.enumerate_class("maps_13_rooted", n)}
            assert image == brute

    def test_one_edge_map_is_below_the_bound(self):
        with pytest.raises(MapError):
            rooting_convert(ONE_EDGE_MAP, "open_to_half_edge")

    def test_bad_direction(self):
        with pytest.raises(MapError):
            rooting_convert(LOOP_MAP, "sideways")
