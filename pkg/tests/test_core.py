import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarse_ends import (
    ScaleLadder,
    archimedean_check,
    bornologous_modulus,
    build_instance,
    chain_components,
    homotopy_distance,
    is_coarsely_connected,
    is_controlled_relation,
    properness_report,
    subset_diameter,
)
from coarse_ends.core import constant_map, distance, identity_map, map_from_function, map_from_ids
from coarse_ends.errors import InstanceError, MapError

from conftest import make


def test_line_instance_has_201_points(line):
    assert len(line) == 201
    assert line.dropped == 0


def test_squares_truncated_at_rho(squares):
    assert len(squares) == 101
    assert squares.ids[-1] == 100 ** 2


def test_truncation_reports_dropped_points():
    raw = {k: (float(k),) for k in range(-10, 11)}
    inst = build_instance(raw, "euclidean", 0, 4.0)
    assert len(inst) == 9 and inst.dropped == 12


def test_disconnected_graph_distance_is_infinite(two_component_graph):
    g = two_component_graph
    assert distance(g, 0, 2) == 3.5
    assert math.isinf(distance(g, 0, 11))
    assert not is_coarsely_connected(g)


@pytest.mark.parametrize("raw, metric, base", [
    ({}, "euclidean", 0),
    ({1: (0.0,)}, "euclidean", 0),
    ({"edges": [(0, 1, -1.0)]}, "graph", 0),
])
def test_bad_input_rejected(raw, metric, base):
    with pytest.raises(InstanceError):
        build_instance(raw, metric, base, 10.0)


def test_distances(line, squares):
    assert distance(line, -3, 5) == 8
    assert distance(squares, 81, 100) == 19
    with pytest.raises(InstanceError):
        distance(line, 0, 1000)


def test_subset_diameter(line, two_component_graph):
    assert subset_diameter(line, [0]) == 0
    assert subset_diameter(line, range(-10, 11)) == 20
    assert math.isinf(subset_diameter(two_component_graph, [0, 1, 10]))
    with pytest.raises(InstanceError):
        subset_diameter(line, [])


def test_controlled_relation(line, squares):
    assert is_controlled_relation(line, [(n, n + 1) for n in range(-100, 100)]) == 1
    # the pair (100**2, 101**2) needs rho_max >= 101**2; inside 10**4 the largest gap is 199
    assert is_controlled_relation(squares, [(n * n, (n + 1) ** 2) for n in range(100)]) == 199
    wider = make("squares", rho=101 ** 2)
    assert is_controlled_relation(wider, [(n * n, (n + 1) ** 2) for n in range(101)]) == 201
    assert is_controlled_relation(line, []) == 0


def test_clouds_and_connected_graphs_are_coarsely_connected(line):
    assert is_coarsely_connected(line)
    assert is_coarsely_connected(make("book", pages=3, height=10))


def test_archimedean(line, squares):
    res = archimedean_check(line, 1)
    assert res.connected and res.max_hops == 200
    assert not archimedean_check(squares, 100).connected
    res = archimedean_check(line, 200)
    assert res.connected and res.max_hops == 1


def test_modulus_identity_and_constant(line):
    ladder = ScaleLadder((0, 10), (1, 2, 4, 8))
    assert bornologous_modulus(identity_map(line), ladder).S_values == (1, 2, 4, 8)
    assert bornologous_modulus(constant_map(line, line), ladder).S_values == (0, 0, 0, 0)


def test_rounding_map_modulus_at_most_R_plus_one():
    fine = build_instance({k: (k / 10,) for k in range(-1000, 1001)}, "euclidean", 0, 100.0)
    ints = make("line", N=100)
    f = map_from_function(fine, ints, np.round)
    mod = bornologous_modulus(f, ScaleLadder((0,), (0.5, 1, 3, 7)))
    assert all(S <= R + 1 for R, S in zip(mod.R_values, mod.S_values))


def test_properness(line, squares):
    ladder = ScaleLadder((0, 10, 20, 40), (1,))
    assert properness_report(identity_map(line), ladder).preimage_radius == (0, 10, 20, 40)
    const = properness_report(constant_map(line, line), ladder)
    assert const.preimage_radius == (100,) * 4 and not const.proper
    inc = properness_report(map_from_ids(squares, make("line", N=10_000), lambda p: p),
                            ScaleLadder((0, 10, 500, 5000), (1,)))
    assert all(v <= r for v, r in zip(inc.preimage_radius, (0, 10, 500, 5000)))


def test_homotopy_distance(line):
    ident = identity_map(line)
    shift = map_from_ids(line, line, lambda p: min(p + 3, 100))
    assert homotopy_distance(ident, ident) == 0
    assert homotopy_distance(ident, shift) == 3
    wide = make("line", N=200)
    doubling = map_from_function(line, wide, lambda x: 2 * x)
    inclusion = map_from_ids(line, wide, lambda p: p)
    assert homotopy_distance(inclusion, doubling) == 100


def test_mismatched_maps_rejected(line, squares):
    with pytest.raises(MapError):
        homotopy_distance(identity_map(line), identity_map(squares))


clouds = st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=3, max_size=40)


@settings(max_examples=60, deadline=None)
@given(clouds, st.sampled_from(["euclidean", "chebyshev"]))
def test_metric_axioms(pts, metric):
    inst = build_instance(dict(enumerate(pts)), metric, 0, 1e6)
    n = len(inst)
    D = np.array([[distance(inst, inst.ids[i], inst.ids[j]) for j in range(n)] for i in range(n)])
    assert np.allclose(D, D.T) and np.all(np.diag(D) == 0)
    for i in range(n):
        assert np.all(D[i][:, None] <= D[i][None, :] + D + 1e-9)


@settings(max_examples=40, deadline=None)
@given(clouds, st.lists(st.floats(0.1, 30), min_size=1, max_size=5, unique=True))
def test_modulus_monotone(pts, scales):
    inst = build_instance(dict(enumerate(pts)), "euclidean", 0, 1e6)
    f = map_from_function(inst, inst, lambda x: np.round(x / 7) * 7)
    S = bornologous_modulus(f, ScaleLadder((0,), tuple(sorted(scales)))).S_values
    assert all(a <= b for a, b in zip(S, S[1:]))


@settings(max_examples=40, deadline=None)
@given(clouds, st.data())
def test_diameter_monotone_under_inclusion(pts, data):
    inst = build_instance(dict(enumerate(pts)), "euclidean", 0, 1e6)
    big = data.draw(st.lists(st.sampled_from(inst.ids), min_size=1, unique=True))
    small = data.draw(st.lists(st.sampled_from(big), min_size=1, unique=True))
    assert subset_diameter(inst, small) <= subset_diameter(inst, big)
    brute = max(np.linalg.norm(inst.coords[inst.index(a)] - inst.coords[inst.index(b)]) for a in big for b in big)
    assert subset_diameter(inst, big) == pytest.approx(brute, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(clouds, st.floats(0.5, 40))
def test_archimedean_implies_one_component(pts, R):
    inst = build_instance(dict(enumerate(pts)), "euclidean", 0, 1e6)
    if archimedean_check(inst, R).connected:
        assert chain_components(inst, 0.0, R).count == 1


def test_homotopy_self_distance_zero(line):
    f = map_from_function(line, line, lambda x: -x)
    assert homotopy_distance(f, f) == 0
