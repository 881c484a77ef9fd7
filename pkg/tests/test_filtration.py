import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarse_ends import (
    ScaleLadder,
    StabilityReport,
    build_end_system,
    build_instance,
    chain_components,
    induced_end_map,
    stable_end_count,
    threads,
)
from coarse_ends.core import identity_map, map_from_function, map_from_ids
from coarse_ends.errors import InstanceError
from coarse_ends.filtration import compose_induced, maps_agree
from coarse_ends.oracle import chain_labels, dense_distances
from coarse_ends.spaces import load_report, save_report
from coarse_ends.suite import random_instance, random_ladder

from conftest import default_ladder, make


def test_line_splits_into_two_rays(line):
    assert chain_components(line, 10, 1).count == 2


@pytest.mark.parametrize("name, expected", [("flared_vase", 2), ("vase", 1)])
def test_vase_arms(name, expected):
    inst = make(name, height=100)
    part = chain_components(inst, 10, 3)
    assert part.count == expected
    assert np.array_equal(part.labels, chain_labels(inst, 10, 3))


def test_squares_far_out_are_singletons(squares):
    part = chain_components(squares, 5000, 100)
    far = [n * n for n in range(101) if n * n >= 5000]
    assert part.count == len(far) == 30
    assert all(len(members) == 1 for members in part.components().values())


def test_labels_are_minimum_ids(line):
    comps = chain_components(line, 10, 1).as_dict()
    assert comps[50] == 10 and comps[-50] == -100


def test_nonpositive_scale_rejected(line):
    with pytest.raises(InstanceError):
        chain_components(line, 0, 0)


def test_empty_annulus_gives_empty_partition(line):
    assert chain_components(line, 150, 1).count == 0


def test_line_end_system_counts(line):
    system = build_end_system(line, ScaleLadder((0, 10, 20, 40), (1, 2, 4)))
    counts = system.counts()
    assert counts.shape == (4, 3)
    assert counts[0].tolist() == [1, 1, 1]
    assert (counts[1:] == 2).all()


def test_grid_end_system_counts():
    grid = make("grid2d", N=50)
    counts = build_end_system(grid, ScaleLadder((0, 10, 20, 40), (1, 2, 4))).counts()
    assert (counts == 1).all()


def test_ladder_must_stay_inside_truncation(line):
    with pytest.raises(InstanceError):
        ScaleLadder((0, 100), (1,)).check(line)


def test_thread_counts(line):
    assert len(threads(build_end_system(line, default_ladder(line)), 0)) == 2
    fv = make("flared_vase", height=100)
    assert len(threads(build_end_system(fv, ScaleLadder((0, 10, 20, 40), (1, 3))), 1)) == 2
    book = make("book", pages=5, height=100)
    assert len(threads(build_end_system(book, default_ladder(book)), 0)) == 5


@pytest.mark.parametrize("recipe, label", [
    (("line", {"N": 100}), "Stabilized(2)"),
    (("grid2d", {"N": 30}), "Stabilized(1)"),
    (("squares", {"rho": 10_000}), "Sparse"),
])
def test_stability(recipe, label):
    inst = make(recipe[0], **recipe[1])
    assert str(stable_end_count(build_end_system(inst, default_ladder(inst)))) == label


def test_window_larger_than_ladder_rejected(line):
    system = build_end_system(line, ScaleLadder((0, 10), (1, 2)))
    with pytest.raises(InstanceError):
        stable_end_count(system, 3)


def test_parallel_build_matches_serial(line):
    ladder = default_ladder(line)
    assert np.array_equal(build_end_system(line, ladder).labels, build_end_system(line, ladder, jobs=3).labels)


def test_identity_induces_identity(line):
    system = build_end_system(line, default_ladder(line))
    induced = induced_end_map(identity_map(line), system, system)
    for (i, j), cm in induced.cells.items():
        assert cm.target == (i, j)
        assert all(a == b for a, b in cm.mapping.items())


def test_rounding_map_is_bijective_on_threads():
    fine = build_instance({k: (k / 10,) for k in range(-1000, 1001)}, "euclidean", 0, 100.0)
    ints = make("line", N=100)
    ladder = ScaleLadder((0, 10, 20, 40), (1, 2, 4))
    sx = build_end_system(fine, ladder)
    sy = build_end_system(ints, ScaleLadder((0, 10, 20, 40), (1, 2, 4, 8)))
    induced = induced_end_map(map_from_function(fine, ints, np.round), sx, sy)
    tmap = induced.thread_map(0)
    assert len(tmap) == 2 and len(set(tmap.values())) == 2


def test_discrete_book_inclusion_matches_pages():
    pages, height = 5, 100
    book, disc = make("book", pages=pages, height=height), make("discrete_book", pages=pages, height=height)
    ladder = ScaleLadder(default_ladder(book).r_values, (1.0, 8.0, 16.0))
    sb, sd = build_end_system(book, ladder), build_end_system(disc, ladder)
    tmap = induced_end_map(map_from_ids(disc, book, lambda p: p), sd, sb).thread_map(2)
    page = lambda pid: (pid - 1) // height + 1
    assert sorted(page(book.ids[b]) for b in tmap.values()) == list(range(1, pages + 1))
    assert all(page(disc.ids[a]) == page(book.ids[b]) for a, b in tmap.items())


def test_composition_law_on_lines():
    a, b, c = make("line", N=40), make("line", N=80), make("line", N=160)
    la = ScaleLadder((0, 5, 10, 15), (1, 2, 4))
    lb = ScaleLadder((0, 10, 20, 30), (1, 2, 4, 8))
    lc = ScaleLadder((0, 20, 40, 60), (1, 2, 4, 8, 16))
    sa, sb, sc = build_end_system(a, la), build_end_system(b, lb), build_end_system(c, lc)
    f = map_from_function(a, b, lambda x: 2 * x)
    g = map_from_function(b, c, lambda x: -2 * x)
    direct = induced_end_map(f.compose(g), sa, sc)
    routed = compose_induced(induced_end_map(f, sa, sb), induced_end_map(g, sb, sc))
    bad, compared = maps_agree(direct, routed)
    assert compared and not bad


def test_close_maps_agree_at_coarse_scales():
    x, y = make("line", N=50), make("line", N=60)
    sx = build_end_system(x, ScaleLadder((0, 10, 20), (1, 2, 4)))
    sy = build_end_system(y, ScaleLadder((0, 10, 20, 30), (1, 2, 4, 8)))
    f = map_from_ids(x, y, lambda p: p)
    g = map_from_ids(x, y, lambda p: p + 3 if p >= 0 else p - 3)
    bad, compared = maps_agree(induced_end_map(f, sx, sy), induced_end_map(g, sx, sy), min_scale=3)
    assert compared and not bad


def test_stability_report_round_trip(tmp_path, line):
    rep = stable_end_count(build_end_system(line, default_ladder(line)))
    path = tmp_path / "report.json"
    save_report(rep, path)
    assert StabilityReport.from_dict(load_report(path)) == rep
    with pytest.raises(FileExistsError):
        save_report(rep, path)
    save_report(rep, path, overwrite=True)


def test_report_is_deterministic(line):
    a = json.dumps(build_end_system(line, default_ladder(line)).to_dict(), sort_keys=True)
    b = json.dumps(build_end_system(make("line", N=100), default_ladder(line)).to_dict(), sort_keys=True)
    assert a == b


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_matches_transitive_closure_oracle(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, max_points=120)
    ladder = random_ladder(rng, inst.truncation_radius)
    D = dense_distances(inst)
    system = build_end_system(inst, ladder)
    for i, r in enumerate(ladder.r_values):
        for j, R in enumerate(ladder.R_values):
            assert np.array_equal(system.labels[i, j], chain_labels(inst, r, R, D))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_refinement_and_annulus_monotonicity(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, max_points=150)
    system = build_end_system(inst, random_ladder(rng, inst.truncation_radius))
    nr, nR = system.shape
    counts = system.counts()
    assert (np.diff(counts, axis=1) <= 0).all()
    for i in range(nr):
        for j in range(nR):
            inside = system.labels[i, j] >= 0
            if j + 1 < nR:
                # each fine component lands in a single coarse one
                for c in system.reps(i, j):
                    members = system.labels[i, j] == c
                    assert np.unique(system.labels[i, j + 1][members]).size == 1
            if i > 0:
                assert (system.labels[i - 1, j][inside] >= 0).all()
                for c in system.reps(i, j):
                    members = system.labels[i, j] == c
                    assert np.unique(system.labels[i - 1, j][members]).size == 1
    # the double system commutes
    for i in range(1, nr):
        for j in range(nR - 1):
            for c in system.reps(i, j):
                assert system.push(system.push(c, (i, j), (i - 1, j)), (i - 1, j), (i - 1, j + 1)) == \
                    system.push(system.push(c, (i, j), (i, j + 1)), (i, j + 1), (i - 1, j + 1))


@pytest.mark.parametrize("name, params", [("line", {"N": 100}), ("grid2d", {"N": 20}), ("vase", {"height": 100})])
def test_base_point_independence(name, params):
    inst = make(name, **params)
    ladder = default_ladder(inst)
    near = min((p for p in inst.ids if p != inst.basepoint), key=lambda p: inst.distance(p, inst.basepoint))
    assert inst.distance(near, inst.basepoint) <= ladder.r_values[1]
    moved = inst.rebased(near)
    a = stable_end_count(build_end_system(inst, ladder))
    b = stable_end_count(build_end_system(moved, ScaleLadder(ladder.r_values, ladder.R_values)))
    assert (a.status, a.k) == (b.status, b.k)
