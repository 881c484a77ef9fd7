import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarse_ends import ScaleLadder, build_end_system, find_escape_chain, omega_map, sigma_report, threads
from coarse_ends.core import map_from_ids
from coarse_ends.errors import InstanceError
from coarse_ends.filtration import induced_end_map
from coarse_ends.oracle import escape_classes, escape_depths
from coarse_ends.sigma import naturality_violations
from coarse_ends.suite import random_instance, random_ladder

from conftest import default_ladder, make


def assert_valid_chain(inst, chain):
    assert chain.ids[0] == inst.basepoint
    for a, b in zip(chain.ids, chain.ids[1:]):
        assert inst.distance(a, b) <= chain.R * (1 + 1e-9)
    assert inst.distance(inst.basepoint, chain.ids[-1]) >= chain.shell_radius * (1 - 1e-9)


def test_line_chain_is_a_unit_walk(line):
    chain = find_escape_chain(line, 1)
    assert_valid_chain(line, chain)
    # both directions are equally short; the smaller id wins the tie
    assert chain.ids == tuple(range(0, -91, -1))


def test_squares_have_no_escape_chain(squares):
    assert find_escape_chain(squares, 100) is None


def test_book_chain_runs_along_first_page():
    book = make("book", pages=5, height=100)
    chain = find_escape_chain(book, 1)
    assert_valid_chain(book, chain)
    assert chain.ids == tuple(range(0, 91))


def test_margin_must_be_a_fraction(line):
    with pytest.raises(InstanceError):
        find_escape_chain(line, 1, margin=1.0)


def test_line_has_two_classes(line):
    ladder = default_ladder(line)
    system = build_end_system(line, ladder)
    rep = sigma_report(line, ladder, system=system)
    assert rep.class_count() == 2
    omega = omega_map(rep, system)
    assert omega.bijective() and omega.thread_counts[-1] == 2


def test_squares_have_no_classes_but_are_not_empty(squares):
    ladder = default_ladder(squares)
    system = build_end_system(squares, ladder)
    rep = sigma_report(squares, ladder, system=system)
    assert rep.class_count() == 0
    omega = omega_map(rep, system)
    assert omega.injective() and not omega.surjective() and omega.thread_counts[-1] > 0


@pytest.mark.parametrize("name", ["book", "discrete_book"])
def test_books_have_one_class_per_page(name):
    inst = make(name, pages=5, height=100)
    ladder = ScaleLadder(default_ladder(inst).r_values, (1.0, 8.0, 16.0))
    system = build_end_system(inst, ladder)
    rep = sigma_report(inst, ladder, system=system)
    assert rep.class_count() == 5 == len(threads(system, 2))
    assert omega_map(rep, system).bijective()


def test_naturality_for_book_inclusion():
    book, disc = make("book", pages=5, height=100), make("discrete_book", pages=5, height=100)
    ladder = ScaleLadder(default_ladder(book).r_values, (1.0, 8.0, 16.0))
    sb, sd = build_end_system(book, ladder), build_end_system(disc, ladder)
    rb, rd = sigma_report(book, ladder, system=sb), sigma_report(disc, ladder, system=sd)
    f = map_from_ids(disc, book, lambda p: p)
    bad, checked = naturality_violations(f, induced_end_map(f, sd, sb), rd, rb, sd, sb)
    assert checked >= 5 and not bad


def test_report_serialises(line):
    d = sigma_report(line, default_ladder(line)).to_dict()
    assert d["class_count"] == 2 and d["scales"][0]["exists"]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_classes_match_bfs_oracle(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, max_points=120)
    ladder = random_ladder(rng, inst.truncation_radius)
    system = build_end_system(inst, ladder)
    rep = sigma_report(inst, ladder, system=system)
    omega = omega_map(rep, system)
    seen = False
    for j, entry in enumerate(rep.scales):
        expected = escape_classes(inst, entry.R, rep.shell_radius, ladder.r_values[-1])
        assert sorted(c.thread for c in entry.classes) == expected
        assert entry.exists == (entry.chain is not None)
        if entry.chain is not None:
            assert_valid_chain(inst, entry.chain)
            depth, _ = escape_depths(inst, entry.R, rep.shell_radius)
            assert len(entry.chain) - 1 == depth[inst.index(entry.chain.ids[-1])]
        # existence is monotone in R
        assert entry.exists or not seen
        seen = seen or entry.exists
        assert omega.injective(j)
