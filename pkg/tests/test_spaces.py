import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarse_ends import generate, load
from coarse_ends.errors import InstanceError
from coarse_ends.hyper import ParametricSpace
from coarse_ends.spaces import SpaceRecipe, fingerprint

from conftest import make


def test_counts():
    assert len(make("line", N=100)) == 201
    assert len(make("vase", height=100)) == 2 * 100 + 3
    assert len(make("discrete_book", pages=5, height=100)) == sum(100 // i for i in range(1, 6)) + 1
    assert len(make("grid2d", N=100)) == 201 ** 2


def test_unknown_recipe():
    with pytest.raises(InstanceError):
        make("torus")


def test_parametric_kind_returns_descriptor():
    space = generate(SpaceRecipe("flared_vase", kind="parametric"))
    assert isinstance(space, ParametricSpace) and len(space.pieces) == 3


@pytest.mark.parametrize("name, params", [
    ("line", {"N": 50, "perturb": 0.1, "seed": 3}),
    ("book", {"pages": 3, "height": 30, "perturb": 0.2, "seed": 1}),
    ("squares", {"rho": 2000}),
])
def test_regeneration_is_deterministic(name, params):
    assert fingerprint(make(name, **params)) == fingerprint(make(name, **params))


def test_seeds_change_perturbations():
    a = make("line", N=50, perturb=0.1, seed=1)
    b = make("line", N=50, perturb=0.1, seed=2)
    assert fingerprint(a) != fingerprint(b)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 40), st.integers(1, 40))
def test_book_metric_is_wedge_sum(p, q, x, y):
    book = make("book", pages=6, height=40)
    a, b = (p - 1) * 40 + x, (q - 1) * 40 + y
    expected = abs(x - y) if p == q else x + y
    assert book.distance(a, b) == expected
    assert book.distance(a, 0) == x


def test_discrete_book_spacing():
    disc = make("discrete_book", pages=4, height=20)
    page3 = [pid - 2 * 20 for pid in disc.ids if 40 < pid <= 60]
    assert page3 == list(range(3, 21, 3))
    assert disc.distance(2 * 20 + 3, 2 * 20 + 6) == 3


def test_load_csv(tmp_path):
    path = tmp_path / "cloud.csv"
    path.write_text("id,x1,x2\n0,0,0\n1,3,4\n2,6,8\n")
    inst = load(path)
    assert len(inst) == 3 and inst.distance(0, 2) == 10 and inst.truncation_radius == 10
    cheb = load(path, metric="chebyshev", basepoint="1")
    assert cheb.basepoint == 1 and cheb.distance(0, 2) == 8


def test_load_edges(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# a path and an isolated vertex\na b 1\nb c 2.5\nz\n")
    inst = load(path)
    assert inst.is_graph and inst.distance("a", "c") == 3.5
    assert math.isinf(inst.distance("a", "z"))


@pytest.mark.parametrize("name, text, line", [
    ("bad.csv", "id,x1\n0,0\n1,oops\n", 3),
    ("short.csv", "id,x1,x2\n0,0,0\n1,2\n", 3),
    ("head.csv", "name,x\n0,0\n", 1),
    ("neg.txt", "a b 1\nb c -2\n", 2),
    ("three.txt", "a b 1 7\n", 1),
])
def test_malformed_rows_name_the_line(tmp_path, name, text, line):
    path = tmp_path / name
    path.write_text(text)
    with pytest.raises(InstanceError) as err:
        load(path)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_squares_grow_sparse():
    sq = make("squares", rho=10 ** 6)
    gaps = np.diff(sq.coords[:, 0])
    assert len(sq) == 1001 and (np.diff(gaps) == 2).all()
