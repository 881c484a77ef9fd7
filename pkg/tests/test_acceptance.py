"""Exit criteria for the build, one test per criterion.

Each test prints a ``criterion N: PASS|FAIL`` line straight to the terminal.
Run ``python tests/test_acceptance.py`` for the bare list.
"""
import sys

import pytest

from coarse_ends import suite

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module", autouse=True)
def compiled_kernels():
    suite.warm_up()


def report(result, capsys):
    with capsys.disabled():
        print(f"\n{result.line()}  {result.detail}")


def test_criterion_1_line_has_two_ends(capsys):
    res = suite.criterion_1()
    report(res, capsys)
    assert res.detail["status"] == "Stabilized(2)"
    assert res.detail["iota_decided"] and res.detail["iota_classes"] == 2
    assert res.seconds < 1.0
    assert res.passed


def test_criterion_2_grid_has_one_end(capsys):
    res = suite.criterion_2()
    report(res, capsys)
    assert res.detail["points"] == 201 ** 2
    assert res.detail["status"] == "Stabilized(1)" and res.detail["rectangle_schema"]
    assert res.seconds < 10.0
    assert res.passed


def test_criterion_3_vase_and_flared_vase(capsys):
    res = suite.criterion_3()
    report(res, capsys)
    assert (res.detail["vase"], res.detail["flared_vase"]) == ("Stabilized(1)", "Stabilized(2)")
    assert (res.detail["vase_iota"], res.detail["flared_vase_iota"]) == (1, 2)
    assert res.passed


def test_criterion_4_square_numbers(capsys):
    res = suite.criterion_4()
    report(res, capsys)
    assert res.detail["points"] == 1001
    assert res.detail["chains_absent"] and res.detail["reach_matches_gaps"]
    assert res.detail["classes"] == 0 and res.detail["status"] == "Sparse"
    assert res.seconds < 1.0
    assert res.passed


def test_criterion_5_books(capsys):
    res = suite.criterion_5()
    report(res, capsys)
    d = res.detail
    assert d["book_classes"] == d["discrete_classes"] == d["book_threads"] == d["discrete_threads"] == 50
    assert d["inclusion_bijective_by_page"]
    assert res.passed


def test_criterion_6_nonscattering_consequences(capsys):
    res = suite.criterion_6()
    report(res, capsys)
    assert res.detail["instances"] == len(suite.SMALL_RECIPES) + 100
    assert res.detail["violations"] == []
    assert res.passed


def test_criterion_7_oracle_equivalence(capsys):
    res = suite.criterion_7()
    report(res, capsys)
    assert res.detail["instances"] == 200 and res.detail["mismatches"] == 0
    assert res.passed


def test_criterion_8_functoriality_and_homotopy(capsys):
    res = suite.criterion_8()
    report(res, capsys)
    d = res.detail
    assert d["composition_pairs"] >= 50 and d["homotopy_pairs"] >= 50
    assert d["composition_violations"] == 0 and d["homotopy_violations"] == 0
    assert res.passed


def test_criterion_9_certificate_spot_checks(capsys):
    res = suite.criterion_9()
    report(res, capsys)
    assert res.detail["evaluations"] > 0 and res.detail["failures"] == []
    assert res.passed


if __name__ == "__main__":
    results = suite.run_suite()
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
