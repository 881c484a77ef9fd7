import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarse_ends.errors import CertificateError, InconsistentCertificates
from coarse_ends.hyper import (
    ChainSchema,
    GapCertificate,
    IotaReport,
    Piece,
    Poly,
    Segment,
    SymbolicPoint,
    builtin_certificates,
    builtin_space,
    evaluate_schema,
    finitely_close,
    iota_report,
    is_infinite,
    load_certificates,
    membership_check,
    parse_bipoly,
    parse_poly,
    transport_point,
    transport_schema,
    verify_chain_schema,
    verify_gap_certificate,
)
from coarse_ends.hyper import iota as iota_module
from coarse_ends.hyper.certificates import GapVerdict
from coarse_ends.hyper.descriptors import dump, space_from_dict
from coarse_ends.oracle import min_cross_distance
from coarse_ends.spaces import load_report, save_report
from coarse_ends.suite import spot_check_schema

BUILTINS = ("line", "vase", "flared_vase", "lattice2d")


def pt(*coords, t0=0):
    return SymbolicPoint(tuple(parse_poly(c) if isinstance(c, str) else Poly.const(c) for c in coords), t0)


def schema(R, segments, escape, t0=1, name="s"):
    segs = tuple(Segment(tuple(parse_bipoly(c) for c in p), parse_poly(m)) for p, m in segments)
    return ChainSchema(Fraction(R), segs, parse_poly(escape), Fraction(t0), name)


def gap(R, A, B, m0, sampled=False):
    return GapCertificate(Fraction(R), A, B, parse_poly(m0, "R"), "g", sampled)


@pytest.mark.parametrize("p, q, close", [
    (pt("t", "t"), pt("t + 1", "t"), True),
    (pt("t", "t"), pt("-t", "t"), False),
    (pt(-1, "t"), pt(1, "t"), True),
])
def test_finitely_close(p, q, close):
    assert finitely_close(p, q) is close


def test_dimension_mismatch():
    with pytest.raises(CertificateError):
        finitely_close(pt("t"), pt("t", 0))


polys = st.lists(st.integers(-5, 5), max_size=4).map(Poly)
points = st.integers(1, 3).flatmap(lambda n: st.tuples(*[polys] * n)).map(SymbolicPoint)


@settings(max_examples=100, deadline=None)
@given(points, points)
def test_finitely_close_reflexive_and_symmetric(p, q):
    assert finitely_close(p, p)
    if p.dim == q.dim:
        assert finitely_close(p, q) == finitely_close(q, p)


def test_is_infinite():
    line = builtin_space("line")
    assert is_infinite(pt("t"), line)
    assert not is_infinite(pt(7), line)
    with pytest.raises(CertificateError):
        is_infinite(pt("t", 1, t0=2), builtin_space("vase"))


def test_membership_on_flared_arm():
    fv = builtin_space("flared_vase")
    left, right = fv.piece("left"), fv.piece("right")
    formula = (parse_bipoly("k - t"), parse_bipoly("t"))
    assert membership_check(formula, left, 1, Poly()).ok
    res = membership_check(formula, left, 1, Poly.t())
    assert not res.ok and res.witness is not None
    diag = (parse_bipoly("t + k"), parse_bipoly("t + k"))
    assert membership_check(diag, right, 1, parse_poly("t**2 - t")).ok


def test_membership_off_a_horizontal_ray():
    axis = Piece("ray", 2, (parse_poly("u", "u"), Poly()), Fraction(0), None, "axis")
    assert not membership_check((parse_bipoly("k"), parse_bipoly("t")), axis, 1, Poly.t()).ok


def test_lattice_rectangle_verifies():
    rect = next(s for s in builtin_certificates("lattice2d").schemas if s.name == "rectangle")
    verdict = verify_chain_schema(rect, builtin_space("lattice2d"))
    assert verdict.ok and verdict.method == "symbolic"
    assert rect.R == 1


def test_vase_single_step_verifies():
    across = schema(2, [(["-1 + 2*k", "t"], "1")], "t - 1")
    assert verify_chain_schema(across, builtin_space("vase")).ok


def test_vase_step_too_long_fails():
    across = schema(1, [(["-1 + 2*k", "t"], "1")], "t - 1")
    name, clause = verify_chain_schema(across, builtin_space("vase")).failure
    assert name == "step_bound" and clause.witness is not None


def test_flared_vase_cannot_be_crossed_at_scale_two():
    fv = builtin_space("flared_vase")
    # walk down the right arm to (t, t), then jump to the left arm
    down_and_over = schema(2, [(["2*t - k", "2*t - k"], "t"), (["t - 2*t*k", "t"], "1")], "t")
    verdict = verify_chain_schema(down_and_over, fv)
    assert not verdict.ok and verdict.failure[0] == "step_bound"
    # straight across leaves the space
    straight = schema(2, [(["t - k", "t"], "2*t")], "t")
    assert verify_chain_schema(straight, fv).failure[0] == "membership"
    # and the separation itself is certified at that scale
    assert verify_gap_certificate(gap(2, ["right"], ["left"], "R"), fv).ok


def test_escape_bound_checked():
    close_in = schema(2, [(["-1 + 2*k", "t"], "1")], "2*t")
    assert verify_chain_schema(close_in, builtin_space("vase")).failure[0] == "escape"


@pytest.mark.parametrize("space, R, A, B, m0, ok", [
    ("flared_vase", 3, ["right"], ["left"], "3", True),
    ("vase", 3, ["right"], ["left"], "1000", False),
    ("vase", 1, ["right"], ["left"], "0", False),
    ("line", 1, ["pos"], ["neg"], "1", True),
])
def test_gap_certificates(space, R, A, B, m0, ok):
    assert verify_gap_certificate(gap(R, A, B, m0), builtin_space(space)).ok is ok


def test_line_gap_distance():
    verdict = verify_gap_certificate(gap(1, ["pos"], ["neg"], "1"), builtin_space("line"))
    assert verdict.min_sq_distance == 4  # outside B(0, 1) the rays are 2m apart


def parabola():
    return space_from_dict({"name": "parabola", "dimension": 2, "basepoint": ["0", "0"], "pieces": [
        {"kind": "ray", "name": "right", "coords": ["u", "u**2"], "from": "0"},
        {"kind": "ray", "name": "left", "coords": ["-u", "u**2"], "from": "0"},
    ]})


def test_curved_pieces_need_the_sampled_fallback():
    space = parabola()
    with pytest.raises(CertificateError):
        verify_gap_certificate(gap(1, ["right"], ["left"], "R + 1"), space)
    verdict = verify_gap_certificate(gap(1, ["right"], ["left"], "R + 1", sampled=True), space)
    assert verdict.ok and verdict.method == "sampled"


def discretised(space, names, m, top=400.0, step=0.25):
    xi = np.array([float(c.lead) for c in space.basepoint.coords])
    out = []
    for n in names:
        p = space.piece(n)
        hi = float(p.end) if p.end is not None else top
        for u in np.arange(float(p.start), hi + 1e-12, step):
            x = np.array([float(c(Fraction(u))) for c in p.coords])
            if np.linalg.norm(x - xi) >= m:
                out.append(x)
    return np.array(out)


@pytest.mark.parametrize("space, R, A, B, m0", [
    ("flared_vase", 3, ["right"], ["left"], "R"),
    ("flared_vase", 1, ["right", "base"], ["left"], "R + 2"),
    ("line", 2, ["pos"], ["neg"], "R"),
])
def test_verified_gaps_hold_on_discretised_pieces(space, R, A, B, m0):
    sp = builtin_space(space)
    cert = gap(R, A, B, m0)
    assert verify_gap_certificate(cert, sp).ok
    for m in (float(cert.threshold), 2 * float(cert.threshold) + 1, 50.0):
        assert min_cross_distance(discretised(sp, A, m), discretised(sp, B, m)) > R


@pytest.mark.parametrize("name", BUILTINS)
def test_shipped_schemas_are_sound(name):
    space, bundle = builtin_space(name), builtin_certificates(name)
    for sc in bundle.schemas:
        assert verify_chain_schema(sc, space).ok
        for t in (sc.t0, 2 * sc.t0, 10 * sc.t0):
            chain = evaluate_schema(sc, t)
            for p in chain:
                point = SymbolicPoint.constant(p)
                assert space.locate(point), (sc.name, t, p)
            step, radius = spot_check_schema(sc, space, t)
            assert step <= float(sc.R) * (1 + 1e-9)
            assert radius >= float(sc.escape(t)) * (1 - 1e-9)


@pytest.mark.parametrize("name, classes", [("line", 2), ("flared_vase", 2), ("vase", 1), ("lattice2d", 1)])
def test_iota_classes(name, classes):
    bundle = builtin_certificates(name)
    rep = iota_report(builtin_space(name), bundle.representatives, bundle.schemas, bundle.gaps)
    assert rep.decided and rep.class_count == classes


def test_finite_representative_rejected():
    with pytest.raises(CertificateError):
        iota_report(builtin_space("line"), {"here": pt(3)})


def test_missing_certificates_leave_pairs_unknown():
    bundle = builtin_certificates("line")
    rep = iota_report(builtin_space("line"), bundle.representatives)
    assert not rep.decided and rep.class_count is None


def test_conflicting_certificates_raise(monkeypatch):
    vase = builtin_space("vase")
    bundle = builtin_certificates("vase")
    bogus = gap(3, ["right"], ["left"], "R")

    def always(cert, space):
        return GapVerdict(cert, True, True, None, detail="forced")

    monkeypatch.setattr(iota_module, "verify_gap_certificate", always)
    with pytest.raises(InconsistentCertificates):
        iota_report(vase, bundle.representatives, bundle.schemas, [bogus])


def test_iota_report_round_trip(tmp_path):
    bundle = builtin_certificates("flared_vase")
    rep = iota_report(builtin_space("flared_vase"), bundle.representatives, bundle.schemas, bundle.gaps)
    path = tmp_path / "iota.json"
    save_report(rep, path)
    back = IotaReport.from_dict(load_report(path))
    assert back.to_dict() == json.loads(path.read_text())
    assert back.class_count == 2 and back.pairs == rep.pairs


def test_certificate_bundle_round_trip(tmp_path):
    bundle = builtin_certificates("lattice2d")
    dump(bundle, tmp_path / "c.json")
    again = load_certificates(tmp_path / "c.json")
    assert again.to_dict() == bundle.to_dict()


def test_transport_along_a_similarity():
    lattice = builtin_space("lattice2d")
    rect = next(s for s in builtin_certificates("lattice2d").schemas if s.name == "rectangle")
    image = transport_schema(rect, [[2, 0], [0, 2]], [0, 0], 2, 2)
    assert image.R == 2
    assert verify_chain_schema(image, lattice).ok
    assert transport_point(rect.start_point(), [[2, 0], [0, 2]], [0, 0]).coords == (parse_poly("2*t"), Poly())


def test_transport_onto_a_rotated_vase():
    turned = space_from_dict({"name": "turned", "dimension": 2, "basepoint": ["-1", "0"], "pieces": [
        {"kind": "segment", "name": "base", "coords": ["-1", "u"], "from": "-1", "to": "1"},
        {"kind": "ray", "name": "left", "coords": ["-u", "-1"], "from": "1"},
        {"kind": "ray", "name": "right", "coords": ["-u", "1"], "from": "1"},
    ]})
    across = next(iter(builtin_certificates("vase").schemas))
    image = transport_schema(across, [[0, -1], [1, 0]], [0, 0], 1, 1)
    assert verify_chain_schema(image, turned).ok


def test_transport_rejects_wrong_bounds():
    rect = next(iter(builtin_certificates("lattice2d").schemas))
    with pytest.raises(CertificateError):
        transport_schema(rect, [[2, 0], [0, 3]], [0, 0], 2, 2)
    with pytest.raises(CertificateError):
        transport_schema(rect, [[2, 0], [0, 3]], [0, 0], 3, 3)
