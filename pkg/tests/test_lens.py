"""Lens synthesis unit tests, including the independent path-equation oracle."""

import math

import numpy as np
import pytest
from scipy.optimize import fsolve

from rotsim import lens, materials

F0 = 28e9
EPS_R = 6.15
H_SUB = 0.64e-3


def paper_params(convention="free_space"):
    eps_eff = materials.effective_permittivity(EPS_R, H_SUB)
    lam = materials.free_space_wavelength(F0) if convention == "free_space" \
        else materials.guided_wavelength(F0, eps_eff)
    return lens.LensDesignParams(f1=5 * lam, taper_len=3 * lam)


# --------------------------------------------------------------------------
# expansion factor


def test_expansion_factor_paper_point():
    assert lens.expansion_factor(math.radians(30), math.radians(30)) == \
        pytest.approx(1.0, abs=1e-15)


def test_expansion_factor_values():
    assert lens.expansion_factor(math.radians(30), math.radians(89.9)) == \
        pytest.approx(math.sin(math.radians(89.9)) / 0.5, rel=1e-12)
    assert lens.expansion_factor(math.radians(45), math.radians(30)) == \
        pytest.approx(0.7071067811865476, rel=1e-12)


def test_expansion_factor_domain_errors():
    for a, p in [(0.0, 1.0), (1.0, 0.0), (math.pi / 2, 1.0), (1.0, math.pi / 2),
                 (-0.1, 0.5), (0.5, 3.2)]:
        with pytest.raises(lens.LensError):
            lens.expansion_factor(a, p)


def test_expansion_factor_identity_property():
    rng = np.random.default_rng(7)
    for a in rng.uniform(0.05, math.pi / 2 - 0.05, 50):
        assert lens.expansion_factor(a, a) == pytest.approx(1.0, rel=1e-14)


# --------------------------------------------------------------------------
# focal points and beam ports


def test_beam_focal_points_paper():
    p = lens.LensDesignParams(f1=1.0, beta=0.9, alpha=math.radians(30),
                              taper_len=0.01)
    f0, fp, fm = lens.beam_focal_points(p)
    assert f0 == (-1.0, 0.0)
    assert math.hypot(*fp) == pytest.approx(0.9, rel=1e-14)
    assert math.hypot(*fm) == pytest.approx(0.9, rel=1e-14)
    assert math.degrees(math.atan2(fp[1], -fp[0])) == pytest.approx(30.0)
    # mirror pair
    assert fp[0] == fm[0] and fp[1] == -fm[1]


def test_beam_focal_points_degenerate_limit():
    p = lens.LensDesignParams(f1=1.0, beta=1.0, alpha=1e-9, taper_len=0.01)
    f0, fp, fm = lens.beam_focal_points(p)
    for a, b in zip(fp, f0):
        assert a == pytest.approx(b, abs=1e-8)
    for a, b in zip(fm, f0):
        assert a == pytest.approx(b, abs=1e-8)


def test_place_beam_ports_paper_layout():
    p = paper_params()
    ports = lens.place_beam_ports(p)
    assert len(ports) == 13
    # center port (1-based index 7) at the on-axis focal point
    f0 = lens.beam_focal_points(p)[0]
    assert ports[6].position[0] == pytest.approx(f0[0], abs=1e-9 * p.f1)
    assert abs(ports[6].position[1]) < 1e-9 * p.f1
    assert ports[6].beam_angle == 0.0
    # edge ports at subtended angles -/+ phi_max
    assert ports[0].subtended_angle == pytest.approx(-p.phi_max)
    assert ports[12].subtended_angle == pytest.approx(p.phi_max)
    # edge ports sit on the off-axis focal points (phi_max == alpha here)
    _, fp, fm = lens.beam_focal_points(p)
    assert math.dist(ports[0].position, fp) < 1e-9 * p.f1
    assert math.dist(ports[12].position, fm) < 1e-9 * p.f1
    # steering reaches the design maximum of 50 degrees
    assert math.degrees(ports[12].beam_angle) == pytest.approx(50.0, abs=1e-9)


def test_place_beam_ports_degenerate_arc():
    p = lens.LensDesignParams(f1=1.0, beta=1.0, alpha=1e-13, taper_len=0.01)
    with pytest.raises(lens.LensError):
        lens.place_beam_ports(p)


# --------------------------------------------------------------------------
# array point solution


def test_solve_array_point_on_axis():
    p = paper_params()
    (x, y), w = lens.solve_array_point(0.0, p)
    assert x == 0.0 and y == 0.0 and w == 0.0


def test_solve_array_point_mirror_pairs():
    p = paper_params()
    for eta in (0.1, 0.3, 0.55):
        (xp, yp), wp = lens.solve_array_point(eta, p)
        (xm, ym), wm = lens.solve_array_point(-eta, p)
        assert xp == xm and yp == -ym and wp == wm


def _oracle_point(eta, p):
    """Independent root-finder on the three raw path-length equations."""
    n_med = math.sqrt(p.eps_eff)
    y3 = eta * p.f1
    focals = lens.beam_focal_points(p)
    dists = [p.f1, p.beta * p.f1, p.beta * p.f1]
    thetas = [0.0, p.theta_max, -p.theta_max]

    def eqs(v):
        x, y, w = v
        return [
            n_med * (math.hypot(fx - x, fy - y) + w) + y3 * math.sin(th)
            - n_med * d
            for (fx, fy), d, th in zip(focals, dists, thetas)
        ]

    sol, info, ok, msg = fsolve(eqs, x0=[0.0, y3 * 0.7, 0.0], full_output=True,
                                xtol=1e-14)
    assert ok == 1, msg
    return sol


def test_solve_array_point_against_root_finder():
    p = paper_params()
    for eta in (0.3, -0.45, 0.6):
        (x, y), w = lens.solve_array_point(eta, p)
        ox, oy, ow = _oracle_point(eta, p)
        assert abs(x - ox) < 1e-9 * p.f1
        assert abs(y - oy) < 1e-9 * p.f1
        assert abs(w - ow) < 1e-9 * p.f1


def test_solve_array_point_rejects_unrealizable():
    p = paper_params()
    with pytest.raises(lens.LensError):
        lens.solve_array_point(2.1, p)


def test_discriminant_nonnegative_at_paper_apertures():
    p = paper_params()
    for y3 in lens.aperture_positions(p):
        assert lens.solve_quadratic_discriminant(y3 / p.f1, p) >= 0.0


def test_contour_monotonic_in_eta():
    p = paper_params()
    etas = np.linspace(-0.6, 0.6, 41)
    ys = [lens.solve_array_point(e, p)[0][1] for e in etas]
    assert np.all(np.diff(ys) > 0)


# --------------------------------------------------------------------------
# full synthesis


def test_synthesize_paper_counts():
    g = lens.synthesize(paper_params())
    assert g.n_beam == 13 and g.n_array == 13
    assert len(g.port_segments) == 26
    assert len(g.dummy_segments) == 2
    assert len(g.line_lengths) == len(g.aperture_positions) == 13


def test_synthesize_path_equality():
    p = paper_params()
    g = lens.synthesize(p)
    worst = max(abs(lens.path_length_residual(g, fi, ei))
                for fi in range(3) for ei in range(p.n_array))
    assert worst < 1e-9 * p.f1


def test_path_residual_reference_element_zero():
    g = lens.synthesize(paper_params())
    for fi in range(3):
        assert lens.path_length_residual(g, fi, 0) == 0.0


def test_path_residual_linear_in_w():
    p = paper_params()
    g = lens.synthesize(p)
    delta = 3.7e-5
    base = lens.path_length_residual(g, 1, 5)
    g.line_lengths[5] += delta
    shifted = lens.path_length_residual(g, 1, 5)
    assert shifted - base == pytest.approx(delta * math.sqrt(g.eps_eff), rel=1e-9)


def test_path_residual_index_errors():
    g = lens.synthesize(paper_params())
    with pytest.raises(IndexError):
        lens.path_length_residual(g, 3, 0)
    with pytest.raises(IndexError):
        lens.path_length_residual(g, 0, 13)


def test_synthesize_mirror_symmetry():
    p = paper_params()
    g = lens.synthesize(p)
    gm = lens.mirrored(g)
    tol = 1e-9 * p.f1
    for a, b in zip(g.beam_ports, gm.beam_ports):
        assert math.dist(a.position, b.position) < tol
        assert abs(a.beam_angle - b.beam_angle) < 1e-12
    for a, b in zip(g.array_contour, gm.array_contour):
        assert math.dist(a, b) < tol
    for a, b in zip(g.line_lengths, gm.line_lengths):
        assert abs(a - b) < tol
    for a, b in zip(g.aperture_positions, gm.aperture_positions):
        assert abs(a - b) < tol


def test_synthesize_no_dummies_closes_outline():
    p = lens.LensDesignParams(f1=paper_params().f1, n_dummy=0,
                              taper_len=paper_params().taper_len)
    g = lens.synthesize(p)
    assert g.dummy_segments == []
    # two side walls replace the dummy openings
    assert len(g.wall_polylines) == 24 + 2


def test_synthesize_outline_simple_polygon():
    g = lens.synthesize(paper_params())
    pts = np.array(g.outline)
    assert np.allclose(pts[0], pts[-1])
    segs = [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]

    def crosses(s1, s2):
        (a, b), (c, d) = s1, s2

        def orient(p, q, r):
            return np.sign((q[0] - p[0]) * (r[1] - p[1])
                           - (q[1] - p[1]) * (r[0] - p[0]))

        return (orient(a, b, c) * orient(a, b, d) < 0
                and orient(c, d, a) * orient(c, d, b) < 0)

    for i in range(len(segs)):
        for j in range(i + 2, len(segs)):
            if i == 0 and j == len(segs) - 1:
                continue
            assert not crosses(segs[i], segs[j]), (i, j)


def test_synthesize_degenerate_single_ports():
    p = lens.LensDesignParams(f1=0.05, n_beam=1, n_array=1, n_dummy=0,
                              taper_len=0.01)
    g = lens.synthesize(p)
    assert g.n_beam == 1 and g.n_array == 1
    assert g.line_lengths[0] == 0.0


def test_validate_rejects_bad_params():
    good = paper_params()
    bad = [dict(beta=1.5), dict(beta=0.0), dict(alpha=2.0), dict(n_beam=0),
           dict(eps_r=0.5), dict(substrate_h=0.0), dict(tan_delta=-1e-3)]
    for kw in bad:
        with pytest.raises(lens.LensError):
            lens.LensDesignParams(**{**good.__dict__, **kw}).validate()


def test_synthesize_reports_failing_element():
    # guided-wavelength interpretation of the 28 GHz design: infeasible
    # contour band between the outermost elements
    p = paper_params("guided")
    with pytest.raises(lens.LensError, match="element"):
        lens.synthesize(p)


# --------------------------------------------------------------------------
# geometry CSV


def test_export_geometry_counts(tmp_path):
    g = lens.synthesize(paper_params())
    path = tmp_path / "geom.csv"
    lens.export_geometry(g, path)
    table = lens.import_geometry(path)
    assert len(table.beam) == 13
    assert len(table.array) == 13
    assert len(table.aperture) == 13
    assert len(table.dummy) == 2


def test_export_geometry_empty_dummy(tmp_path):
    p = lens.LensDesignParams(f1=paper_params().f1, n_dummy=0,
                              taper_len=paper_params().taper_len)
    g = lens.synthesize(p)
    path = tmp_path / "geom.csv"
    lens.export_geometry(g, path)
    assert len(lens.import_geometry(path).dummy) == 0


def test_export_import_export_roundtrip(tmp_path):
    g = lens.synthesize(paper_params())
    path = tmp_path / "geom.csv"
    lens.export_geometry(g, path)
    first = path.read_bytes()
    table = lens.import_geometry(path)
    again = lens.export_table_csv(table).encode()
    assert first.replace(b"\r\n", b"\n") == again.replace(b"\r\n", b"\n")
