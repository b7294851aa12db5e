import math

import numpy as np
import pytest
from scipy.spatial.distance import directed_hausdorff

import oracles
from esvc import contact, design
from esvc.contact import FootInvariantError
from esvc.design import DesignSpec, InfeasibleSpec
from esvc.ellipse import make_arc


@pytest.fixture(scope="module")
def ea1():
    spec = design.reference_spec("EA1")
    return spec, design.solve_fore_ellipse(spec)


def test_segment_geometry_against_coordinates():
    spec = design.reference_spec("EA1")
    seg = design.segment_geometry(spec.mid, spec.h_foot, spec.theta_m_star)
    ra, rb, h = spec.mid.r_a, spec.mid.r_b, spec.h_foot
    t = oracles.param_angle(ra, rb, spec.theta_m_star)
    s2 = np.array([ra * math.sin(t), -(h - rb) - rb * math.cos(t)])
    bottom = np.array([0.0, -h])
    assert seg.d0 == pytest.approx(np.linalg.norm(s2), abs=1e-14)
    assert seg.b_m_star == pytest.approx(np.linalg.norm(s2 - bottom), abs=1e-14)
    assert seg.alpha6 == pytest.approx(math.atan2(s2[0], -s2[1]), abs=1e-13)
    assert seg.s2_offset == pytest.approx(s2[0], abs=1e-14)
    # the outward normal at S2 makes angle phi with the center ray only on a circle
    assert math.atan2(s2[0], -(s2[1] + (h - rb))) == pytest.approx(seg.phi_m_star, abs=1e-13)


def test_segment_geometry_limits():
    mid = make_arc(0.05, 0.04)
    seg = design.segment_geometry(mid, 0.06, 1e-7)
    assert seg.b_m_star < 1e-8 and seg.alpha6 < 1e-6
    assert seg.d0 == pytest.approx(0.06, abs=1e-8)
    circ = design.segment_geometry(make_arc(0.05, 0.05), 0.06, 0.2)
    assert circ.phi_m_star == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(ValueError):
        design.segment_geometry(mid, 0.06, 0.0)


def test_slopes():
    circle = make_arc(0.05, 0.05)
    eta_m, _ = design.slope_at_segment(circle, (0.05, 0.05), (math.pi / 4, 0.3, 0.0))
    assert eta_m == pytest.approx(1.0, abs=1e-15)
    mid = make_arc(0.05, 0.03)
    _, eta_f = design.slope_at_segment(mid, (0.06, 0.04), (0.2, 0.7, 0.0))
    assert eta_f == pytest.approx((0.04 / 0.06) ** 2 * math.tan(0.7), rel=1e-14)
    # a rotated copy of the mid arc, tilted back, has the same tangent
    tilt = 0.35
    eta_m, eta_f = design.slope_at_segment(mid, (0.05, 0.03), (0.2, 0.2 + 0.0, 0.0))
    assert eta_m == pytest.approx(eta_f, abs=1e-10)
    local = math.atan2(0.03**2 * math.sin(0.9), 0.05**2 * math.cos(0.9))
    eta_m, eta_f = design.slope_at_segment(mid, (0.05, 0.03), (0.9, 0.9, tilt))
    assert eta_f == pytest.approx(math.tan(local - tilt), abs=1e-12)
    # phi = pi/2 is finite through atan2
    assert np.isfinite(design.slope_at_segment(mid, (0.05, 0.03), (1.0, math.pi / 2, 0.2))[1])


def test_reference_solution_feasible(ea1):
    spec, sol = ea1
    res = oracles.independent_constraints(spec, sol)
    assert max(res.values()) <= 1e-6, res
    assert max(design.constraint_residuals(spec, sol).values()) <= 1e-9
    assert make_arc(sol.r_fa, sol.r_fb).e <= spec.mid.e
    assert sol.slope_mismatch < 0.05
    assert sol.n_feasible_starts > 0


def test_reference_solution_is_grid_optimal(ea1):
    spec, sol = ea1
    f_grid, q, w = oracles.grid_objective(spec)
    assert sol.objective <= f_grid + 1e-4
    assert abs(sol.objective - f_grid) <= 1e-4


@pytest.mark.parametrize("mid_id", ["EA2", "EA3"])
def test_other_reference_mids(mid_id):
    spec = design.reference_spec(mid_id)
    sol = design.solve_fore_ellipse(spec, starts=3)
    assert max(oracles.independent_constraints(spec, sol).values()) <= 1e-6
    f_grid, _, _ = oracles.grid_objective(spec, n=800)
    assert sol.objective <= f_grid + 1e-6


def test_solver_is_deterministic():
    spec = design.reference_spec("EA2")
    assert design.solve_fore_ellipse(spec, starts=2) == design.solve_fore_ellipse(spec, starts=2)


def test_scaling(ea1):
    spec, sol = ea1
    s = 2.0
    big = design.solve_fore_ellipse(spec.scaled(s), starts=3)
    assert big.r_fa == pytest.approx(s * sol.r_fa, rel=1e-5)
    assert big.r_fb == pytest.approx(s * sol.r_fb, rel=1e-5)
    assert big.w_foot == pytest.approx(s * sol.w_foot, rel=1e-5)
    assert big.theta_f_star == pytest.approx(sol.theta_f_star, abs=1e-6)


def test_circle_mid_gives_circle_fore():
    spec = DesignSpec(make_arc(0.05, 0.05), 0.05, 0.1, 0.1, w2=0.0, w3=0.0, w4=1e4)
    sol = design.solve_fore_ellipse(spec, starts=3)
    assert sol.r_fa == pytest.approx(sol.r_fb, rel=1e-6)
    assert sol.w_foot == pytest.approx(0.1, abs=1e-5)
    assert sol.slope_mismatch < 1e-8


def test_infeasible_width():
    spec = DesignSpec(make_arc(0.04575, 0.0375), 0.06, 0.15, 0.12, w_foot_max=0.01)
    with pytest.raises(InfeasibleSpec) as err:
        design.solve_fore_ellipse(spec)
    assert err.value.constraint == "width-covers-segment-point"
    assert err.value.max_violation > 0.0


def test_spec_validation():
    with pytest.raises(ValueError):
        DesignSpec(make_arc(0.05, 0.04), 0.06, 2.0, 0.12)
    with pytest.raises(ValueError):
        DesignSpec(make_arc(0.05, 0.04), -0.06, 0.1, 0.12)


def test_assembled_foot(ea1):
    spec, sol = ea1
    foot = design.assemble_foot(spec, sol)
    foot.check_invariants(1e-9)
    a = contact.mid_contact(foot, foot.theta_m_star)
    b = contact.fore_contact(foot, foot.theta_m_star)
    assert np.max(np.abs(a.T_Oi_C - b.T_Oi_C)) < 1e-8


def test_fore_more_eccentric_than_mid_rejected():
    spec = design.reference_spec("EA1")
    sol = design.solution_at(spec, 0.5, 0.12)
    with pytest.raises(FootInvariantError) as err:
        design.assemble_foot(spec, sol)
    assert err.value.invariant == "e_mid>=e_fore"


def test_circle_foot_rolls_linearly():
    r = 0.05
    foot = design.circle_foot(r)
    th = np.linspace(-1.4, 1.4, 57)
    L = [contact.total_rollover_length(foot, t) for t in th]
    np.testing.assert_allclose(L, r * th, atol=1e-12)
    pts, _ = design.export_profile(foot, 64)
    np.testing.assert_allclose(np.hypot(pts[:, 0], pts[:, 1]), r, atol=1e-12)


def test_profile_mirror_and_tags(ea1):
    foot = design.assemble_foot(*ea1)
    n = 128
    pts, tags = design.export_profile(foot, n)
    assert len(pts) == 3 * n and tags[:n] == ["hind"] * n and tags[-1] == "fore"
    # the boundary points appear once per adjoining arc
    np.testing.assert_array_equal(pts[n - 1], pts[n])
    np.testing.assert_array_equal(pts[2 * n - 1], pts[2 * n])
    mirrored = pts[::-1] * [-1.0, 1.0]
    np.testing.assert_allclose(mirrored, pts, atol=1e-12)
    assert design.is_convex(pts)
    # the top corners sit at foot height, half a width out
    np.testing.assert_allclose(pts[-1], [-0.5 * foot.w_foot, 0.0], atol=1e-14)


def test_is_convex_detects_a_dent():
    t = np.linspace(0, math.pi, 50)
    pts = np.column_stack([np.cos(t), -np.sin(t)])
    assert design.is_convex(pts)
    pts[25, 1] += 0.2
    assert not design.is_convex(pts)


def test_profile_refinement(ea1):
    foot = design.assemble_foot(*ea1)
    dense, _ = oracles.profile(foot)
    r_min = min(a.r_b**2 / a.r_a for a in (foot.mid, foot.fore))
    prev = math.inf
    for n in (32, 64, 128, 256):
        pts, _ = design.export_profile(foot, n)
        seg = np.max(np.linalg.norm(np.diff(pts, axis=0), axis=1))
        # resample the coarse polyline so point-set distance approximates polyline distance
        f = np.linspace(0.0, 1.0, 41)[:-1, None, None]
        fine = np.vstack([(pts[:-1] + f * np.diff(pts, axis=0)).reshape(-1, 2), pts[-1:]])
        dist = max(directed_hausdorff(dense, fine)[0], directed_hausdorff(pts, dense)[0])
        # sagitta of the longest chord on the tightest curvature, plus the two spacings
        assert dist <= seg**2 / (8.0 * r_min) + seg / 80.0 + 3e-6
        assert dist < prev
        prev = dist
