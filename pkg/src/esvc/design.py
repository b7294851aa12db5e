"""Fore/hind ellipse design from a known mid ellipse.

Geometry is worked in the engaged-side frame: origin at the foot frame
``O_i``, ``u`` lateral toward the fore side, ``z`` up.  In foot coordinates
the fore side is ``y = -u`` (see :mod:`esvc.contact`), the hind side its
mirror ``y = +u``.

The fore ellipse is pinned down by two geometric facts: its minor axis is
parallel to the chord from the segment point S2 to the foot's top corner S3,
and the perpendicular bisector of that chord is its major axis.  With those,
the feasible set collapses to two free parameters, the axis ratio and the
foot width; the optimizer still works in the full variable set and treats the
two geometric relations as equality constraints.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .contact import FootGeometry, FootInvariantError, _chord, _tri_angle
from .ellipse import (
    HALF_PI,
    CompensationParams,
    EllipseArc,
    arc_length_compensated,
    calibrate_compensation,
    make_arc,
    radius_at,
    rollover_from_roll,
)


class InfeasibleSpec(ValueError):
    """No admissible fore ellipse exists for the spec."""

    def __init__(self, message: str, max_violation: float = float("nan"), constraint: str = ""):
        self.max_violation = max_violation
        self.constraint = constraint
        super().__init__(message)


class DesignNotConverged(RuntimeError):
    """Every start hit the iteration cap before reaching a feasible point."""


@dataclass(frozen=True)
class DesignSpec:
    mid: EllipseArc
    h_foot: float
    theta_m_star: float
    w_foot_nominal: float
    w1: float = 10.0
    w2: float = 1.0
    w3: float = 1.0
    w4: float = 100.0
    d_f_max: float = 0.5
    w_foot_max: float = 0.2
    K_e: float = 1.0
    grid_n: int = 1024

    def __post_init__(self):
        if min(self.w1, self.w2, self.w3, self.w4) < 0.0 or self.w1 <= 0.0:
            raise ValueError("weights must be non-negative with w1 > 0")
        if not 0.0 < self.theta_m_star < HALF_PI:
            raise ValueError(f"theta_m_star={self.theta_m_star} outside (0, pi/2)")
        if self.h_foot <= 0.0 or self.w_foot_nominal <= 0.0:
            raise ValueError("h_foot and w_foot_nominal must be positive")
        if self.d_f_max <= 0.0 or self.w_foot_max <= 0.0:
            raise ValueError("bounds must be positive")

    def scaled(self, s: float) -> DesignSpec:
        """All lengths times ``s``; length-squared weights divided by ``s**2``."""
        return DesignSpec(
            make_arc(self.mid.r_a * s, self.mid.r_b * s),
            self.h_foot * s,
            self.theta_m_star,
            self.w_foot_nominal * s,
            self.w1,
            self.w2 / s**2,
            self.w3 / s**2,
            self.w4 / s**2,
            self.d_f_max * s,
            self.w_foot_max * s,
            self.K_e,
            self.grid_n,
        )


@dataclass(frozen=True)
class DesignSolution:
    r_fa: float
    r_fb: float
    phi_f_star: float
    d_f_star: float
    w_foot: float
    theta_f_star: float
    slope_mismatch: float
    kkt_residual: float
    objective: float
    n_feasible_starts: int = 0


@dataclass(frozen=True)
class SegmentGeometry:
    phi_m_star: float
    b_m_star: float
    alpha0_star: float
    d0: float
    alpha6: float
    alpha7: float
    l_m_star: float
    comp_mid: CompensationParams = field(repr=False)

    def b_s(self, w_foot):
        """Chord S2S3 as a function of the foot width."""
        return np.sqrt(0.25 * w_foot**2 + self.d0**2 - w_foot * self.d0 * math.cos(self.alpha7))

    def alpha8(self, w_foot: float) -> float:
        """Angle at S3 in the triangle O_i S2 S3."""
        bs = float(self.b_s(w_foot))
        return _tri_angle(self.d0 * math.sin(self.alpha7) / bs, self.d0, 0.5 * w_foot, bs)

    @property
    def s2_offset(self) -> float:
        """Lateral distance of S2 from the foot's mid line."""
        return self.d0 * math.sin(self.alpha6)


@functools.lru_cache(maxsize=64)
def _calibrated(arc: EllipseArc, grid_n: int, K_e: float) -> CompensationParams:
    return calibrate_compensation(arc, grid_n, K_e)


def segment_geometry(mid: EllipseArc, h_foot: float, theta_m_star: float, comp_mid: CompensationParams | None = None) -> SegmentGeometry:
    if not 0.0 < theta_m_star < HALF_PI:
        raise ValueError(f"theta_m_star={theta_m_star} outside (0, pi/2)")
    if comp_mid is None:
        comp_mid = _calibrated(mid, 1024, 1.0)
    ang = rollover_from_roll(mid, theta_m_star)
    d = float(radius_at(mid, ang.phi))
    b = _chord(d, mid.r_b, ang.phi)
    if b <= 0.0:
        raise ValueError("degenerate segment triangle: S2 coincides with the bottom point")
    a0 = _tri_angle(d * math.sin(ang.phi) / b, d, mid.r_b, b)
    d0 = math.sqrt((h_foot - b) ** 2 + 4.0 * h_foot * b * math.sin(0.5 * a0) ** 2)
    a6 = _tri_angle(b * math.sin(a0) / d0, b, h_foot, d0)
    l_m = arc_length_compensated(mid, comp_mid, ang)
    return SegmentGeometry(ang.phi, b, a0, d0, a6, HALF_PI - a6, l_m, comp_mid)


def slope_at_segment(mid: EllipseArc, fore_candidate, angles) -> tuple[float, float]:
    """Tangent slopes of the mid and fore arcs at S2.

    ``fore_candidate`` is ``(r_fa, r_fb)``; ``angles`` is
    ``(phi_m_star, phi_f_star, tilt)`` where ``tilt`` is the angle of the fore
    minor axis from the foot vertical.  Both slopes are measured in the foot
    frame, so matching slopes means a tangent-continuous profile.
    """
    r_fa, r_fb = fore_candidate
    phi_m, phi_f, tilt = angles
    if not (0.0 <= phi_m < math.pi and 0.0 <= phi_f < math.pi):
        raise ValueError("rollover angles outside [0, pi)")
    # atan2 keeps phi = pi/2 finite: the local tangent angle is then pi/2
    eta_m = math.tan(math.atan2(mid.r_b**2 * math.sin(phi_m), mid.r_a**2 * math.cos(phi_m)))
    # local slope of the fore arc, then undo its tilt
    local = math.atan2(r_fb * r_fb * math.sin(phi_f), r_fa * r_fa * math.cos(phi_f))
    eta_f = math.tan(local - tilt)
    return eta_m, eta_f


# -- the program -------------------------------------------------------------


def _fore_angles(r_fa: float, r_fb: float, theta_f: float) -> tuple[float, float]:
    """phi_f* from the roll relation and d_f* from the radius formula."""
    phi_f = math.atan2(r_fa * r_fa * math.sin(theta_f), r_fb * r_fb * math.cos(theta_f))
    d_f = math.sqrt(
        (r_fa * r_fb) ** 2 / ((r_fa * math.cos(phi_f)) ** 2 + (r_fb * math.sin(phi_f)) ** 2)
    )
    return phi_f, d_f


@dataclass
class _Problem:
    spec: DesignSpec
    seg: SegmentGeometry
    L: float
    f0: float

    def unpack(self, z):
        L = self.L
        return L * z[0], L * z[1], L * z[2], z[3]

    def parts(self, z):
        r_fa, r_fb, w, th_f = self.unpack(z)
        sp, seg = self.spec, self.seg
        phi_f, d_f = _fore_angles(r_fa, r_fb, th_f)
        a8 = seg.alpha8(w)
        eta_m, eta_f = slope_at_segment(sp.mid, (r_fa, r_fb), (seg.phi_m_star, phi_f, HALF_PI - a8))
        f = (
            sp.w1 * (eta_m - eta_f) ** 2
            + sp.w2 * r_fa**2
            + sp.w3 * r_fb**2
            + sp.w4 * (w - sp.w_foot_nominal) ** 2
        )
        eq = np.array([
            (0.5 * float(seg.b_s(w)) - math.cos(phi_f) * d_f) / self.L,
            th_f - sp.theta_m_star - (HALF_PI - a8),
        ])
        q_m = sp.mid.r_b / sp.mid.r_a
        ineq = np.array([
            (0.5 * w - seg.s2_offset) / self.L,
            eta_f * eta_f - eta_m * eta_m,
            r_fb / r_fa - q_m,
            (r_fa - r_fb) / self.L,
            (sp.d_f_max - d_f) / self.L,
        ])
        return f, eq, ineq, (phi_f, d_f, eta_m, eta_f)

    def aug(self, z, lam, nu, mu):
        f, eq, ineq, _ = self.parts(z)
        val = f / self.f0 + lam @ eq + 0.5 * mu * eq @ eq
        # PHR term for g >= 0
        val += (np.sum(np.maximum(0.0, nu - mu * ineq) ** 2) - nu @ nu) / (2.0 * mu)
        return val

    def violation(self, z) -> float:
        _, eq, ineq, _ = self.parts(z)
        return float(max(np.max(np.abs(eq)), np.max(np.maximum(0.0, -ineq))))


INEQ_NAMES = ("width-covers-segment-point", "slope-order", "eccentricity-order", "axis-order", "d_f-bound")


def _al_solve(prob: _Problem, z0, bounds, tol=1e-8, max_outer=20, max_inner=100):
    z = np.array(z0, dtype=float)
    lam = np.zeros(2)
    nu = np.zeros(5)
    mu = 10.0
    last = math.inf
    converged = False
    for _ in range(max_outer):
        res = optimize.minimize(
            prob.aug, z, args=(lam, nu, mu), method="L-BFGS-B", bounds=bounds,
            options={"maxiter": max_inner, "ftol": 1e-14, "gtol": 1e-9},
        )
        z = res.x
        _, eq, ineq, _ = prob.parts(z)
        lam = lam + mu * eq
        nu = np.maximum(0.0, nu - mu * ineq)
        viol = prob.violation(z)
        if viol < tol:
            converged = True
            break
        if viol > 0.25 * last:
            mu = min(mu * 10.0, 1e12)
        last = viol
    return z, lam, nu, mu, converged


def _on_manifold(prob: _Problem, q: float, w: float):
    """The unique point satisfying both equalities for axis ratio q and width w."""
    th_f = prob.spec.theta_m_star + HALF_PI - prob.seg.alpha8(w)
    if not 0.0 < th_f < HALF_PI:
        return None
    phi_f, rho = _fore_angles(1.0, q, th_f)
    r_fa = 0.5 * float(prob.seg.b_s(w)) / (rho * math.cos(phi_f))
    return np.array([r_fa / prob.L, q * r_fa / prob.L, w / prob.L, th_f])


def _restore(prob: _Problem, z):
    """Land exactly on the equality manifold, keeping ratio and width."""
    r_fa, r_fb, w, _ = prob.unpack(z)
    q = min(1.0, max(prob.spec.mid.r_b / prob.spec.mid.r_a, r_fb / r_fa))
    return _on_manifold(prob, q, w)


def _reduced_bounds(prob: _Problem, bounds):
    q_m = prob.spec.mid.r_b / prob.spec.mid.r_a
    return [(q_m, 1.0), bounds[2]]


def _reduced_obj(prob: _Problem, x) -> float:
    z = _on_manifold(prob, x[0], x[1] * prob.L)
    if z is None:
        return math.inf
    return prob.parts(z)[0] / prob.f0


def _polish(prob: _Problem, z, bounds):
    """Local refinement over (axis ratio, width) with the equalities eliminated."""
    x0 = np.array([z[1] / z[0], z[2]])
    res = optimize.minimize(
        lambda x: _reduced_obj(prob, x), x0, method="L-BFGS-B",
        bounds=_reduced_bounds(prob, bounds), options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 200},
    )
    zp = _on_manifold(prob, res.x[0], res.x[1] * prob.L)
    if zp is None or _feasible(prob, zp, bounds) is not True:
        return z
    return zp if prob.parts(zp)[0] <= prob.parts(z)[0] else z


def _feasible(prob: _Problem, z, bounds, tol: float = 1e-9):
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    if np.any(z < lo) or np.any(z > hi):
        return (0.0, "variable-bounds")
    _, eq, ineq, _ = prob.parts(z)
    if np.max(np.abs(eq)) > tol or np.min(ineq) < -tol:
        i = int(np.argmin(ineq))
        return (float(max(-ineq[i], np.max(np.abs(eq)))), INEQ_NAMES[i])
    return True


def _kkt(prob: _Problem, z, bounds) -> float:
    """Projected reduced-gradient norm plus primal violation."""
    x = np.array([z[1] / z[0], z[2]])
    rb = _reduced_bounds(prob, bounds)
    g = optimize.approx_fprime(x, lambda v: _reduced_obj(prob, np.clip(v, [b[0] for b in rb], [b[1] for b in rb])), 1e-7)
    pg = np.clip(x - g, [b[0] for b in rb], [b[1] for b in rb]) - x
    return float(max(np.max(np.abs(pg)), prob.violation(z)))


def _precheck(spec: DesignSpec, seg: SegmentGeometry) -> None:
    need = seg.s2_offset
    if 0.5 * spec.w_foot_max < need:
        raise InfeasibleSpec(
            f"foot width bound {spec.w_foot_max} cannot cover the segment point "
            f"(needs w_foot >= {2 * need:.6g})",
            max_violation=need - 0.5 * spec.w_foot_max,
            constraint=INEQ_NAMES[0],
        )


def solve_fore_ellipse(spec: DesignSpec, starts: int = 5) -> DesignSolution:
    """Best feasible local solution over a fixed multi-start grid."""
    comp_mid = _calibrated(spec.mid, spec.grid_n, spec.K_e)
    seg = segment_geometry(spec.mid, spec.h_foot, spec.theta_m_star, comp_mid)
    _precheck(spec, seg)

    L = spec.mid.r_a
    f0 = spec.w1 + (spec.w2 + spec.w3 + spec.w4) * L * L
    prob = _Problem(spec, seg, L, f0)
    eps = 1e-6
    bounds = [
        (eps, spec.d_f_max / L),
        (eps, spec.d_f_max / L),
        (max(eps, 2.0 * seg.s2_offset / L * (1 - 1e-12)), spec.w_foot_max / L),
        (eps, HALF_PI - eps),
    ]

    q_m = spec.mid.r_b / spec.mid.r_a
    w_lo, w_hi = bounds[2][0] * L, spec.w_foot_max
    grid = lambda lo, hi: lo + (hi - lo) * (np.arange(starts) + 0.5) / starts
    candidates = []
    worst = (0.0, "")
    any_capped = False
    for phi0, q0, w0 in itertools.product(grid(0.05, HALF_PI - 0.05), grid(q_m, 1.0), grid(w_lo, w_hi)):
        th0 = math.atan(q0 * q0 * math.tan(phi0))
        rho = float(radius_at(make_arc(1.0, q0), phi0))
        r0 = 0.5 * float(seg.b_s(w0)) / (rho * math.cos(phi0))
        z0 = np.array([r0 / L, q0 * r0 / L, w0 / L, th0])
        z0 = np.clip(z0, [b[0] for b in bounds], [b[1] for b in bounds])
        z, _, _, _, ok = _al_solve(prob, z0, bounds)
        any_capped |= not ok
        zr = _restore(prob, z)
        if zr is None:
            continue
        status = _feasible(prob, zr, bounds)
        if status is not True:
            if status[0] > worst[0]:
                worst = status
            continue
        candidates.append((prob.parts(zr)[0], zr))

    if not candidates:
        if any_capped and worst[0] == 0.0:
            raise DesignNotConverged("no start reached a feasible point within the iteration cap")
        raise InfeasibleSpec(
            f"no feasible fore ellipse; worst violation {worst[0]:.3e} on {worst[1] or 'geometry'}",
            max_violation=worst[0],
            constraint=worst[1],
        )

    best_f = min(c[0] for c in candidates)
    tied = [c for c in candidates if c[0] <= best_f + 1e-12 * max(1.0, abs(best_f))]
    _, z = min(tied, key=lambda c: (c[1][0], c[1][1]))
    z = _polish(prob, z, bounds)
    f, _, _, (phi_f, d_f, eta_m, eta_f) = prob.parts(z)
    r_fa, r_fb, w, th_f = prob.unpack(z)
    return DesignSolution(
        r_fa=float(r_fa), r_fb=float(r_fb), phi_f_star=phi_f, d_f_star=d_f, w_foot=float(w),
        theta_f_star=float(th_f), slope_mismatch=abs(eta_m - eta_f),
        kkt_residual=_kkt(prob, z, bounds), objective=float(f),
        n_feasible_starts=len(candidates),
    )


def solution_at(spec: DesignSpec, q: float, w_foot: float) -> DesignSolution:
    """The design point with axis ratio ``q`` and width ``w_foot`` that meets both equalities.

    Handy for building non-optimal but admissible feet, e.g. with an
    elliptic fore arc.  No inequality is checked here.
    """
    seg = segment_geometry(spec.mid, spec.h_foot, spec.theta_m_star, _calibrated(spec.mid, spec.grid_n, spec.K_e))
    L = spec.mid.r_a
    prob = _Problem(spec, seg, L, spec.w1 + (spec.w2 + spec.w3 + spec.w4) * L * L)
    z = _on_manifold(prob, q, w_foot)
    if z is None:
        raise InfeasibleSpec(f"width {w_foot} puts the fore roll angle outside (0, pi/2)")
    f, _, _, (phi_f, d_f, eta_m, eta_f) = prob.parts(z)
    r_fa, r_fb, w, th_f = prob.unpack(z)
    return DesignSolution(float(r_fa), float(r_fb), phi_f, d_f, float(w), float(th_f), abs(eta_m - eta_f), math.nan, float(f))


def constraint_residuals(spec: DesignSpec, sol: DesignSolution) -> dict[str, float]:
    """Every constraint of the program evaluated at ``sol``.

    Equalities report ``|residual|``; inequalities report the violation
    ``max(0, -g)``.  Positive entries mean the constraint is broken.
    """
    seg = segment_geometry(spec.mid, spec.h_foot, spec.theta_m_star, _calibrated(spec.mid, spec.grid_n, spec.K_e))
    a8 = seg.alpha8(sol.w_foot)
    phi_f, d_f = _fore_angles(sol.r_fa, sol.r_fb, sol.theta_f_star)
    eta_m, eta_f = slope_at_segment(spec.mid, (sol.r_fa, sol.r_fb), (seg.phi_m_star, sol.phi_f_star, HALF_PI - a8))
    fore = make_arc(sol.r_fa, sol.r_fb) if sol.r_fa >= sol.r_fb else None
    return {
        "segment-chord-bisector": abs(0.5 * float(seg.b_s(sol.w_foot)) - math.cos(sol.phi_f_star) * sol.d_f_star),
        "segment-roll-offset": abs(sol.theta_f_star - spec.theta_m_star - (HALF_PI - a8)),
        "roll-rollover-relation": abs(sol.phi_f_star - phi_f),
        "radius-relation": abs(sol.d_f_star - d_f),
        "width-covers-segment-point": max(0.0, seg.s2_offset - 0.5 * sol.w_foot),
        "slope-order": max(0.0, eta_m * eta_m - eta_f * eta_f),
        "eccentricity-order": max(0.0, (fore.e if fore else 1.0) - spec.mid.e),
        "axis-order": max(0.0, sol.r_fb - sol.r_fa),
        "positivity": max(0.0, -min(sol.r_fa, sol.r_fb, sol.phi_f_star, sol.d_f_star)),
        "phi_f-bound": max(0.0, -sol.phi_f_star, sol.phi_f_star - HALF_PI),
        "d_f-bound": max(0.0, sol.d_f_star - spec.d_f_max),
        "w_foot-bound": max(0.0, -sol.w_foot, sol.w_foot - spec.w_foot_max),
    }


# -- assembly ----------------------------------------------------------------


def _bisect_alpha10(fore: EllipseArc, tilt: float, lo: float, tol: float = 1e-12) -> float:
    """Roll angle at which the fore contact reaches the major-axis end."""
    f = lambda th: rollover_from_roll(fore, min(th + tilt, math.pi - 1e-15)).phi - HALF_PI
    hi = HALF_PI
    if f(lo) >= 0.0:
        return lo
    if f(hi) < 0.0:
        return hi
    while hi - lo > tol:
        m = 0.5 * (lo + hi)
        if f(m) < 0.0:
            lo = m
        else:
            hi = m
    return 0.5 * (lo + hi)


def build_foot(
    mid: EllipseArc,
    fore: EllipseArc,
    h_foot: float,
    theta_m_star: float,
    w_foot: float,
    l_foot: float,
    comp_mid: CompensationParams,
    comp_fore: CompensationParams,
    tol: float = 1e-6,
) -> FootGeometry:
    seg = segment_geometry(mid, h_foot, theta_m_star, comp_mid)
    a8 = seg.alpha8(w_foot)
    theta_f = theta_m_star + HALF_PI - a8
    if not 0.0 < theta_f < HALF_PI:
        raise FootInvariantError("segment-roll-offset", f"theta_f*={theta_f} outside (0, pi/2)")
    phi_f, d_f = _fore_angles(fore.r_a, fore.r_b, theta_f)
    tilt = theta_f - theta_m_star
    l_f_star = arc_length_compensated(fore, comp_fore, rollover_from_roll(fore, theta_f))
    l_f_quarter = arc_length_compensated(fore, comp_fore, rollover_from_roll(fore, HALF_PI)) - l_f_star
    foot = FootGeometry(
        mid=mid, fore=fore, hind=fore, h_foot=h_foot, w_foot=w_foot, l_foot=l_foot,
        theta_m_star=theta_m_star, phi_m_star=seg.phi_m_star, phi_f_star=phi_f,
        theta_f_star=theta_f, d_f_star=d_f, d0=seg.d0, alpha6=seg.alpha6, alpha7=seg.alpha7,
        alpha8=a8, b_s=float(seg.b_s(w_foot)),
        alpha10=_bisect_alpha10(fore, tilt, theta_m_star),
        comp_mid=comp_mid, comp_fore=comp_fore, l_m_star=seg.l_m_star, l_f_quarter=l_f_quarter,
    )
    foot.check_invariants(tol)
    return foot


def assemble_foot(spec: DesignSpec, sol: DesignSolution, l_foot: float = 0.2) -> FootGeometry:
    """Turn a design solution into a validated foot."""
    if l_foot <= 0.0:
        raise ValueError("l_foot must be positive")
    fore = make_arc(sol.r_fa, sol.r_fb)
    foot = build_foot(
        spec.mid, fore, spec.h_foot, spec.theta_m_star, sol.w_foot, l_foot,
        _calibrated(spec.mid, spec.grid_n, spec.K_e), _calibrated(fore, spec.grid_n, spec.K_e),
    )
    _check_continuity(foot)
    pts, _ = export_profile(foot, 256)
    if not is_convex(pts):
        raise FootInvariantError("convex-profile")
    return foot


def _check_continuity(foot: FootGeometry, tol: float = 1e-8) -> None:
    from .contact import fore_contact, mid_contact

    a = mid_contact(foot, foot.theta_m_star).T_Oi_C
    b = fore_contact(foot, foot.theta_m_star).T_Oi_C
    gap = float(np.max(np.abs(a - b)))
    if gap > tol:
        raise FootInvariantError("mid-fore-continuity", f"pose gap {gap:.3e} at S2")


def circle_foot(r: float, theta_m_star: float = 0.3, l_foot: float = 0.2) -> FootGeometry:
    """Constant-curvature foot: every arc is the same circle centered at O_i."""
    arc = make_arc(r, r)
    zero = CompensationParams.zero()
    return build_foot(arc, arc, r, theta_m_star, 2.0 * r, l_foot, zero, zero)


# -- profile -----------------------------------------------------------------


def _fore_frame(foot: FootGeometry):
    """Fore ellipse center and axis directions in the engaged-side (u, z) frame."""
    mid = foot.mid
    c_mid = np.array([0.0, -(foot.h_foot - mid.r_b)])
    d_m = float(radius_at(mid, foot.phi_m_star))
    s2 = c_mid + d_m * np.array([math.sin(foot.phi_m_star), -math.cos(foot.phi_m_star)])
    s3 = np.array([0.5 * foot.w_foot, 0.0])
    m_hat = (s2 - s3) / np.linalg.norm(s2 - s3)
    a_hat = np.array([-m_hat[1], m_hat[0]])
    if a_hat[0] < 0.0:
        a_hat = -a_hat
    center = 0.5 * (s2 + s3) - foot.d_f_star * math.sin(foot.phi_f_star) * a_hat
    return center, m_hat, a_hat, s2, s3


def export_profile(foot: FootGeometry, n: int = 256):
    """Frontal-plane profile from the hind top corner to the fore top corner.

    Returns ``(points, tags)``: an (M, 2) array of foot-frame (y, z) and the
    segment tag per point.  Each arc gets ``n`` points and the two segment
    points appear once per adjoining arc.
    """
    if n < 16:
        raise ValueError("n must be at least 16")
    mid = foot.mid
    c_mid = np.array([0.0, -(foot.h_foot - mid.r_b)])
    phi = np.linspace(-foot.phi_m_star, foot.phi_m_star, n)
    d = radius_at(mid, phi)
    mid_uz = np.column_stack([c_mid[0] + d * np.sin(phi), c_mid[1] - d * np.cos(phi)])

    center, m_hat, a_hat, s2, s3 = _fore_frame(foot)
    fore = foot.fore
    # along the fore arc, S2 sits at phi_f* and the top corner S3 at pi - phi_f*
    phi_f = np.linspace(foot.phi_f_star, math.pi - foot.phi_f_star, n)
    d_f = radius_at(fore, phi_f)
    fore_uz = center + d_f[:, None] * (np.cos(phi_f)[:, None] * m_hat + np.sin(phi_f)[:, None] * a_hat)
    fore_uz[0], fore_uz[-1] = s2, s3

    # u runs toward the fore side, foot y = -u
    to_y = lambda uz: np.column_stack([-uz[:, 0], uz[:, 1]])
    hind = to_y(fore_uz * [-1.0, 1.0])[::-1]
    pts = np.vstack([hind, to_y(mid_uz), to_y(fore_uz)])
    tags = ["hind"] * n + ["mid"] * n + ["fore"] * n
    return pts, tags


def is_convex(points, tol: float = 1e-12) -> bool:
    """Cross-product scan: every turn of the open polyline has the same sign."""
    p = np.asarray(points, dtype=float)
    seg = np.diff(p, axis=0)
    keep = np.linalg.norm(seg, axis=1) > 1e-15
    seg = seg[keep]
    cross = seg[:-1, 0] * seg[1:, 1] - seg[:-1, 1] * seg[1:, 0]
    scale = np.linalg.norm(seg[:-1], axis=1) * np.linalg.norm(seg[1:], axis=1)
    rel = cross / scale
    return bool(np.all(rel >= -tol) or np.all(rel <= tol))


# -- reference designs ---------------------------------------------------------

REFERENCE_AXES = {
    "EA1": (0.04575, 0.03750),
    "EA2": (0.05205, 0.03150),
    "EA3": (0.06901, 0.02595),
}


def reference_spec(mid_id: str = "EA1") -> DesignSpec:
    r_a, r_b = REFERENCE_AXES[mid_id]
    return DesignSpec(make_arc(r_a, r_b), h_foot=0.06, theta_m_star=0.15, w_foot_nominal=0.12)


@functools.lru_cache(maxsize=8)
def reference_foot(mid_id: str = "EA1", l_foot: float = 0.2) -> FootGeometry:
    spec = reference_spec(mid_id)
    return assemble_foot(spec, solve_fore_ellipse(spec), l_foot)
