"""Geometry of a single elliptic rollover arc.

The arc is the lower half of an ellipse whose minor axis is vertical in the
foot frame.  Angles:

* ``theta`` - roll angle of the foot (angle between the contact normal and
  the minor axis),
* ``phi``   - rollover angle (angle between the center-to-contact ray and the
  minor axis),
* ``lam``   - elliptic parameter angle, the one the arc-length integral is
  written in.

Arc lengths are measured from the bottom vertex (``phi = 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class EllipseArc:
    r_a: float
    r_b: float
    e: float
    k: float
    E_param: float
    lambda_star: float

    @property
    def is_circle(self) -> bool:
        return self.r_a == self.r_b


@dataclass(frozen=True)
class RollAngles:
    theta: float
    phi: float
    phi_c: float
    lam: float


@dataclass(frozen=True)
class CompensationParams:
    """Calibrated correction for the elementary arc-length formula.

    ``delta_max`` is the signed extremal error (approx - exact, meters) and
    ``lambda_peak`` where it occurs: a parameter angle, or the roll angle when
    ``lambda_star >= pi/2``.  ``form`` records which sine shape is in use,
    ``"printed"`` or ``"hump"``.
    """

    delta_max: float
    lambda_peak: float
    K_e: float = 1.0
    form: str = "hump"
    use_theta: bool = False

    @classmethod
    def zero(cls, K_e: float = 1.0) -> CompensationParams:
        return cls(0.0, 0.0, K_e, "hump", False)


def make_arc(r_a: float, r_b: float) -> EllipseArc:
    r_a = float(r_a)
    r_b = float(r_b)
    if not (r_b > 0.0 and r_a > 0.0):
        raise ValueError(f"axes must be positive, got r_a={r_a}, r_b={r_b}")
    if r_b > r_a:
        raise ValueError(f"r_b={r_b} exceeds r_a={r_a}")
    ratio = r_b / r_a
    e = math.sqrt(max(0.0, 1.0 - ratio * ratio))
    k = math.asin(e)
    E_param = (math.pi * r_b + 4.0 * (r_a - r_b)) / (4.0 * r_a) * (1.0 + ratio**1.5)
    lambda_star = (36.0 * k + 13.0 * math.pi) / 52.0
    return EllipseArc(r_a, r_b, e, k, E_param, lambda_star)


def rollover_from_roll(arc: EllipseArc, theta: float) -> RollAngles:
    """Angles of the contact point when the arc is rolled by ``theta``.

    Valid for ``theta`` in [0, pi); past pi/2 the contact moves over the end
    of the major axis.
    """
    if theta < 0.0 or theta >= math.pi:
        raise ValueError(f"theta={theta} outside [0, pi)")
    a2 = arc.r_a * arc.r_a
    b2 = arc.r_b * arc.r_b
    # atan2 form covers theta = 0 and theta = pi/2 without touching tan
    phi = math.atan2(a2 * math.sin(theta), b2 * math.cos(theta))
    phi_c = HALF_PI - phi
    return RollAngles(theta, phi, phi_c, lambda_from_phi(arc, phi))


def roll_from_rollover(arc: EllipseArc, phi: float) -> float:
    """Inverse of :func:`rollover_from_roll`."""
    a2 = arc.r_a * arc.r_a
    b2 = arc.r_b * arc.r_b
    return math.atan2(b2 * math.sin(phi), a2 * math.cos(phi))


def lambda_from_phi(arc: EllipseArc, phi: float) -> float:
    d = radius_at(arc, phi)
    y = d * math.sin(phi)
    lam = math.asin(min(1.0, max(-1.0, y / arc.r_a)))
    if phi > HALF_PI:
        lam = math.pi - lam
    return lam


def radius_at(arc: EllipseArc, phi):
    """Distance from the ellipse center to the boundary point at ``phi``."""
    a2 = arc.r_a * arc.r_a
    b2 = arc.r_b * arc.r_b
    c = np.cos(phi)
    s = np.sin(phi)
    return np.sqrt(a2 * b2 / (a2 * c * c + b2 * s * s))


def chord_length(arc: EllipseArc, phi):
    """Inner chord from the bottom vertex to the contact point at ``phi``."""
    d = radius_at(arc, phi)
    # (d - r_b)^2 + 4 d r_b sin^2(phi/2) == d^2 + r_b^2 - 2 d r_b cos(phi), without cancellation
    h = np.sin(0.5 * np.asarray(phi))
    return np.sqrt((d - arc.r_b) ** 2 + 4.0 * d * arc.r_b * h * h)


def arc_length_exact(arc: EllipseArc, lam: float) -> float:
    """Arc length from the bottom vertex by adaptive quadrature.

    This is the reference value the elementary formula is judged against.
    """
    if lam == 0.0 or arc.e == 0.0:
        return arc.r_a * lam
    e2 = arc.e * arc.e
    val, _ = integrate.quad(
        lambda u: math.sqrt(1.0 - e2 * math.sin(u) ** 2),
        0.0,
        lam,
        epsabs=1e-12,
        epsrel=0.0,
        limit=200,
    )
    return arc.r_a * val


def arc_length_approx(arc: EllipseArc, lam):
    """Elementary-function approximation of the arc length.

    Accepts scalars or arrays.  The linear correction switches on once
    ``lam`` reaches ``arc.lambda_star``.
    """
    lam = np.asarray(lam, dtype=float)
    two_k_pi = 2.0 * arc.k / math.pi
    base = lam - (lam - np.sin(lam)) * two_k_pi
    ls = arc.lambda_star
    xi = (lam >= ls).astype(float)
    # pi - 2*ls vanishes only for k = pi/2, i.e. a degenerate (flat) ellipse
    tail = (math.pi - (math.pi - 2.0) * two_k_pi - 2.0 * arc.E_param) * (lam - ls) / (math.pi - 2.0 * ls)
    out = arc.r_a * (base - xi * tail)
    return float(out) if out.ndim == 0 else out


def _sine_shape(x, x_ref: float, form: str):
    arg = (np.asarray(x, dtype=float) - 2.0 * x_ref + HALF_PI) / (math.pi - 2.0 * x_ref)
    if form == "printed":
        return np.sin(arg)
    arg = math.pi * arg
    return np.where((arg >= 0.0) & (arg <= math.pi), np.sin(arg), 0.0)


def _correction(arc: EllipseArc, comp: CompensationParams, theta, lam):
    if comp.delta_max == 0.0:
        return np.zeros_like(np.asarray(lam, dtype=float))
    if comp.use_theta:
        shape = _sine_shape(theta, comp.lambda_peak, comp.form)
    else:
        shape = _sine_shape(lam, arc.lambda_star, comp.form)
    # sgn(d) * K * |d| == K * d
    return comp.K_e * comp.delta_max * shape


def arc_length_compensated(arc: EllipseArc, comp: CompensationParams, angles: RollAngles) -> float:
    approx = arc_length_approx(arc, angles.lam)
    return float(approx - _correction(arc, comp, angles.theta, angles.lam))


def _calibration_grid(arc: EllipseArc, grid_n: int):
    theta = np.arange(grid_n) * (HALF_PI / grid_n)
    lam = np.array([rollover_from_roll(arc, t).lam for t in theta])
    exact = np.array([arc_length_exact(arc, l) for l in lam])
    return theta, lam, exact


def calibrate_compensation(arc: EllipseArc, grid_n: int = 1024, K_e: float = 1.0) -> CompensationParams:
    """Find the extremal approximation error on a uniform roll-angle grid.

    The sine argument as printed is tried first.  If it fails to reduce the
    worst relative error, the half-sine hump peaking at the reference angle
    and vanishing at pi/2 is used instead.
    """
    if grid_n < 256:
        raise ValueError(f"grid_n={grid_n} below 256")
    if K_e <= 0.0:
        raise ValueError("K_e must be positive")
    theta, lam, exact = _calibration_grid(arc, grid_n)
    approx = arc_length_approx(arc, lam)
    err = approx - exact
    i = int(np.argmax(np.abs(err)))
    delta = float(err[i])
    if delta == 0.0 or abs(delta) <= 1e-15 * arc.r_a:
        return CompensationParams.zero(K_e)
    use_theta = arc.lambda_star >= HALF_PI
    peak = float(theta[i]) if use_theta else float(lam[i])

    pos = exact > 0.0
    worst_approx = np.max(np.abs(err[pos] / exact[pos]))
    for form in ("printed", "hump"):
        comp = CompensationParams(delta, peak, float(K_e), form, use_theta)
        # zero roll must stay zero length, or the rollover jumps across theta = 0
        if abs(float(_correction(arc, comp, 0.0, 0.0))) > 1e-15 * arc.r_a:
            continue
        fixed = approx - _correction(arc, comp, theta, lam)
        worst = np.max(np.abs((fixed[pos] - exact[pos]) / exact[pos]))
        if worst < worst_approx:
            return comp
    return comp


def compensated_from_roll(arc: EllipseArc, comp: CompensationParams, theta: float) -> float:
    return arc_length_compensated(arc, comp, rollover_from_roll(arc, theta))
