"""Rolling-contact kinematics of the three-arc foot.

Frames (all right-handed, x sagittal, y lateral, z up):

* ``O_i`` - foot frame at the center of the foot's upper surface,
* ``O_C`` - fixed ground frame at the zero-roll contact point,
* ``C``   - contact frame at the current ground contact, aligned with ``O_C``.

``T_Oi_C`` maps foot coordinates to contact coordinates and ``T_OC_C`` maps
ground coordinates to contact coordinates.  A positive roll is a positive
rotation about x: the foot's -y side goes down, the fore arc (on the -y side)
takes the load and the contact walks toward -y, so the ground origin sits at
``+sgn(theta) * rollover_length`` in ``C``.  Negative roll engages the hind
arc, the mirror image of the fore arc.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import transforms as tf
from .ellipse import (
    HALF_PI,
    CompensationParams,
    EllipseArc,
    arc_length_compensated,
    arc_length_exact,
    radius_at,
    rollover_from_roll,
)


class Segment(enum.Enum):
    MID = "mid"
    FORE = "fore"
    HIND = "hind"
    TOE_REGION = "toe"


class FootInvariantError(ValueError):
    """Raised when a FootGeometry breaks one of its invariants."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}" if detail else invariant)


@dataclass(frozen=True)
class FootGeometry:
    mid: EllipseArc
    fore: EllipseArc
    hind: EllipseArc
    h_foot: float
    w_foot: float
    l_foot: float
    theta_m_star: float
    phi_m_star: float
    phi_f_star: float
    theta_f_star: float
    d_f_star: float
    d0: float
    alpha6: float
    alpha7: float
    alpha8: float
    b_s: float
    alpha10: float
    comp_mid: CompensationParams
    comp_fore: CompensationParams
    l_m_star: float
    l_f_quarter: float

    @property
    def fore_tilt(self) -> float:
        """Angle between the fore minor axis and the foot's vertical."""
        return self.theta_f_star - self.theta_m_star

    @property
    def roll_limit(self) -> float:
        """Largest admissible |roll|: the toe edge or the top corner, whichever comes first."""
        return min(HALF_PI, math.pi - self.theta_f_star - self.fore_tilt)

    def check_invariants(self, tol: float = 1e-6) -> None:
        if (self.hind.r_a, self.hind.r_b) != (self.fore.r_a, self.fore.r_b):
            raise FootInvariantError("hind-mirrors-fore")
        if self.mid.e < self.fore.e - 1e-12:
            raise FootInvariantError("e_mid>=e_fore", f"{self.mid.e} < {self.fore.e}")
        if not 0.0 < self.theta_m_star < HALF_PI:
            raise FootInvariantError("theta_m_star-range", str(self.theta_m_star))
        if not 0.0 < self.phi_f_star < HALF_PI:
            raise FootInvariantError("phi_f_star-range", str(self.phi_f_star))
        lengths = (self.h_foot, self.w_foot, self.l_foot, self.d_f_star, self.d0, self.b_s, self.l_m_star, self.l_f_quarter)
        if min(lengths) <= 0.0:
            raise FootInvariantError("positive-lengths", str(lengths))
        r21 = 0.5 * self.b_s - math.cos(self.phi_f_star) * self.d_f_star
        if abs(r21) > tol:
            raise FootInvariantError("segment-chord-bisector", f"residual {r21:.3e}")
        r22 = self.theta_f_star - self.theta_m_star - (HALF_PI - self.alpha8)
        if abs(r22) > tol:
            raise FootInvariantError("segment-roll-offset", f"residual {r22:.3e}")


@dataclass(frozen=True)
class LineFoot:
    """Degenerate foot: a point in the frontal plane, a line sagittally."""

    h_foot: float
    l_foot: float = 0.2


@dataclass(frozen=True)
class ContactSolution:
    T_OC_C: np.ndarray
    T_Oi_C: np.ndarray
    rollover_length: float
    segment: Segment


def _sgn(x: float) -> float:
    return 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)


def _asin(x: float) -> float:
    if abs(x) > 1.0 + 1e-12:
        raise ValueError(f"arcsine argument {x} out of range")
    return math.asin(min(1.0, max(-1.0, x)))


def _tri_angle(sin_value: float, opposite: float, a: float, b: float) -> float:
    """Triangle angle from its sine, obtuse when the opposite side demands it."""
    ang = _asin(sin_value)
    if opposite * opposite > a * a + b * b:
        ang = math.pi - ang
    return ang


def _chord(d1: float, d2: float, angle: float) -> float:
    h = math.sin(0.5 * angle)
    return math.sqrt((d1 - d2) ** 2 + 4.0 * d1 * d2 * h * h)


def _pose(theta: float, y: float, z: float) -> np.ndarray:
    T = tf.rot_x(theta)
    T[1, 3] = y
    T[2, 3] = z
    return T


# -- rollover lengths -------------------------------------------------------


def _mid_length(foot: FootGeometry, theta_abs: float) -> float:
    return arc_length_compensated(foot.mid, foot.comp_mid, rollover_from_roll(foot.mid, theta_abs))


def _fore_length(foot: FootGeometry, theta_f: float) -> float:
    """Compensated fore arc length from its own minor-axis vertex, theta_f in [0, pi)."""
    if theta_f <= HALF_PI:
        return arc_length_compensated(foot.fore, foot.comp_fore, rollover_from_roll(foot.fore, theta_f))
    quarter = arc_length_compensated(foot.fore, foot.comp_fore, rollover_from_roll(foot.fore, HALF_PI))
    mirror = arc_length_compensated(foot.fore, foot.comp_fore, rollover_from_roll(foot.fore, math.pi - theta_f))
    return 2.0 * quarter - mirror


def _fore_length_exact(foot: FootGeometry, theta_f: float) -> float:
    arc = foot.fore
    if theta_f <= HALF_PI:
        return arc_length_exact(arc, rollover_from_roll(arc, theta_f).lam)
    quarter = arc_length_exact(arc, HALF_PI)
    return 2.0 * quarter - arc_length_exact(arc, rollover_from_roll(arc, math.pi - theta_f).lam)


def total_rollover_length(foot, theta: float) -> float:
    """Signed rollover length along the whole profile, compensated."""
    if isinstance(foot, LineFoot):
        return 0.0
    th = abs(theta)
    if th >= HALF_PI:
        raise ValueError(f"|theta|={th} at or past the toe edge")
    if th < foot.theta_m_star:
        return _sgn(theta) * _mid_length(foot, th)
    theta_f = th + foot.fore_tilt
    if theta_f > math.pi - foot.theta_f_star:
        raise ValueError(f"|theta|={th}: contact has passed the foot's top corner")
    inc = _fore_length(foot, theta_f) - _fore_length(foot, foot.theta_f_star)
    return _sgn(theta) * (foot.l_m_star + inc)


def total_rollover_length_exact(foot, theta: float) -> float:
    """Same as :func:`total_rollover_length` with quadrature arc lengths."""
    if isinstance(foot, LineFoot):
        return 0.0
    th = abs(theta)
    if th >= HALF_PI:
        raise ValueError(f"|theta|={th} at or past the toe edge")
    mid = foot.mid
    if th < foot.theta_m_star:
        return _sgn(theta) * arc_length_exact(mid, rollover_from_roll(mid, th).lam)
    l_m = arc_length_exact(mid, rollover_from_roll(mid, foot.theta_m_star).lam)
    theta_f = th + foot.fore_tilt
    inc = _fore_length_exact(foot, theta_f) - _fore_length_exact(foot, foot.theta_f_star)
    return _sgn(theta) * (l_m + inc)


# -- frame chains ------------------------------------------------------------


def mid_contact(foot: FootGeometry, theta: float) -> ContactSolution:
    th = abs(theta)
    s = _sgn(theta)
    arc = foot.mid
    ang = rollover_from_roll(arc, th)
    d = float(radius_at(arc, ang.phi))
    b = _chord(d, arc.r_b, ang.phi)
    if b == 0.0:
        y_oc, z_oc = 0.0, 0.0
    else:
        sin_phi = math.sin(ang.phi)
        a1 = _asin(arc.r_b * sin_phi / b)
        a3 = math.pi - ang.phi_c - th
        a4 = math.pi - a3 - a1
        y_oc = s * b * math.cos(a4)
        z_oc = b * math.sin(a4)
    # O_C' is the foot's original bottom point; O_i sits h_foot above it
    T_ocp_c = _pose(theta, y_oc, z_oc)
    T_oi_c = T_ocp_c @ tf.translation(0.0, 0.0, foot.h_foot)
    length = s * arc_length_compensated(arc, foot.comp_mid, ang)
    return ContactSolution(tf.translation(0.0, length, 0.0), T_oi_c, length, Segment.MID)


def fore_contact(foot: FootGeometry, theta: float) -> ContactSolution:
    th = abs(theta)
    s = _sgn(theta)
    if th >= HALF_PI:
        raise ValueError(f"|theta|={th} at or past the toe edge")
    arc = foot.fore
    theta_f = th + foot.fore_tilt
    if theta_f > math.pi - foot.theta_f_star:
        raise ValueError(f"|theta|={th}: contact has passed the foot's top corner")
    ang = rollover_from_roll(arc, theta_f)
    a9 = ang.phi - foot.phi_f_star
    d_f = float(radius_at(arc, ang.phi))
    b_f = _chord(foot.d_f_star, d_f, a9)
    if b_f == 0.0:
        l_oic, a15 = foot.d0, 0.0
    else:
        a11 = _tri_angle(d_f * math.sin(a9) / b_f, d_f, foot.d_f_star, b_f)
        a12 = math.pi - foot.alpha8 - foot.alpha7
        a13 = a12 - foot.phi_f_star
        a14 = a13 + a11
        l_oic = math.sqrt((b_f - foot.d0) ** 2 + 4.0 * b_f * foot.d0 * math.sin(0.5 * a14) ** 2)
        a15 = _tri_angle(b_f * math.sin(a14) / l_oic, b_f, foot.d0, l_oic)
    a16 = HALF_PI - foot.alpha6 + th
    a18 = a16 - a15
    T_oi_c = _pose(theta, s * l_oic * math.cos(a18), l_oic * math.sin(a18))

    length = total_rollover_length(foot, theta)
    if th >= foot.alpha10:
        seg = Segment.TOE_REGION
    else:
        seg = Segment.FORE if s >= 0 else Segment.HIND
    return ContactSolution(tf.translation(0.0, length, 0.0), T_oi_c, length, seg)


def line_contact(foot: LineFoot, theta: float) -> ContactSolution:
    T = tf.rot_x(theta) @ tf.translation(0.0, 0.0, foot.h_foot)
    return ContactSolution(np.eye(4), T, 0.0, Segment.MID)


def contact(foot, theta: float) -> ContactSolution:
    """Dispatch to the segment that carries the load at roll ``theta``."""
    if isinstance(foot, LineFoot):
        return line_contact(foot, theta)
    if abs(theta) < foot.theta_m_star:
        return mid_contact(foot, theta)
    return fore_contact(foot, theta)


# -- full pose ---------------------------------------------------------------


def _check_angles(roll: float, pitch: float) -> None:
    if abs(roll) >= HALF_PI:
        raise ValueError(f"roll {roll} outside (-pi/2, pi/2)")
    if abs(pitch) >= HALF_PI:
        raise ValueError(f"pitch {pitch} outside (-pi/2, pi/2)")


def _edge_offset(foot, pitch: float) -> float:
    return _sgn(pitch) * 0.5 * foot.l_foot


def pitch_transform(foot, pitch: float) -> np.ndarray:
    """Rigid rotation about the foot's end edge, contact frame moved to the edge."""
    return tf.rot_y(pitch) @ tf.translation(-_edge_offset(foot, pitch), 0.0, 0.0)


def full_transform(foot, roll: float, pitch: float = 0.0, yaw: float = 0.0) -> np.ndarray:
    """``T_Oi_C`` for the composed yaw * pitch * roll pose."""
    _check_angles(roll, pitch)
    return tf.rot_z(yaw) @ pitch_transform(foot, pitch) @ contact(foot, roll).T_Oi_C


def fixed_transform(foot, roll: float, pitch: float = 0.0, yaw: float = 0.0) -> np.ndarray:
    """Companion ``T_OC_C`` for the same pose."""
    _check_angles(roll, pitch)
    T_roll = tf.translation(0.0, total_rollover_length(foot, roll), 0.0)
    return tf.rot_z(yaw) @ tf.translation(-_edge_offset(foot, pitch), 0.0, 0.0) @ T_roll


def com_and_swing_in_contact(foot, T: np.ndarray, p_com_body, p_sw_body):
    return tf.apply(T, p_com_body), tf.apply(T, p_sw_body)


def absolute_positions(foot, roll: float, pitch: float, yaw: float, p_body) -> np.ndarray:
    """Body point expressed in the fixed ground frame ``O_C``."""
    T = tf.invert(fixed_transform(foot, roll, pitch, yaw)) @ full_transform(foot, roll, pitch, yaw)
    return tf.apply(T, p_body)


def transform_time_derivative(foot, times, poses, t: float, fixed: bool = False) -> np.ndarray:
    """Central difference of ``T_Oi_C`` (or ``T_OC_C``) along a sampled pose path.

    ``poses`` is an (N, 3) array of (roll, pitch, yaw) at uniformly spaced
    ``times``; ``t`` must coincide with an interior sample.
    """
    times = np.asarray(times, dtype=float)
    poses = np.atleast_2d(np.asarray(poses, dtype=float))
    if len(times) < 3 or len(poses) != len(times):
        raise ValueError("need at least 3 pose samples matching the time stamps")
    h = times[1] - times[0]
    if not np.allclose(np.diff(times), h, rtol=1e-9, atol=0.0):
        raise ValueError("time stamps must be uniformly spaced")
    i = int(np.argmin(np.abs(times - t)))
    if abs(times[i] - t) > 1e-9 * max(1.0, abs(h)) or i == 0 or i == len(times) - 1:
        raise ValueError(f"t={t} is not an interior sample")
    fn = fixed_transform if fixed else full_transform
    if poses.shape[1] == 1:
        poses = np.column_stack([poses, np.zeros((len(poses), 2))])
    return (fn(foot, *poses[i + 1]) - fn(foot, *poses[i - 1])) / (2.0 * h)


# -- external interface ------------------------------------------------------

DUMP_COLUMNS = ("theta",) + tuple(f"T{r}{c}" for r in range(3) for c in range(4)) + ("rollover_length",)


def transform_dump(foot, thetas) -> list[tuple]:
    """Rows of (theta, 12 entries of T_Oi_C row-major, rollover_length)."""
    rows = []
    for th in thetas:
        sol = contact(foot, float(th))
        rows.append((float(th), *map(float, tf.flatten12(sol.T_Oi_C)), float(sol.rollover_length)))
    return rows
