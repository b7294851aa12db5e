"""Frontal-plane HLIP stepping on a rolling foot.

The step-to-step (S2S) map works on the pre-impact COM state relative to the
support contact, ``X = (p, v)``.  The walker is kinematic: the COM follows
the linear inverted pendulum about the touchdown contact, the support foot
rolls so that its leg axis points at the COM, and the controller measures the
COM in the moving contact frame through the foot's contact transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import interpolate, optimize

from . import transforms as tf
from .contact import LineFoot, full_transform, total_rollover_length
from .contact import total_rollover_length_exact


@dataclass(frozen=True)
class HlipParams:
    z0: float = 0.70
    T_ssp: float = 0.38
    g: float = 9.81
    dsp_duration: float = 0.0
    u_max: float = 0.25
    v_max: float = 0.5

    def __post_init__(self):
        if self.z0 <= 0.0 or self.T_ssp <= 0.0 or self.g <= 0.0:
            raise ValueError("z0, T_ssp and g must be positive")
        if self.dsp_duration != 0.0:
            raise ValueError("double support is not modelled; dsp_duration must be 0")
        if self.u_max <= 0.0:
            raise ValueError("u_max must be positive")

    @property
    def lam(self) -> float:
        return math.sqrt(self.g / self.z0)


@dataclass(frozen=True)
class S2SModel:
    A: np.ndarray
    B: np.ndarray
    K: np.ndarray

    @property
    def closed_loop(self) -> np.ndarray:
        return self.A + np.outer(self.B, self.K)


@dataclass(frozen=True)
class HlipState:
    p: float
    v: float

    def vec(self) -> np.ndarray:
        return np.array([self.p, self.v])


def lip_flow(lam: float, t: float) -> np.ndarray:
    """State transition of p'' = lam^2 p over time t."""
    ch, sh = math.cosh(lam * t), math.sinh(lam * t)
    return np.array([[ch, sh / lam], [lam * sh, ch]])


def build_s2s(params: HlipParams) -> S2SModel:
    A = lip_flow(params.lam, params.T_ssp)
    # a step of length u shifts the pivot: the state becomes (p - u, v) at impact
    B = -A[:, 0].copy()
    # deadbeat gain in closed form; K1 = 1 zeroes the first column of A + BK
    # exactly, so the closed loop is strictly upper triangular in floating point
    lt = params.lam * params.T_ssp
    K = np.array([1.0, 1.0 / (params.lam * math.tanh(lt))])
    return S2SModel(A, B, K)


def ackermann_gain(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Deadbeat gain from Ackermann's formula, K = -[0 1] C^-1 A^2 (u = +K x)."""
    ctrb = np.column_stack([B, A @ B])
    return -np.linalg.solve(ctrb, A @ A)[1]


def desired_orbit(params: HlipParams, v_des: float, model: S2SModel | None = None) -> tuple[HlipState, float]:
    """Period-one orbit for a constant step length ``v_des * T_ssp``."""
    if abs(v_des) > params.v_max:
        raise ValueError(f"|v_des|={abs(v_des)} exceeds {params.v_max}")
    model = model or build_s2s(params)
    u_h = v_des * params.T_ssp
    X = np.linalg.solve(np.eye(2) - model.A, model.B * u_h)
    return HlipState(float(X[0]), float(X[1])), u_h


def step_target(model: S2SModel, X_fd: HlipState, X_h: HlipState, u_h: float, u_max: float = math.inf) -> tuple[float, bool]:
    """Stabilizing step length and whether it had to be saturated."""
    u = u_h + float(model.K @ (X_fd.vec() - X_h.vec()))
    if abs(u) > u_max:
        return math.copysign(u_max, u), True
    return u, False


def swing_feedback(x_star, x_fd, K_swa: float):
    if not 0.0 <= K_swa <= 1.0:
        raise ValueError(f"K_swa={K_swa} outside [0, 1]")
    x_star = np.asarray(x_star, dtype=float)
    return x_star + K_swa * (np.asarray(x_fd, dtype=float) - x_star)


class SwingTrajectory:
    """Two cubic Hermite pieces per axis joined at the apex, t in [0, T]."""

    def __init__(self, x0, v0, x1, T: float, z_clear: float):
        if T <= 0.0 or z_clear <= 0.0:
            raise ValueError("T and z_clear must be positive")
        x0 = np.asarray(x0, dtype=float)
        x1 = np.asarray(x1, dtype=float)
        v0 = np.zeros(3) if v0 is None else np.asarray(v0, dtype=float)
        apex = 0.5 * (x0 + x1)
        apex[2] = max(x0[2], x1[2]) + z_clear
        v_apex = 1.5 * (x1 - x0) / T
        v_apex[2] = 0.0
        self.T = T
        self._spline = interpolate.CubicHermiteSpline(
            [0.0, 0.5 * T, T], np.vstack([x0, apex, x1]), np.vstack([v0, v_apex, np.zeros(3)]),
        )
        self._vel = self._spline.derivative()

    def position(self, t):
        return self._spline(t)

    def velocity(self, t):
        return self._vel(t)

    def piece(self, k: int, t):
        """Evaluate piece ``k`` (0 lift, 1 landing) as its own polynomial, even outside its span."""
        c = self._spline.c[:, k, :]
        dt = np.asarray(t, dtype=float)[..., None] - self._spline.x[k]
        pos = ((c[0] * dt + c[1]) * dt + c[2]) * dt + c[3]
        vel = (3.0 * c[0] * dt + 2.0 * c[1]) * dt + c[2]
        return pos, vel


def swing_trajectory(x0, x1, T: float, z_clear: float, v0=None) -> SwingTrajectory:
    return SwingTrajectory(x0, v0, x1, T, z_clear)


# -- contact-frame measurement -------------------------------------------------


def measure_pre_impact(foot, p_body, v_body, times, rolls, t: float) -> HlipState:
    """COM state in the contact frame from foot-frame position and velocity.

    ``times``/``rolls`` sample the support roll around ``t`` (uniform step);
    the contact transform is differentiated by central differences.  The
    position row maps through ``T`` and the velocity row picks up ``dT/dt``
    acting on the position plus ``T`` acting on the velocity as a direction.
    """
    from .contact import transform_time_derivative

    times = np.asarray(times, dtype=float)
    rolls = np.asarray(rolls, dtype=float)
    if len(times) < 3:
        raise ValueError("pose history needs at least 3 samples around t")
    i = int(np.argmin(np.abs(times - t)))
    T = full_transform(foot, float(rolls[i]))
    dT = transform_time_derivative(foot, times, rolls[:, None], t)
    ph = np.append(np.asarray(p_body, dtype=float), 1.0)
    vh = np.append(np.asarray(v_body, dtype=float), 0.0)
    pos = T @ ph
    vel = dT @ ph + T @ vh
    return HlipState(float(pos[1]), float(vel[1]))


# -- walking loop --------------------------------------------------------------


@dataclass(frozen=True)
class NoiseConfig:
    """Uniform bounded disturbances, drawn from one seeded generator."""

    p: float = 0.0
    v: float = 0.0
    swing: float = 0.0
    seed: int = 0


@dataclass
class StepRecord:
    index: int
    t_start: float
    u_target: float
    u_exec: float
    saturated: bool
    X_measured: tuple
    X_predicted: tuple
    theta_td: float
    theta_end: float
    rollover_end: float
    slip: float
    swing_error: float


@dataclass
class WalkLog:
    X_h: tuple
    u_h: float
    steps: list = field(default_factory=list)
    t: list = field(default_factory=list)
    step: list = field(default_factory=list)
    theta: list = field(default_factory=list)
    com_y: list = field(default_factory=list)
    com_rel: list = field(default_factory=list)
    contact_y: list = field(default_factory=list)
    rollover: list = field(default_factory=list)
    swing_y: list = field(default_factory=list)
    swing_z: list = field(default_factory=list)
    fell: bool = False
    message: str = ""

    SAMPLE_COLUMNS = ("t", "step", "theta", "com_y", "com_rel", "contact_y", "rollover", "swing_y", "swing_z")
    STEP_COLUMNS = (
        "index", "t_start", "u_target", "u_exec", "saturated", "p_meas", "v_meas", "p_pred", "v_pred",
        "theta_td", "theta_end", "rollover_end", "slip", "swing_error",
    )

    def sample_rows(self):
        cols = [getattr(self, c) for c in self.SAMPLE_COLUMNS]
        return list(zip(*cols))

    def step_rows(self):
        for s in self.steps:
            yield (s.index, s.t_start, s.u_target, s.u_exec, int(s.saturated), *s.X_measured, *s.X_predicted,
                   s.theta_td, s.theta_end, s.rollover_end, s.slip, s.swing_error)

    @property
    def max_slip(self) -> float:
        return max((s.slip for s in self.steps), default=0.0)


class Fall(RuntimeError):
    pass


def _roll_for_com(foot, y_oc: float, z0: float, guess_hi: float) -> float:
    """Support roll that puts the COM on the foot's leg axis.

    ``y_oc`` is the COM lateral position in the fixed ground frame O_C.  The
    leg axis is the foot's z axis through the foot frame origin.
    """
    def f(th):
        T = tf.invert(_fixed(foot, th)) @ full_transform(foot, th)
        o = T[:3, 3]
        return math.sin(th) * (z0 - o[2]) + math.cos(th) * (y_oc - o[1])

    lim = guess_hi
    lo, hi = -lim, lim
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0.0:
        raise Fall(f"no support roll keeps the COM on the leg (y={y_oc:.4g})")
    return optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=200)


def _fixed(foot, th):
    from .contact import fixed_transform

    return fixed_transform(foot, th)


def _roll_limit(foot) -> float:
    if isinstance(foot, LineFoot):
        return 0.5 * math.pi - 1e-6
    return foot.roll_limit - 1e-6


def _contact_in_oc(foot, th: float) -> float:
    # contact frame origin in O_C: the inverse of the lateral shift
    return -total_rollover_length(foot, th)


def _com_in_contact(foot, th: float, y_oc: float, z0: float) -> np.ndarray:
    """COM in the contact frame C (x, y, z)."""
    return np.array([0.0, y_oc - _contact_in_oc(foot, th), z0])


def simulate_walk(
    foot,
    params: HlipParams,
    v_des: float,
    n_steps: int,
    noise: NoiseConfig | None = None,
    X0: HlipState | None = None,
    samples_per_step: int = 20,
    K_swa: float = 0.3,
    z_clear: float = 0.03,
    fd_step: float = 1e-5,
) -> WalkLog:
    """Run the frontal-plane walker for ``n_steps`` support phases.

    ``X0`` is the post-impact state relative to the first touchdown contact;
    it defaults to the desired orbit.  The log is returned even after a fall,
    with ``fell`` set and the diagnostic in ``message``.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    noise = noise or NoiseConfig()
    rng = np.random.default_rng(noise.seed)
    model = build_s2s(params)
    X_h, u_h = desired_orbit(params, v_des, model)
    log = WalkLog((X_h.p, X_h.v), u_h)
    lam, T, z0 = params.lam, params.T_ssp, params.z0
    h_foot = foot.h_foot
    lim = _roll_limit(foot)

    if X0 is None:
        X0 = HlipState(X_h.p - u_h, X_h.v)
    p, v = X0.p, X0.v
    oc_world = 0.0
    theta_td = 0.0
    c_td = 0.0  # touchdown contact in O_C
    swing_start = np.array([0.0, -u_h, 0.0])
    X_meas_prev = None
    u_prev = None
    t_now = 0.0

    def leg_ok(th, y_oc):
        T = tf.invert(_fixed(foot, th)) @ full_transform(foot, th)
        o = T[:3, 3]
        leg = math.hypot(y_oc - o[1], z0 - o[2])
        return 0.5 * (z0 - h_foot) <= leg <= 1.5 * (z0 - h_foot)

    try:
        for k in range(n_steps):
            # the swing foot aims at the step predicted from the post-impact state
            X_pred_end = lip_flow(lam, T) @ np.array([p, v])
            u_plan, _ = step_target(model, HlipState(*X_pred_end), X_h, u_h, params.u_max)
            # swing positions are relative to the touchdown contact; the planned
            # landing ignores the contact's rollover drift during the step
            land = np.array([0.0, u_plan, 0.0])
            swing = SwingTrajectory(swing_start, None, land, T, z_clear)

            slip = 0.0
            L_td = total_rollover_length(foot, theta_td)
            Lx_td = total_rollover_length_exact(foot, theta_td)
            th = theta_td
            for j in range(1, samples_per_step + 1):
                tau = j * T / samples_per_step
                pj, vj = lip_flow(lam, tau) @ np.array([p, v])
                y_oc = c_td + pj
                th = _roll_for_com(foot, y_oc, z0, lim)
                if abs(th) >= lim or not leg_ok(th, y_oc):
                    raise Fall(f"step {k}: support roll {th:.4f} rad or leg length out of range")
                L = total_rollover_length(foot, th)
                slip = max(slip, abs((L - L_td) - (total_rollover_length_exact(foot, th) - Lx_td)))
                x_star = swing.position(tau)
                x_fd = x_star + (rng.uniform(-noise.swing, noise.swing, 3) if noise.swing > 0 else 0.0)
                x_sw = swing_feedback(x_star, x_fd, K_swa)
                log.t.append(t_now + tau)
                log.step.append(k)
                log.theta.append(th)
                log.com_y.append(oc_world + y_oc)
                log.com_rel.append(y_oc - _contact_in_oc(foot, th))
                log.contact_y.append(oc_world + _contact_in_oc(foot, th))
                log.rollover.append(L)
                log.swing_y.append(oc_world + c_td + x_sw[1])
                log.swing_z.append(x_sw[2])

            # pre-impact measurement through the contact transform
            times = T + np.array([-fd_step, 0.0, fd_step])
            rolls, p_body = [], []
            for tt in times:
                pt, _ = lip_flow(lam, tt) @ np.array([p, v])
                r = _roll_for_com(foot, c_td + pt, z0, lim)
                rolls.append(r)
                p_body.append(tf.apply(tf.invert(full_transform(foot, r)), _com_in_contact(foot, r, c_td + pt, z0)))
            v_body = (p_body[2] - p_body[0]) / (2.0 * fd_step)
            X_meas = measure_pre_impact(foot, p_body[1], v_body, times, rolls, T)
            if noise.p > 0.0 or noise.v > 0.0:
                X_meas = HlipState(X_meas.p + rng.uniform(-noise.p, noise.p), X_meas.v + rng.uniform(-noise.v, noise.v))

            if X_meas_prev is None:
                X_pred = (math.nan, math.nan)
            else:
                X_pred = tuple(model.A @ X_meas_prev.vec() + model.B * u_prev)
            u, sat = step_target(model, X_meas, X_h, u_h, params.u_max)

            th_end = rolls[1]
            c_end = _contact_in_oc(foot, th_end)
            log.steps.append(StepRecord(
                k, t_now, u, u, sat, (X_meas.p, X_meas.v), X_pred, theta_td, th_end,
                total_rollover_length(foot, th_end), slip, float(abs(swing.position(T)[1] - (c_end - c_td + u))),
            ))

            # impact: the new contact lands u away from the current one
            p, v = X_meas.p - u, X_meas.v
            new_contact_world = oc_world + c_end + u
            swing_start = np.array([0.0, -u, 0.0])
            th_new = _roll_for_com_td(foot, p, z0, lim)
            theta_td = th_new
            c_td = _contact_in_oc(foot, theta_td)
            oc_world = new_contact_world - c_td
            X_meas_prev, u_prev = X_meas, u
            t_now += T
    except Fall as exc:
        log.fell = True
        log.message = str(exc)
    return log


def _roll_for_com_td(foot, p: float, z0: float, lim: float) -> float:
    """Touchdown roll of the new support foot: its leg points at the COM.

    At touchdown the contact is the origin, so the COM sits at ``p`` from the
    contact; the foot's O_C then lies ``sgn(theta) * rollover`` beyond it.
    """
    def f(th):
        T = full_transform(foot, th)
        o = T[:3, 3]
        return math.sin(th) * (z0 - o[2]) + math.cos(th) * (p - o[1])

    lo, hi = -lim, lim
    if f(lo) * f(hi) > 0.0:
        raise Fall(f"no touchdown roll keeps the COM on the new leg (p={p:.4g})")
    return optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=200)


def convergence_index(log: WalkLog, tol: float = 1e-8) -> int | None:
    """First step from which every measured state stays within ``tol`` of the orbit."""
    Xh = np.array(log.X_h)
    idx = None
    for s in log.steps:
        if np.max(np.abs(np.array(s.X_measured) - Xh)) < tol:
            if idx is None:
                idx = s.index
        else:
            idx = None
    return idx


def steps_for_horizon(horizon: float, T_ssp: float) -> int:
    return int(math.floor(horizon / T_ssp + 1e-9))
