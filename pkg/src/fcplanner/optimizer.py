"""Deviation-path optimization over a distance-stepped bicycle model.

States advance per planning step of length ds along the reference:

    s[k+1]   = s[k] + ds
    d[k+1]   = d[k] + tan(phi[k] + u[k]) * ds
    phi[k+1] = phi[k] + ds / l_r * sin(u[k]) / cos(phi[k] + u[k])

where d is the lateral offset, phi the heading relative to the reference
tangent and u the slip-scaled steering deviation. Reference curvature enters
through a per-step shift of the steering box. The objective penalizes
deviation, steering effort, curvature, distance to the corridor midline at
obstacle-tightened stations, proximity to predicted dynamic obstacles, and
slack use. Corridor bounds are enforced inside the solver with a one-sided
quadratic penalty relaxed by box-bounded slack variables; the box-constrained
problem is solved with a projected limited-memory quasi-Newton method using an
analytically accumulated reverse-mode gradient.
"""

import math
import time
from dataclasses import dataclass, fields, replace
from enum import Enum

import numpy as np
from scipy.optimize import minimize

from .corridor import Corridor
from .errors import DomainError, EmptyActuationSet, SingularityGuard
from .frenet import ReferencePath

_SLACK_EPS = 1e-6  # violations below this are treated as exact


def steer_scale(l_f: float, l_r: float) -> float:
    """Slip fraction a = l_r / (l_f + l_r) mapping steering angle to u."""
    return l_r / (l_f + l_r)


def _check_steering_domain(delta):
    if np.any(np.abs(np.asarray(delta, dtype=float)) >= np.pi / 2):
        raise DomainError("steering angle must stay inside (-pi/2, pi/2)")


def beta_exact(delta, l_f=1.5, l_r=1.5):
    """Exact kinematic slip angle arctan(a * tan(delta))."""
    _check_steering_domain(delta)
    a = steer_scale(l_f, l_r)
    out = np.arctan(a * np.tan(np.asarray(delta, dtype=float)))
    return float(out) if out.ndim == 0 else out


def beta_approx(delta, l_f=1.5, l_r=1.5):
    """Small-angle slip approximation a * delta; never exceeds the exact value
    in magnitude."""
    _check_steering_domain(delta)
    out = steer_scale(l_f, l_r) * np.asarray(delta, dtype=float)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SpaceState:
    s: float
    d: float
    phi: float


@dataclass
class ControlSequence:
    u: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.alpha = np.asarray(self.alpha, dtype=float)
        if self.u.shape != self.alpha.shape:
            raise ValueError("u and alpha must have matching length")


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


@dataclass
class PlannerWeights:
    """Objective weights, model geometry, and solver knobs."""

    q_d: float = 1.0
    q_u: float = 10.0
    lambda_curve: float = 1.0
    lambda_risk: float = 0.2
    lambda_dyn: float = 5.0
    lambda_alpha: float = 1.0e4
    alpha_max: float = 0.3
    ds: float = 1.0
    n_steps: int = 60
    l_f: float = 1.5
    l_r: float = 1.5
    delta_min: float = -0.6
    delta_max: float = 0.6
    eps_guard: float = 0.2
    eps_dyn: float = 0.04
    bound_penalty: float = 1.0e4
    grad_tol: float = 1.0e-4
    max_iter: int = 100

    def __post_init__(self):
        for name in ("q_d", "q_u", "lambda_curve", "lambda_risk", "lambda_dyn",
                     "lambda_alpha", "alpha_max", "eps_dyn", "bound_penalty"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.ds <= 0:
            raise ValueError("ds must be positive")
        if self.n_steps < 2:
            raise ValueError("n_steps must be at least 2")
        if self.l_f <= 0 or self.l_r <= 0:
            raise ValueError("axle distances must be positive")
        if not self.delta_min < self.delta_max:
            raise ValueError("delta_min must be below delta_max")
        if not 0.0 < self.eps_guard < np.pi / 2:
            raise ValueError("eps_guard must lie in (0, pi/2)")

    @property
    def u_min(self) -> float:
        return steer_scale(self.l_f, self.l_r) * self.delta_min

    @property
    def u_max(self) -> float:
        return steer_scale(self.l_f, self.l_r) * self.delta_max

    def with_overrides(self, overrides: dict) -> "PlannerWeights":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown planner keys: {sorted(unknown)}")
        coerced = {}
        for key, val in overrides.items():
            coerced[key] = int(val) if key in ("n_steps", "max_iter") else float(val)
        return replace(self, **coerced)


@dataclass
class PlannerSolution:
    s: np.ndarray
    d: np.ndarray
    phi: np.ndarray
    controls: ControlSequence
    cost: float
    iterations: int
    max_violation: float
    solve_time: float
    status: SolveStatus
    opt_vars: np.ndarray | None = None  # raw optimizer state, reused for warm starts

    @property
    def path(self) -> np.ndarray:
        return np.stack([self.s, self.d], axis=1)

    def to_dict(self, corridor: Corridor | None = None) -> dict:
        n = len(self.s)
        steps = []
        for k in range(n):
            row = {
                "k": k,
                "s": float(self.s[k]),
                "d": float(self.d[k]),
                "phi": float(self.phi[k]),
                "u": float(self.controls.u[k]) if k < n - 1 else None,
                "alpha": float(self.controls.alpha[k]) if k < n - 1 else None,
            }
            if corridor is not None:
                row["d_lb"] = float(corridor.d_lb[k])
                row["d_ub"] = float(corridor.d_ub[k])
            steps.append(row)
        return {
            "steps": steps,
            "diagnostics": {
                "cost": float(self.cost),
                "iterations": int(self.iterations),
                "status": self.status.value,
                "max_violation": float(self.max_violation),
                "solve_time": float(self.solve_time),
            },
        }


def propagate(state: SpaceState, u: float, ds: float, l_r: float,
              eps_guard=0.2) -> SpaceState:
    """One exact step of the distance-parameterized model."""
    theta = state.phi + u
    if abs(theta) > np.pi / 2 - eps_guard:
        raise SingularityGuard(
            f"relative heading {theta:.3f} rad is inside the pi/2 guard band"
        )
    return SpaceState(
        s=state.s + ds,
        d=state.d + math.tan(theta) * ds,
        phi=state.phi + ds / l_r * math.sin(u) / math.cos(theta),
    )


def reference_steering(ref: ReferencePath, s0: float, ds: float, n_ctrl: int,
                       l_r: float) -> np.ndarray:
    """Steering proxy needed to follow the reference curvature at each step."""
    return np.arctan(l_r / ds * ref.heading_delta(s0, ds, n_ctrl))


def curvature_bounds(ref: ReferencePath, k: int, ds: float, l_r: float, l_f: float,
                     delta_min=-0.6, delta_max=0.6, s0=0.0):
    """Steering-deviation box at step k, shifted by the reference demand."""
    ubar = float(reference_steering(ref, s0, ds, k + 1, l_r)[k])
    a = steer_scale(l_f, l_r)
    lo, hi = a * delta_min - ubar, a * delta_max - ubar
    if lo > hi or hi < 0.0 or lo > 0.0:
        raise EmptyActuationSet(
            f"reference curvature at step {k} needs {ubar:.3f} rad, beyond the "
            f"steering range"
        )
    return lo, hi


def curvature_bound_arrays(ref: ReferencePath | None, s0: float, ds: float,
                           n_ctrl: int, w: PlannerWeights):
    if ref is None:
        ubar = np.zeros(n_ctrl)
    else:
        ubar = reference_steering(ref, s0, ds, n_ctrl, w.l_r)
    lo = w.u_min - ubar
    hi = w.u_max - ubar
    bad = (hi < 0.0) | (lo > 0.0)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise EmptyActuationSet(
            f"reference curvature at step {k} needs {ubar[k]:.3f} rad, beyond "
            f"the steering range"
        )
    return lo, hi


@dataclass
class _Problem:
    k: int
    ds: float
    c: float          # ds / l_r
    theta_max: float
    tan_m: float
    sec_m: float
    sec2_m: float
    secp_m: float
    d0: float
    phi0: float
    qd: np.ndarray
    qu: np.ndarray
    mask: np.ndarray
    mid: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    dyn_d: np.ndarray
    dyn_valid: np.ndarray
    lam_curve: float
    lam_risk: float
    lam_dyn: float
    lam_alpha: float
    mu: float
    eps_dyn: float


def _build_problem(corridor: Corridor, dyn, w: PlannerWeights, init: SpaceState) -> _Problem:
    n = corridor.n
    k = n - 1
    theta_max = np.pi / 2 - w.eps_guard
    tan_m = math.tan(theta_max)
    sec_m = 1.0 / math.cos(theta_max)
    if dyn is None or len(dyn) == 0:
        dyn_arr = np.zeros((0, k))
        dyn_valid = np.zeros((0, k))
    else:
        dyn_arr = np.atleast_2d(np.asarray(dyn, dtype=float))[:, 1:n]
        dyn_valid = np.isfinite(dyn_arr).astype(float)
        dyn_arr = np.nan_to_num(dyn_arr)
    return _Problem(
        k=k,
        ds=corridor.ds,
        c=corridor.ds / w.l_r,
        theta_max=theta_max,
        tan_m=tan_m,
        sec_m=sec_m,
        sec2_m=1.0 + tan_m * tan_m,
        secp_m=tan_m * sec_m,
        d0=float(init.d),
        phi0=float(init.phi),
        qd=np.broadcast_to(np.asarray(w.q_d, dtype=float), (k,)).copy(),
        qu=np.broadcast_to(np.asarray(w.q_u, dtype=float), (k,)).copy(),
        mask=corridor.obstacle_mask[1:].astype(float),
        mid=corridor.midline[1:],
        lo=corridor.d_lb[1:],
        hi=corridor.d_ub[1:],
        dyn_d=dyn_arr,
        dyn_valid=dyn_valid,
        lam_curve=w.lambda_curve,
        lam_risk=w.lambda_risk,
        lam_dyn=w.lambda_dyn,
        lam_alpha=w.lambda_alpha,
        mu=w.bound_penalty,
        eps_dyn=w.eps_dyn,
    )


def _forward(u, p: _Problem):
    """Roll the model out with guarded trig, returning states and local slopes.

    Beyond the singularity guard the tangent and secant continue linearly,
    which keeps the objective finite and once differentiable so line searches
    cannot step across the pole.
    """
    k = p.k
    d = np.empty(k + 1)
    phi = np.empty(k + 1)
    th = np.empty(k)
    tval = np.empty(k)
    tp = np.empty(k)
    sval = np.empty(k)
    sp = np.empty(k)
    d[0] = p.d0
    phi[0] = p.phi0
    sin_u = np.sin(u)
    cos_u = np.cos(u)
    tm = p.theta_max
    for i in range(k):
        t_ = phi[i] + u[i]
        th[i] = t_
        a = abs(t_)
        if a <= tm:
            tt = math.tan(t_)
            ct = math.cos(t_)
            tval[i] = tt
            tp[i] = 1.0 + tt * tt
            sval[i] = 1.0 / ct
            sp[i] = tt / ct
        else:
            sgn = 1.0 if t_ > 0.0 else -1.0
            ex = a - tm
            tval[i] = sgn * (p.tan_m + p.sec2_m * ex)
            tp[i] = p.sec2_m
            sval[i] = p.sec_m + p.secp_m * ex
            sp[i] = sgn * p.secp_m
        d[i + 1] = d[i] + tval[i] * p.ds
        phi[i + 1] = phi[i] + p.c * sin_u[i] * sval[i]
    return d, phi, th, tval, tp, sval, sp, sin_u, cos_u


def _objective(z, p: _Problem, penalized=True):
    """Cost and gradient via reverse accumulation through the rollout.

    With penalized=True the corridor bounds enter as one-sided quadratic
    penalties relaxed by the slack variables (the solver's view); otherwise
    only the modeling terms are evaluated.
    """
    k = p.k
    u = z[:k]
    alpha = z[k:]
    d, phi, th, tval, tp, sval, sp, sin_u, cos_u = _forward(u, p)
    dk = d[1:]

    dev = dk - p.mid
    tu = np.tan(u)

    cost = (
        float(p.qd @ (dk * dk))
        + float(p.qu @ (u * u))
        + p.lam_curve * float(tu @ tu)
        + p.lam_risk * float(p.mask @ (dev * dev))
        + p.lam_alpha * float(alpha @ alpha)
    )
    gd_dir = 2.0 * p.qd * dk + 2.0 * p.lam_risk * p.mask * dev
    g_alpha = 2.0 * p.lam_alpha * alpha

    if penalized:
        h_lo = np.maximum(p.lo - alpha - dk, 0.0)
        h_hi = np.maximum(dk - p.hi - alpha, 0.0)
        cost += p.mu * (float(h_lo @ h_lo) + float(h_hi @ h_hi))
        gd_dir += 2.0 * p.mu * (h_hi - h_lo)
        g_alpha -= 2.0 * p.mu * (h_lo + h_hi)

    if len(p.dyn_d):
        diff = p.dyn_d - dk[None, :]
        den = diff * diff + p.eps_dyn
        inv = p.dyn_valid / den
        cost += p.lam_dyn * float(inv.sum())
        gd_dir += p.lam_dyn * 2.0 * np.sum(diff * inv / den, axis=0)

    gu = np.empty(k)
    gu_direct = 2.0 * p.qu * u + 2.0 * p.lam_curve * tu * (1.0 + tu * tu)

    gd = 0.0
    gphi = 0.0
    for i in range(k - 1, -1, -1):
        gd += gd_dir[i]
        dd_du = tp[i] * p.ds
        dphi_du = p.c * (cos_u[i] * sval[i] + sin_u[i] * sp[i])
        gu[i] = gu_direct[i] + gd * dd_du + gphi * dphi_du
        gphi = gphi * (1.0 + p.c * sin_u[i] * sp[i]) + gd * dd_du
    return cost, np.concatenate([gu, g_alpha])


def evaluate_cost(controls, corridor: Corridor, dyn, w: PlannerWeights,
                  init: SpaceState):
    """Objective value and gradient for a control-and-slack sequence.

    Accepts a ControlSequence or a (u, alpha) pair; the gradient is ordered as
    all du entries followed by all dalpha entries. Bound penalties are the
    solver's concern and are not included here.
    """
    if isinstance(controls, ControlSequence):
        u, alpha = controls.u, controls.alpha
    else:
        u, alpha = controls
    u = np.asarray(u, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    p = _build_problem(corridor, dyn, w, init)
    if len(u) != p.k or len(alpha) != p.k:
        raise ValueError(f"expected {p.k} controls and slacks")
    return _objective(np.concatenate([u, alpha]), p, penalized=False)


def _rollout_init(p: _Problem, lo, hi, u_cap):
    """Cold-start guess: steer toward the corridor interior under slope caps.

    Pure heuristic; only sets the starting point of the optimization, never
    the answer.
    """
    k = p.k
    margin = np.minimum(0.2, 0.25 * (p.hi - p.lo))
    t = p.d0
    phi = p.phi0
    u0 = np.empty(k)
    for i in range(k):
        lo_i = p.lo[i] + margin[i]
        hi_i = p.hi[i] - margin[i]
        tgt = min(max(0.0, lo_i), hi_i)
        step = min(max(0.35 * (tgt - t), -0.25), 0.25)
        nxt = min(max(t + step, min(lo_i, t)), max(hi_i, t))
        u = min(max(math.atan((nxt - t) / p.ds) - phi, lo[i]), hi[i])
        u = min(max(u, -u_cap), u_cap)
        u0[i] = u
        theta = phi + u
        if abs(theta) > p.theta_max:
            theta = math.copysign(p.theta_max, theta)
        t += math.tan(theta) * p.ds
        phi += p.c * math.sin(u) / math.cos(theta)
    return u0


def _violations(d, corridor: Corridor):
    return np.maximum(0.0, np.maximum(corridor.d_lb - d, d - corridor.d_ub))


def solve(corridor: Corridor, dyn, w: PlannerWeights, init: SpaceState,
          ref: ReferencePath | None = None, warm=None, warm_shift: int = 0) -> PlannerSolution:
    """Optimize the deviation path inside a corridor.

    dyn is an optional (r, n) array of predicted lateral offsets with NaN
    where a dynamic obstacle never reaches a station. A previous solution (or
    raw variable vector) can be passed as warm, shifted by warm_shift steps
    to account for the ego advancing along the horizon.
    """
    t_start = time.perf_counter()
    p = _build_problem(corridor, dyn, w, init)
    k = p.k
    lo, hi = curvature_bound_arrays(ref, corridor.s0, corridor.ds, k, w)

    z_prev = None
    if warm is not None:
        z_prev = warm.opt_vars if isinstance(warm, PlannerSolution) else np.asarray(warm, dtype=float)
        if z_prev is not None and len(z_prev) != 2 * k:
            z_prev = None
    if z_prev is None:
        u0 = _rollout_init(p, lo, hi, 0.9 * min(-w.u_min, w.u_max))
        a0 = np.zeros(k)
    else:
        shift = int(max(0, min(warm_shift, k)))
        u0 = np.concatenate([z_prev[shift:k], np.repeat(z_prev[k - 1], shift)])
        a_prev = z_prev[k:]
        a0 = np.concatenate([a_prev[shift:], np.repeat(a_prev[-1], shift)])
    u0 = np.clip(u0, lo, hi)
    a0 = np.clip(a0, 0.0, w.alpha_max)

    # the slack block is much stiffer than the control block; equalize the
    # diagonal curvature seen by the quasi-Newton metric
    sa = math.sqrt(max(1.0, w.lambda_alpha / max(w.q_u, 1e-6)))

    def scaled_objective(zs):
        z = np.concatenate([zs[:k], zs[k:] / sa])
        cost, grad = _objective(z, p)
        grad[k:] /= sa
        return cost, grad

    bounds = [(lo[i], hi[i]) for i in range(k)] + [(0.0, w.alpha_max * sa)] * k
    res = minimize(
        scaled_objective, np.concatenate([u0, a0 * sa]), jac=True,
        method="L-BFGS-B", bounds=bounds,
        options={"maxiter": w.max_iter, "gtol": w.grad_tol, "ftol": 1e-14,
                 "maxcor": 40},
    )
    u = np.clip(res.x[:k], lo, hi)
    alpha_raw = np.clip(res.x[k:] / sa, 0.0, w.alpha_max)
    z_final = np.concatenate([u, alpha_raw])
    cost, _ = _objective(z_final, p, penalized=False)

    d, phi, th, *_ = _forward(u, p)
    viol = _violations(d, corridor)
    # slot 0 carries the measured state; it has no slack variable but shares
    # the same allowance
    max_violation = float(viol.max())
    alpha = np.where(viol[1:] > _SLACK_EPS, np.minimum(viol[1:], w.alpha_max), 0.0)

    singular = bool(np.any(np.abs(th) > p.theta_max))
    if max_violation > w.alpha_max + _SLACK_EPS or singular:
        status = SolveStatus.INFEASIBLE
    elif res.status == 0:
        status = SolveStatus.OPTIMAL
    else:
        status = SolveStatus.MAX_ITER

    return PlannerSolution(
        s=corridor.stations.astype(float),
        d=d,
        phi=phi,
        controls=ControlSequence(u=u, alpha=alpha),
        cost=float(cost),
        iterations=int(res.nit),
        max_violation=max_violation,
        solve_time=time.perf_counter() - t_start,
        status=status,
        opt_vars=z_final,
    )
