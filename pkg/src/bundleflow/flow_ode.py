"""Reduced flow systems and their adaptive numerical integration.

Over a constant-curvature base with a connection whose curvature is a
constant multiple of the base volume form, the metric evolution reduces to
two coupled scalar ODEs for the conformal factor ``lam`` of the base metric
and the fiber size ``f``:

* unnormalized:  dlam/dt = -2 k0 + F0 f^2 / lam
                 df/dt   = -(1/2) F0 f^3 / lam^2
* normalized:    dlam/dt = -(2/3) k0 + (2/3) F0 f^2 / lam
                 df/dt   =  (2/3) k0 f / lam - (2/3) F0 f^3 / lam^2

with ``F0 = f0_norm``.  Both systems are autonomous; time is carried in the
state purely for reporting.  The normalized system conserves the product
``lam * f`` exactly.

Integration uses the embedded Dormand-Prince 5(4) pair with FSAL, a
proportional-integral step-size controller, cubic Hermite dense output for
event localization, floor-crossing singularity detection (the crossing time
is bisected on the dense output, then extrapolated to the estimated
degeneration time), and dwell-based convergence detection.  Observables are
attached to every accepted step.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import closed_form
from .errors import (
    DomainError,
    IntegrationFailure,
    InvalidInputError,
)
from .state import (
    FlowParams,
    FlowState,
    FlowVariant,
    IntegratorConfig,
    Termination,
    TerminationKind,
    Trajectory,
    TrajectorySample,
)


def rhs_unnormalized(params: FlowParams, state: FlowState) -> tuple[float, float]:
    """Right-hand side of the unnormalized reduced system at a state."""
    lam, f = state.lam, state.f
    dlam = -2.0 * params.k0 + params.f0_norm * f * f / lam
    df = -0.5 * params.f0_norm * f ** 3 / lam ** 2
    return (dlam, df)


def rhs_normalized(params: FlowParams, state: FlowState) -> tuple[float, float]:
    """Right-hand side of the volume-normalized reduced system at a state."""
    lam, f = state.lam, state.f
    inv = 1.0 / lam
    dlam = -(2.0 / 3.0) * params.k0 + (2.0 / 3.0) * params.f0_norm * f * f * inv
    df = (2.0 / 3.0) * params.k0 * f * inv - (2.0 / 3.0) * params.f0_norm * f ** 3 * inv * inv
    return (dlam, df)


def rhs(params: FlowParams, state: FlowState) -> tuple[float, float]:
    """Dispatch to the variant selected in the parameters."""
    if params.variant is FlowVariant.NORMALIZED:
        return rhs_normalized(params, state)
    return rhs_unnormalized(params, state)


def scalar_curvature_observable(params: FlowParams, state: FlowState) -> float:
    """Scalar curvature of the bundle metric at a flow state.

    2 k0 / lam - (1/2) F0 f^2 / lam^2; on the lam*f = 1 manifold this equals
    2 k0 / lam - (1/2) F0 / lam^4.
    """
    lam, f = state.lam, state.f
    return 2.0 * params.k0 / lam - 0.5 * params.f0_norm * f * f / (lam * lam)


def chern_curvature_constant(c1: int, area: float) -> float:
    """Curvature constant of the balanced connection on a bundle of degree c1.

    The curvature 2-form of such a connection is c * (volume form) with
    c = 2 pi c1 / area; its squared norm c**2 is the f0_norm input of
    FlowParams.
    """
    if not math.isfinite(area):
        raise InvalidInputError(f"area is not finite: {area!r}")
    if area <= 0.0:
        raise DomainError(f"area must be positive, got {area!r}")
    return 2.0 * math.pi * c1 / area


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) machinery
# ---------------------------------------------------------------------------

_DP_C = np.array([0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0])
_DP_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
         -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ]
)
# Difference between the 5th- and 4th-order weights: error estimator.
_DP_E = np.array(
    [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ]
)

_SAFETY = 0.9
_PI_BETA = 0.04
_PI_EXPO = 0.2 - 0.75 * _PI_BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


class _DomainViolation(Exception):
    """Internal: a stage left the positive domain; reject the step."""


def _make_deriv(params: FlowParams) -> Callable[[float, np.ndarray], np.ndarray]:
    k0, f0 = params.k0, params.f0_norm
    normalized = params.variant is FlowVariant.NORMALIZED

    def deriv(t: float, y: np.ndarray) -> np.ndarray:
        lam, f = y
        if not (lam > 0.0 and f > 0.0 and math.isfinite(lam) and math.isfinite(f)):
            raise _DomainViolation
        if normalized:
            inv = 1.0 / lam
            return np.array(
                [
                    -(2.0 / 3.0) * k0 + (2.0 / 3.0) * f0 * f * f * inv,
                    (2.0 / 3.0) * k0 * f * inv - (2.0 / 3.0) * f0 * f ** 3 * inv * inv,
                ]
            )
        return np.array(
            [
                -2.0 * k0 + f0 * f * f / lam,
                -0.5 * f0 * f ** 3 / (lam * lam),
            ]
        )

    return deriv


def _dp_step(deriv, t, y, h, k1):
    """One embedded step.  Returns (y_new, error_vector, deriv_at_y_new)."""
    K = np.empty((7, y.size))
    K[0] = k1
    yi = y
    for i in range(1, 7):
        yi = y + h * (_DP_A[i, :i] @ K[:i])
        K[i] = deriv(t + _DP_C[i] * h, yi)
    # Stage 7 is evaluated at the 5th-order solution (FSAL).
    y_new = yi
    err = h * (_DP_E @ K)
    return y_new, err, K[6]


def _error_norm(err, y0, y1, rtol, atol):
    sc = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / sc) ** 2)))


def _hermite(theta, y0, y1, f0, f1, h):
    """Cubic Hermite interpolant on an accepted step, theta in [0, 1]."""
    t2 = theta * theta
    t3 = t2 * theta
    return (
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + h * (t3 - 2.0 * t2 + theta) * f0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + h * (t3 - t2) * f1
    )


def _initial_step(deriv, t0, y0, f0, t_end, rtol, atol, max_step):
    """Start-step heuristic from the local solution and derivative scales."""
    span = t_end - t0
    sc = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / sc) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / sc) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span, max_step)
    try:
        f1 = deriv(t0 + h0, y0 + h0 * f0)
    except _DomainViolation:
        return max(h0 * 1e-3, 1e-12)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / sc) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, span, max_step)


def _make_residual(params: FlowParams, initial: FlowState):
    """Observable closure for the transcendental first integral, or None.

    Defined only for the normalized variant with k0 != 0, f0_norm > 0, and
    initial product lam*f = 1 (the reduction to a single equation needs it).
    """
    if params.variant is not FlowVariant.NORMALIZED:
        return None
    if params.k0 == 0.0 or params.f0_norm <= 0.0:
        return None
    if abs(initial.lam * initial.f - 1.0) > 1e-9:
        return None
    try:
        consts = closed_form.implicit_constants(
            params.k0, params.f0_norm, lambda0=initial.lam, t0=initial.t
        )
    except DomainError:
        # Initial state sits exactly at the equilibrium lam = a0, where the
        # integration constant is undefined (log singularity).
        return None

    def residual(t: float, lam: float) -> float | None:
        if lam == consts.a0:
            return None
        value = closed_form.implicit_first_integral(consts, params.k0, lam, t)
        return value if math.isfinite(value) else None

    return residual


def _sample(params, residual, t, lam, f) -> TrajectorySample:
    state = FlowState(t=t, lam=lam, f=f)
    return TrajectorySample(
        state=state,
        scalar_curvature=scalar_curvature_observable(params, state),
        f_lambda_product=lam * f,
        implicit_residual=residual(t, lam) if residual is not None else None,
    )


def _locate_floor_crossing(floor, y0, y1, f0, f1, h, time_tol):
    """Earliest in-step crossing of the floor by any component.

    Returns (theta, component_index).  Assumes endpoint bracketing:
    y0[i] > floor for all i and y1[j] <= floor for some j.
    """
    best = None
    for i in range(y0.size):
        if y1[i] > floor:
            continue
        lo, hi = 0.0, 1.0
        # Bisection on the Hermite interpolant of component i.
        while (hi - lo) * h > time_tol and hi - lo > 1e-15:
            mid = 0.5 * (lo + hi)
            if _hermite(mid, y0[i], y1[i], f0[i], f1[i], h) > floor:
                lo = mid
            else:
                hi = mid
        if best is None or hi < best[0]:
            best = (hi, i)
    return best


def integrate(
    params: FlowParams, initial: FlowState, cfg: IntegratorConfig
) -> Trajectory:
    """Integrate the reduced system from an initial state.

    Runs until the configured end time, a floor crossing of the conformal
    factor or fiber size (singularity), or ``convergence_dwell`` consecutive
    accepted steps with RHS norm below abs_tol (convergence).  Raises
    IntegrationFailure, carrying the partial trajectory, if the step size
    underflows min_step while the error control keeps rejecting.
    """
    if cfg.t_end <= initial.t:
        raise InvalidInputError(
            f"t_end={cfg.t_end!r} must exceed the initial time {initial.t!r}"
        )
    deriv = _make_deriv(params)
    residual = _make_residual(params, initial)
    floor = cfg.singularity_floor

    t = initial.t
    y = np.array([initial.lam, initial.f])
    samples = [_sample(params, residual, t, y[0], y[1])]

    if y.min() <= floor:
        return Trajectory(params, samples, Termination(
            TerminationKind.SINGULARITY_DETECTED, t_star=t))

    def fail(reason: str):
        partial = Trajectory(params, samples, Termination(TerminationKind.STEP_UNDERFLOW))
        raise IntegrationFailure(
            f"{reason} at t={t!r} (h below min_step={cfg.min_step!r})", partial
        )

    k1 = deriv(t, y)
    h = max(_initial_step(deriv, t, y, k1, cfg.t_end, cfg.rel_tol, cfg.abs_tol,
                          cfg.max_step), cfg.min_step)
    facold = 1e-4
    dwell = 0
    last_rejected = False

    while True:
        clamped = t + h >= cfg.t_end
        if clamped:
            h = cfg.t_end - t
        if h <= 0.0:
            return Trajectory(params, samples, Termination(TerminationKind.TIME_LIMIT_REACHED))

        try:
            y1, err_vec, k7 = _dp_step(deriv, t, y, h, k1)
            err = _error_norm(err_vec, y, y1, cfg.rel_tol, cfg.abs_tol)
            step_ok = math.isfinite(err)
        except _DomainViolation:
            step_ok = False
            err = math.inf

        if not step_ok:
            h *= 0.5
            last_rejected = True
            if h < cfg.min_step:
                fail("stage left the positive domain")
            continue
        if err > 1.0:
            h *= max(_FAC_MIN, _SAFETY * err ** -0.2)
            last_rejected = True
            if h < cfg.min_step and not clamped:
                fail("error control rejected the minimum step")
            continue

        t1 = t + h

        # Singularity: some component crossed the floor inside this step.
        if y1.min() <= floor:
            theta, comp = _locate_floor_crossing(floor, y, y1, k1, k7, h, cfg.abs_tol)
            t_c = t + theta * h
            y_c = np.maximum(_hermite(theta, y, y1, k1, k7, h), 1e-300)
            if t_c > t:
                samples.append(_sample(params, residual, t_c, y_c[0], y_c[1]))
            # First-order extrapolation of the crossing variable to zero.
            t_star = t_c
            try:
                slope = deriv(t_c, y_c)[comp]
                if slope < 0.0:
                    t_star = t_c + y_c[comp] / -slope
            except _DomainViolation:
                pass
            return Trajectory(params, samples, Termination(
                TerminationKind.SINGULARITY_DETECTED, t_star=t_star))

        samples.append(_sample(params, residual, t1, y1[0], y1[1]))

        if cfg.convergence_dwell > 0 and float(np.max(np.abs(k7))) < cfg.abs_tol:
            dwell += 1
            if dwell >= cfg.convergence_dwell:
                return Trajectory(params, samples, Termination(
                    TerminationKind.CONVERGENCE_DETECTED,
                    limit_state=FlowState(t=t1, lam=y1[0], f=y1[1])))
        else:
            dwell = 0

        if t1 >= cfg.t_end:
            return Trajectory(params, samples, Termination(TerminationKind.TIME_LIMIT_REACHED))

        # PI step-size update on acceptance.
        if err == 0.0:
            fac = _FAC_MAX
        else:
            fac = _SAFETY * err ** -_PI_EXPO * facold ** _PI_BETA
            fac = min(_FAC_MAX, max(_FAC_MIN, fac))
        if last_rejected:
            fac = min(fac, 1.0)
        h = min(h * fac, cfg.max_step)
        facold = max(err, 1e-4)
        last_rejected = False
        t, y, k1 = t1, y1, k7
