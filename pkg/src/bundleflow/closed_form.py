"""Analytic solutions, first integral, and geometry classification.

The normalized reduced flow with initial product lam * f = 1 collapses to a
single autonomous equation for the conformal factor,

    dlam/dt = -(2/3) k0 (1 - a0^3 / lam^3),      a0 = cbrt(f0_norm / k0),

whose solutions are known in closed form in the degenerate regimes (flat
connection, flat base) and implicitly through a log/arctan first integral
otherwise.  Each regime's long-time behavior identifies one of six
three-dimensional model geometries; the classifier and the per-regime limit
predictions live here too.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInputError, SingularTimeError
from .state import FlowState


class GeometryClass(enum.Enum):
    """Model geometry carried by the circle bundle in each parameter regime."""

    S3 = "S3"
    NIL = "Nil"
    SL2R_TILDE = "SL2R_tilde"
    E3 = "E3"
    S2XR = "S2xR"
    H2XR = "H2xR"


def classify(k0: float, f0_norm: float, eps: float = 1e-12) -> GeometryClass:
    """Model geometry from the sign pattern of (k0, f0_norm).

    eps is the threshold below which a parameter counts as zero.  Total and
    exclusive: every finite input pair maps to exactly one label.
    """
    if not (math.isfinite(k0) and math.isfinite(f0_norm)):
        raise InvalidInputError(f"parameters must be finite: k0={k0!r}, f0_norm={f0_norm!r}")
    if not (math.isfinite(eps) and eps > 0.0):
        raise InvalidInputError(f"eps must be finite and positive, got {eps!r}")
    if f0_norm < 0.0:
        raise DomainError(f"f0_norm is a squared norm and cannot be negative: {f0_norm!r}")
    flat_connection = f0_norm <= eps
    if abs(k0) <= eps:
        return GeometryClass.E3 if flat_connection else GeometryClass.NIL
    if k0 > 0.0:
        return GeometryClass.S2XR if flat_connection else GeometryClass.S3
    return GeometryClass.H2XR if flat_connection else GeometryClass.SL2R_TILDE


@dataclass(frozen=True)
class ImplicitConstants:
    """Constants of the transcendental first integral.

    a0 is the real cube root of f0_norm / k0 (negative for k0 < 0, keeping
    every term of the first integral real); c0 is the integration constant
    fixed by the initial condition.
    """

    a0: float
    c0: float


def _phi_lambda_part(a0: float, lam: float) -> float:
    """Antiderivative of lam^3 / (lam^3 - a0^3) with respect to lam.

    Composed of a log of |lam - a0|^(1/3) over the positive-definite
    quadratic factor to the power 1/6, an arctan on the principal branch,
    and a linear term.
    """
    if lam == a0:
        raise DomainError(f"first integral has a log singularity at lam = a0 = {a0!r}")
    quad = lam * lam + a0 * lam + a0 * a0
    if quad <= 0.0:
        raise DomainError(f"quadratic factor not positive at lam={lam!r}, a0={a0!r}")
    log_term = a0 * (math.log(abs(lam - a0)) / 3.0 - math.log(quad) / 6.0)
    atan_term = (a0 / math.sqrt(3.0)) * math.atan((2.0 * lam + a0) / (math.sqrt(3.0) * a0))
    return log_term - atan_term + lam


def implicit_constants(
    k0: float,
    f0_norm: float,
    lambda0: float = 1.0,
    t0: float = 0.0,
) -> ImplicitConstants:
    """Build the first-integral constants for given parameters and initial data.

    Defined only for k0 != 0 and f0_norm > 0.  c0 is always computed from the
    initial condition, never tabulated.
    """
    for name, value in (("k0", k0), ("f0_norm", f0_norm), ("lambda0", lambda0), ("t0", t0)):
        if not math.isfinite(value):
            raise InvalidInputError(f"{name} is not finite: {value!r}")
    if k0 == 0.0 or f0_norm <= 0.0:
        raise DomainError(
            "first integral requires k0 != 0 and f0_norm > 0, got "
            f"k0={k0!r}, f0_norm={f0_norm!r}"
        )
    if lambda0 <= 0.0:
        raise DomainError(f"initial conformal factor must be positive: {lambda0!r}")
    a0 = float(np.cbrt(f0_norm / k0))
    c0 = _phi_lambda_part(a0, lambda0) + (2.0 / 3.0) * k0 * t0
    return ImplicitConstants(a0=a0, c0=c0)


def implicit_first_integral(
    consts: ImplicitConstants, k0: float, lam: float, t: float
) -> float:
    """Residual of the first integral at (lam, t).

    Zero along exact solutions of the reduced equation with the initial data
    used to build ``consts``.  Diverges logarithmically as lam approaches a0.
    """
    if lam <= 0.0:
        raise DomainError(f"conformal factor must be positive: {lam!r}")
    return _phi_lambda_part(consts.a0, lam) + (2.0 / 3.0) * k0 * t - consts.c0


def nil_solution(f0_norm: float, t: float) -> FlowState:
    """Closed-form normalized flow over a flat base with a non-flat connection.

    lam(t) = (1 + (8/3) f0_norm t)^(1/4), f = 1/lam.  Exists for all t >= 0;
    the base expands, the fiber collapses.
    """
    if not (math.isfinite(f0_norm) and math.isfinite(t)):
        raise InvalidInputError(f"inputs must be finite: f0_norm={f0_norm!r}, t={t!r}")
    if f0_norm <= 0.0:
        raise DomainError(f"f0_norm must be positive, got {f0_norm!r}")
    if t < 0.0:
        raise DomainError(f"time cannot be negative: {t!r}")
    lam = (1.0 + (8.0 / 3.0) * f0_norm * t) ** 0.25
    return FlowState(t=t, lam=lam, f=1.0 / lam)


def product_flat_solution(k0: float, t: float) -> FlowState:
    """Closed-form normalized flow with a flat connection over a curved base.

    lam(t) = 1 - (2/3) k0 t, f = 1/lam.  For k0 > 0 the conformal factor hits
    zero at t = 3/(2 k0) and the fiber blows up; evaluation at or beyond that
    time raises SingularTimeError carrying it.
    """
    if not (math.isfinite(k0) and math.isfinite(t)):
        raise InvalidInputError(f"inputs must be finite: k0={k0!r}, t={t!r}")
    if k0 == 0.0:
        raise DomainError("k0 must be nonzero for the flat-connection closed form")
    if t < 0.0:
        raise DomainError(f"time cannot be negative: {t!r}")
    if k0 > 0.0:
        t_star = 1.5 / k0
        if t >= t_star:
            raise SingularTimeError(
                f"metric degenerates at t = {t_star!r}; requested t = {t!r}", t_star
            )
    lam = 1.0 - (2.0 / 3.0) * k0 * t
    return FlowState(t=t, lam=lam, f=1.0 / lam)


def product_flat_scalar_curvature(k0: float, t: float) -> float:
    """Scalar curvature along ``product_flat_solution``: 6 k0 / (3 - 2 k0 t)."""
    state = product_flat_solution(k0, t)
    return 2.0 * k0 / state.lam


def spherical_unnormalized_solution(k0: float, t: float) -> FlowState:
    """Closed-form unnormalized flow at the balanced point f0_norm = k0 > 0.

    On the branch with f^2 = lam: lam(t) = 1 - k0 t, f = sqrt(lam), valid for
    0 <= t < 1/k0; the whole metric shrinks homothetically to a point.
    """
    if not (math.isfinite(k0) and math.isfinite(t)):
        raise InvalidInputError(f"inputs must be finite: k0={k0!r}, t={t!r}")
    if k0 <= 0.0:
        raise DomainError(f"k0 must be positive, got {k0!r}")
    if t < 0.0:
        raise DomainError(f"time cannot be negative: {t!r}")
    t_star = 1.0 / k0
    if t >= t_star:
        raise SingularTimeError(
            f"metric collapses at t = {t_star!r}; requested t = {t!r}", t_star
        )
    lam = 1.0 - k0 * t
    return FlowState(t=t, lam=lam, f=math.sqrt(lam))


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Long-time behavior of a normalized run started at lam = f = 1.

    Fields are None when the regime makes no statement about them.  The
    lower-bound fields describe lam^exponent >= slope * t + intercept.
    """

    geometry: GeometryClass
    lambda_limit: float | None = None
    f_limit: float | None = None
    scalar_limit: float | None = None
    singular_time: float | None = None
    lower_bound_slope: float | None = None
    lower_bound_intercept: float | None = None
    lower_bound_exponent: int | None = None


def asymptotic_prediction(
    geometry: GeometryClass, k0: float, f0_norm: float, eps: float = 1e-12
) -> AsymptoticPrediction:
    """Limit prediction for a parameter pair, checked against the classifier."""
    actual = classify(k0, f0_norm, eps)
    if actual is not geometry:
        raise InvalidInputError(
            f"geometry {geometry.value} is inconsistent with parameters "
            f"(k0={k0!r}, f0_norm={f0_norm!r}) which classify as {actual.value}"
        )
    if geometry is GeometryClass.E3:
        return AsymptoticPrediction(
            geometry, lambda_limit=1.0, f_limit=1.0, scalar_limit=0.0
        )
    if geometry is GeometryClass.S3:
        a0 = float(np.cbrt(f0_norm / k0))
        return AsymptoticPrediction(
            geometry,
            lambda_limit=a0,
            f_limit=1.0 / a0,
            scalar_limit=1.5 * k0 / a0,
        )
    if geometry is GeometryClass.NIL:
        return AsymptoticPrediction(
            geometry, lambda_limit=math.inf, f_limit=0.0, scalar_limit=0.0
        )
    if geometry is GeometryClass.SL2R_TILDE:
        return AsymptoticPrediction(
            geometry,
            lambda_limit=math.inf,
            f_limit=0.0,
            scalar_limit=0.0,
            lower_bound_slope=(2.0 / 3.0) * f0_norm,
            lower_bound_intercept=1.0,
            lower_bound_exponent=4,
        )
    if geometry is GeometryClass.S2XR:
        return AsymptoticPrediction(
            geometry,
            lambda_limit=0.0,
            f_limit=math.inf,
            scalar_limit=math.inf,
            singular_time=1.5 / k0,
        )
    # H2xR: nonsingular for all time, base expands, fiber collapses.
    return AsymptoticPrediction(
        geometry, lambda_limit=math.inf, f_limit=0.0, scalar_limit=0.0
    )
