"""Pointwise curvature algebra of circle-bundle connection metrics.

A metric on the total space of a principal circle bundle over a surface is
assembled from a base metric, a principal connection and a fiber-size
function ``f``: horizontal and vertical directions are declared orthogonal,
the base metric is pulled back horizontally, and the vertical leg is scaled
by ``f``.  In the adapted orthonormal coframe ``(theta1, theta2, theta3)``
(two horizontal legs pulled back from the base, one vertical leg) every
curvature quantity of that metric is an algebraic expression in a handful of
scalars at the point:

* ``k_tilde``  -- Gauss curvature of the base, pulled back;
* ``f, f1, f2, f11, ...`` -- the fiber size and its frame derivatives;
* ``c, alpha, beta``      -- the connection's curvature coefficient
  (curvature 2-form = ``c theta1^theta2``) and its frame derivatives;
* ``eta121, eta122``      -- coefficients of the pulled-back connection form
  of the base surface.

This module evaluates those closed-form expressions.  Storage conventions,
fixed everywhere in the package:

* 1-forms are coefficient triples on ``(theta1, theta2, theta3)``;
* 2-forms are coefficient triples on
  ``(theta1^theta2, theta1^theta3, theta2^theta3)``;
* Ricci matrices are indexed by the orthonormal frame ``(e1, e2, e3)``
  dual to the coframe.

All functions are pure and may be called concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError, InvalidInputError

#: Basis order for 1-form coefficient triples.
ONE_FORM_BASIS = ("theta1", "theta2", "theta3")

#: Basis order for 2-form coefficient triples.
TWO_FORM_BASIS = ("theta1^theta2", "theta1^theta3", "theta2^theta3")

#: 3x3 array of Ricci components in the orthonormal frame (e1, e2, e3).
RicciMatrix = np.ndarray


@dataclass(frozen=True)
class FramePointData:
    """Scalar data of a connection metric at one point.

    Attributes:
        k_tilde: pulled-back Gauss curvature of the base surface.
        f: fiber size (norm of the fundamental vertical field), must be > 0.
        f1, f2: frame derivatives of f (df = f1 theta1 + f2 theta2).
        f11, f12, f21, f22: second frame derivatives
            (df_i = f_i1 theta1 + f_i2 theta2).
        c: curvature coefficient of the connection
            (curvature 2-form = c theta1^theta2).
        alpha, beta: frame derivatives of c (dc = alpha theta1 + beta theta2).
        eta121, eta122: coefficients of the pulled-back base connection form
            (eta121 theta1 + eta122 theta2).

    All components must be finite.  Frame derivatives are independent inputs,
    not differentiated from a supplied function: the curvature formulas are
    pointwise-algebraic and this keeps each of them testable in isolation.
    """

    k_tilde: float
    f: float
    f1: float = 0.0
    f2: float = 0.0
    f11: float = 0.0
    f12: float = 0.0
    f21: float = 0.0
    f22: float = 0.0
    c: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    eta121: float = 0.0
    eta122: float = 0.0

    def __post_init__(self):
        for spec in fields(self):
            value = getattr(self, spec.name)
            if not math.isfinite(value):
                raise InvalidInputError(
                    f"frame data component {spec.name!r} is not finite: {value!r}"
                )
        if self.f <= 0.0:
            raise DomainError(f"fiber size must be positive, got f={self.f!r}")

    def integrability_defect(self) -> float:
        """Residual of the mixed-second-derivative compatibility condition.

        Vanishes exactly when f21 - f1*eta121 == f12 + f2*eta122, which is
        the condition for the Ricci matrix to be symmetric in its horizontal
        block (R12 == R21).
        """
        return (self.f21 - self.f1 * self.eta121) - (self.f12 + self.f2 * self.eta122)

    def is_integrable(self, tol: float = 1e-9) -> bool:
        """Check the compatibility condition up to ``tol * max(1, |terms|)``.

        A checked predicate, not an enforced constraint: non-integrable data
        is accepted by every operation and simply produces an asymmetric
        horizontal Ricci block.
        """
        scale = max(
            1.0,
            abs(self.f21),
            abs(self.f12),
            abs(self.f1 * self.eta121),
            abs(self.f2 * self.eta122),
        )
        return abs(self.integrability_defect()) <= tol * scale

    @property
    def laplacian_f(self) -> float:
        """Laplacian of the fiber-size function (positive-spectrum sign)."""
        return -self.f11 - self.f22 - self.f2 * self.eta121 + self.f1 * self.eta122


@dataclass(frozen=True)
class ConnectionCoefficients:
    """Levi-Civita connection 1-forms, upper-triangular part.

    Each field is the coefficient triple of one connection 1-form on
    ``(theta1, theta2, theta3)``.  The lower-triangular entries are defined
    structurally by skew-symmetry: the (2,1) form is minus ``theta12``, etc.
    """

    theta12: np.ndarray
    theta13: np.ndarray
    theta23: np.ndarray

    def as_matrix(self) -> np.ndarray:
        """Full skew-symmetric matrix of coefficient triples, shape (3,3,3).

        ``result[i, j]`` is the coefficient triple of the connection form with
        upper index i+1 and lower index j+1.
        """
        out = np.zeros((3, 3, 3))
        out[0, 1] = self.theta12
        out[0, 2] = self.theta13
        out[1, 2] = self.theta23
        out[1, 0] = -self.theta12
        out[2, 0] = -self.theta13
        out[2, 1] = -self.theta23
        return out


@dataclass(frozen=True)
class CurvatureComponents:
    """Curvature 2-forms of the Levi-Civita connection, upper-triangular part.

    Each field is the coefficient triple of one curvature 2-form on
    ``(theta1^theta2, theta1^theta3, theta2^theta3)``; lower-triangular
    entries are the structural negations.
    """

    omega12: np.ndarray
    omega13: np.ndarray
    omega23: np.ndarray


def levi_civita(p: FramePointData) -> ConnectionCoefficients:
    """Connection 1-forms of the circle-bundle metric at a point.

    In the adapted coframe:

    * form (1,2) = eta121 theta1 + eta122 theta2 - (f c / 2) theta3
    * form (1,3) = -(f c / 2) theta2 - (f1 / f) theta3
    * form (2,3) =  (f c / 2) theta1 - (f2 / f) theta3
    """
    half_fc = 0.5 * p.f * p.c
    return ConnectionCoefficients(
        theta12=np.array([p.eta121, p.eta122, -half_fc]),
        theta13=np.array([0.0, -half_fc, -p.f1 / p.f]),
        theta23=np.array([half_fc, 0.0, -p.f2 / p.f]),
    )


def curvature_form(p: FramePointData) -> CurvatureComponents:
    """Curvature 2-forms of the Levi-Civita connection at a point."""
    f, c = p.f, p.c
    f2c2 = f * f * c * c
    # Mixed coefficients shared between the (1,2) form and the horizontal
    # parts of the (1,3)/(2,3) forms.
    m1 = -0.5 * f * p.alpha - 1.5 * c * p.f1
    m2 = -0.5 * f * p.beta - 1.5 * c * p.f2
    omega12 = np.array([p.k_tilde - 0.75 * f2c2, m1, m2])
    omega13 = np.array(
        [
            m1,
            0.25 * f2c2 - p.f11 / f - (p.f2 / f) * p.eta121,
            -((p.f2 / f) * p.eta122 + p.f12 / f),
        ]
    )
    omega23 = np.array(
        [
            m2,
            (p.f1 / f) * p.eta121 - p.f21 / f,
            (p.f1 / f) * p.eta122 - p.f22 / f + 0.25 * f2c2,
        ]
    )
    return CurvatureComponents(omega12=omega12, omega13=omega13, omega23=omega23)


def ricci(p: FramePointData) -> RicciMatrix:
    """Ricci tensor in the orthonormal frame, as a 3x3 array.

    The (1,3)/(3,1) and (2,3)/(3,2) entries are equal by construction; the
    (1,2)/(2,1) entries agree exactly when the input satisfies the
    integrability condition (see ``FramePointData.is_integrable``) and are
    returned asymmetric otherwise -- callers decide whether to reject.
    """
    f, c = p.f, p.c
    half_f2c2 = 0.5 * f * f * c * c
    r11 = p.k_tilde - half_f2c2 - p.f11 / f - (p.f2 / f) * p.eta121
    r12 = (p.f1 / f) * p.eta121 - p.f21 / f
    r13 = 0.5 * f * p.beta + 1.5 * c * p.f2
    r21 = -(p.f2 / f) * p.eta122 - p.f12 / f
    r22 = p.k_tilde - half_f2c2 + (p.f1 / f) * p.eta122 - p.f22 / f
    r23 = -0.5 * f * p.alpha - 1.5 * c * p.f1
    r33 = half_f2c2 + p.laplacian_f / f
    return np.array(
        [
            [r11, r12, r13],
            [r21, r22, r23],
            [r13, r23, r33],
        ]
    )


def scalar_curvature(p: FramePointData) -> float:
    """Scalar curvature: trace of the Ricci matrix (same arithmetic path).

    For data with vanishing f-derivatives this reduces to
    ``2 k_tilde - f^2 c^2 / 2``.
    """
    return float(np.trace(ricci(p)))


def ricci_yang_mills(k_tilde: float, f: float, c: float) -> RicciMatrix:
    """Ricci tensor for constant fiber size and divergence-free curvature.

    When f is constant and the connection's curvature is co-closed, the
    horizontal and vertical subspaces are Ricci-orthogonal and the tensor is
    diagonal in the adapted frame:

        diag(k_tilde - f^2 c^2 / 2,  k_tilde - f^2 c^2 / 2,  f^2 c^2 / 2)

    Agrees with ``ricci`` on any FramePointData whose derivative entries all
    vanish.
    """
    for name, value in (("k_tilde", k_tilde), ("f", f), ("c", c)):
        if not math.isfinite(value):
            raise InvalidInputError(f"{name} is not finite: {value!r}")
    if f <= 0.0:
        raise DomainError(f"fiber size must be positive, got f={f!r}")
    vertical = 0.5 * f * f * c * c
    horizontal = k_tilde - vertical
    return np.diag([horizontal, horizontal, vertical])
