"""Value types for the reduced flow systems and their trajectories."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidInputError


class FlowVariant(enum.Enum):
    """Which reduced system to integrate."""

    UNNORMALIZED = "unnormalized"
    NORMALIZED = "normalized"


@dataclass(frozen=True)
class FlowParams:
    """Parameters of a reduced flow: base curvature and connection strength.

    Attributes:
        k0: constant Gauss curvature of the base surface.
        f0_norm: squared norm of the initial curvature 2-form (>= 0).
        variant: unnormalized or volume-normalized system.
    """

    k0: float
    f0_norm: float
    variant: FlowVariant = FlowVariant.NORMALIZED

    def __post_init__(self):
        if not (math.isfinite(self.k0) and math.isfinite(self.f0_norm)):
            raise InvalidInputError(
                f"flow parameters must be finite, got k0={self.k0!r}, "
                f"f0_norm={self.f0_norm!r}"
            )
        if self.f0_norm < 0.0:
            raise DomainError(
                f"f0_norm is a squared norm and cannot be negative: {self.f0_norm!r}"
            )
        if not isinstance(self.variant, FlowVariant):
            raise InvalidInputError(f"variant must be a FlowVariant, got {self.variant!r}")


@dataclass(frozen=True)
class FlowState:
    """State of the reduced flow: time, conformal factor, fiber size.

    lam > 0 and f > 0 are hard invariants; a violation marks geometric
    degeneration and is never representable.
    """

    t: float
    lam: float
    f: float

    def __post_init__(self):
        for name in ("t", "lam", "f"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"state component {name!r} is not finite")
        if self.t < 0.0:
            raise DomainError(f"flow time cannot be negative: t={self.t!r}")
        if self.lam <= 0.0 or self.f <= 0.0:
            raise DomainError(
                f"conformal factor and fiber size must be positive, got "
                f"lam={self.lam!r}, f={self.f!r}"
            )


@dataclass(frozen=True)
class IntegratorConfig:
    """Knobs of the adaptive integrator.

    singularity_floor: a trajectory whose conformal factor or fiber size
        crosses this value is terminated and the crossing is localized.
    convergence_dwell: number of consecutive accepted steps with RHS norm
        below abs_tol required to declare convergence; 0 disables detection.
    """

    t_end: float
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 1.0
    min_step: float = 1e-14
    singularity_floor: float = 1e-6
    convergence_dwell: int = 10

    def __post_init__(self):
        for name in ("t_end", "rel_tol", "abs_tol", "max_step", "min_step",
                      "singularity_floor"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise InvalidInputError(f"{name} must be finite and positive, got {value!r}")
        if self.min_step >= self.max_step:
            raise InvalidInputError(
                f"min_step must be smaller than max_step, got "
                f"{self.min_step!r} >= {self.max_step!r}"
            )
        if self.convergence_dwell < 0:
            raise InvalidInputError("convergence_dwell cannot be negative")


class TerminationKind(enum.Enum):
    TIME_LIMIT_REACHED = "time_limit_reached"
    SINGULARITY_DETECTED = "singularity_detected"
    CONVERGENCE_DETECTED = "convergence_detected"
    # Only appears in the partial trajectory carried by IntegrationFailure.
    STEP_UNDERFLOW = "step_underflow"


@dataclass(frozen=True)
class Termination:
    """Why an integration stopped.

    t_star is set for singularity detection (estimated degeneration time);
    limit_state is set for convergence detection.
    """

    kind: TerminationKind
    t_star: float | None = None
    limit_state: FlowState | None = None


@dataclass(frozen=True)
class TrajectorySample:
    """One accepted integration step with derived observables.

    implicit_residual is None whenever the transcendental first integral is
    undefined for the run (flat connection, zero base curvature, unnormalized
    variant, or initial product lam*f != 1).
    """

    state: FlowState
    scalar_curvature: float
    f_lambda_product: float
    implicit_residual: float | None = None


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered samples of one flow run plus the termination reason."""

    params: FlowParams
    samples: tuple[TrajectorySample, ...]
    termination: Termination

    def __post_init__(self):
        # Tolerate lists at construction; store immutably.
        object.__setattr__(self, "samples", tuple(self.samples))

    @property
    def final_state(self) -> FlowState:
        return self.samples[-1].state

    def times(self) -> np.ndarray:
        return np.array([s.state.t for s in self.samples])

    def column(self, name: str) -> np.ndarray:
        """Observable column by CSV name; None residuals map to NaN."""
        if name == "t":
            return self.times()
        if name == "lambda":
            return np.array([s.state.lam for s in self.samples])
        if name == "f":
            return np.array([s.state.f for s in self.samples])
        if name == "scalar_curvature":
            return np.array([s.scalar_curvature for s in self.samples])
        if name == "f_lambda_product":
            return np.array([s.f_lambda_product for s in self.samples])
        if name == "implicit_residual":
            return np.array(
                [math.nan if s.implicit_residual is None else s.implicit_residual
                 for s in self.samples]
            )
        raise KeyError(f"unknown trajectory column {name!r}")
