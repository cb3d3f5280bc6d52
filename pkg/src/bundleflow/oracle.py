"""Finite-difference verification of the adapted-frame curvature formulas.

Two families of circle-bundle metrics are realized as explicit coordinate
charts:

* a twisted product over a flat base on coordinates (x, y, z) with vertical
  form dz + c x dy, giving metric
  ``lam (dx^2 + dy^2) + f^2 (dz + c x dy)^2`` (the three-dimensional
  Heisenberg geometry for c != 0, flat space for c = 0);
* a two-parameter family of homogeneous metrics on the three-sphere fibered
  over a round two-sphere of Gauss curvature k0, in Euler-type coordinates
  (polar angle, azimuth, fiber angle), with the vertical form scaled so the
  curvature 2-form is ``(c1 k0 / 2) x (base volume form)`` for bundle degree
  c1.

For each chart, Christoffel symbols are assembled from central finite
differences of the metric components and the Ricci tensor from central
differences of the Christoffel symbols (second-order accurate in the step
h, with an optional Richardson extrapolation).  Converting the result to
the adapted orthonormal frame via the chart's horizontal/vertical splitting
makes it directly comparable to the closed-form constant-fiber Ricci matrix
``frame_geometry.ricci_yang_mills(k0 / lam, f, c / lam)`` -- the curvature
coefficient and base curvature both rescale by 1/lam when the base metric
is scaled by lam.  Agreement of the two independent computations validates
both.

Grid evaluations are independent; a report is a single reduction over them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ChartDomainError, DomainError, InvalidInputError, NumericalError
from .frame_geometry import RicciMatrix, ricci_yang_mills

#: Pole-exclusion margin (radians) for the sphere chart.
SPHERE_CHART_MARGIN = 0.1

#: Default finite-difference step: balances truncation against cancellation
#: for metric entries of order one in double precision.
DEFAULT_FD_STEP = 1e-3

_MAX_METRIC_CONDITION = 1e12


@dataclass(frozen=True)
class FamilyParams:
    """Connection-metric parameters a chart realizes.

    lam scales the base metric, f is the fiber size, c is the curvature
    constant relative to the unscaled base volume form, k0 the unscaled
    base Gauss curvature.
    """

    lam: float
    f: float
    c: float
    k0: float


@dataclass(frozen=True)
class CoordinateMetric:
    """A metric chart: component function, domain box, adapted frame.

    ``components(point)`` returns the symmetric 3x3 matrix of metric
    components at a coordinate triple; ``frame(point)`` returns the 3x3
    matrix whose columns are the coordinate components of the adapted
    orthonormal frame (two horizontal legs, one vertical).
    """

    name: str
    family_params: FamilyParams
    components: Callable[[np.ndarray], np.ndarray]
    frame: Callable[[np.ndarray], np.ndarray]
    chart_domain: tuple[tuple[float, float], ...]

    dimension: int = 3

    def contains(self, point: np.ndarray, pad: float = 0.0) -> bool:
        return all(
            lo + pad <= point[i] <= hi - pad
            for i, (lo, hi) in enumerate(self.chart_domain)
        )


def torus_bundle_metric(lam: float, f: float, c: float) -> CoordinateMetric:
    """Twisted-product chart over a flat base: lam (dx^2+dy^2) + f^2 (dz + c x dy)^2."""
    for name, value in (("lam", lam), ("f", f)):
        if not (math.isfinite(value) and value > 0.0):
            raise DomainError(f"{name} must be finite and positive, got {value!r}")
    if not math.isfinite(c):
        raise InvalidInputError(f"c is not finite: {c!r}")

    def components(point: np.ndarray) -> np.ndarray:
        x = point[0]
        f2 = f * f
        g = np.zeros((3, 3))
        g[0, 0] = lam
        g[1, 1] = lam + f2 * (c * x) ** 2
        g[2, 2] = f2
        g[1, 2] = g[2, 1] = f2 * c * x
        return g

    def frame(point: np.ndarray) -> np.ndarray:
        x = point[0]
        rl = 1.0 / math.sqrt(lam)
        B = np.zeros((3, 3))
        B[0, 0] = rl                 # e1: unit x-direction
        B[1, 1] = rl                 # e2: horizontal lift of the y-direction
        B[2, 1] = -rl * c * x
        B[2, 2] = 1.0 / f            # e3: unit vertical
        return B

    return CoordinateMetric(
        name=f"torus_bundle(lam={lam:g}, f={f:g}, c={c:g})",
        family_params=FamilyParams(lam=lam, f=f, c=c, k0=0.0),
        components=components,
        frame=frame,
        chart_domain=((-4.0, 4.0), (-4.0, 4.0), (-4.0, 4.0)),
    )


def berger_metric(lam: float, f: float, k0: float, c1: int) -> CoordinateMetric:
    """Sphere-bundle chart: lam x (round base of curvature k0) + f^2 vertical.

    The vertical 1-form is s (dpsi - cos(theta) dphi) with s = c1 / 2, which
    makes the curvature 2-form (c1 k0 / 2) times the base volume form.  At
    lam = f = 1, k0 = 4, c1 = 1 the chart reproduces the round metric of
    constant sectional curvature one.  The chart excludes the coordinate
    poles by a fixed margin.
    """
    for name, value in (("lam", lam), ("f", f), ("k0", k0)):
        if not (math.isfinite(value) and value > 0.0):
            raise DomainError(f"{name} must be finite and positive, got {value!r}")
    if c1 == 0:
        raise DomainError("bundle degree c1 must be nonzero (vertical form degenerates)")
    s = 0.5 * c1
    c0 = 0.5 * c1 * k0

    def components(point: np.ndarray) -> np.ndarray:
        theta = point[0]
        sin_t = math.sin(theta)
        cos_t = math.cos(theta)
        fs2 = (f * s) ** 2
        g = np.zeros((3, 3))
        g[0, 0] = lam / k0
        g[1, 1] = lam * sin_t * sin_t / k0 + fs2 * cos_t * cos_t
        g[2, 2] = fs2
        g[1, 2] = g[2, 1] = -fs2 * cos_t
        return g

    def frame(point: np.ndarray) -> np.ndarray:
        theta = point[0]
        sin_t = math.sin(theta)
        cos_t = math.cos(theta)
        q = math.sqrt(k0 / lam)
        B = np.zeros((3, 3))
        B[0, 0] = q                  # e1: unit polar direction
        B[1, 1] = q / sin_t          # e2: horizontal lift of the azimuth
        B[2, 1] = q * cos_t / sin_t
        B[2, 2] = 1.0 / (f * s)      # e3: unit vertical
        return B

    return CoordinateMetric(
        name=f"berger(lam={lam:g}, f={f:g}, k0={k0:g}, c1={c1})",
        family_params=FamilyParams(lam=lam, f=f, c=c0, k0=k0),
        components=components,
        frame=frame,
        chart_domain=(
            (SPHERE_CHART_MARGIN, math.pi - SPHERE_CHART_MARGIN),
            (0.0, 2.0 * math.pi),
            (0.0, 4.0 * math.pi),
        ),
    )


def _metric_inverse(g: np.ndarray) -> np.ndarray:
    try:
        cond = np.linalg.cond(g)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"metric inversion failed: {exc}") from exc
    if not math.isfinite(cond) or cond > _MAX_METRIC_CONDITION:
        raise NumericalError(f"metric is ill-conditioned (cond={cond:.3e})")
    return np.linalg.inv(g)


def finite_difference_christoffel(
    metric: CoordinateMetric, point: np.ndarray, h: float
) -> np.ndarray:
    """Christoffel symbols Gamma[i, j, k] from central differences of the metric."""
    point = np.asarray(point, dtype=float)
    g = metric.components(point)
    D = np.empty((3, 3, 3))  # D[k, a, b] = d_k g_ab
    for k in range(3):
        step = np.zeros(3)
        step[k] = h
        D[k] = (metric.components(point + step) - metric.components(point - step)) / (2.0 * h)
    ginv = _metric_inverse(g)
    # S[j, k, l] = d_j g_kl + d_k g_jl - d_l g_jk
    S = D + D.transpose(1, 0, 2) - D.transpose(1, 2, 0)
    return 0.5 * np.einsum("il,jkl->ijk", ginv, S)


def finite_difference_ricci(
    metric: CoordinateMetric,
    point: np.ndarray,
    h: float = DEFAULT_FD_STEP,
    richardson: bool = False,
) -> np.ndarray:
    """Ricci tensor (coordinate components) by nested central differences.

    Second-order accurate in h; with ``richardson`` the h and h/2 results are
    combined to fourth order.  The point must keep a 2h neighborhood (4h with
    Richardson) inside the chart.
    """
    if not (math.isfinite(h) and h > 0.0):
        raise InvalidInputError(f"step h must be finite and positive, got {h!r}")
    if richardson:
        coarse = finite_difference_ricci(metric, point, h, richardson=False)
        fine = finite_difference_ricci(metric, point, 0.5 * h, richardson=False)
        return (4.0 * fine - coarse) / 3.0

    point = np.asarray(point, dtype=float)
    if not metric.contains(point, pad=2.0 * h):
        raise ChartDomainError(
            f"point {point.tolist()} is within 2h of the {metric.name} chart boundary"
        )
    G0 = finite_difference_christoffel(metric, point, h)
    dG = np.empty((3, 3, 3, 3))  # dG[a, i, j, k] = d_a Gamma[i, j, k]
    for a in range(3):
        step = np.zeros(3)
        step[a] = h
        dG[a] = (
            finite_difference_christoffel(metric, point + step, h)
            - finite_difference_christoffel(metric, point - step, h)
        ) / (2.0 * h)
    t1 = np.einsum("llmn->mn", dG)
    t2 = np.einsum("nlml->mn", dG)
    t3 = np.einsum("lls,smn->mn", G0, G0)
    t4 = np.einsum("lns,sml->mn", G0, G0)
    return t1 - t2 + t3 - t4


def ricci_in_adapted_frame(
    metric: CoordinateMetric,
    point: np.ndarray,
    h: float = DEFAULT_FD_STEP,
    richardson: bool = False,
) -> np.ndarray:
    """Finite-difference Ricci converted to the adapted orthonormal frame."""
    R = finite_difference_ricci(metric, point, h, richardson)
    B = metric.frame(np.asarray(point, dtype=float))
    return B.T @ R @ B


def expected_frame_ricci(metric: CoordinateMetric) -> RicciMatrix:
    """Closed-form frame Ricci the chart should reproduce.

    The base rescaling lam takes the Gauss curvature to k0/lam and the
    curvature constant to c/lam (squared norms of 2-forms scale as 1/lam^2).
    """
    p = metric.family_params
    return ricci_yang_mills(p.k0 / p.lam, p.f, p.c / p.lam)


def grid_points(
    metric: CoordinateMetric, n_per_axis: int, inset: float = 0.15
) -> list[np.ndarray]:
    """Cartesian sampling grid inside the chart, inset from each boundary."""
    if n_per_axis < 1:
        raise InvalidInputError("n_per_axis must be at least 1")
    axes = []
    for lo, hi in metric.chart_domain:
        pad = inset * (hi - lo)
        axes.append(np.linspace(lo + pad, hi - pad, n_per_axis))
    mesh = np.meshgrid(*axes, indexing="ij")
    return [np.array(p) for p in zip(*(m.ravel() for m in mesh))]


@dataclass(frozen=True)
class OracleReport:
    """Outcome of one chart-vs-formula comparison run."""

    max_componentwise_error: float
    grid_spacing: float
    sample_points: int
    convergence_rate_estimate: float

    def __post_init__(self):
        if self.max_componentwise_error < 0.0:
            raise InvalidInputError("errors cannot be negative")

    def as_dict(self) -> dict:
        return {
            "max_componentwise_error": self.max_componentwise_error,
            "grid_spacing": self.grid_spacing,
            "sample_points": self.sample_points,
            "convergence_rate_estimate": self.convergence_rate_estimate,
        }


def verify_frame_formulas(
    metric: CoordinateMetric,
    points: Sequence[np.ndarray] | None = None,
    h: float = DEFAULT_FD_STEP,
    n_per_axis: int = 3,
    estimate_order: bool = True,
) -> OracleReport:
    """Compare finite-difference Ricci against the closed-form frame matrix.

    Reports the maximum componentwise deviation over the grid and, when
    ``estimate_order`` is set, the empirical order in h from a second sweep at
    h/2 (expected near 2).  The order estimate is NaN when the coarse sweep is
    already rounding-dominated rather than truncation-dominated; that happens
    for charts whose metric entries are low-degree polynomials in the
    coordinates (the scheme differentiates those exactly), so no truncation
    regime exists at any h.
    """
    pts = list(points) if points is not None else grid_points(metric, n_per_axis)
    expected = expected_frame_ricci(metric)

    def max_error(step: float) -> float:
        worst = 0.0
        for pt in pts:
            dev = np.max(np.abs(ricci_in_adapted_frame(metric, pt, step) - expected))
            worst = max(worst, float(dev))
        return worst

    coarse = max_error(h)
    rate = math.nan
    if estimate_order:
        fine = max_error(0.5 * h)
        # Rounding noise for the nested differences is ~eps/h^2 (1e-10 at
        # h=1e-3); demand two orders of headroom before trusting a rate.
        if coarse > 1e-8 and fine > 0.0:
            rate = math.log2(coarse / fine)
    return OracleReport(
        max_componentwise_error=coarse,
        grid_spacing=h,
        sample_points=len(pts),
        convergence_rate_estimate=rate,
    )


def standard_suite(
    h: float = DEFAULT_FD_STEP,
    nil_n_per_axis: int = 3,
    sphere_n_per_axis: int = 5,
    rng: np.random.Generator | None = None,
    n_random_points: int = 0,
) -> dict[str, OracleReport]:
    """Run the reference verification suite over both chart families.

    The twisted-product family sweeps c in {1, 2} and lam in {1, 2} with
    f = 1/lam; the sphere family is the round case.  With an RNG, each chart
    additionally gets ``n_random_points`` uniform samples from its insetted
    domain.
    """
    metrics = []
    for c in (1.0, 2.0):
        for lam in (1.0, 2.0):
            metrics.append(
                (f"nil_c{c:g}_lam{lam:g}", torus_bundle_metric(lam, 1.0 / lam, c),
                 nil_n_per_axis)
            )
    metrics.append(("berger_round", berger_metric(1.0, 1.0, 4.0, 1), sphere_n_per_axis))

    reports = {}
    for name, metric, n_axis in metrics:
        pts = grid_points(metric, n_axis)
        if rng is not None and n_random_points > 0:
            for _ in range(n_random_points):
                pt = np.array(
                    [
                        rng.uniform(lo + 0.2 * (hi - lo), hi - 0.2 * (hi - lo))
                        for lo, hi in metric.chart_domain
                    ]
                )
                pts.append(pt)
        reports[name] = verify_frame_formulas(metric, points=pts, h=h)
    return reports


def suite_passes(
    reports: dict[str, OracleReport],
    max_error: float = 1e-4,
    order_range: tuple[float, float] = (1.8, 2.2),
) -> tuple[bool, list[str]]:
    """Gate a suite run; returns (passed, human-readable failure reasons)."""
    reasons = []
    for name, report in reports.items():
        if report.max_componentwise_error > max_error:
            reasons.append(
                f"{name}: max error {report.max_componentwise_error:.3e} > {max_error:.1e}"
            )
        rate = report.convergence_rate_estimate
        if math.isfinite(rate) and not (order_range[0] <= rate <= order_range[1]):
            reasons.append(
                f"{name}: convergence order {rate:.3f} outside "
                f"[{order_range[0]}, {order_range[1]}]"
            )
    return (not reasons, reasons)
