"""Coordinate charts, conformal factors and curvature of the Darboux spaces.

Both spaces carry a conformally flat metric ds^2 = g(u, v) (du^2 + dv^2) with

    D_I  : g = 2u                     (u > u_min > 0)
    D_II : g = (b u^2 - a) / u^2      (u > 0, a <= 0, b >= 0)

D_II contains the Euclidean plane (a, b) = (0, 1) and the unit hyperbolic
plane in horicyclic coordinates (a, b) = (-1, 0) as special cases.

All functions accept scalars or numpy arrays for the coordinates.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ChartSpaceMismatch, ConfigError, DomainViolation, SingularDenominator


class Space(str, enum.Enum):
    DI = "DI"
    DII = "DII"


class Chart(str, enum.Enum):
    """Named charts.

    ``PARABOLIC_POLAR`` is the polar parametrisation of the D_II parabolic
    plane, xi = r cos(phi), eta = r sin(phi); it is the chart in which the
    D_II Coulomb-type potential separates radially.
    """
    UV = "uv"
    ROTATED_RQ = "rq"
    DISPLACED_PARABOLIC = "displaced-parabolic"
    POLAR = "polar"
    PARABOLIC = "parabolic"
    PARABOLIC_POLAR = "parabolic-polar"
    ELLIPTIC = "elliptic"


CHARTS_ON = {
    Space.DI: frozenset({Chart.UV, Chart.ROTATED_RQ, Chart.DISPLACED_PARABOLIC}),
    Space.DII: frozenset({Chart.UV, Chart.POLAR, Chart.PARABOLIC,
                          Chart.PARABOLIC_POLAR, Chart.ELLIPTIC}),
}


@dataclass(frozen=True)
class SpaceSpec:
    """Darboux space with its metric parameters.

    Parameters
    ----------
    space : Space
        ``Space.DI`` or ``Space.DII``.
    a, b : float
        D_II metric parameters (ignored on D_I). ``a <= 0`` and ``b >= 0`` so
        that the conformal factor stays positive for every u > 0.
    u_min : float
        Boundary cutoff of the D_I half plane, u > u_min.
    """
    space: Space
    a: float = -1.0
    b: float = 1.0
    u_min: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "space", Space(self.space))
        if self.space is Space.DI:
            if not self.u_min > 0:
                raise ConfigError(f"D_I needs u_min > 0, got {self.u_min}")
        else:
            if self.a > 0:
                raise ConfigError(f"D_II needs a <= 0, got a={self.a}")
            if self.b < 0:
                raise ConfigError(f"D_II needs b >= 0, got b={self.b}")
            if self.a == 0 and self.b == 0:
                raise ConfigError("D_II with a = b = 0 has a degenerate metric")

    @property
    def is_flat_limit(self) -> bool:
        return self.space is Space.DII and self.a == 0.0 and self.b == 1.0

    @property
    def is_hyperbolic_limit(self) -> bool:
        return self.space is Space.DII and self.a == -1.0 and self.b == 0.0


@dataclass(frozen=True)
class ChartPoint:
    """Point (c1, c2) in a named chart.

    ``param`` carries the chart parameter: the rotation angle for
    ``ROTATED_RQ``, the displacement c for ``DISPLACED_PARABOLIC`` and the
    semi focal distance d for ``ELLIPTIC``. Other charts ignore it.
    """
    chart: Chart
    c1: float
    c2: float
    param: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "chart", Chart(self.chart))


def _check_u(u, space: SpaceSpec | None = None):
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise DomainViolation("u must be positive")
    return u


def to_uv(space: SpaceSpec, p: ChartPoint):
    """Map a chart point to (u, v).

    Raises
    ------
    ChartSpaceMismatch
        Chart does not belong to the space.
    DomainViolation
        Chart coordinates outside their range, or image with u <= 0.
    """
    if p.chart not in CHARTS_ON[space.space]:
        raise ChartSpaceMismatch(f"chart {p.chart.value} is not defined on {space.space.value}")
    c1 = np.asarray(p.c1, dtype=float)
    c2 = np.asarray(p.c2, dtype=float)
    ch = p.chart
    if ch is Chart.UV:
        u, v = c1, c2
    elif ch is Chart.ROTATED_RQ:
        th = p.param
        if not 0.0 <= th <= np.pi:
            raise DomainViolation("rotation angle must lie in [0, pi]")
        u = c1 * np.cos(th) + c2 * np.sin(th)
        v = -c1 * np.sin(th) + c2 * np.cos(th)
    elif ch is Chart.DISPLACED_PARABOLIC:
        if not p.param > 0 or np.any(c2 <= 0):
            raise DomainViolation("displaced parabolic needs c > 0 and eta > 0")
        u = 0.5 * (c1**2 - c2**2) + p.param
        v = c1 * c2
    elif ch is Chart.POLAR:
        if np.any(c1 <= 0) or np.any(np.abs(c2) >= np.pi / 2):
            raise DomainViolation("polar needs rho > 0 and |theta| < pi/2")
        u = c1 * np.cos(c2)
        v = c1 * np.sin(c2)
    elif ch is Chart.PARABOLIC:
        if np.any(c1 <= 0) or np.any(c2 <= 0):
            raise DomainViolation("parabolic needs xi, eta > 0")
        u = c1 * c2
        v = 0.5 * (c1**2 - c2**2)
    elif ch is Chart.PARABOLIC_POLAR:
        if np.any(c1 <= 0) or np.any(c2 <= 0) or np.any(c2 >= np.pi / 2):
            raise DomainViolation("parabolic polar needs r > 0 and 0 < phi < pi/2")
        u = c1**2 * np.sin(c2) * np.cos(c2)
        v = 0.5 * c1**2 * np.cos(2 * c2)
    else:  # ELLIPTIC
        d = p.param
        if not d > 0 or np.any(c1 <= 0) or np.any(np.abs(c2) >= np.pi / 2):
            raise DomainViolation("elliptic needs d > 0, omega > 0, |phi| < pi/2")
        u = d * np.cosh(c1) * np.cos(c2)
        v = d * np.sinh(c1) * np.sin(c2)
    if np.any(u <= 0):
        raise DomainViolation("image point has u <= 0")
    if space.space is Space.DI and np.any(u <= space.u_min) and ch is not Chart.UV:
        # the UV chart is allowed to probe the cut region explicitly
        raise DomainViolation(f"image point has u <= u_min = {space.u_min}")
    return u, v


def jacobian(p: ChartPoint):
    """Jacobian d(u, v)/d(c1, c2) of a chart map, as a 2x2 array."""
    c1, c2 = float(p.c1), float(p.c2)
    ch = p.chart
    if ch is Chart.UV:
        return np.eye(2)
    if ch is Chart.ROTATED_RQ:
        s, c = np.sin(p.param), np.cos(p.param)
        return np.array([[c, s], [-s, c]])
    if ch is Chart.DISPLACED_PARABOLIC:
        return np.array([[c1, -c2], [c2, c1]])
    if ch is Chart.POLAR:
        return np.array([[np.cos(c2), -c1 * np.sin(c2)], [np.sin(c2), c1 * np.cos(c2)]])
    if ch is Chart.PARABOLIC:
        return np.array([[c2, c1], [c1, -c2]])
    if ch is Chart.PARABOLIC_POLAR:
        return np.array([[c1 * np.sin(2 * c2), c1**2 * np.cos(2 * c2)],
                         [c1 * np.cos(2 * c2), -c1**2 * np.sin(2 * c2)]])
    d = p.param
    return np.array([[d * np.sinh(c1) * np.cos(c2), -d * np.cosh(c1) * np.sin(c2)],
                     [d * np.cosh(c1) * np.sin(c2), d * np.sinh(c1) * np.cos(c2)]])


def conformal_factor(space: SpaceSpec, u, v=0.0):
    """Conformal factor g(u, v) of ds^2 = g (du^2 + dv^2)."""
    u = _check_u(u)
    if space.space is Space.DI:
        return 2.0 * u
    return (space.b * u**2 - space.a) / u**2


def chart_metric(space: SpaceSpec, p: ChartPoint):
    """Metric tensor in chart coordinates, g J^T J (2x2)."""
    u, v = to_uv(space, p)
    J = jacobian(p)
    return float(conformal_factor(space, u, v)) * (J.T @ J)


def gaussian_curvature(space: SpaceSpec, u, v=0.0):
    """Closed-form Gaussian curvature G = -(1/2g) Laplacian(ln g).

    D_I gives 1/(4 u^3); D_II gives a (a - 3 b u^2) / (a - b u^2)^3.
    """
    u = _check_u(u)
    if space.space is Space.DI:
        return 1.0 / (4.0 * u**3) + 0.0 * np.asarray(v, dtype=float)
    a, b = space.a, space.b
    den = a - b * u**2
    if np.any(den == 0):
        raise SingularDenominator("a - b u^2 = 0")
    return a * (a - 3.0 * b * u**2) / den**3 + 0.0 * np.asarray(v, dtype=float)


def curvature_numeric(space: SpaceSpec, u, v=0.0, h: float = 1e-4):
    """Central-difference evaluation of -(1/2g) Laplacian(ln g).

    Independent check of :func:`gaussian_curvature`. The step is h u, relative
    to the distance from the u = 0 edge, so that the 1/g prefactor does not
    amplify cancellation error when g is small; needs 0 < h < 1.
    """
    if not 0 < h < 1:
        raise DomainViolation("relative step h must lie in (0, 1)")
    u = _check_u(u)
    v = np.asarray(v, dtype=float)
    du = h * u

    def lng(uu, vv):
        return np.log(conformal_factor(space, uu, vv))

    f0 = lng(u, v)
    lap = (lng(u + du, v) + lng(u - du, v) + lng(u, v + du) + lng(u, v - du) - 4.0 * f0) / du**2
    return -lap / (2.0 * conformal_factor(space, u, v))
