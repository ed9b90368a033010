"""Superintegrable potentials on D_I and D_II and their separated problems.

Every D_II potential carries the prefactor f = u^2/(b u^2 - a) = 1/g, so that
g V is the flat-space bracket; this is the form that separates. The Coulomb
type potential V_3 on D_II is

    V_3 = f / (2 rho) [ -alpha + hbar^2/2m ((k1^2 - 1/4)/(rho + v) + (k2^2 - 1/4)/(rho - v)) ],

rho = sqrt(u^2 + v^2), which in parabolic coordinates (rho + v = xi^2,
rho - v = eta^2) becomes f/(xi^2 + eta^2)[...].

Separation works on the time-transformed equation g (H - E) psi = 0, which
splits into one dimensional problems

    -hbar^2/2m psi'' + W(x; E, s) psi = eps psi

whose eigenvalues eps are tied to E by a coupling rule.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, NotSeparableHere, UnsupportedChart, DomainViolation
from .geometry import Chart, ChartPoint, Space, SpaceSpec, conformal_factor, to_uv

Q = 0.25


class PotentialIndex(str, enum.Enum):
    V1 = "V1"
    V2 = "V2"
    V3 = "V3"
    V4 = "V4"


@dataclass(frozen=True)
class PotentialSpec:
    """Potential identifier plus couplings.

    Only the couplings relevant to (space, index) are read. Centrifugal
    parameters are stored as indices (lam, k1, k2) so that the free value 1/2
    is exact.
    """
    space: Space
    index: PotentialIndex
    omega: float = 1.0
    kappa: float = 0.0
    kappa1: float = 0.0
    kappa2: float = 0.0
    lam: float = 0.5
    k1: float = 0.5
    k2: float = 0.5
    v0: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "space", Space(self.space))
        object.__setattr__(self, "index", PotentialIndex(self.index))
        if self.space is Space.DI and self.index is PotentialIndex.V4:
            raise ConfigError("V4 on D_I is not tractable and is out of scope")
        if self.omega < 0:
            raise ConfigError("omega must be non-negative")
        if self.space is Space.DI and self.index is PotentialIndex.V1 and self.lam < 0:
            raise ConfigError("lam must be non-negative")
        if self.space is Space.DII and (self.k1 < 0 or self.k2 < 0):
            raise ConfigError("k1, k2 must be non-negative")

    def with_(self, **kw) -> "PotentialSpec":
        return replace(self, **kw)


# charts in which each potential is written (Tables of separable systems);
# the UV chart is always accepted as the reference chart
SEPARABLE = {
    (Space.DI, PotentialIndex.V1): {Chart.UV: True, Chart.DISPLACED_PARABOLIC: False},
    (Space.DI, PotentialIndex.V2): {Chart.UV: True, Chart.ROTATED_RQ: True},
    (Space.DI, PotentialIndex.V3): {Chart.UV: True, Chart.ROTATED_RQ: True,
                                    Chart.DISPLACED_PARABOLIC: False},
    (Space.DII, PotentialIndex.V1): {Chart.UV: True, Chart.PARABOLIC: False},
    (Space.DII, PotentialIndex.V2): {Chart.UV: True, Chart.POLAR: True, Chart.ELLIPTIC: False},
    (Space.DII, PotentialIndex.V3): {Chart.PARABOLIC_POLAR: True, Chart.PARABOLIC: True},
    (Space.DII, PotentialIndex.V4): {Chart.UV: True, Chart.POLAR: True, Chart.PARABOLIC: True,
                                     Chart.ELLIPTIC: True},
}

INTRACTABLE_REASON = {
    (Space.DI, PotentialIndex.V1, Chart.DISPLACED_PARABOLIC):
        "sextic and quartic anharmonic terms; no explicit solution",
    (Space.DI, PotentialIndex.V3, Chart.DISPLACED_PARABOLIC):
        "separable, but only sketched in the (u, v) system",
    (Space.DII, PotentialIndex.V1, Chart.PARABOLIC):
        "quartic/sextic anharmonic (Holt type) terms; no explicit solution",
    (Space.DII, PotentialIndex.V2, Chart.ELLIPTIC):
        "elliptic path integral not tractable",
}


def supported_charts(spec: PotentialSpec):
    charts = set(SEPARABLE[(spec.space, spec.index)])
    charts.add(Chart.UV)
    return charts


def _flat_bracket_uv(spec: PotentialSpec, u, v, hbar: float, m: float):
    """g V in (u, v): the bracket multiplying 1/g."""
    w = spec.omega
    c = hbar**2 / (2 * m)
    if spec.space is Space.DI:
        if spec.index is PotentialIndex.V1:
            return 0.5 * m * w**2 * (4 * u**2 + v**2) + spec.kappa + c * (spec.lam**2 - Q) / v**2
        if spec.index is PotentialIndex.V2:
            return 0.5 * m * w**2 * (u**2 + v**2) + spec.kappa1 + spec.kappa2 * v
        return c * spec.v0**2
    if spec.index is PotentialIndex.V1:
        return 0.5 * m * w**2 * (u**2 + 4 * v**2) + spec.k1 * v + c * (spec.k2**2 - Q) / u**2
    if spec.index is PotentialIndex.V2:
        return 0.5 * m * w**2 * (u**2 + v**2) + c * ((spec.k1**2 - Q) / u**2 + (spec.k2**2 - Q) / v**2)
    if spec.index is PotentialIndex.V3:
        rho = np.sqrt(u**2 + v**2)
        return (-spec.alpha + c * ((spec.k1**2 - Q) / (rho + v) + (spec.k2**2 - Q) / (rho - v))) / (2 * rho)
    return c * spec.v0**2


def evaluate_uv(spec: PotentialSpec, space: SpaceSpec, u, v, hbar: float = 1.0, m: float = 1.0):
    """Potential value at (u, v)."""
    if space.space is not spec.space:
        raise ConfigError("potential and space disagree")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u <= 0):
        raise DomainViolation("u must be positive")
    if spec.space is Space.DI and spec.index is PotentialIndex.V1 and np.any(v == 0):
        raise DomainViolation("V1 on D_I is singular at v = 0")
    if spec.space is Space.DII and spec.index is PotentialIndex.V2 and np.any(v == 0):
        raise DomainViolation("V2 on D_II is singular at v = 0")
    br = _flat_bracket_uv(spec, u, v, hbar, m)
    return br / conformal_factor(space, u, v)


def evaluate(spec: PotentialSpec, space: SpaceSpec, p: ChartPoint, hbar: float = 1.0, m: float = 1.0):
    """Potential value at a chart point, using the chart-native expression where one exists.

    Raises
    ------
    UnsupportedChart
        The potential is not written in this chart.
    DomainViolation
        Singular point (v = 0 for V1 on D_I, xi = 0 or eta = 0 for V3 on D_II, ...).
    """
    if p.chart not in supported_charts(spec):
        raise UnsupportedChart(f"{spec.space.value} {spec.index.value} is not written in chart {p.chart.value}")
    u, v = to_uv(space, p)
    c = hbar**2 / (2 * m)
    key = (spec.space, spec.index, p.chart)
    c1 = np.asarray(p.c1, dtype=float)
    c2 = np.asarray(p.c2, dtype=float)
    if key == (Space.DI, PotentialIndex.V2, Chart.ROTATED_RQ):
        th = p.param
        qv = c2 * np.cos(th) - c1 * np.sin(th)
        return (0.5 * m * spec.omega**2 * (c1**2 + c2**2) + spec.kappa1 + spec.kappa2 * qv) / (
            2 * (c1 * np.cos(th) + c2 * np.sin(th)))
    if key == (Space.DI, PotentialIndex.V3, Chart.ROTATED_RQ):
        return c * spec.v0**2 / (2 * (c1 * np.cos(p.param) + c2 * np.sin(p.param)))
    if key == (Space.DI, PotentialIndex.V3, Chart.DISPLACED_PARABOLIC):
        return c * spec.v0**2 / (c1**2 - c2**2 + 2 * p.param)
    if spec.space is Space.DII:
        f = 1.0 / conformal_factor(space, u, v)
        if key == (Space.DII, PotentialIndex.V2, Chart.POLAR):
            br = 0.5 * m * spec.omega**2 * c1**2 + c / c1**2 * (
                (spec.k1**2 - Q) / np.cos(c2) ** 2 + (spec.k2**2 - Q) / np.sin(c2) ** 2)
            return f * br
        if key == (Space.DII, PotentialIndex.V3, Chart.PARABOLIC):
            return f / (c1**2 + c2**2) * (-spec.alpha + c * ((spec.k1**2 - Q) / c1**2 + (spec.k2**2 - Q) / c2**2))
        if key == (Space.DII, PotentialIndex.V3, Chart.PARABOLIC_POLAR):
            return f / c1**2 * (-spec.alpha + c / c1**2 * (
                (spec.k1**2 - Q) / np.cos(c2) ** 2 + (spec.k2**2 - Q) / np.sin(c2) ** 2))
    return evaluate_uv(spec, space, u, v, hbar, m)


# ---------------------------------------------------------------- separation

class Variable(str, enum.Enum):
    U = "u"
    V = "v"
    RHO = "rho"
    THETA = "theta"
    R = "r"
    PHI = "phi"
    XI = "xi"
    ETA = "eta"
    Q = "q"


class Boundary(str, enum.Enum):
    HALF_LINE_DIRICHLET = "half-line Dirichlet at u_min"
    WHOLE_LINE = "whole line"
    RADIAL_REGULAR = "radial, regular at 0"
    ANGULAR_INTERVAL = "angular interval (0, pi/2)"


@dataclass(frozen=True)
class SeparatedProblem:
    """One dimensional problem -hbar^2/2m psi'' + W psi = eps psi.

    ``potential(x, E, s)`` is the regular part of W; ``s`` is the eigenvalue
    of the companion problem (only used when the coupling is sequential).
    ``index(E, s)`` is the centrifugal index of a (lam^2 - 1/4)/x^2 term with
    coefficient hbar^2/2m, or None. For ``ANGULAR_INTERVAL`` the pair of
    Poschl-Teller indices (sin, cos) is returned instead.
    """
    variable: Variable
    potential: Callable
    boundary: Boundary
    domain: tuple
    weight: str
    index: Optional[Callable] = None
    description: str = ""


@dataclass(frozen=True)
class CouplingRule:
    """Ties the separated eigenvalues (s1, s2) to the total energy E.

    ``residual(E, s1, s2)`` vanishes on the spectrum.
    """
    text: str
    residual: Optional[Callable] = None


def _zero(x, E=0.0, s=0.0):
    return 0.0 * np.asarray(x, dtype=float)


def separate(spec: PotentialSpec, space: SpaceSpec, chart: Chart, hbar: float = 1.0, m: float = 1.0):
    """Split the potential problem into two one dimensional problems.

    Returns
    -------
    (SeparatedProblem, SeparatedProblem, CouplingRule)

    Raises
    ------
    NotSeparableHere
        The chart is listed as separating but no explicit solution exists,
        or the potential does not separate in the chart at all.
    """
    chart = Chart(chart)
    tab = SEPARABLE[(spec.space, spec.index)]
    if chart not in tab:
        raise NotSeparableHere(f"{spec.space.value} {spec.index.value} does not separate in {chart.value}")
    if not tab[chart]:
        reason = INTRACTABLE_REASON.get((spec.space, spec.index, chart), "no explicit solution")
        raise NotSeparableHere(reason)
    w = spec.omega
    c = hbar**2 / (2 * m)
    a, b = space.a, space.b
    key = (spec.space, spec.index, chart)

    if key == (Space.DI, PotentialIndex.V1, Chart.UV):
        pv = SeparatedProblem(Variable.V, lambda x, E=0.0, s=0.0: 0.5 * m * w**2 * np.asarray(x) ** 2,
                              Boundary.RADIAL_REGULAR, (0.0, math.inf), "dv",
                              index=lambda E=0.0, s=0.0: spec.lam,
                              description="radial oscillator, E_n = hbar omega (2n + lam + 1)")
        pu = SeparatedProblem(Variable.U, lambda x, E=0.0, s=0.0: 2 * m * w**2 * np.asarray(x) ** 2 - 2 * E * np.asarray(x),
                              Boundary.HALF_LINE_DIRICHLET, (space.u_min, math.inf), "du",
                              description="oscillator of frequency 2 omega centred at E/(2 m omega^2)")
        rule = CouplingRule("s_u + kappa + s_v = 0", lambda E, s1, s2: s2 + spec.kappa + s1)
        return pv, pu, rule

    if key == (Space.DI, PotentialIndex.V2, Chart.UV) or key == (Space.DI, PotentialIndex.V2, Chart.ROTATED_RQ):
        # the wall u >= u_min is a wall in r only for theta = 0, where (r, q) = (u, v)
        var_a, var_b = (Variable.Q, Variable.R) if chart is Chart.ROTATED_RQ else (Variable.V, Variable.U)
        k2 = spec.kappa2
        pv = SeparatedProblem(var_a, lambda x, E=0.0, s=0.0: 0.5 * m * w**2 * np.asarray(x) ** 2 + k2 * np.asarray(x),
                              Boundary.WHOLE_LINE, (-math.inf, math.inf), "dv",
                              description="shifted oscillator, E_n = hbar omega (n + 1/2) - kappa2^2/(2 m omega^2)")
        pu = SeparatedProblem(var_b, lambda x, E=0.0, s=0.0: 0.5 * m * w**2 * np.asarray(x) ** 2 - 2 * E * np.asarray(x),
                              Boundary.HALF_LINE_DIRICHLET, (space.u_min, math.inf), "du",
                              description="oscillator of frequency omega centred at 2E/(m omega^2)")
        rule = CouplingRule("s_u + kappa1 + s_v = 0", lambda E, s1, s2: s2 + spec.kappa1 + s1)
        return pv, pu, rule

    if spec.space is Space.DI and spec.index is PotentialIndex.V3:
        v0sq = spec.v0**2
        if chart is Chart.UV:
            pv = SeparatedProblem(Variable.V, _zero, Boundary.WHOLE_LINE, (-math.inf, math.inf), "dv",
                                  description="free plane wave exp(i l v); continuous l")
            pu = SeparatedProblem(Variable.U, lambda x, E=0.0, s=0.0: -2 * E * np.asarray(x) + c * v0sq + 0 * s,
                                  Boundary.HALF_LINE_DIRICHLET, (space.u_min, math.inf), "du",
                                  description="linear (Airy) potential; effective index l~^2 = l^2 + v0^2")
            rule = CouplingRule("s_u + s_v = 0 with s_v = hbar^2 l^2/2m", lambda E, s1, s2: s1 + s2)
            return pv, pu, rule
        th = 0.0
        pq = SeparatedProblem(Variable.Q, lambda x, E=0.0, s=0.0: -2 * E * math.sin(th) * np.asarray(x),
                              Boundary.WHOLE_LINE, (-math.inf, math.inf), "dq", description="linear potential")
        pr = SeparatedProblem(Variable.R, lambda x, E=0.0, s=0.0: -2 * E * math.cos(th) * np.asarray(x),
                              Boundary.HALF_LINE_DIRICHLET, (space.u_min, math.inf), "dr", description="linear potential")
        rule = CouplingRule("s_r + s_q + hbar^2 v0^2/2m = 0", lambda E, s1, s2: s1 + s2 + c * v0sq)
        return pq, pr, rule

    if key == (Space.DII, PotentialIndex.V1, Chart.UV):
        k1 = spec.k1
        pv = SeparatedProblem(Variable.V, lambda x, E=0.0, s=0.0: 2 * m * w**2 * np.asarray(x) ** 2 + k1 * np.asarray(x),
                              Boundary.WHOLE_LINE, (-math.inf, math.inf), "dv",
                              description="shifted oscillator of frequency 2 omega, "
                                          "E_n = hbar omega (2n + 1) - k1^2/(8 m omega^2)")
        pu = SeparatedProblem(Variable.U, lambda x, E=0.0, s=0.0: 0.5 * m * w**2 * np.asarray(x) ** 2,
                              Boundary.RADIAL_REGULAR, (0.0, math.inf), "du",
                              index=lambda E=0.0, s=0.0: _lam_of_E(spec.k2, a, E, hbar, m),
                              description="radial oscillator with index lam^2 = k2^2 + 2 m a E/hbar^2")
        rule = CouplingRule("s_u + s_v - b E = 0", lambda E, s1, s2: s1 + s2 - b * E)
        return pv, pu, rule

    if key == (Space.DII, PotentialIndex.V2, Chart.UV):
        pv = SeparatedProblem(Variable.V, lambda x, E=0.0, s=0.0: 0.5 * m * w**2 * np.asarray(x) ** 2,
                              Boundary.RADIAL_REGULAR, (0.0, math.inf), "dv",
                              index=lambda E=0.0, s=0.0: spec.k2,
                              description="radial oscillator, E_n = hbar omega (2n + k2 + 1)")
        pu = SeparatedProblem(Variable.U, lambda x, E=0.0, s=0.0: 0.5 * m * w**2 * np.asarray(x) ** 2,
                              Boundary.RADIAL_REGULAR, (0.0, math.inf), "du",
                              index=lambda E=0.0, s=0.0: _lam_of_E(spec.k1, a, E, hbar, m),
                              description="radial oscillator with index lam1^2 = k1^2 + 2 m a E/hbar^2")
        rule = CouplingRule("s_u + s_v - b E = 0", lambda E, s1, s2: s1 + s2 - b * E)
        return pv, pu, rule

    if key == (Space.DII, PotentialIndex.V2, Chart.POLAR):
        pt = SeparatedProblem(Variable.THETA, _zero, Boundary.ANGULAR_INTERVAL, (0.0, math.pi / 2), "dtheta",
                              index=lambda E=0.0, s=0.0: (spec.k2, _lam_of_E(spec.k1, a, E, hbar, m)),
                              description="Poschl-Teller, eigenvalue hbar^2 lam2^2/2m, "
                                          "lam2 = 2n + 1 + lam1 + k2")
        pr = SeparatedProblem(Variable.RHO, lambda x, E=0.0, s=0.0: 0.5 * m * w**2 * np.asarray(x) ** 2,
                              Boundary.RADIAL_REGULAR, (0.0, math.inf), "drho",
                              index=lambda E=0.0, s=0.0: math.sqrt(max(s, 0.0) / c),
                              description="radial oscillator with index lam2")
        rule = CouplingRule("s_rho - b E = 0", lambda E, s1, s2: s2 - b * E)
        return pt, pr, rule

    if key == (Space.DII, PotentialIndex.V3, Chart.PARABOLIC):
        def osc(x, E=0.0, s=0.0):
            return -E * b * np.asarray(x) ** 2
        px = SeparatedProblem(Variable.XI, osc, Boundary.RADIAL_REGULAR, (0.0, math.inf), "dxi",
                              index=lambda E=0.0, s=0.0: _lam_of_E(spec.k1, a, E, hbar, m),
                              description="radial oscillator, m omega^2/2 = -E b, index lam1")
        pe = SeparatedProblem(Variable.ETA, osc, Boundary.RADIAL_REGULAR, (0.0, math.inf), "deta",
                              index=lambda E=0.0, s=0.0: _lam_of_E(spec.k2, a, E, hbar, m),
                              description="radial oscillator, m omega^2/2 = -E b, index lam2")
        rule = CouplingRule("s_xi + s_eta - alpha = 0", lambda E, s1, s2: s1 + s2 - spec.alpha)
        return px, pe, rule

    if key == (Space.DII, PotentialIndex.V3, Chart.PARABOLIC_POLAR):
        pt = SeparatedProblem(Variable.PHI, _zero, Boundary.ANGULAR_INTERVAL, (0.0, math.pi / 2), "dphi",
                              index=lambda E=0.0, s=0.0: (_lam_of_E(spec.k2, a, E, hbar, m),
                                                          _lam_of_E(spec.k1, a, E, hbar, m)),
                              description="Poschl-Teller, eigenvalue hbar^2 Lam^2/2m, Lam = 2n + lam1 + lam2 + 1")
        pr = SeparatedProblem(Variable.R, lambda x, E=0.0, s=0.0: -E * b * np.asarray(x) ** 2,
                              Boundary.RADIAL_REGULAR, (0.0, math.inf), "dr",
                              index=lambda E=0.0, s=0.0: math.sqrt(max(s, 0.0) / c),
                              description="radial oscillator with index Lam")
        rule = CouplingRule("s_r - alpha = 0", lambda E, s1, s2: s2 - spec.alpha)
        return pt, pr, rule

    if spec.space is Space.DII and spec.index is PotentialIndex.V4:
        if chart is not Chart.UV:
            raise NotSeparableHere("separated form implemented in the (u, v) system only")
        v0sq = spec.v0**2
        pv = SeparatedProblem(Variable.V, _zero, Boundary.WHOLE_LINE, (-math.inf, math.inf), "dv",
                              description="free wave exp(i k v); the constant shifts k^2 -> k^2 + v0^2")
        pu = SeparatedProblem(Variable.U, lambda x, E=0.0, s=0.0: (c * v0sq - b * E) + 0 * np.asarray(x),
                              Boundary.RADIAL_REGULAR, (0.0, math.inf), "du",
                              index=lambda E=0.0, s=0.0: _lam_sq_of_E(0.5, a, E, hbar, m),
                              description="centrifugal problem with lam^2 - 1/4 = 2 m a E/hbar^2 "
                                          "(index returned as lam^2, negative above threshold)")
        rule = CouplingRule("continuous: k~^2 = k^2 + v0^2, lam = i p")
        return pv, pu, rule

    raise NotSeparableHere(f"{key} has no separated form")


def _lam_sq_of_E(k: float, a: float, E: float, hbar: float, m: float) -> float:
    return k**2 + 2 * m * a * E / hbar**2


def _lam_of_E(k: float, a: float, E: float, hbar: float, m: float) -> float:
    lsq = _lam_sq_of_E(k, a, E, hbar, m)
    if lsq < 0:
        raise DomainViolation("centrifugal index becomes imaginary")
    return math.sqrt(lsq)


def separability_table(space: Space):
    """Rows (potential, chart, status) for the separability matrix of a space."""
    rows = []
    for (sp, idx), charts in SEPARABLE.items():
        if sp is not Space(space):
            continue
        for ch, ok in charts.items():
            status = "explicit solution" if ok else "no explicit solution"
            note = "" if ok else INTRACTABLE_REASON.get((sp, idx, ch), "")
            rows.append((idx.value, ch.value, status, note))
    if Space(space) is Space.DII:
        rows.append(("V3", "displaced-elliptic", "no explicit solution", "not implemented"))
    if Space(space) is Space.DI:
        rows.append(("V4", "parabolic", "no explicit solution", "out of scope"))
    return rows
