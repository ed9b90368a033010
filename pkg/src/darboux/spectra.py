"""Quantization conditions, spectra and wave functions.

Conventions follow :mod:`darboux.potentials`: every separated problem has
the form -hbar^2/2m psi'' + W psi = eps psi, and the separation constants are
tied to the total energy E by the rules listed there. The conditions solved
here are, with C collecting the E independent terms,

    D_I  V1 (wall at u_min)  D_nu(z0) = 0,  nu = -1/2 + (E^2/2m w^2 - kappa - E_n) / 2 hbar w,
                             z0 = 2 sqrt(m w/hbar) (u_min - E/2m w^2),  E_n = hbar w (2n + lam + 1)
    D_I  V2 (wall at u_min)  D_nu(z0) = 0,  nu = -1/2 + ((2E^2 + kappa2^2/2)/m w^2 - kappa1 - hbar w (n + 1/2)) / hbar w,
                             z0 = sqrt(2 m w/hbar) (u_min - 2E/m w^2)
    D_II V1, V2              C + hbar w sqrt(k^2 + 2 m a E/hbar^2) - b E = 0
    D_II V3                  2N - (alpha/hbar) sqrt(-m/2Eb) + lam1(E) + lam2(E) = 0,  N = l + n + 1

Without the wall the D_I conditions reduce to nu = l, a closed form in E^2.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from . import special_functions as sf
from .errors import (ConfigError, DomainViolation, EvanescentRegime, NoRootsInWindow,
                     NonConvergence, NotSeparableHere, OutOfSupportedRange, Overflow,
                     UnknownLevel, UnsupportedChart)
from .geometry import Chart, Space, SpaceSpec
from .potentials import PotentialIndex, PotentialSpec

_DOMAIN_ERRORS = (OutOfSupportedRange, Overflow, DomainViolation, ValueError)


class Method(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    QUADRATIC_ROOT = "QuadraticRoot"
    TRANSCENDENTAL_ROOT = "TranscendentalRoot"
    POLYNOMIAL_ROOT = "PolynomialRoot"


@dataclass(frozen=True)
class QuantizationProblem:
    """Potential, space, constants and search protocol.

    ``e_search`` is (E_lo, E_hi, grid_points) for transcendental scans.
    """
    spec: PotentialSpec
    space: SpaceSpec
    hbar: float = 1.0
    m: float = 1.0
    n_max: int = 2
    l_max: int = 2
    tol: float = 1e-10
    e_search: tuple = (-50.0, 50.0, 20000)

    def __post_init__(self):
        if self.spec.space is not self.space.space:
            raise ConfigError("potential and space disagree")
        if not (self.hbar > 0 and self.m > 0):
            raise ConfigError("hbar and m must be positive")
        if self.n_max < 0 or self.l_max < 0:
            raise ConfigError("n_max and l_max must be non-negative")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        lo, hi, npts = self.e_search
        if not lo < hi or int(npts) < 2:
            raise ConfigError("e_search needs E_lo < E_hi and at least 2 grid points")
        object.__setattr__(self, "e_search", (float(lo), float(hi), int(npts)))


@dataclass
class Level:
    n: int
    l: int
    E: float
    residual: float
    method: Method
    physical: bool
    notes: str = ""
    branch: int = 0

    def __post_init__(self):
        self.method = Method(self.method)


@dataclass
class ContinuousBranch:
    """Continuum E(p) = scale (p^2 + shift)."""
    threshold_form: str
    scale: float
    shift: float

    def E_of_p(self, p):
        return self.scale * (np.asarray(p, dtype=float) ** 2 + self.shift)

    @property
    def threshold(self) -> float:
        return self.scale * self.shift


@dataclass
class SpectrumResult:
    levels: list = field(default_factory=list)
    continuous: Optional[ContinuousBranch] = None
    warnings: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.levels.sort(key=lambda lv: (lv.n, lv.l, lv.branch))

    def physical_levels(self):
        return [lv for lv in self.levels if lv.physical]

    def level(self, n: int, l: int, branch: Optional[int] = None) -> Level:
        for lv in self.levels:
            if lv.n == n and lv.l == l and (branch is None or lv.branch == branch):
                if branch is None and not lv.physical:
                    continue
                return lv
        raise UnknownLevel(f"no level (n={n}, l={l}) in this spectrum")

    def to_dict(self) -> dict:
        return {
            "levels": [dict(asdict(lv), method=lv.method.value) for lv in self.levels],
            "continuous": None if self.continuous is None else asdict(self.continuous),
            "warnings": list(self.warnings),
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumResult":
        cont = d.get("continuous")
        return cls(levels=[Level(**lv) for lv in d["levels"]],
                   continuous=None if cont is None else ContinuousBranch(**cont),
                   warnings=list(d.get("warnings", [])), info=dict(d.get("info", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "SpectrumResult":
        return cls.from_dict(json.loads(text))


def _require(problem: QuantizationProblem, space: Space, index: PotentialIndex):
    if problem.spec.space is not space or problem.spec.index is not index:
        raise ConfigError(f"solver needs ({space.value}, {index.value}), "
                          f"got ({problem.spec.space.value}, {problem.spec.index.value})")


def _require_omega(problem):
    if not problem.spec.omega > 0:
        raise ConfigError("omega must be positive for an oscillator spectrum")


# ---------------------------------------------------------------- root scanning

def scan_roots(f: Callable, lo: float, hi: float, npts: int, xtol: float = 0.0) -> list:
    """Sign-change roots of f on a uniform grid, refined by Brent's method.

    Grid points where f raises a domain error are skipped; no bracket is
    formed across them.
    """
    grid = np.linspace(lo, hi, npts)
    vals = np.empty(npts)
    for i, x in enumerate(grid):
        try:
            vals[i] = f(x)
        except _DOMAIN_ERRORS:
            vals[i] = np.nan
    roots = []
    for i in range(npts - 1):
        fa, fb = vals[i], vals[i + 1]
        if not (np.isfinite(fa) and np.isfinite(fb)):
            continue
        if fa == 0.0:
            roots.append(float(grid[i]))
            continue
        if fa * fb < 0:
            try:
                r = optimize.brentq(f, grid[i], grid[i + 1], xtol=max(xtol, 1e-300),
                                    rtol=4 * np.finfo(float).eps, maxiter=500)
            except (RuntimeError, *_DOMAIN_ERRORS) as exc:
                raise NonConvergence(f"refinement failed in [{grid[i]}, {grid[i + 1]}]: {exc}") from exc
            roots.append(float(r))
    if npts and np.isfinite(vals[-1]) and vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return sorted(set(roots))


# ---------------------------------------------------------------- D_I, V1 and V2

def di_v1_E_n(problem, n):
    s = problem.spec
    return problem.hbar * s.omega * (2 * n + s.lam + 1)


def di_v1_nu_z(problem, n, E):
    """Order and wall argument of the D_I V1 condition."""
    s, hb, m, w = problem.spec, problem.hbar, problem.m, problem.spec.omega
    nu = -0.5 + (E * E / (2 * m * w * w) - s.kappa - di_v1_E_n(problem, n)) / (2 * hb * w)
    z = 2.0 * math.sqrt(m * w / hb) * (problem.space.u_min - E / (2 * m * w * w))
    return nu, z


def di_v2_E_n(problem, n):
    s, hb, m, w = problem.spec, problem.hbar, problem.m, problem.spec.omega
    return hb * w * (n + 0.5) - s.kappa2**2 / (2 * m * w * w)


def di_v2_nu_z(problem, n, E):
    """Order and wall argument of the D_I V2 condition in (u, v)."""
    s, hb, m, w = problem.spec, problem.hbar, problem.m, problem.spec.omega
    nu = -0.5 + ((2 * E * E + s.kappa2**2 / 2) / (m * w * w) - s.kappa1 - hb * w * (n + 0.5)) / (hb * w)
    z = math.sqrt(2 * m * w / hb) * (problem.space.u_min - 2 * E / (m * w * w))
    return nu, z


def di_v2_nu_z_rq(problem, n, E, theta=0.0):
    """Same condition built in the rotated (r, q) system.

    The q problem is an oscillator with linear term (kappa2 cos t - 2E sin t) q,
    the r problem one with linear term -(kappa2 sin t + 2E cos t) r; the wall
    u = u_min is a line r = const only for t = 0.
    """
    if theta != 0.0:
        raise NotSeparableHere("the wall u = u_min separates in (r, q) only for theta = 0")
    s, hb, m, w = problem.spec, problem.hbar, problem.m, problem.spec.omega
    st, ct = math.sin(theta), math.cos(theta)
    lin_q = s.kappa2 * ct - 2 * E * st
    lin_r = s.kappa2 * st + 2 * E * ct
    r0 = lin_r / (m * w * w)
    s_q = hb * w * (n + 0.5) - lin_q**2 / (2 * m * w * w)
    nu = -0.5 + (lin_r**2 / (2 * m * w * w) - s.kappa1 - s_q) / (hb * w)
    z = math.sqrt(2 * m * w / hb) * (problem.space.u_min - r0)
    return nu, z


def _dnu_condition(nu_z: Callable, n: int) -> Callable:
    def f(E):
        nu, z = nu_z(n, E)
        return sf.parabolic_cylinder_D_scaled(nu, z)
    return f


def _bounded_spectrum(problem, nu_z, unbounded: Callable, label: str) -> SpectrumResult:
    lo, hi, npts = problem.e_search
    levels, warnings = [], []
    for n in range(problem.n_max + 1):
        f = _dnu_condition(nu_z, n)
        roots = scan_roots(f, lo, hi, npts)
        if not roots:
            warnings.append(f"n={n}: no roots in [{lo}, {hi}]")
            continue
        for l, E in enumerate(roots[: problem.l_max + 1]):
            res = abs(f(E))
            nu, z = nu_z(n, E)
            Eu = unbounded(n, l)
            note = f"nu={nu:.12g}; z0={z:.12g}"
            if Eu is not None:
                note += f"; unbounded E={Eu:.12g}"
            levels.append(Level(n, l, E, res, Method.TRANSCENDENTAL_ROOT, res <= problem.tol, note))
    if not levels:
        raise NoRootsInWindow(f"{label}: no roots for any n in [{lo}, {hi}]")
    return SpectrumResult(levels, None, warnings,
                          {"residual": "|D_nu(z0)| scaled by exp(-envelope(nu, z0))"})


_UNBOUNDED_NOTE = "norm proportional to E: not a proper Hilbert space state"


def di_v1_unbounded_E2(problem, n, l):
    s, hb, m, w = problem.spec, problem.hbar, problem.m, problem.spec.omega
    return 2 * m * w * w * (hb * w * (2 * l + 2 * n + 2 + s.lam) + s.kappa)


def di_v2_unbounded_E2(problem, n, l):
    s, hb, m, w = problem.spec, problem.hbar, problem.m, problem.spec.omega
    return 0.5 * m * w * w * (hb * w * (l + n + 1) + s.kappa1 - s.kappa2**2 / (2 * m * w * w))


def _unbounded(problem, e2: Callable) -> SpectrumResult:
    levels, warnings = [], []
    for n in range(problem.n_max + 1):
        for l in range(problem.l_max + 1):
            r = e2(problem, n, l)
            if r < 0:
                warnings.append(f"(n={n}, l={l}): negative radicand {r:.6g}, level omitted")
                continue
            E = math.sqrt(r)
            for sgn in (+1, -1):
                levels.append(Level(n, l, sgn * E, 0.0, Method.CLOSED_FORM, False, _UNBOUNDED_NOTE, sgn))
    return SpectrumResult(levels, None, warnings)


def di_v1_spectrum_unbounded(problem: QuantizationProblem) -> SpectrumResult:
    """E^2 = 2 m w^2 (hbar w (2l + 2n + 2 + lam) + kappa), both signs, all unphysical."""
    _require(problem, Space.DI, PotentialIndex.V1)
    _require_omega(problem)
    return _unbounded(problem, di_v1_unbounded_E2)


def di_v2_spectrum_unbounded(problem: QuantizationProblem) -> SpectrumResult:
    """E^2 = (m w^2/2)(hbar w (l + n + 1) + kappa1 - kappa2^2/2m w^2), both signs."""
    _require(problem, Space.DI, PotentialIndex.V2)
    _require_omega(problem)
    return _unbounded(problem, di_v2_unbounded_E2)


def _unbounded_positive(problem, e2):
    def f(n, l):
        r = e2(problem, n, l)
        return math.sqrt(r) if r >= 0 else None
    return f


def di_v1_spectrum_bounded(problem: QuantizationProblem) -> SpectrumResult:
    """Roots of D_nu(z0) = 0 for the Dirichlet wall at u_min, labelled l = 0, 1, ... by E."""
    _require(problem, Space.DI, PotentialIndex.V1)
    _require_omega(problem)
    return _bounded_spectrum(problem, lambda n, E: di_v1_nu_z(problem, n, E),
                             _unbounded_positive(problem, di_v1_unbounded_E2), "D_I V1")


def di_v2_spectrum_bounded(problem: QuantizationProblem, chart: Chart = Chart.UV) -> SpectrumResult:
    """Roots of the D_I V2 wall condition, in (u, v) or in (r, q) with theta = 0."""
    _require(problem, Space.DI, PotentialIndex.V2)
    _require_omega(problem)
    chart = Chart(chart)
    if chart is Chart.UV:
        nu_z = lambda n, E: di_v2_nu_z(problem, n, E)
    elif chart is Chart.ROTATED_RQ:
        nu_z = lambda n, E: di_v2_nu_z_rq(problem, n, E, 0.0)
    else:
        raise UnsupportedChart(f"D_I V2 spectrum not available in {chart.value}")
    return _bounded_spectrum(problem, nu_z, _unbounded_positive(problem, di_v2_unbounded_E2), "D_I V2")


def di_v3_analysis(problem: QuantizationProblem, l_max: int = 10,
                   energies=None) -> SpectrumResult:
    """Bound state search for D_I V3.

    For a plane wave exp(i l v) the u equation is psi'' = (lt^2 - 4mEu/hbar^2) psi,
    lt^2 = l^2 + v0^2. For E < 0 the solution decaying at infinity is
    Ai(beta (u + u_s)) with beta = (4m|E|/hbar^2)^(1/3) and u_s = hbar^2 lt^2/4m|E| >= 0,
    so the Airy argument at the wall is positive, Ai has no zero there and
    no Dirichlet state exists. The check is carried out on a grid of (E, l).
    """
    _require(problem, Space.DI, PotentialIndex.V3)
    hb, m = problem.hbar, problem.m
    if energies is None:
        energies = -np.logspace(-3, 2, 60)
    energies = np.asarray(energies, dtype=float)
    if np.any(energies >= 0):
        raise ConfigError("bound state search needs E < 0")
    u0 = problem.space.u_min
    z_min = math.inf
    sign_changes = 0
    for l in range(l_max + 1):
        lt2 = l * l + problem.spec.v0**2
        ai = []
        for E in energies:
            beta = (4 * m * abs(E) / hb**2) ** (1.0 / 3.0)
            z = beta * (u0 + hb**2 * lt2 / (4 * m * abs(E)))
            z_min = min(z_min, z)
            ai.append(sf.airy_Ai(z).value)
        ai = np.asarray(ai)
        # strict flips only: Ai underflows to 0 for large positive arguments
        sign_changes += int(np.sum(ai[1:] * ai[:-1] < 0))
    c = hb**2 / (2 * m)
    cont = ContinuousBranch("E > 0; effective index lt^2 = l^2 + v0^2", c, 0.0)
    return SpectrumResult([], cont, [],
                          {"min_airy_argument": z_min, "sign_changes": sign_changes,
                           "l_max": l_max, "E_grid": [float(energies.min()), float(energies.max())]})


# ---------------------------------------------------------------- D_II V1 and V2

def sqrt_condition(C, k, a, b, hbar, m, w):
    """Solve C + hbar w sqrt(k^2 + 2maE/hbar^2) - bE = 0.

    Returns (candidates, discriminant) where candidates is a list of
    (E, branch) from the squared (quadratic) equation; on a negative
    discriminant the list holds the real part with branch 0.
    """
    hw = hbar * w
    if b == 0.0:
        if a == 0.0:
            raise ConfigError("degenerate metric a = b = 0")
        return [((C * C - hw * hw * k * k) / (2 * m * a * w * w), 0)], math.inf
    if a == 0.0:
        return [((C + hw * k) / b, +1)], math.inf
    B = b * C + m * a * w * w
    disc = 2 * a * b * m * w * w * C + (a * m * w * w) ** 2 + (b * hw * k) ** 2
    if disc < 0:
        return [(B / (b * b), 0)], disc
    sq = math.sqrt(disc)
    return [((B + sq) / (b * b), +1), ((B - sq) / (b * b), -1)], disc


def sqrt_condition_residual(E, C, k, a, b, hbar, m, w):
    """Residual of the unsquared condition; nan where the index is imaginary."""
    lsq = k * k + 2 * m * a * E / hbar**2
    if lsq < 0:
        return math.nan
    return C + hbar * w * math.sqrt(lsq) - b * E


def sqrt_condition_has_root(C, k, a, b, hbar, m) -> bool:
    """True when C + hbar w sqrt(k^2 + 2maE/hbar^2) - bE = 0 has a real root.

    For a < 0 the left side decreases on E <= E_max = hbar^2 k^2/(2m|a|),
    so a root exists exactly when it is <= 0 at E_max, i.e. C <= b E_max.
    This is sharper than a non negative discriminant of the squared
    equation, which also admits pairs of spurious roots.
    """
    if a == 0.0:
        return b > 0.0
    return C <= b * hbar**2 * k * k / (2 * m * abs(a))


def _dii_quadratic_levels(problem, C_of, k):
    s, hb, m, w = problem.spec, problem.hbar, problem.m, problem.spec.omega
    a, b = problem.space.a, problem.space.b
    levels = []
    for n in range(problem.n_max + 1):
        for l in range(problem.l_max + 1):
            C = C_of(n, l)
            cands, disc = sqrt_condition(C, k, a, b, hb, m, w)
            if disc < 0:
                levels.append(Level(n, l, cands[0][0], math.nan, Method.QUADRATIC_ROOT, False,
                                    f"semi-bound: negative discriminant {disc:.6g}; E is the real part", 0))
                continue
            method = Method.CLOSED_FORM if (a == 0.0 or b == 0.0) else Method.QUADRATIC_ROOT
            for E, br in cands:
                res = sqrt_condition_residual(E, C, k, a, b, hb, m, w)
                ok = math.isfinite(res) and abs(res) <= problem.tol * max(1.0, abs(E))
                note = "" if ok else ("imaginary index" if not math.isfinite(res)
                                      else f"spurious root of the squared equation (residual {res:.3g})")
                if not ok and not sqrt_condition_has_root(C, k, a, b, hb, m):
                    note += "; no root: C > b hbar^2 k^2/2m|a|"
                levels.append(Level(n, l, E, abs(res) if math.isfinite(res) else math.nan,
                                    method, ok, note, br))
    return levels


def dii_v1_C(problem, n, l):
    s, hb, m, w = problem.spec, problem.hbar, problem.m, problem.spec.omega
    return hb * w * (2 * l + 2 * n + 2) - s.k1**2 / (8 * m * w * w)


def dii_v1_level_bound(problem, n, l) -> bool:
    """True when the squared D_II V1 condition has real roots (non negative discriminant).

    For a < 0 this reads C <= [(a m w^2)^2 + (b hbar w k2)^2] / (2 |a| b m w^2);
    for a = -1, b = 1 it is the level count inequality reported in ``info``.
    Levels failing it are semi-bound. Passing it is necessary but not
    sufficient for a physical level, see :func:`dii_v1_physical_bound`.
    """
    s, hb, m, w = problem.spec, problem.hbar, problem.m, problem.spec.omega
    a, b = problem.space.a, problem.space.b
    if a == 0.0 or b == 0.0:
        return True
    C = dii_v1_C(problem, n, l)
    return 2 * a * b * m * w * w * C + (a * m * w * w) ** 2 + (b * hb * w * s.k2) ** 2 >= 0


def dii_v1_physical_bound(problem, n, l) -> bool:
    """True when the unsquared D_II V1 condition has a root: C <= b hbar^2 k2^2/2m|a|.

    For a = -1, b = 1 this is the level count inequality without its m w/2 hbar term.
    """
    return sqrt_condition_has_root(dii_v1_C(problem, n, l), problem.spec.k2, problem.space.a,
                                   problem.space.b, problem.hbar, problem.m)


def _continuum_dii(problem, k, label):
    a = problem.space.a
    if a == 0.0:
        return None
    c = problem.hbar**2 / (2 * problem.m * abs(a))
    return ContinuousBranch(f"{label}: E_p = hbar^2 (p^2 + k^2)/(2m|a|), k = {k:g}", c, k * k)


def dii_v1_spectrum(problem: QuantizationProblem) -> SpectrumResult:
    """Closed-form roots of the squared D_II V1 condition, filtered by back-substitution.

    Condition: hbar w (2l + 2n + 2) - k1^2/8m w^2 + hbar w lam(E) - bE = 0,
    lam^2 = k2^2 + 2maE/hbar^2.
    """
    _require(problem, Space.DII, PotentialIndex.V1)
    _require_omega(problem)
    levels = _dii_quadratic_levels(problem, lambda n, l: dii_v1_C(problem, n, l), problem.spec.k2)
    info = {}
    if problem.space.a == -1.0 and problem.space.b == 1.0:
        s, hb, m, w = problem.spec, problem.hbar, problem.m, problem.spec.omega
        info["level_bound"] = ("2l + 2n + 2 <= m w/2 hbar + hbar k2^2/2 m w + k1^2/8 m hbar w^3 = "
                               f"{m * w / (2 * hb) + hb * s.k2**2 / (2 * m * w) + s.k1**2 / (8 * m * hb * w**3):.17g}")
        info["physical_bound"] = ("2l + 2n + 2 <= hbar k2^2/2 m w + k1^2/8 m hbar w^3 = "
                                  f"{hb * s.k2**2 / (2 * m * w) + s.k1**2 / (8 * m * hb * w**3):.17g}")
    return SpectrumResult(levels, _continuum_dii(problem, problem.spec.k2, "V1"), [], info)


def dii_v2_C(problem, n, l):
    s, hb, w = problem.spec, problem.hbar, problem.spec.omega
    return hb * w * (2 * l + 2 * n + 2 + s.k2)


def dii_v2_C_polar(problem, n, l):
    """hbar w (2l + 1) + hbar w (2n + 1 + k2): radial part plus the E independent part of lam2."""
    s, hb, w = problem.spec, problem.hbar, problem.spec.omega
    return hb * w * (2 * l + 1) + hb * w * (2 * n + 1 + s.k2)


def dii_v2_spectrum(problem: QuantizationProblem, chart: Chart = Chart.UV) -> SpectrumResult:
    """D_II V2 spectrum from hbar w (2l + 2n + 2 + k2 + lam1(E)) = bE.

    In the polar chart the angular Poschl-Teller problem gives
    lam2 = 2n + 1 + lam1 + k2 and the radial oscillator hbar w (2l + lam2 + 1) = bE.
    """
    _require(problem, Space.DII, PotentialIndex.V2)
    _require_omega(problem)
    chart = Chart(chart)
    if chart is Chart.UV:
        C_of = lambda n, l: dii_v2_C(problem, n, l)
    elif chart is Chart.POLAR:
        C_of = lambda n, l: dii_v2_C_polar(problem, n, l)
    else:
        raise UnsupportedChart(f"D_II V2 spectrum not available in {chart.value}")
    levels = _dii_quadratic_levels(problem, C_of, problem.spec.k1)
    return SpectrumResult(levels, _continuum_dii(problem, problem.spec.k1, "V2"), [])


# ---------------------------------------------------------------- D_II V3

def dii_v3_residual(problem, N, E):
    """2N - (alpha/hbar) sqrt(-m/2Eb) + lam1 + lam2, for E < 0."""
    s, hb, m = problem.spec, problem.hbar, problem.m
    a, b = problem.space.a, problem.space.b
    lam1 = math.sqrt(s.k1**2 + 2 * m * a * E / hb**2)
    lam2 = math.sqrt(s.k2**2 + 2 * m * a * E / hb**2)
    return 2 * N - (s.alpha / hb) * math.sqrt(-m / (2 * E * b)) + lam1 + lam2


def dii_v3_parabolic_residual(problem, l, n, E):
    """s_xi + s_eta - alpha with two radial oscillators, m w_E^2/2 = -Eb."""
    s, hb, m = problem.spec, problem.hbar, problem.m
    a, b = problem.space.a, problem.space.b
    wE = math.sqrt(-2 * E * b / m)
    lam1 = math.sqrt(s.k1**2 + 2 * m * a * E / hb**2)
    lam2 = math.sqrt(s.k2**2 + 2 * m * a * E / hb**2)
    return hb * wE * (2 * l + lam1 + 1) + hb * wE * (2 * n + lam2 + 1) - s.alpha


def dii_v3_closed_form(problem, N):
    """k1 = k2 = 0: hbar sqrt(2b/m) x (2N + 2 sqrt(2m|a|) x/hbar) = alpha with x = sqrt(-E)."""
    s, hb, m = problem.spec, problem.hbar, problem.m
    a, b = problem.space.a, problem.space.b
    if s.k1 != 0 or s.k2 != 0:
        raise ConfigError("closed form needs k1 = k2 = 0")
    p = 2 * N * hb * math.sqrt(2 * b / m)
    if a == 0.0:
        x = s.alpha / p
    else:
        q = 4 * math.sqrt(b * abs(a))
        # q x^2 + p x - alpha = 0, positive root written without cancellation
        x = 2 * s.alpha / (p + math.sqrt(p * p + 4 * q * s.alpha))
    return -x * x


def _v3_bracket(f, scale):
    """Bracket the single root of a residual that is positive for E -> -inf and negative near 0-."""
    lo = -scale
    k = 0
    while f(lo) < 0:
        lo *= 4.0
        k += 1
        if k > 200:
            raise NonConvergence("could not bracket the Coulomb level")
    hi = lo
    while f(hi) > 0:
        hi /= 4.0
        if hi > -1e-290:
            raise NonConvergence("could not bracket the Coulomb level")
    return hi * 4.0, hi


def dii_v3_spectrum(problem: QuantizationProblem, chart: Chart = Chart.PARABOLIC_POLAR,
                    N_max: Optional[int] = None) -> SpectrumResult:
    """Bound states of the D_II Coulomb type potential.

    The condition depends on n, l only through N = l + n + 1. With a < 0 and
    E < 0 both centrifugal indices are real on the whole negative axis, and
    the left side is strictly decreasing in E there, so each N has exactly
    one root. For k1 = k2 = 0 the closed form is attached and compared.
    """
    _require(problem, Space.DII, PotentialIndex.V3)
    s = problem.spec
    a, b = problem.space.a, problem.space.b
    if not b > 0:
        raise ConfigError("D_II V3 bound states need b > 0")
    if not s.alpha > 0:
        raise ConfigError("D_II V3 bound states need alpha > 0")
    chart = Chart(chart)
    if chart not in (Chart.PARABOLIC_POLAR, Chart.PARABOLIC):
        raise UnsupportedChart(f"D_II V3 spectrum not available in {chart.value}")
    closed = s.k1 == 0 and s.k2 == 0
    levels = []
    scale = s.alpha**2 * problem.m / (b * problem.hbar**2) + 1.0
    pairs = [(n, l) for n in range(problem.n_max + 1) for l in range(problem.l_max + 1)]
    if N_max is not None:
        pairs = [(n, l) for (n, l) in pairs if n + l + 1 <= N_max]
    cache = {}
    for n, l in pairs:
        N = n + l + 1
        if chart is Chart.PARABOLIC_POLAR:
            f = lambda E, N=N: dii_v3_residual(problem, N, E)
        else:
            f = lambda E, l=l, n=n: dii_v3_parabolic_residual(problem, l, n, E)
        key = N if chart is Chart.PARABOLIC_POLAR else (l, n)
        if key not in cache:
            lo, hi = _v3_bracket(f, scale)
            cache[key] = optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        E = cache[key]
        res = abs(dii_v3_residual(problem, N, E))
        note = f"N={N}"
        if closed:
            Ec = dii_v3_closed_form(problem, N)
            note += f"; closed form {Ec:.17g}; |diff|={abs(E - Ec):.3g}"
        levels.append(Level(n, l, E, res, Method.TRANSCENDENTAL_ROOT, res <= problem.tol, note))
    kmin = min(s.k1, s.k2)
    cont = None
    if a != 0.0:
        cont = ContinuousBranch(f"E_p = hbar^2 (p^2 + k_<^2)/(2m|a|), k_< = {kmin:g}",
                                problem.hbar**2 / (2 * problem.m * abs(a)), kmin**2)
    info = {"asymptote_N2E": -problem.m * s.alpha**2 / (8 * b * problem.hbar**2)}
    return SpectrumResult(levels, cont, [], info)


# ---------------------------------------------------------------- D_II V4

def dii_v4_spectrum(problem: QuantizationProblem) -> SpectrumResult:
    """Purely continuous spectrum E = hbar^2 (p^2 + 1/4)/(2m|a|)."""
    _require(problem, Space.DII, PotentialIndex.V4)
    a = problem.space.a
    if a == 0.0:
        raise ConfigError("the D_II V4 continuum formula needs a < 0")
    c = problem.hbar**2 / (2 * problem.m * abs(a))
    return SpectrumResult([], ContinuousBranch("E_p = hbar^2 (p^2 + 1/4)/(2m|a|); k~^2 = k^2 + v0^2", c, 0.25),
                          [], {"threshold": c * 0.25})


def dii_v4_kappa(problem, p, k):
    """Decay constant of the u factor; raises EvanescentRegime if it is not real."""
    s, hb, m = problem.spec, problem.hbar, problem.m
    b = problem.space.b
    E = dii_v4_spectrum(problem).continuous.E_of_p(p)
    ksq = k * k + s.v0**2 - 2 * m * b * E / hb**2
    if ksq <= 0:
        raise EvanescentRegime(f"k~^2 - 2mbE/hbar^2 = {ksq:.6g} <= 0")
    return math.sqrt(ksq), float(E)


def dii_v4_u_factor(problem, p, k, u):
    """sqrt(u) K_{ip}(kappa u): solves psi'' = [kappa^2 - (p^2 + 1/4)/u^2] psi."""
    kap, _ = dii_v4_kappa(problem, p, k)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.array([math.sqrt(x) * sf.bessel_K_imag_order(p, kap * x).value for x in u])
    return out


# ---------------------------------------------------------------- dispatch

def solve(problem: QuantizationProblem, chart: Chart = Chart.UV, bounded: bool = True) -> SpectrumResult:
    """Dispatch to the solver of (space, potential)."""
    key = (problem.spec.space, problem.spec.index)
    chart = Chart(chart)
    if key == (Space.DI, PotentialIndex.V1):
        if chart is not Chart.UV:
            raise UnsupportedChart("D_I V1 spectrum is solved in the (u, v) system")
        return di_v1_spectrum_bounded(problem) if bounded else di_v1_spectrum_unbounded(problem)
    if key == (Space.DI, PotentialIndex.V2):
        return di_v2_spectrum_bounded(problem, chart) if bounded else di_v2_spectrum_unbounded(problem)
    if key == (Space.DI, PotentialIndex.V3):
        return di_v3_analysis(problem)
    if key == (Space.DII, PotentialIndex.V1):
        if chart is not Chart.UV:
            raise UnsupportedChart("D_II V1 spectrum is solved in the (u, v) system")
        return dii_v1_spectrum(problem)
    if key == (Space.DII, PotentialIndex.V2):
        return dii_v2_spectrum(problem, chart)
    if key == (Space.DII, PotentialIndex.V3):
        if chart is Chart.UV:
            chart = Chart.PARABOLIC_POLAR
        return dii_v3_spectrum(problem, chart)
    return dii_v4_spectrum(problem)


# ---------------------------------------------------------------- wave functions

@dataclass
class WaveFunctionTable:
    """Wave function sampled on the tensor grid c1 x c2 of a chart.

    ``values[i, j]`` is the normalised function at (c1[i], c2[j]);
    ``normalization`` multiplies the bare product of separated factors.
    """
    chart: Chart
    c1: np.ndarray
    c2: np.ndarray
    values: np.ndarray
    normalization: float
    quantum_numbers: tuple

    def rows(self):
        for i, x in enumerate(self.c1):
            for j, y in enumerate(self.c2):
                yield float(x), float(y), float(self.values[i, j])


@dataclass(frozen=True)
class SeparatedState:
    """Product state pre(c1, c2) f1(c1) f2(c2) with measure sum_k w1k(c1) w2k(c2).

    The measure terms already contain the conformal factor, the chart
    Jacobian and pre^2, so that the norm is a sum of products of 1D integrals.
    """
    chart: Chart
    f1: Callable
    dom1: tuple
    f2: Callable
    dom2: tuple
    pre: Callable
    terms: tuple

    def norm_sq(self) -> float:
        tot = 0.0
        for w1, w2 in self.terms:
            i1 = _quad(lambda x: self.f1(x) ** 2 * w1(x), self.dom1)
            i2 = _quad(lambda y: self.f2(y) ** 2 * w2(y), self.dom2)
            tot += i1 * i2
        return tot

    def bare(self, c1, c2):
        X, Y = np.meshgrid(np.asarray(c1, float), np.asarray(c2, float), indexing="ij")
        f1 = np.asarray(self.f1(np.asarray(c1, float)), float).reshape(-1, 1)
        f2 = np.asarray(self.f2(np.asarray(c2, float)), float).reshape(1, -1)
        return self.pre(X, Y) * f1 * f2


def _quad(f, dom):
    lo, hi = dom
    pts = None
    val, err = integrate.quad(lambda x: float(np.asarray(f(np.array([x])), float).ravel()[0]),
                              lo, hi, limit=400, epsabs=1e-14, epsrel=1e-12, points=pts)
    return val


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _vec(fn):
    def g(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([fn(xi) for xi in x])
    return g


def _rho_factor(n, lam, c):
    return lambda x: np.asarray(sf.psi_RHO(n, lam, np.atleast_1d(x), c), float)


def _dnu_factor(nu, z_of_u, u_min, z_stop):
    def fn(u):
        if u < u_min:
            return 0.0
        z = z_of_u(u)
        if z > z_stop:
            return 0.0
        return sf.parabolic_cylinder_D_scaled(nu, z)
    return _vec(fn)


def separated_state(problem: QuantizationProblem, level: Level, chart: Chart = Chart.UV) -> SeparatedState:
    """Separated product state for a discrete level."""
    chart = Chart(chart)
    s, hb, m, w = problem.spec, problem.hbar, problem.m, problem.spec.omega
    a, b = problem.space.a, problem.space.b
    key = (s.space, s.index)
    n, l, E = level.n, level.l, level.E
    inf = math.inf

    def lam_of(k):
        lsq = k * k + 2 * m * a * E / hb**2
        if lsq < 0:
            raise UnknownLevel("level has an imaginary centrifugal index")
        return math.sqrt(lsq)

    if key in ((Space.DI, PotentialIndex.V1), (Space.DI, PotentialIndex.V2)):
        if chart not in (Chart.UV,) and not (chart is Chart.ROTATED_RQ and key[1] is PotentialIndex.V2):
            raise UnsupportedChart(f"no wave function in {chart.value}")
        if key[1] is PotentialIndex.V1:
            nu, _ = di_v1_nu_z(problem, n, E)
            k_z = 2.0 * math.sqrt(m * w / hb)
            u0 = E / (2 * m * w * w)
            f2 = _rho_factor(n, s.lam, m * w / hb)
            dom2 = (0.0, inf)
        else:
            nu, _ = di_v2_nu_z(problem, n, E)
            k_z = math.sqrt(2 * m * w / hb)
            u0 = 2 * E / (m * w * w)
            shift = s.kappa2 / (m * w * w)
            f2 = lambda v: np.asarray(sf.psi_HO(n, np.atleast_1d(v) + shift, m * w / hb), float)
            dom2 = (-inf, inf)
        z_stop = min(sf.Z_MAX, 2 * math.sqrt(max(nu, 0.0) + 1) + 16.0)
        u_min = problem.space.u_min
        f1 = _dnu_factor(nu, lambda u: k_z * (u - u0), u_min, z_stop)
        u_hi = u0 + z_stop / k_z
        return SeparatedState(chart, f1, (u_min, max(u_hi, u_min + 1.0)), f2, dom2,
                              lambda X, Y: np.ones_like(X), ((lambda u: 2.0 * np.asarray(u), _one),))

    if key == (Space.DII, PotentialIndex.V1):
        if chart is not Chart.UV:
            raise UnsupportedChart(f"no wave function in {chart.value}")
        shift = s.k1 / (4 * m * w * w)
        f1 = _rho_factor(l, lam_of(s.k2), m * w / hb)
        f2 = lambda v: np.asarray(sf.psi_HO(n, np.atleast_1d(v) + shift, 2 * m * w / hb), float)
        g = lambda u: b - a / np.asarray(u, float) ** 2
        return SeparatedState(chart, f1, (0.0, inf), f2, (-inf, inf),
                              lambda X, Y: np.ones_like(X), ((g, _one),))

    if key == (Space.DII, PotentialIndex.V2):
        lam1 = lam_of(s.k1)
        c = m * w / hb
        if chart is Chart.UV:
            g = lambda u: b - a / np.asarray(u, float) ** 2
            return SeparatedState(chart, _rho_factor(l, lam1, c), (0.0, inf),
                                  _rho_factor(n, s.k2, c), (0.0, inf),
                                  lambda X, Y: np.ones_like(X), ((g, _one),))
        if chart is Chart.POLAR:
            lam2 = 2 * n + 1 + lam1 + s.k2
            f2 = lambda t: np.asarray(sf.poschl_teller(n, s.k2, lam1, np.atleast_1d(t)), float)
            return SeparatedState(chart, _rho_factor(l, lam2, c), (0.0, inf), f2, (0.0, math.pi / 2),
                                  lambda X, Y: 1.0 / np.sqrt(X),
                                  ((lambda r: b * _one(r), _one),
                                   (lambda r: -a / np.asarray(r, float) ** 2,
                                    lambda t: 1.0 / np.cos(np.asarray(t, float)) ** 2)))
        raise UnsupportedChart(f"no wave function in {chart.value}")

    if key == (Space.DII, PotentialIndex.V3):
        lam1, lam2 = lam_of(s.k1), lam_of(s.k2)
        wE = math.sqrt(-2 * E * b / m)
        c = m * wE / hb
        if chart is Chart.PARABOLIC:
            return SeparatedState(chart, _rho_factor(l, lam1, c), (0.0, inf),
                                  _rho_factor(n, lam2, c), (0.0, inf),
                                  lambda X, Y: np.ones_like(X),
                                  ((lambda x: b * np.asarray(x, float) ** 2 - a / np.asarray(x, float) ** 2, _one),
                                   (_one, lambda y: b * np.asarray(y, float) ** 2 - a / np.asarray(y, float) ** 2)))
        if chart is Chart.PARABOLIC_POLAR:
            Lam = 2 * n + lam1 + lam2 + 1
            f2 = lambda t: np.asarray(sf.poschl_teller(n, lam2, lam1, np.atleast_1d(t)), float)
            return SeparatedState(chart, _rho_factor(l, Lam, c), (0.0, inf), f2, (0.0, math.pi / 2),
                                  lambda X, Y: 1.0 / np.sqrt(X),
                                  ((lambda r: b * np.asarray(r, float) ** 2, _one),
                                   (lambda r: -a / np.asarray(r, float) ** 2,
                                    lambda t: 1.0 / np.cos(np.asarray(t, float)) ** 2
                                    + 1.0 / np.sin(np.asarray(t, float)) ** 2)))
        raise UnsupportedChart(f"no wave function in {chart.value}")

    raise UnsupportedChart("discrete wave functions are not defined for this potential")


def wavefunction(problem: QuantizationProblem, level: Level, chart: Chart, grid) -> WaveFunctionTable:
    """Normalised product wave function of a discrete level on a chart grid.

    ``grid`` is a pair (c1 values, c2 values). The normalisation uses the
    curved area element g dA of the space.

    Raises
    ------
    UnknownLevel
        Level is not physical.
    UnsupportedChart
    """
    if not level.physical:
        raise UnknownLevel(f"level (n={level.n}, l={level.l}) is not a physical bound state")
    st = separated_state(problem, level, chart)
    nsq = st.norm_sq()
    if not (nsq > 0 and math.isfinite(nsq)):
        raise NonConvergence("normalisation integral failed")
    N = 1.0 / math.sqrt(nsq)
    c1, c2 = (np.asarray(g, dtype=float) for g in grid)
    vals = N * st.bare(c1, c2)
    return WaveFunctionTable(Chart(chart), c1, c2, vals, N, (level.n, level.l))


def continuum_wavefunction_v4(problem: QuantizationProblem, p: float, k: float, grid) -> WaveFunctionTable:
    """sqrt(u) K_{ip}(kappa u) cos(k v) on a (u, v) grid (delta normalised states are not rescaled)."""
    _require(problem, Space.DII, PotentialIndex.V4)
    c1, c2 = (np.asarray(g, dtype=float) for g in grid)
    fu = dii_v4_u_factor(problem, p, k, c1)
    vals = fu[:, None] * np.cos(k * c2)[None, :]
    return WaveFunctionTable(Chart.UV, c1, c2, vals, 1.0, (k, p))
