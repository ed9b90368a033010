"""Independent Sturm-Liouville eigen-solvers used to verify the spectra.

Two discretisations of

    -hbar^2/2m psi'' + [W(x) + hbar^2/2m (lam^2 - 1/4)/x^2] psi = eps psi

are provided: a second order finite difference / finite volume matrix
(:func:`fd_eigen`) and Numerov shooting with node counting
(:func:`numerov_eigen`). The centrifugal term is present only for a
regular-singular left boundary; there the substitution psi = x^(lam+1/2) phi
turns the problem into a weighted one that is regular at the origin.

:func:`selfconsistent_eigen` solves problems whose separated operators
themselves depend on the total energy E.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import linalg, optimize

from .errors import ConfigError, NoRootsInWindow, NonConvergence, TruncationTooSmall


class BC(str, enum.Enum):
    DIRICHLET = "dirichlet"
    REGULAR_SINGULAR = "regular-singular"
    DECAY = "decay"


@dataclass(frozen=True)
class SturmLiouvilleProblem:
    """Discretisable 1D eigenproblem.

    ``potential`` is the regular part W(x), vectorised over numpy arrays.
    ``index`` is the centrifugal index lam, read only when ``bc_lo`` is
    ``REGULAR_SINGULAR`` (then the domain must start at 0). ``DECAY`` means
    the interval is a truncation of an infinite range; it is discretised with
    a Dirichlet wall and checked a posteriori.
    """
    potential: Callable
    domain: tuple
    bc_lo: BC = BC.DIRICHLET
    bc_hi: BC = BC.DECAY
    grid_n: int = 2000
    index: float = 0.5
    hbar: float = 1.0
    m: float = 1.0

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ConfigError("domain must satisfy x_lo < x_hi")
        if self.grid_n < 100:
            raise ConfigError("grid_n must be at least 100")
        if self.bc_lo is BC.REGULAR_SINGULAR and lo != 0:
            raise ConfigError("regular-singular boundary must sit at x = 0")


@dataclass
class OracleSpectrum:
    eigenvalues: np.ndarray
    node_counts: list
    grid_convergence: float
    x: Optional[np.ndarray] = field(default=None, repr=False)
    vectors: Optional[np.ndarray] = field(default=None, repr=False)


def _nodes(vec: np.ndarray) -> int:
    tol = 1e-7 * np.max(np.abs(vec))
    s = np.sign(vec[np.abs(vec) > tol])
    return int(np.sum(s[1:] != s[:-1]))


def _tridiag(problem: SturmLiouvilleProblem, n: int):
    """Symmetric tridiagonal (d, e), grid x and the map back to psi."""
    lo, hi = problem.domain
    c = problem.hbar**2 / (2 * problem.m)
    if problem.bc_lo is BC.REGULAR_SINGULAR:
        lam = problem.index
        p = 2 * lam + 1
        h = hi / n
        i = np.arange(1, n + 1)
        x = (i - 0.5) * h
        # exact cell integrals of the weight x^(2 lam + 1)
        wgt = h ** (p + 1) * (i.astype(float) ** (p + 1) - (i - 1.0) ** (p + 1)) / (p + 1)
        flux = (i * h) ** p / h  # at the right face of each cell
        flux_l = np.concatenate(([0.0], flux[:-1]))
        flux_r = flux.copy()
        flux_r[-1] = 2.0 * flux[-1]  # Dirichlet wall at x = hi, half a cell away
        # cell integrals of W x^(2 lam + 1) by 3 point Gauss-Legendre
        gx, gw = np.polynomial.legendre.leggauss(3)
        pot = np.zeros(n)
        for xg, wg in zip(gx, gw):
            xs = (i - 0.5 + 0.5 * xg) * h
            pot += 0.5 * h * wg * problem.potential(xs) * xs**p
        diag = (c * (flux_l + flux_r) + pot) / wgt
        off = -c * flux[:-1] / np.sqrt(wgt[:-1] * wgt[1:])
        back = x ** (lam + 0.5)
        return diag, off, x, back, np.sqrt(wgt)
    h = (hi - lo) / n
    x = lo + h * np.arange(1, n)
    diag = 2 * c / h**2 + problem.potential(x)
    off = -c / h**2 * np.ones(n - 2)
    return diag, off, x, np.ones_like(x), np.ones_like(x)


def _solve(problem, n, k, want_vectors=False):
    d, e, x, back, sw = _tridiag(problem, n)
    if want_vectors:
        vals, vecs = linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
        psi = (vecs / sw[:, None]) * back[:, None]
        return vals, x, psi
    vals = linalg.eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, k - 1))
    return vals, x, None


def fd_eigen(problem: SturmLiouvilleProblem, k: int, check_truncation: bool = True) -> OracleSpectrum:
    """Lowest k eigenvalues by a second order three point scheme.

    Two grids (n and 2n cells) are combined by Richardson extrapolation;
    ``grid_convergence`` is the size of that correction.

    Raises
    ------
    TruncationTooSmall
        An eigenfunction keeps more than 1e-8 of its mass in the last 2 %
        of a truncated interval.
    """
    if k < 1:
        raise ConfigError("k must be at least 1")
    n = problem.grid_n
    e1, _, _ = _solve(problem, n, k)
    e2, x, psi = _solve(problem, 2 * n, k, want_vectors=True)
    ext = (4.0 * e2 - e1) / 3.0
    conv = float(np.max(np.abs(ext - e2)))
    nodes = [_nodes(psi[:, j]) for j in range(k)]
    # normalise psi on the grid (dx quadrature)
    dx = np.gradient(x)
    psi = psi / np.sqrt(np.sum(psi**2 * dx[:, None], axis=0))[None, :]
    if check_truncation and problem.bc_hi is BC.DECAY:
        tail = x > problem.domain[0] + 0.98 * (problem.domain[1] - problem.domain[0])
        mass = np.sum(psi[tail] ** 2 * dx[tail, None], axis=0)
        if np.any(mass > 1e-8):
            raise TruncationTooSmall(f"tail mass {mass.max():.2e} at x_hi = {problem.domain[1]}")
    return OracleSpectrum(ext, nodes, conv, x, psi)


def numerov_eigen(problem: SturmLiouvilleProblem, k: int, n: Optional[int] = None,
                  tol: float = 1e-12) -> np.ndarray:
    """Lowest k eigenvalues by Numerov shooting and node-count bisection.

    Serves as the second, independent discretisation; the right boundary is
    a Dirichlet wall at ``domain[1]``.
    """
    lo, hi = problem.domain
    n = n or 4 * problem.grid_n
    c = problem.hbar**2 / (2 * problem.m)
    sing = problem.bc_lo is BC.REGULAR_SINGULAR
    lam = problem.index
    if sing:
        # x = exp(t), psi = exp(t/2) chi: chi'' = [x^2 (W - eps)/c + lam^2] chi, smooth in t
        t0 = math.log(hi) - 30.0
        h = (math.log(hi) - t0) / n
        t = t0 + h * np.arange(n + 1)
        xg = np.exp(t)
        W = problem.potential(xg)
        W0 = float(problem.potential(np.array([xg[0]]))[0])
    else:
        h = (hi - lo) / n
        xg = lo + h * np.arange(n + 1)
        W = problem.potential(xg)

    def shoot(eps):
        if sing:
            f = xg**2 * (W - eps) / c + lam**2
        else:
            f = (W - eps) / c
        g = 1.0 - h * h * f / 12.0
        y = np.zeros(n + 1)
        if sing:
            gam = (W0 - eps) / c / (4 * lam + 4)
            y[0] = math.exp(lam * t[0]) * (1 + gam * xg[0] ** 2)
            y[1] = math.exp(lam * t[1]) * (1 + gam * xg[1] ** 2)
        else:
            y[1] = h
        nodes = 0
        for i in range(1, n):
            y[i + 1] = ((12.0 - 10.0 * g[i]) * y[i] - g[i - 1] * y[i - 1]) / g[i + 1]
            if y[i + 1] == 0.0 or (y[i + 1] > 0) != (y[i] > 0):
                if i + 1 < n:
                    nodes += 1
            if abs(y[i + 1]) > 1e100:
                y[: i + 2] *= 1e-100
        return nodes, y[n]

    # bracket the spectrum
    # Hardy: -d^2/dx^2 + (lam^2 - 1/4)/x^2 >= 0 for lam >= 0, so min W bounds the spectrum
    e_lo = float(np.min(W[np.isfinite(W)]))
    e_hi = e_lo + 1.0
    while shoot(e_hi)[0] < k:
        e_hi = e_lo + 2.0 * (e_hi - e_lo)
        if e_hi - e_lo > 1e8:
            raise NonConvergence("could not bracket the requested eigenvalues")
    out = []
    for j in range(k):
        a, b = e_lo, e_hi
        # count(eps) = number of eigenvalues below eps
        while b - a > 1e-6 * max(1.0, abs(b)):
            mid = 0.5 * (a + b)
            if shoot(mid)[0] > j:
                b = mid
            else:
                a = mid
        fa, fb = shoot(a)[1], shoot(b)[1]
        if fa * fb > 0:
            # widen slightly: the eigenvalue sits where the node count jumps
            a -= 1e-6 * max(1.0, abs(a))
            b += 1e-6 * max(1.0, abs(b))
        root = optimize.brentq(lambda e: shoot(e)[1], a, b, xtol=tol, rtol=4 * np.finfo(float).eps)
        out.append(root)
    return np.array(out)


def cross_check(problem: SturmLiouvilleProblem, k: int, rtol: float = 1e-5) -> np.ndarray:
    """FD and Numerov eigenvalues; raises if they disagree beyond rtol."""
    fd = fd_eigen(problem, k).eigenvalues
    nu = numerov_eigen(problem, k)
    if np.any(np.abs(fd - nu) > rtol * np.maximum(1.0, np.abs(fd))):
        raise NonConvergence(f"FD {fd} and Numerov {nu} disagree")
    return fd


def selfconsistent_eigen(problem_family: Callable, quant_rule: Callable, window: tuple,
                         levels: Sequence[int] = (0,), grid_points: int = 41,
                         tol: float = 1e-10) -> list:
    """Roots E of quant_rule(eigs(E), E) over a window.

    Parameters
    ----------
    problem_family : callable
        E -> SturmLiouvilleProblem or tuple of them.
    quant_rule : callable
        (tuple of eigenvalues, E) -> residual.
    window : (E_lo, E_hi)
    levels : sequence of int
        Eigenvalue index taken from each problem of the family.

    Returns
    -------
    list of float
        Sorted roots.

    Raises
    ------
    NoRootsInWindow
    NonConvergence
    """
    levels = tuple(levels)

    def resid(E):
        probs = problem_family(E)
        if isinstance(probs, SturmLiouvilleProblem):
            probs = (probs,)
        eigs = tuple(float(fd_eigen(p, j + 1, check_truncation=False).eigenvalues[j])
                     for p, j in zip(probs, levels))
        return quant_rule(eigs, E)

    grid = np.linspace(window[0], window[1], grid_points)
    vals = np.array([resid(E) for E in grid])
    roots = []
    for i in range(len(grid) - 1):
        fa, fb = vals[i], vals[i + 1]
        if not (np.isfinite(fa) and np.isfinite(fb)):
            continue
        if fa == 0.0:
            roots.append(float(grid[i]))
        elif fa * fb < 0:
            try:
                r = optimize.brentq(resid, grid[i], grid[i + 1], xtol=tol, rtol=1e-14, maxiter=200)
            except RuntimeError as exc:
                raise NonConvergence(str(exc)) from exc
            roots.append(float(r))
    if not roots:
        raise NoRootsInWindow(f"no sign change in {window}")
    return sorted(roots)


# ---------------------------------------------------------------- separated problems

def _rise_point(W, x0: float, direction: float, rise: float, step: float = 0.25) -> float:
    """First x = x0 + direction * t (t doubling) where W(x) exceeds W(x0) + rise."""
    base = float(W(np.array([x0]))[0])
    t = step
    for _ in range(80):
        x = x0 + direction * t
        if float(W(np.array([x]))[0]) >= base + rise:
            return x
        t *= 1.5
    raise TruncationTooSmall("potential does not confine: no truncation point found")


def _argmin(W, lo: float, hi: float) -> float:
    xs = np.linspace(lo, hi, 4001)
    ws = W(xs)
    i = int(np.nanargmin(ws))
    res = optimize.minimize_scalar(lambda x: float(W(np.array([x]))[0]),
                                   bounds=(xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]), method="bounded")
    return float(res.x)


def from_separated(sep, E: float = 0.0, s: float = 0.0, rise: float = 60.0, grid_n: int = 2000,
                   hbar: float = 1.0, m: float = 1.0) -> SturmLiouvilleProblem:
    """Truncated Sturm-Liouville problem for a separated problem at fixed (E, s).

    Infinite ends are cut where the regular potential has risen ``rise``
    above its minimum on the retained side.
    """
    from .potentials import Boundary

    W = lambda x: np.asarray(sep.potential(np.asarray(x, dtype=float), E, s), dtype=float) + 0.0 * np.asarray(x)
    lo, hi = sep.domain
    if sep.boundary is Boundary.HALF_LINE_DIRICHLET:
        xm = max(lo, _argmin(W, lo, lo + 200.0))
        return SturmLiouvilleProblem(W, (lo, _rise_point(W, xm, 1.0, rise)), BC.DIRICHLET, BC.DECAY,
                                     grid_n, hbar=hbar, m=m)
    if sep.boundary is Boundary.RADIAL_REGULAR:
        lam = sep.index(E, s)
        xm = _argmin(W, 0.0, 200.0)
        return SturmLiouvilleProblem(W, (0.0, _rise_point(W, xm, 1.0, rise)), BC.REGULAR_SINGULAR, BC.DECAY,
                                     grid_n, index=lam, hbar=hbar, m=m)
    if sep.boundary is Boundary.WHOLE_LINE:
        xm = _argmin(W, -200.0, 200.0)
        return SturmLiouvilleProblem(W, (_rise_point(W, xm, -1.0, rise), _rise_point(W, xm, 1.0, rise)),
                                     BC.DIRICHLET, BC.DECAY, grid_n, hbar=hbar, m=m)
    raise ConfigError(f"no discretisation for boundary {sep.boundary.value}")


def separated_levels(spec, space, chart, levels: Sequence[int], window: tuple, hbar: float = 1.0,
                     m: float = 1.0, grid_points: int = 41, grid_n: int = 2000, tol: float = 1e-12) -> list:
    """Total energies E for which the separated eigenvalues obey the coupling rule.

    ``levels`` picks the eigenvalue index of each of the two separated
    problems returned by :func:`darboux.potentials.separate`. Both problems
    are discretised afresh for every trial E, so E dependent centrifugal
    indices and E dependent potentials are handled alike.
    """
    from .potentials import separate

    p1, p2, rule = separate(spec, space, chart, hbar, m)
    if rule.residual is None:
        raise ConfigError("no discrete coupling rule for this separation")
    levels = tuple(levels)

    def family(E):
        return (from_separated(p1, E, 0.0, grid_n=grid_n, hbar=hbar, m=m),
                from_separated(p2, E, 0.0, grid_n=grid_n, hbar=hbar, m=m))

    return selfconsistent_eigen(family, lambda eigs, E: rule.residual(E, eigs[0], eigs[1]),
                                window, levels, grid_points, tol)
