"""Real-argument special functions used by the spectral conditions.

Fast double precision routines from :mod:`scipy.special` are used where they
have been validated. Outside that region D_nu(z) of negative order comes
from its integral representation and D_nu(z) of positive order, the
Whittaker functions and K of imaginary order from :mod:`mpmath`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, special

from .errors import OutOfSupportedRange, Overflow, PoleOfM, DomainViolation

_EPS = np.finfo(float).eps
_DPS = 30
NU_MAX = 200.0
Z_MAX = 50.0


@dataclass(frozen=True)
class FnEvalResult:
    """Function value with a conservative absolute error estimate."""
    value: float
    abs_err_estimate: float

    def __float__(self):
        return self.value


def _finite(x: float, what: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise Overflow(f"{what} is not finite")
    return x


def _mp_result(x) -> FnEvalResult:
    val = _finite(x, "value")
    return FnEvalResult(val, 4 * _EPS * abs(val) + 1e-300)


# ---------------------------------------------------------------- D_nu

def _pbdv_scipy_ok(nu: float, z: float) -> bool:
    # regions where scipy.special.pbdv agrees with 30-digit mpmath to ~1e-11;
    # on the growing side z < 0 it degrades quickly once |z| exceeds about 5
    if z < 0:
        return z >= -2.0 or (nu <= 2.0 and z >= -5.0)
    if nu < -10.0:
        return z >= 4.0
    return True


def parabolic_cylinder_D(nu: float, z: float) -> FnEvalResult:
    """Parabolic cylinder function D_nu(z) for real order and argument.

    Parameters
    ----------
    nu : float
        Order, |nu| <= 200.
    z : float
        Argument, |z| <= 50.

    Returns
    -------
    FnEvalResult

    Raises
    ------
    OutOfSupportedRange
        Outside the supported window.
    Overflow
        Result does not fit in a double.
    """
    nu = float(nu)
    z = float(z)
    if not (math.isfinite(nu) and math.isfinite(z)):
        raise OutOfSupportedRange("non-finite input")
    if abs(nu) > NU_MAX or abs(z) > Z_MAX:
        raise OutOfSupportedRange(f"D_nu(z) supported for |nu|<={NU_MAX}, |z|<={Z_MAX}")
    if _pbdv_scipy_ok(nu, z):
        d = special.pbdv(nu, z)[0]
        # pbdv flushes to zero, and loses digits, below about 1e-215
        if math.isfinite(d) and abs(d) > 1e-200:
            return FnEvalResult(float(d), 1e-11 * (1.0 + abs(d)))
    if nu < 0:
        return _pcfd_negative_order(nu, z)
    with mpmath.workdps(_DPS):
        return _mp_result(mpmath.pcfd(nu, z))


def _pcfd_negative_order(nu: float, z: float) -> FnEvalResult:
    # quad's estimate is carried into abs_err_estimate, so its roundoff
    # warnings near the requested 1e-13 add nothing
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return _pcfd_negative_order_quad(nu, z)


def _pcfd_negative_order_quad(nu: float, z: float) -> FnEvalResult:
    # D_nu(z) = exp(-z^2/4)/Gamma(-nu) int_0^inf t^a exp(-z t - t^2/2) dt, a = -nu - 1 > -1,
    # integrated in log scale about the peak of the exponent; the 30 digit
    # series is orders of magnitude slower here for large |nu| and |z|
    a = -nu - 1.0
    ts = 0.5 * (-z + math.sqrt(z * z + 4.0 * a)) if a > 0 else max(-z, 0.0)

    def phi(t):
        return (a * math.log(t) if a != 0.0 else 0.0) - z * t - 0.5 * t * t

    def expo(t):
        return -z * t - 0.5 * t * t

    p0 = phi(ts) if ts > 0 else 0.0
    w = 1.0 / math.sqrt(1.0 + (a / ts**2 if ts > 0 and a > 0 else 0.0))
    # window: where the log integrand is within 40 of its peak
    hi = ts + 40.0 * w
    while phi(hi) - p0 > -40.0:
        hi = ts + 2.0 * (hi - ts)
    lo = ts - 40.0 * w
    if lo <= 0.0 or phi(lo) - p0 > -40.0:
        lo = 0.0
    f = lambda t: math.exp(phi(t) - p0)
    if lo > 0.0:
        val, err = integrate.quad(f, lo, hi, points=[ts], epsabs=0.0, epsrel=1e-13, limit=200)
        return _pcfd_from_log(nu, z, p0, val, err)
    # t^a is not smooth at 0: [0, c] by the algebraic weight rule, the rest plainly
    c = min(1.0, 0.5 * hi)
    peak = [ts] if c < ts < hi else None
    v2, e2 = integrate.quad(f, c, hi, points=peak, epsabs=0.0, epsrel=1e-13, limit=200)
    if a >= 0.0:
        v1, e1 = integrate.quad(lambda t: math.exp(expo(t) - p0), 0.0, c, weight="alg", wvar=(a, 0.0),
                                epsabs=0.0, epsrel=1e-13, limit=200)
        return _pcfd_from_log(nu, z, p0, v1 + v2, e1 + e2)
    # -1 < a < 0: subtract the endpoint value, integrate it exactly and use
    # 1/Gamma(-nu) = -nu/Gamma(1 - nu), so a tiny -nu = a + 1 is never divided by
    g0 = math.exp(-p0)
    dg = lambda t: g0 * math.expm1(expo(t))
    if a > -1.0 + 1e-8:
        v1, e1 = integrate.quad(dg, 0.0, c, weight="alg", wvar=(a, 0.0), epsabs=0.0, epsrel=1e-13, limit=200)
    else:
        # t^a dg(t) ~ t^(a+1) is bounded and nearly constant near 0
        v1, e1 = integrate.quad(lambda t: t**a * dg(t) if t > 0 else -z * g0, 0.0, c,
                                epsabs=0.0, epsrel=1e-13, limit=200)
    s_ = -nu
    bracket = g0 * c**s_ + s_ * (v1 + v2)
    return _pcfd_from_log(nu, z, p0, bracket, s_ * (e1 + e2), lg=math.lgamma(1.0 - nu))


def _pcfd_from_log(nu, z, p0, val, err, lg=None) -> FnEvalResult:
    lg = math.lgamma(-nu) if lg is None else lg
    logv = -0.25 * z * z - lg + p0 + math.log(val)
    if logv > 709.0:
        raise Overflow(f"D_{nu}({z}) exceeds the double range")
    d = math.exp(logv)
    return FnEvalResult(d, max(1e-12, 10.0 * err / val) * d + 1e-300)


def pcf_log_envelope(nu: float, z: float) -> float:
    """Continuous log-size envelope of D_nu(z).

    0.5 ln Gamma(nu+1) is the L2 scale in the oscillatory region (the norm of
    D_n is sqrt(n! sqrt(2 pi))); beyond the left turning point D_nu grows like
    exp(z^2/4), which the second term absorbs.
    """
    nup = max(float(nu), 0.0)
    env = 0.5 * math.lgamma(nup + 1.0)
    if z < 0:
        env += max(0.0, 0.25 * z * z - nup - 1.0)
    return env


def parabolic_cylinder_D_scaled(nu: float, z: float, log_scale: float | None = None) -> float:
    """D_nu(z) * exp(-log_scale), finite even where D_nu(z) itself overflows.

    ``log_scale`` defaults to :func:`pcf_log_envelope`; root scans use the
    scaled value so that sign and relative size survive for large order and
    negative argument.
    """
    nu = float(nu)
    z = float(z)
    if log_scale is None:
        log_scale = pcf_log_envelope(nu, z)
    if abs(nu) > NU_MAX or abs(z) > Z_MAX:
        raise OutOfSupportedRange(f"D_nu(z) supported for |nu|<={NU_MAX}, |z|<={Z_MAX}")
    try:
        d = parabolic_cylinder_D(nu, z).value
        if d == 0.0:
            return 0.0
        return math.copysign(math.exp(math.log(abs(d)) - log_scale), d)
    except Overflow:
        with mpmath.workdps(_DPS):
            return float(mpmath.pcfd(nu, z) * mpmath.exp(-log_scale))


def parabolic_cylinder_D_array(nu: float, z) -> np.ndarray:
    """Vectorised :func:`parabolic_cylinder_D` over z, values only."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return np.array([parabolic_cylinder_D(nu, zi).value for zi in z.ravel()]).reshape(z.shape)


# ---------------------------------------------------------------- Whittaker

def whittaker_M(mu: float, nu: float, z: float) -> FnEvalResult:
    """Whittaker function M_{mu,nu}(z) for z > 0.

    Raises
    ------
    PoleOfM
        2 nu is a negative integer.
    """
    if not z > 0:
        raise DomainViolation("whittaker_M needs z > 0")
    two_nu = 2.0 * nu
    if two_nu < 0 and float(two_nu).is_integer():
        raise PoleOfM(f"2 nu = {two_nu} is a negative integer")
    with mpmath.workdps(_DPS):
        return _mp_result(mpmath.re(mpmath.whitm(mu, nu, z)))


def whittaker_W(mu: float, nu: float, z: float) -> FnEvalResult:
    """Whittaker function W_{mu,nu}(z) for z > 0."""
    if not z > 0:
        raise DomainViolation("whittaker_W needs z > 0")
    with mpmath.workdps(_DPS):
        return _mp_result(mpmath.re(mpmath.whitw(mu, nu, z)))


# ---------------------------------------------------------------- polynomials

def _poly(value, z):
    value = np.asarray(value, dtype=float)
    return value if np.ndim(z) else float(value)


def laguerre(n: int, lam: float, z):
    """Generalised Laguerre polynomial L_n^(lam)(z)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return _poly(special.eval_genlaguerre(n, lam, z), z)


def hermite(n: int, z):
    """Physicists' Hermite polynomial H_n(z)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return _poly(special.eval_hermite(n, z), z)


def jacobi(n: int, alpha: float, beta: float, z):
    """Jacobi polynomial P_n^(alpha,beta)(z)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return _poly(special.eval_jacobi(n, alpha, beta, z), z)


# ---------------------------------------------------------------- Bessel, Airy, Gamma

def gamma(x: float) -> float:
    """Gamma function (thin wrapper, raises on overflow)."""
    return _finite(special.gamma(x), "Gamma")


def bessel_I(nu: float, z: float) -> FnEvalResult:
    """Modified Bessel function I_nu(z), z >= 0."""
    if z < 0:
        raise DomainViolation("bessel_I needs z >= 0")
    val = _finite(special.iv(nu, z), "I_nu")
    return FnEvalResult(val, 1e-14 * (1.0 + abs(val)))


def bessel_K(nu: float, z: float) -> FnEvalResult:
    """Modified Bessel function K_nu(z), z > 0."""
    if not z > 0:
        raise DomainViolation("bessel_K needs z > 0")
    val = _finite(special.kv(nu, z), "K_nu")
    return FnEvalResult(val, 1e-14 * (1.0 + abs(val)))


def bessel_K_imag_order(p: float, z: float) -> FnEvalResult:
    """K_{ip}(z) for real p and z > 0.

    Evaluated in 30 digit arithmetic; K_{ip} is real for real p and z. The
    double precision integral representation int_0^inf exp(-z cosh t) cos(p t) dt
    loses relative accuracy once p and z are both large.
    """
    if not z > 0:
        raise DomainViolation("bessel_K_imag_order needs z > 0")
    if z > 700.0:
        raise OutOfSupportedRange("z > 700 underflows")
    with mpmath.workdps(_DPS):
        val = mpmath.re(mpmath.besselk(mpmath.mpc(0, p), z))
    return _mp_result(val)


def airy_Ai(z: float) -> FnEvalResult:
    """Airy function Ai(z)."""
    val = _finite(special.airy(z)[0], "Ai")
    return FnEvalResult(val, 1e-14 * (1.0 + abs(val)))


# ---------------------------------------------------------------- oscillator states

def psi_HO(n: int, x, mw_over_hbar: float = 1.0):
    """Normalised harmonic oscillator eigenfunction on the real line.

    Evaluated through the orthonormal Hermite-function recurrence, which
    stays finite for large n where H_n and 2^n n! overflow separately.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    c = mw_over_hbar
    y = np.sqrt(c) * np.asarray(x, dtype=float)
    h0 = (c / np.pi) ** 0.25 * np.exp(-0.5 * y**2)
    if n == 0:
        return h0 if h0.ndim else float(h0)
    h1 = np.sqrt(2.0) * y * h0
    for k in range(1, n):
        h0, h1 = h1, np.sqrt(2.0 / (k + 1)) * y * h1 - np.sqrt(k / (k + 1)) * h0
    return h1 if h1.ndim else float(h1)


def psi_RHO(n: int, lam: float, r, mw_over_hbar: float = 1.0):
    """Radial harmonic oscillator eigenfunction, normalised on (0, inf) with dr.

    psi = N sqrt(r) (c r^2)^(lam/2) exp(-c r^2 / 2) L_n^(lam)(c r^2), c = m omega / hbar,
    N^2 = 2 c n! / Gamma(n + lam + 1). It solves
    -psi''/2 + [c^2 r^2 + (lam^2 - 1/4)/r^2] psi / 2 = c (2n + lam + 1) psi
    in units hbar = m = 1.
    """
    if n < 0 or not lam > -1:
        raise ValueError("need n >= 0 and lam > -1")
    c = mw_over_hbar
    r = np.asarray(r, dtype=float)
    x = c * r**2
    lognorm = 0.5 * (math.log(2.0 * c) + special.gammaln(n + 1) - special.gammaln(n + lam + 1))
    with np.errstate(divide="ignore"):
        logpref = lognorm + 0.5 * np.log(r) + 0.5 * lam * np.log(x) - 0.5 * x
    out = np.exp(logpref) * laguerre(n, lam, x)
    out = np.where(r > 0, out, 0.0)
    return out if out.ndim else float(out)


def poschl_teller(n: int, alpha: float, beta: float, x):
    """Normalised Poschl-Teller state on (0, pi/2).

    Phi_n = N (sin x)^(alpha+1/2) (cos x)^(beta+1/2) P_n^(alpha,beta)(cos 2x),
    the eigenfunction of -d^2/dx^2 + (alpha^2-1/4)/sin^2 x + (beta^2-1/4)/cos^2 x
    with eigenvalue (2n + alpha + beta + 1)^2.
    """
    x = np.asarray(x, dtype=float)
    a, b = alpha, beta
    lognorm = 0.5 * (math.log(2.0 * (2 * n + a + b + 1)) + special.gammaln(n + 1)
                     + special.gammaln(n + a + b + 1) - special.gammaln(n + a + 1)
                     - special.gammaln(n + b + 1))
    out = (math.exp(lognorm) * np.sin(x) ** (a + 0.5) * np.cos(x) ** (b + 0.5)
           * jacobi(n, a, b, np.cos(2 * x)))
    return out if np.ndim(out) else float(out)
