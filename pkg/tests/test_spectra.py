import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from darboux import special_functions as sf
from darboux import spectra
from darboux.errors import (ConfigError, EvanescentRegime, NotSeparableHere, UnknownLevel, UnsupportedChart)
from darboux.geometry import Chart, Space, SpaceSpec, conformal_factor
from darboux.potentials import PotentialIndex, PotentialSpec
from darboux.spectra import Method, QuantizationProblem, SpectrumResult

DI = SpaceSpec(Space.DI, u_min=0.5)
FLAT = SpaceSpec(Space.DII, a=0.0, b=1.0)
CURVED = SpaceSpec(Space.DII, a=-1.0, b=1.0)


def qp(space_t, index, space, **kw):
    opts = {k: kw.pop(k) for k in ("n_max", "l_max", "tol", "e_search", "hbar", "m") if k in kw}
    return QuantizationProblem(PotentialSpec(space_t, index, **kw), space, **opts)


# ---------------------------------------------------------------- problem record

def test_problem_validation():
    spec = PotentialSpec(Space.DI, PotentialIndex.V1)
    with pytest.raises(ConfigError):
        QuantizationProblem(spec, CURVED)
    with pytest.raises(ConfigError):
        QuantizationProblem(spec, DI, hbar=0.0)
    with pytest.raises(ConfigError):
        QuantizationProblem(spec, DI, n_max=-1)
    with pytest.raises(ConfigError):
        QuantizationProblem(spec, DI, e_search=(1.0, 0.0, 10))
    with pytest.raises(ConfigError):
        QuantizationProblem(spec, DI, e_search=(0.0, 1.0, 1))


# ---------------------------------------------------------------- D_I without the wall

def test_di_v1_unbounded_values():
    p = qp(Space.DI, PotentialIndex.V1, DI, kappa=0.0, lam=0.5, n_max=1, l_max=1)
    res = spectra.di_v1_spectrum_unbounded(p)
    E00 = [lv.E for lv in res.levels if lv.n == 0 and lv.l == 0]
    # E^2 = 2 m w^2 (hbar w (2l + 2n + 2 + lam) + kappa) = 5
    assert sorted(E00) == pytest.approx([-math.sqrt(5.0), math.sqrt(5.0)], rel=1e-15)
    assert not any(lv.physical for lv in res.levels)
    assert all("norm" in lv.notes for lv in res.levels)
    # degenerate in n and l
    assert res.level(1, 0, +1).E == res.level(0, 1, +1).E


def test_di_v1_unbounded_edges():
    # zero radicand: kappa = -hbar w (2 + lam)
    p = qp(Space.DI, PotentialIndex.V1, DI, kappa=-2.5, lam=0.5, n_max=0, l_max=0)
    assert [lv.E for lv in spectra.di_v1_spectrum_unbounded(p).levels] == [0.0, 0.0]
    p = qp(Space.DI, PotentialIndex.V1, DI, kappa=-3.0, lam=0.5, n_max=1, l_max=0)
    res = spectra.di_v1_spectrum_unbounded(p)
    assert {(lv.n, lv.l) for lv in res.levels} == {(1, 0)}
    assert res.warnings and "negative radicand" in res.warnings[0]


def test_di_v2_unbounded():
    p = qp(Space.DI, PotentialIndex.V2, DI, kappa1=0.0, kappa2=0.0, n_max=2, l_max=2)
    res = spectra.di_v2_spectrum_unbounded(p)
    assert res.level(0, 0, +1).E == pytest.approx(math.sqrt(0.5), rel=1e-15)
    for n in range(3):
        for l in range(3):
            assert res.level(n, l, +1).E == pytest.approx(math.sqrt(0.5 * (n + l + 1)), rel=1e-15)
    lower = spectra.di_v2_spectrum_unbounded(qp(Space.DI, PotentialIndex.V2, DI, kappa2=0.8, n_max=0, l_max=0))
    assert lower.level(0, 0, +1).E < res.level(0, 0, +1).E


# ---------------------------------------------------------------- D_I with the wall

DI_V1_N0 = [2.43207170578, 3.19092298571, 3.78825124912, 4.29842584343, 4.7515643447]
DI_V1_N1 = [3.0581229036, 3.6839936297, 4.2111275301, 4.6757312964, 5.0960741759]


@pytest.fixture(scope="module")
def di_v1_bounded():
    p = qp(Space.DI, PotentialIndex.V1, DI, lam=0.5, n_max=1, l_max=4, e_search=(0.0, 12.0, 4000))
    return p, spectra.di_v1_spectrum_bounded(p)


def test_di_v1_bounded_roots(di_v1_bounded):
    p, res = di_v1_bounded
    for n, ref in ((0, DI_V1_N0), (1, DI_V1_N1)):
        got = [res.level(n, l).E for l in range(5)]
        assert got == pytest.approx(ref, abs=2e-10)
    assert all(lv.method is Method.TRANSCENDENTAL_ROOT for lv in res.levels)
    assert all(lv.residual <= p.tol and lv.physical for lv in res.levels)


def test_di_v1_bounded_condition_holds(di_v1_bounded):
    p, res = di_v1_bounded
    for lv in res.levels:
        nu, z = spectra.di_v1_nu_z(p, lv.n, lv.E)
        d = sf.parabolic_cylinder_D(nu, z)
        # a root: D changes sign across E +- 1e-7
        lo = sf.parabolic_cylinder_D(*spectra.di_v1_nu_z(p, lv.n, lv.E - 1e-7)).value
        hi = sf.parabolic_cylinder_D(*spectra.di_v1_nu_z(p, lv.n, lv.E + 1e-7)).value
        assert lo * hi < 0
        assert abs(d.value) <= 1e-6 * max(abs(lo), abs(hi))


def test_di_v1_bounded_above_unbounded(di_v1_bounded):
    # the wall raises every level above its wall-free counterpart
    p, res = di_v1_bounded
    for lv in res.levels:
        assert lv.E > math.sqrt(spectra.di_v1_unbounded_E2(p, lv.n, lv.l))


def test_di_v1_non_degenerate(di_v1_bounded):
    _, res = di_v1_bounded
    e0 = np.array([lv.E for lv in res.levels if lv.n == 0])
    e1 = np.array([lv.E for lv in res.levels if lv.n == 1])
    assert np.min(np.abs(e0[:, None] - e1[None, :])) > 1e-6


def test_di_v2_rq_route_identical():
    p = qp(Space.DI, PotentialIndex.V2, DI, kappa1=0.3, kappa2=0.4, n_max=1, l_max=4, e_search=(0.0, 8.0, 3000))
    uv = spectra.di_v2_spectrum_bounded(p, Chart.UV)
    rq = spectra.di_v2_spectrum_bounded(p, Chart.ROTATED_RQ)
    assert len(uv.levels) == len(rq.levels) == 10
    for a, b in zip(uv.levels, rq.levels):
        assert (a.n, a.l) == (b.n, b.l)
        assert abs(a.E - b.E) <= 1e-12 * abs(a.E)
    with pytest.raises(NotSeparableHere):
        spectra.di_v2_nu_z_rq(p, 0, 1.0, theta=0.3)


def test_di_v2_bounded_non_degenerate():
    p = qp(Space.DI, PotentialIndex.V2, DI, n_max=1, l_max=4, e_search=(0.0, 8.0, 3000))
    res = spectra.di_v2_spectrum_bounded(p)
    e0 = np.array([lv.E for lv in res.levels if lv.n == 0])
    e1 = np.array([lv.E for lv in res.levels if lv.n == 1])
    assert np.min(np.abs(e0[:, None] - e1[None, :])) > 1e-6


def test_di_v3_no_bound_states():
    for v0 in (0.0, 0.7, 3.0):
        res = spectra.di_v3_analysis(qp(Space.DI, PotentialIndex.V3, DI, v0=v0))
        assert res.levels == []
        assert res.info["min_airy_argument"] > 0
        assert res.info["sign_changes"] == 0
        assert res.continuous is not None and res.continuous.threshold == 0.0


# ---------------------------------------------------------------- D_II V1

def test_dii_v1_flat_holt():
    p = qp(Space.DII, PotentialIndex.V1, FLAT, omega=1.3, k1=0.7, k2=1.1, n_max=2, l_max=2)
    res = spectra.dii_v1_spectrum(p)
    for lv in res.levels:
        C = spectra.dii_v1_C(p, lv.n, lv.l)
        assert lv.E == pytest.approx((C + 1.3 * 1.1) / 1.0, rel=1e-14)
        assert lv.physical and lv.method is Method.CLOSED_FORM


def test_dii_v1_semibound_example():
    p = qp(Space.DII, PotentialIndex.V1, CURVED, k1=0.0, k2=1.0, n_max=0, l_max=0)
    lv = spectra.dii_v1_spectrum(p).levels[0]
    assert not lv.physical and "semi-bound" in lv.notes and math.isnan(lv.residual)


def test_dii_v1_level_count():
    p = qp(Space.DII, PotentialIndex.V1, CURVED, k1=2.0, k2=4.0, n_max=5, l_max=5)
    res = spectra.dii_v1_spectrum(p)
    bound = 0.5 + 16 / 2 + 4 / 8
    assert res.info["level_bound"].endswith("= 9")
    for n in range(6):
        for l in range(6):
            phys = [lv for lv in res.levels if (lv.n, lv.l) == (n, l) and lv.physical]
            assert bool(phys) == (2 * l + 2 * n + 2 <= bound) == spectra.dii_v1_level_bound(p, n, l)
    assert len(res.physical_levels()) == 10


@settings(max_examples=40)
@given(a=st.floats(-2.0, -0.05), b=st.floats(0.05, 2.0), k1=st.floats(0, 3), k2=st.floats(0, 5),
       w=st.floats(0.3, 2.0))
def test_dii_v1_physical_roots_satisfy_condition(a, b, k1, k2, w):
    p = qp(Space.DII, PotentialIndex.V1, SpaceSpec(Space.DII, a=a, b=b), omega=w, k1=k1, k2=k2, n_max=3, l_max=3)
    for lv in spectra.dii_v1_spectrum(p).physical_levels():
        C = spectra.dii_v1_C(p, lv.n, lv.l)
        res = spectra.sqrt_condition_residual(lv.E, C, k2, a, b, 1.0, 1.0, w)
        assert abs(res) <= p.tol * max(1.0, abs(lv.E))


@settings(max_examples=60)
@given(k1=st.floats(0, 4), k2=st.floats(0, 6), w=st.floats(0.3, 2.0))
def test_dii_v1_sharp_bound(k1, k2, w):
    p = qp(Space.DII, PotentialIndex.V1, CURVED, omega=w, k1=k1, k2=k2, n_max=3, l_max=3)
    res = spectra.dii_v1_spectrum(p)
    for n in range(4):
        for l in range(4):
            mine = [lv for lv in res.levels if (lv.n, lv.l) == (n, l)]
            assert sum(lv.physical for lv in mine) == spectra.dii_v1_physical_bound(p, n, l)
            assert any("semi-bound" in lv.notes for lv in mine) != spectra.dii_v1_level_bound(p, n, l)


def test_dii_v1_inequality_not_sufficient():
    # passes the level count inequality, yet 2.5 + 1.5 sqrt(4 - 2E) = E has no root
    p = qp(Space.DII, PotentialIndex.V1, CURVED, omega=1.5, k1=3.0, k2=2.0, n_max=0, l_max=0)
    res = spectra.dii_v1_spectrum(p)
    assert spectra.dii_v1_level_bound(p, 0, 0) and not spectra.dii_v1_physical_bound(p, 0, 0)
    assert not res.physical_levels()
    assert all("no root" in lv.notes for lv in res.levels)


# ---------------------------------------------------------------- D_II V2

def test_dii_v2_flat_values():
    p = qp(Space.DII, PotentialIndex.V2, FLAT, k1=0.5, k2=0.5, n_max=1, l_max=1)
    res = spectra.dii_v2_spectrum(p)
    assert [res.level(n, l).E for n, l in ((0, 0), (1, 0), (0, 1), (1, 1))] == [3.0, 5.0, 5.0, 7.0]


@pytest.mark.parametrize("space", [FLAT, CURVED, SpaceSpec(Space.DII, a=-0.3, b=2.0)])
def test_dii_v2_uv_polar_agree(space):
    p = qp(Space.DII, PotentialIndex.V2, space, omega=1.7, k1=2.5, k2=0.5, n_max=3, l_max=3)
    uv = spectra.dii_v2_spectrum(p, Chart.UV)
    po = spectra.dii_v2_spectrum(p, Chart.POLAR)
    assert len(uv.levels) == len(po.levels)
    for a, b in zip(uv.levels, po.levels):
        assert (a.n, a.l, a.physical, a.branch) == (b.n, b.l, b.physical, b.branch)
        assert abs(a.E - b.E) <= 1e-12 * max(1.0, abs(a.E))


def test_dii_v2_semibound_example():
    p = qp(Space.DII, PotentialIndex.V2, CURVED, k1=1.0, k2=0.0, n_max=0, l_max=0)
    lv = spectra.dii_v2_spectrum(p).levels[0]
    assert not lv.physical and lv.E == pytest.approx(1.0)


def test_dii_v2_one_root_survives():
    # of the two roots of the squared equation only the one solving the unsquared condition is kept
    p = qp(Space.DII, PotentialIndex.V2, SpaceSpec(Space.DII, a=-0.2, b=1.0), omega=1.0, k1=3.0, k2=0.5,
           n_max=2, l_max=2)
    res = spectra.dii_v2_spectrum(p)
    for n in range(3):
        for l in range(3):
            pair = [lv for lv in res.levels if (lv.n, lv.l) == (n, l)]
            assert len(pair) == 2 and sum(lv.physical for lv in pair) == 1
            for lv in pair:
                C = spectra.dii_v2_C(p, n, l)
                r = abs(spectra.sqrt_condition_residual(lv.E, C, 3.0, -0.2, 1.0, 1.0, 1.0, 1.0))
                assert (r <= p.tol * max(1.0, abs(lv.E))) == lv.physical


# ---------------------------------------------------------------- D_II V3

def coulomb(**kw):
    base = dict(alpha=4.0, k1=0.0, k2=0.0)
    base.update(kw)
    return qp(Space.DII, PotentialIndex.V3, CURVED, **base)


def test_dii_v3_ground_state():
    p = coulomb(n_max=0, l_max=0)
    assert spectra.dii_v3_closed_form(p, 1) == pytest.approx(-0.5, abs=1e-15)
    E = spectra.dii_v3_spectrum(p).level(0, 0).E
    assert abs(E + 0.5) <= 1e-10


def test_dii_v3_routes_agree():
    p = qp(Space.DII, PotentialIndex.V3, CURVED, alpha=2.5, k1=0.8, k2=1.9, n_max=3, l_max=3)
    pol = spectra.dii_v3_spectrum(p, Chart.PARABOLIC_POLAR)
    par = spectra.dii_v3_spectrum(p, Chart.PARABOLIC)
    for a, b in zip(pol.levels, par.levels):
        assert abs(a.E - b.E) <= 1e-10 * abs(a.E)
        assert a.residual <= p.tol


def test_dii_v3_monotone_and_asymptote():
    p = coulomb(n_max=19, l_max=0)
    res = spectra.dii_v3_spectrum(p)
    E = np.array([res.level(n, 0).E for n in range(20)])
    assert np.all(E < 0) and np.all(np.diff(E) > 0)
    assert abs(400 * E[-1] / res.info["asymptote_N2E"] - 1) < 0.02
    assert res.info["asymptote_N2E"] == -2.0


def test_dii_v3_flat_coulomb():
    p = qp(Space.DII, PotentialIndex.V3, FLAT, alpha=3.0, k1=0.0, k2=0.0, n_max=4, l_max=0)
    res = spectra.dii_v3_spectrum(p)
    for n in range(5):
        assert res.level(n, 0).E == pytest.approx(-9.0 / (8 * (n + 1) ** 2), rel=1e-12)


def test_dii_v3_requires_attraction():
    with pytest.raises(ConfigError):
        spectra.dii_v3_spectrum(qp(Space.DII, PotentialIndex.V3, CURVED, alpha=0.0))


# ---------------------------------------------------------------- D_II V4

def test_dii_v4_continuum():
    p = qp(Space.DII, PotentialIndex.V4, CURVED, v0=0.4)
    res = spectra.dii_v4_spectrum(p)
    assert res.levels == []
    assert res.continuous.threshold == pytest.approx(0.125)
    assert float(res.continuous.E_of_p(1.0)) == pytest.approx(0.625)


@pytest.mark.parametrize("pp,k", [(1.0, 2.0), (0.5, 3.0), (2.0, 2.5)])
def test_dii_v4_u_factor_ode(pp, k):
    prob = qp(Space.DII, PotentialIndex.V4, CURVED, v0=0.3)
    kap, _ = spectra.dii_v4_kappa(prob, pp, k)
    h = 0.002
    u = np.linspace(0.5, 3.0, 11)
    f = lambda x: spectra.dii_v4_u_factor(prob, pp, k, x)
    d2 = (-f(u - 2 * h) + 16 * f(u - h) - 30 * f(u) + 16 * f(u + h) - f(u + 2 * h)) / (12 * h * h)
    rhs = (kap**2 - (pp**2 + 0.25) / u**2) * f(u)
    assert np.max(np.abs(d2 - rhs)) <= 1e-6


def test_dii_v4_evanescent():
    prob = qp(Space.DII, PotentialIndex.V4, CURVED, v0=0.0)
    with pytest.raises(EvanescentRegime):
        spectra.dii_v4_kappa(prob, 3.0, 0.5)


# ---------------------------------------------------------------- wave functions

def test_wavefunction_flat_v2_norm_2d():
    p = qp(Space.DII, PotentialIndex.V2, FLAT, k1=0.5, k2=1.5, n_max=1, l_max=1)
    lv = spectra.dii_v2_spectrum(p).level(1, 0)
    u = np.linspace(0.0, 9.0, 1201)
    tab = spectra.wavefunction(p, lv, Chart.UV, (u, u))
    norm = integrate.simpson(integrate.simpson(tab.values**2, x=u, axis=1), x=u)
    assert abs(norm - 1) <= 1e-6


def test_wavefunction_singular_oscillator_form():
    # flat 2D singular oscillator: product of radial oscillator factors in u and v
    p = qp(Space.DII, PotentialIndex.V2, FLAT, k1=0.5, k2=1.5, n_max=1, l_max=1)
    lv = spectra.dii_v2_spectrum(p).level(1, 1)
    x = np.array([0.4, 1.1, 2.3])
    tab = spectra.wavefunction(p, lv, Chart.UV, (x, x))
    expect = np.outer(sf.psi_RHO(1, 0.5, x), sf.psi_RHO(1, 1.5, x))
    assert np.allclose(np.abs(tab.values), np.abs(expect), rtol=1e-8)


def _norm_in_uv(p, lv, chart, to_chart):
    st_ = spectra.separated_state(p, lv, chart)
    N = spectra.wavefunction(p, lv, chart, ([1.0], [0.5])).normalization

    def dens(v, u):
        c1, c2 = to_chart(u, v)
        val = N * st_.bare([c1], [c2])[0, 0]
        return val**2 * float(conformal_factor(p.space, u, v))

    return dens


def test_wavefunction_curved_polar_norm_in_uv():
    # normalisation computed in the polar chart, checked by a 2D quadrature over (u, v)
    p = qp(Space.DII, PotentialIndex.V2, SpaceSpec(Space.DII, a=-0.3, b=1.0), omega=1.0, k1=2.5, k2=0.5,
           n_max=0, l_max=0)
    lv = spectra.dii_v2_spectrum(p).physical_levels()[0]
    dens = _norm_in_uv(p, lv, Chart.POLAR, lambda u, v: (math.hypot(u, v), math.atan2(v, u)))
    val, _ = integrate.dblquad(dens, 0.0, 8.0, 0.0, 8.0, epsabs=1e-10, epsrel=1e-9)
    assert abs(val - 1) <= 1e-6


def test_wavefunction_di_v1(di_v1_bounded):
    p, res = di_v1_bounded
    lv = res.level(0, 1)
    u = np.array([DI.u_min, 1.0, 2.0])
    tab = spectra.wavefunction(p, lv, Chart.UV, (u, [0.5, 1.0]))
    assert np.all(np.abs(tab.values[0]) <= 1e-8)
    assert np.any(np.abs(tab.values[1:]) > 1e-3)


def test_wavefunction_di_v1_norm_2d(di_v1_bounded):
    p, res = di_v1_bounded
    lv = res.level(0, 0)
    u = np.linspace(DI.u_min, 10.0, 801)
    v = np.linspace(0.0, 8.0, 801)
    tab = spectra.wavefunction(p, lv, Chart.UV, (u, v))
    norm = integrate.simpson(integrate.simpson(tab.values**2, x=v, axis=1) * 2 * u, x=u)
    assert abs(norm - 1) <= 1e-6


def test_poschl_teller_ground_state_shape():
    x = np.linspace(0.1, 1.4, 7)
    ratio = sf.poschl_teller(0, 1.5, 0.7, x) / (np.sin(x) ** 2.0 * np.cos(x) ** 1.2)
    assert np.allclose(ratio, ratio[0], rtol=1e-13)


def test_wavefunction_errors():
    p = qp(Space.DII, PotentialIndex.V2, CURVED, k1=1.0, k2=0.0, n_max=0, l_max=0)
    lv = spectra.dii_v2_spectrum(p).levels[0]
    with pytest.raises(UnknownLevel):
        spectra.wavefunction(p, lv, Chart.UV, ([1.0], [1.0]))
    p = qp(Space.DII, PotentialIndex.V1, FLAT, n_max=0, l_max=0)
    lv = spectra.dii_v1_spectrum(p).levels[0]
    with pytest.raises(UnsupportedChart):
        spectra.wavefunction(p, lv, Chart.POLAR, ([1.0], [1.0]))


# ---------------------------------------------------------------- results and dispatch

def test_result_round_trip(di_v1_bounded):
    _, res = di_v1_bounded
    again = SpectrumResult.from_json(res.to_json())
    assert again.to_dict() == res.to_dict()
    p = qp(Space.DII, PotentialIndex.V1, CURVED, k1=0.0, k2=1.0, n_max=1, l_max=1)
    res2 = spectra.dii_v1_spectrum(p)
    d = json.loads(json.dumps(res2.to_dict()))
    back = SpectrumResult.from_dict(d)
    assert [(lv.n, lv.l, lv.physical, lv.notes) for lv in back.levels] == \
           [(lv.n, lv.l, lv.physical, lv.notes) for lv in res2.levels]
    assert back.continuous == res2.continuous


def test_levels_sorted_and_lookup():
    p = qp(Space.DII, PotentialIndex.V2, FLAT, n_max=2, l_max=2)
    res = spectra.dii_v2_spectrum(p)
    keys = [(lv.n, lv.l) for lv in res.levels]
    assert keys == sorted(keys)
    with pytest.raises(UnknownLevel):
        res.level(5, 5)


def test_solve_dispatch():
    assert spectra.solve(qp(Space.DII, PotentialIndex.V4, CURVED)).continuous is not None
    assert spectra.solve(qp(Space.DI, PotentialIndex.V3, DI)).levels == []
    r = spectra.solve(qp(Space.DI, PotentialIndex.V2, DI, n_max=0, l_max=0), bounded=False)
    assert len(r.levels) == 2
    with pytest.raises(UnsupportedChart):
        spectra.solve(qp(Space.DII, PotentialIndex.V1, CURVED), Chart.POLAR)
