import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from darboux import oracle
from darboux.errors import ConfigError, DomainViolation, NotSeparableHere, UnsupportedChart
from darboux.geometry import Chart, ChartPoint, Space, SpaceSpec, to_uv
from darboux.potentials import (SEPARABLE, Boundary, PotentialIndex, PotentialSpec, evaluate, evaluate_uv,
                                separability_table, separate, supported_charts)

DI = SpaceSpec(Space.DI, u_min=0.5)
DII = SpaceSpec(Space.DII, a=-0.8, b=1.3)
COUPLINGS = dict(omega=1.2, kappa=0.4, kappa1=-0.3, kappa2=0.7, lam=1.4, k1=0.8, k2=1.6, v0=0.9, alpha=1.7)


def _random_chart_point(chart, rng):
    if chart is Chart.ROTATED_RQ:
        # theta = 0 keeps u = r, and the point clear of the wall
        return ChartPoint(chart, rng.uniform(0.6, 4), rng.uniform(-3, 3), 0.0)
    if chart is Chart.DISPLACED_PARABOLIC:
        return ChartPoint(chart, rng.uniform(1.0, 3), rng.uniform(0.1, 1.0), 1.0)
    if chart is Chart.POLAR:
        return ChartPoint(chart, rng.uniform(0.2, 4), rng.uniform(0.05, 1.5))
    if chart is Chart.PARABOLIC:
        return ChartPoint(chart, rng.uniform(0.2, 3), rng.uniform(0.2, 3))
    if chart is Chart.PARABOLIC_POLAR:
        return ChartPoint(chart, rng.uniform(0.3, 3), rng.uniform(0.05, 1.5))
    if chart is Chart.ELLIPTIC:
        return ChartPoint(chart, rng.uniform(0.1, 2), rng.uniform(0.05, 1.5), 1.2)
    return ChartPoint(chart, rng.uniform(0.6, 4), rng.uniform(0.1, 3))


@pytest.mark.parametrize("key", sorted(SEPARABLE, key=lambda k: (k[0].value, k[1].value)))
def test_chart_consistency(key, rng):
    space, index = key
    spec = PotentialSpec(space, index, **COUPLINGS)
    sp = DI if space is Space.DI else DII
    for chart in supported_charts(spec):
        for _ in range(500):
            p = _random_chart_point(chart, rng)
            u, v = to_uv(sp, p)
            V = evaluate(spec, sp, p)
            ref = evaluate_uv(spec, sp, u, v)
            assert abs(V - ref) <= 1e-10 * (1 + abs(ref)), (chart, p)


def test_examples():
    v3 = PotentialSpec(Space.DI, PotentialIndex.V3, v0=2.0)
    assert evaluate_uv(v3, DI, 1.0, 0.3) == pytest.approx(1.0, rel=1e-15)
    v1 = PotentialSpec(Space.DI, PotentialIndex.V1, omega=0.0, kappa=0.0, lam=0.5)
    assert np.all(evaluate_uv(v1, DI, np.linspace(0.6, 3, 5), np.linspace(0.1, 2, 5)) == 0.0)
    flat = SpaceSpec(Space.DII, a=0.0, b=1.0)
    v2 = PotentialSpec(Space.DII, PotentialIndex.V2, omega=1.0, k1=0.5, k2=0.5)
    assert evaluate_uv(v2, flat, 1.0, 1.0) == pytest.approx(1.0, rel=1e-15)


@given(u=st.floats(0.6, 5), v=st.floats(0.1, 4), v0=st.floats(0, 3))
def test_di_v3_is_special_case(u, v, v0):
    c = 0.5  # hbar^2/2m
    v3 = evaluate_uv(PotentialSpec(Space.DI, PotentialIndex.V3, v0=v0), DI, u, v)
    v1 = evaluate_uv(PotentialSpec(Space.DI, PotentialIndex.V1, omega=0.0, lam=0.5, kappa=c * v0**2), DI, u, v)
    v2 = evaluate_uv(PotentialSpec(Space.DI, PotentialIndex.V2, omega=0.0, kappa2=0.0, kappa1=c * v0**2), DI, u, v)
    assert v3 == pytest.approx(v1, rel=1e-12, abs=1e-300)
    assert v3 == pytest.approx(v2, rel=1e-12, abs=1e-300)


@given(u=st.floats(0.1, 5), v=st.floats(0.1, 4), v0=st.floats(0, 3))
def test_dii_v4_is_special_case(u, v, v0):
    v4 = evaluate_uv(PotentialSpec(Space.DII, PotentialIndex.V4, v0=v0), DII, u, v)
    v4_0 = evaluate_uv(PotentialSpec(Space.DII, PotentialIndex.V4, v0=0.0), DII, u, v)
    v2 = evaluate_uv(PotentialSpec(Space.DII, PotentialIndex.V2, omega=0.0, k1=0.5, k2=0.5), DII, u, v)
    assert v4_0 == pytest.approx(v2, abs=1e-15)
    # the remaining v0 term is the constant hbar^2 v0^2/2m divided by g
    g = (DII.b * u**2 - DII.a) / u**2
    assert v4 - v4_0 == pytest.approx(0.5 * v0**2 / g, rel=1e-12, abs=1e-15)


@given(u=st.floats(0.1, 5), v=st.floats(0.1, 4))
def test_flat_limit_unit_prefactor(u, v):
    flat = SpaceSpec(Space.DII, a=0.0, b=1.0)
    spec = PotentialSpec(Space.DII, PotentialIndex.V1, **COUPLINGS)
    w, k1, k2 = spec.omega, spec.k1, spec.k2
    expected = 0.5 * w**2 * (u**2 + 4 * v**2) + k1 * v + 0.5 * (k2**2 - 0.25) / u**2
    assert evaluate_uv(spec, flat, u, v) == pytest.approx(expected, rel=1e-13)


def test_spec_validation():
    with pytest.raises(ConfigError):
        PotentialSpec(Space.DI, PotentialIndex.V4)
    with pytest.raises(ConfigError):
        PotentialSpec(Space.DI, PotentialIndex.V1, lam=-1.0)
    with pytest.raises(ConfigError):
        PotentialSpec(Space.DII, PotentialIndex.V2, k1=-0.5)


def test_domain_errors():
    with pytest.raises(DomainViolation):
        evaluate_uv(PotentialSpec(Space.DI, PotentialIndex.V1), DI, 1.0, 0.0)
    with pytest.raises(UnsupportedChart):
        evaluate(PotentialSpec(Space.DII, PotentialIndex.V1), DII, ChartPoint(Chart.POLAR, 1.0, 0.2))
    with pytest.raises(ConfigError):
        evaluate_uv(PotentialSpec(Space.DII, PotentialIndex.V1), DI, 1.0, 0.3)


def test_not_separable_payloads():
    with pytest.raises(NotSeparableHere, match="anharmonic"):
        separate(PotentialSpec(Space.DII, PotentialIndex.V1), DII, Chart.PARABOLIC)
    with pytest.raises(NotSeparableHere):
        separate(PotentialSpec(Space.DI, PotentialIndex.V1), DI, Chart.DISPLACED_PARABOLIC)
    with pytest.raises(NotSeparableHere):
        separate(PotentialSpec(Space.DII, PotentialIndex.V2), DII, Chart.ELLIPTIC)


def test_di_v1_separation_structure():
    spec = PotentialSpec(Space.DI, PotentialIndex.V1, omega=1.0, lam=0.5)
    pv, pu, rule = separate(spec, DI, Chart.UV)
    assert pv.boundary is Boundary.RADIAL_REGULAR and pv.index() == 0.5
    assert pu.boundary is Boundary.HALF_LINE_DIRICHLET and pu.domain[0] == DI.u_min
    # shifted oscillator of frequency 2 omega centred at E/(m omega^2)
    E = 3.0
    x = np.linspace(0.6, 4, 50)
    W = pu.potential(x, E)
    centre = E / 2.0
    assert np.allclose(W - W.min(), 2.0 * (x - centre) ** 2 - (2.0 * (x - centre) ** 2).min(), atol=1e-12)
    assert rule.residual(E, 1.0, -1.0) == 0.0


def test_dii_v4_separation_structure():
    spec = PotentialSpec(Space.DII, PotentialIndex.V4, v0=0.7)
    pv, pu, rule = separate(spec, DII, Chart.UV)
    assert pv.boundary is Boundary.WHOLE_LINE
    E = 0.3
    assert pu.index(E) == pytest.approx(0.25 + 2 * DII.a * E)
    assert rule.residual is None


@pytest.mark.parametrize("key,expected", [
    ((Space.DI, PotentialIndex.V1), lambda n, w: w * (2 * n + 1.4 + 1)),
    ((Space.DII, PotentialIndex.V2), lambda n, w: w * (2 * n + 1.6 + 1)),
    # shifted oscillator of frequency 2 omega
    ((Space.DII, PotentialIndex.V1), lambda n, w: w * (2 * n + 1) - 0.8**2 / (8 * w**2)),
])
def test_separated_closed_forms(key, expected):
    # the first separated problem has an E independent closed form spectrum
    space, index = key
    spec = PotentialSpec(space, index, **COUPLINGS)
    sp = DI if space is Space.DI else DII
    p1, _, _ = separate(spec, sp, Chart.UV)
    eig = oracle.fd_eigen(oracle.from_separated(p1, 0.0), 3).eigenvalues
    for n in range(3):
        assert eig[n] == pytest.approx(expected(n, spec.omega), rel=1e-7)


def test_separability_table_rows():
    rows = separability_table(Space.DI)
    assert ("V1", "displaced-parabolic", "no explicit solution") in [r[:3] for r in rows]
    assert all(r[2] in ("explicit solution", "no explicit solution") for r in rows)
    rows2 = separability_table(Space.DII)
    assert ("V2", "polar", "explicit solution") in [r[:3] for r in rows2]
