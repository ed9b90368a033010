"""Coulomb levels on a Darboux space of type II.

On the curved space (a = -1, b = 1) the Coulomb problem has a finite
ground state and an infinite tower of levels accumulating at E = 0 from
below, with N^2 E_N approaching the flat-space constant. The script prints
the closed form, the numeric root of the quantization condition and the
finite difference oracle for the lowest levels, then the approach of
N^2 E_N to its limit.

Run with ``python3 demos/coulomb_levels.py``.
"""
from darboux import oracle, spectra
from darboux.geometry import Chart, Space, SpaceSpec
from darboux.potentials import PotentialIndex, PotentialSpec

space = SpaceSpec(Space.DII, a=-1.0, b=1.0)
spec = PotentialSpec(Space.DII, PotentialIndex.V3, alpha=4.0, k1=0.0, k2=0.0)
prob = spectra.QuantizationProblem(spec, space, n_max=39, l_max=0)
res = spectra.dii_v3_spectrum(prob)

print(" N   closed form        numeric root       FD oracle")
for N in range(1, 4):
    E = res.level(N - 1, 0).E
    # bracket the level generously; the oracle scans its own grid inside
    E_fd = oracle.separated_levels(spec, space, Chart.PARABOLIC, (N - 1, 0), (1.13 * E, 0.91 * E),
                                   grid_points=6)[0]
    print(f"{N:2d}  {spectra.dii_v3_closed_form(prob, N):.12f}  {E:.12f}  {E_fd:.9f}")

print("\n N   N^2 E_N     (limit", res.info["asymptote_N2E"], ")")
for N in (1, 2, 5, 10, 20, 40):
    print(f"{N:2d}  {N * N * res.level(N - 1, 0).E:.6f}")
