"""Effect of the wall u = u_min on the D_I oscillator spectrum.

Without the wall the D_I V1 levels are degenerate in n + l. With the wall
the u factor must vanish at u_min, the levels become roots of a parabolic
cylinder function, the degeneracy is lifted and every level moves up. For
large l the oscillator centre moves away from the wall, but so does the
turning point, so the shift decays only slowly.

Run with ``python3 demos/wall_effect.py``.
"""
import math

from darboux import spectra
from darboux.geometry import Space, SpaceSpec
from darboux.potentials import PotentialIndex, PotentialSpec

space = SpaceSpec(Space.DI, u_min=0.5)
prob = spectra.QuantizationProblem(PotentialSpec(Space.DI, PotentialIndex.V1, lam=0.5), space,
                                   n_max=1, l_max=20, e_search=(0.0, 12.0, 3000))
res = spectra.di_v1_spectrum_bounded(prob)

print(" l   E(n=0)        E(n=1)        shift(n=0)  shift(n=1)")
for l in (0, 1, 2, 3, 4, 10, 20):
    e = [res.level(n, l).E for n in (0, 1)]
    free = [math.sqrt(spectra.di_v1_unbounded_E2(prob, n, l)) for n in (0, 1)]
    print(f"{l:2d}  {e[0]:.10f}  {e[1]:.10f}  {e[0] - free[0]:.5f}     {e[1] - free[1]:.5f}")

# wall-free (n, l) = (1, 0) and (0, 1) coincide; with the wall they split
print("\nsplitting of the wall-free pair (1,0)/(0,1):", res.level(0, 1).E - res.level(1, 0).E)
