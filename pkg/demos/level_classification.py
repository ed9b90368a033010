"""Physical, spurious and semi-bound levels of the D_II V1 oscillator.

The quantization condition contains sqrt(k2^2 + 2maE/hbar^2); squaring it
gives a quadratic in E. A negative discriminant means the level is
semi-bound. A non negative one is not enough: both roots can violate the
unsquared condition. The script lists every (n, l) with its candidates
and the two bounds.

Run with ``python3 demos/level_classification.py``.
"""
from darboux import spectra
from darboux.geometry import Space, SpaceSpec
from darboux.potentials import PotentialIndex, PotentialSpec

space = SpaceSpec(Space.DII, a=-1.0, b=1.0)
prob = spectra.QuantizationProblem(PotentialSpec(Space.DII, PotentialIndex.V1, omega=1.5, k1=3.0, k2=2.0),
                                   space, n_max=1, l_max=1)
res = spectra.dii_v1_spectrum(prob)
print(res.info["level_bound"])
print(res.info["physical_bound"])
print()
for lv in res.levels:
    tag = "physical" if lv.physical else "rejected"
    print(f"(n={lv.n}, l={lv.l})  E={lv.E:+.6f}  {tag:8s}  {lv.notes}")
