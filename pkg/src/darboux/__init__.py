"""Quantum superintegrable systems on the Darboux spaces D_I and D_II.

Modules
-------
geometry           metrics, charts and Gaussian curvature
special_functions  parabolic cylinder, Whittaker, Bessel and orthogonal polynomials
potentials         the potentials V1..V4, separability and separated problems
spectra            quantization conditions, spectra and wave functions
algebra_check      Poisson and commutator algebras, constants of motion
oracle             finite difference Sturm-Liouville eigensolver
cli                command line front end
"""
from .errors import ConfigError, DarbouxError, DomainError
from .geometry import Chart, ChartPoint, Space, SpaceSpec, gaussian_curvature
from .potentials import PotentialIndex, PotentialSpec
from .spectra import Level, QuantizationProblem, SpectrumResult, solve

__version__ = "0.1.0"

__all__ = ["ConfigError", "DarbouxError", "DomainError", "Chart", "ChartPoint", "Space", "SpaceSpec",
           "gaussian_curvature", "PotentialIndex", "PotentialSpec", "Level", "QuantizationProblem",
           "SpectrumResult", "solve", "__version__"]
