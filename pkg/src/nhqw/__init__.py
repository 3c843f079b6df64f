"""Simulation toolkit for the lossy one-dimensional coined quantum walk.

Modules
-------
core
    Walk parameters, initial states and state-vector evolution.
spectral
    Bloch and finite-lattice quasienergy spectra, loop area, point-gap
    winding and edge localization of eigenstates.
observables
    Coin entanglement entropy, IPR, growth-rate profiles and fidelity.
virtual_lab
    Photon-counting simulation and density-matrix reconstruction.
cli
    Batch front-end that turns scenario files into CSV datasets.

Notes
-----
The step and eigensolver kernels come from a compiled extension when it was
built, otherwise from a NumPy fallback; see :func:`backend_name`.
"""
from nhqw._backend import available_backends, backend_name, set_backend, use_backend
from nhqw.core import (
    Boundary,
    BoundaryKind,
    Distribution,
    InitialState,
    WalkParams,
    WalkState,
    evolve,
    iter_evolve,
    probability_distribution,
    step,
)
from nhqw.errors import (
    BandTrackingError,
    BoundaryError,
    ConfigError,
    ConvergenceError,
    NHQWError,
    NumericalDomainError,
    NumericalError,
    UnsupportedReconstruction,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "available_backends",
    "backend_name",
    "set_backend",
    "use_backend",
    "Boundary",
    "BoundaryKind",
    "Distribution",
    "InitialState",
    "WalkParams",
    "WalkState",
    "evolve",
    "iter_evolve",
    "probability_distribution",
    "step",
    "BandTrackingError",
    "BoundaryError",
    "ConfigError",
    "ConvergenceError",
    "NHQWError",
    "NumericalDomainError",
    "NumericalError",
    "UnsupportedReconstruction",
    "ValidationError",
]
