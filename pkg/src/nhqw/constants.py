"""Numerical tolerances and experiment defaults shared across the package."""

#: Algebraic identities (norm preservation, operator equivalences).
ALGEBRAIC_TOL = 1e-12

#: Iterative solvers (eigen-residuals, spectral comparisons).
SOLVER_TOL = 1e-8

#: Normalization check for density-matrix inputs.
NORM_TOL = 1e-10

#: Amplitudes below this magnitude are reported as a -inf growth rate.
ZERO_AMPLITUDE = 1e-300

#: PSD slack tolerated (and clamped) when reconstructing the coin density matrix.
RECONSTRUCTION_PSD_TOL = 1e-9

#: Minimum distance between a reference energy and the PBC curve for winding.
WINDING_MIN_DISTANCE = 1e-6

#: Per-round-trip survival probability of the fiber loop.
DEFAULT_SURVIVAL = 0.61

#: Overall photon detection efficiency (APD x fiber coupler).
DEFAULT_DETECTION_EFFICIENCY = 0.498

#: Default fraction of sites counted as "edge" by edge_mass.
DEFAULT_EDGE_FRACTION = 0.1

#: Iteration cap per eigenvalue for the shifted QR iteration.
QR_MAX_ITER_PER_EIGENVALUE = 60
