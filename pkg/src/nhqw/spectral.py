"""Quasienergy spectra of ``H_eff = i ln U`` and skin-effect diagnostics.

Periodic spectra come from the 2x2 Bloch blocks ``U_k``; open-chain spectra
from the dense ``2N x 2N`` walk matrix. Basis ordering of dense matrices is
site-major, polarization-minor: index ``2*x + p`` with ``p = 0`` for H and
``p = 1`` for V.

Bloch convention: amplitudes ``psi_x = exp(i k x) u`` evolve as ``u -> U_k u``
with ``U_k = diag(exp(-ik), exp(ik)) L(gamma) C(theta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from nhqw.constants import DEFAULT_EDGE_FRACTION, WINDING_MIN_DISTANCE
from nhqw.core import BoundaryKind, WalkParams, coin_matrix, loss_matrix
from nhqw.errors import BandTrackingError, NumericalError, ValidationError
from nhqw.linalg import eig_dense

__all__ = [
    "BlochMatrix",
    "QuasiEnergy",
    "SpectrumResult",
    "quasienergy",
    "bloch_matrix",
    "pbc_spectrum",
    "dense_walk_matrix",
    "obc_spectrum",
    "spectral_loop_area",
    "point_gap_winding",
    "curve_distance",
    "edge_mass",
    "dominant_edge",
]

#: min/max cost ratio above which nearest-neighbour band matching is ambiguous
_TRACKING_AMBIGUITY = 0.5

MAX_OBC_SITES = 500


def quasienergy(lam):
    """``E = i ln(lam)`` on the principal branch, ``Re E`` in ``(-pi, pi]``."""
    lam = np.asarray(lam, dtype=complex)
    re = -np.angle(lam)
    re = np.where(re <= -math.pi, re + 2 * math.pi, re)
    return re + 1j * np.log(np.abs(lam))


@dataclass(frozen=True, eq=False)
class BlochMatrix:
    k: float
    matrix: np.ndarray

    @property
    def eigenvalues(self):
        return _eig2(self.matrix[np.newaxis])[0]


class QuasiEnergy(NamedTuple):
    E: complex
    source: str  # "PBC" or "OBC"
    k: float | None
    index: int


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Quasienergies for one boundary condition.

    For PBC, ``energies`` and ``eigenvalues`` have shape ``(2, K)``: band-tracked
    curves over the k-grid ``k``. ``closure[j]`` is the band that band ``j``
    continues into across the zone boundary; ``flagged`` lists k-indices where
    matching was ambiguous (index 0 stands for the wrap-around).

    For OBC they have shape ``(2N,)`` and ``profiles`` (if requested) has shape
    ``(2N, N)``, each row a normalized ``|psi(x)|^2``.
    """

    boundary: str
    params: WalkParams
    energies: np.ndarray
    eigenvalues: np.ndarray
    k: np.ndarray | None = None
    profiles: np.ndarray | None = None
    flagged: tuple = ()
    closure: tuple = ()

    @property
    def tracked(self):
        return self.boundary == "PBC" and not self.flagged

    def flat_energies(self):
        return self.energies.ravel()

    def quasienergies(self):
        if self.boundary == "PBC":
            return [
                QuasiEnergy(complex(self.energies[j, m]), "PBC", float(self.k[m]), j)
                for j in range(self.energies.shape[0])
                for m in range(self.energies.shape[1])
            ]
        return [QuasiEnergy(complex(e), "OBC", None, i) for i, e in enumerate(self.energies)]

    def curves(self):
        """Closed PBC curves in the eigenvalue plane, following ``closure``."""
        if self.boundary != "PBC":
            raise ValidationError("curves are defined for PBC spectra only")
        seen = set()
        out = []
        for start in range(len(self.closure)):
            if start in seen:
                continue
            parts = []
            j = start
            while j not in seen:
                seen.add(j)
                parts.append(self.eigenvalues[j])
                j = self.closure[j]
            out.append(np.concatenate(parts))
        return out


def _eig2(U):
    """Eigenvalues of a stack of 2x2 matrices, shape (..., 2)."""
    tr = U[..., 0, 0] + U[..., 1, 1]
    det = U[..., 0, 0] * U[..., 1, 1] - U[..., 0, 1] * U[..., 1, 0]
    half = 0.5 * tr
    disc = np.sqrt(half * half - det + 0j)
    big = np.where(np.abs(half + disc) >= np.abs(half - disc), half + disc, half - disc)
    # det / big is the accurate smaller root; guard det == 0
    safe = np.where(big == 0, 1.0, big)
    small = np.where(big == 0, 0.0, det / safe)
    return np.stack([big, small], axis=-1)


def _bloch_stack(ks, theta, gamma):
    lc = loss_matrix(gamma) @ coin_matrix(theta)
    ks = np.asarray(ks, dtype=float)
    U = np.empty(ks.shape + (2, 2), dtype=complex)
    U[..., 0, :] = np.exp(-1j * ks)[..., None] * lc[0]
    U[..., 1, :] = np.exp(1j * ks)[..., None] * lc[1]
    return U


def bloch_matrix(k, theta, gamma):
    """``U_k = D(k) L(gamma) C(theta)`` with ``D(k) = diag(exp(-ik), exp(ik))``."""
    if not math.isfinite(k):
        raise ValidationError(f"k must be finite, got {k!r}")
    return BlochMatrix(float(k), _bloch_stack(np.array(k), theta, gamma))


def _match(prev, cur):
    """Order ``cur`` to continue ``prev``; returns (ordered, ambiguous)."""
    keep = abs(cur[0] - prev[0]) + abs(cur[1] - prev[1])
    swap = abs(cur[1] - prev[0]) + abs(cur[0] - prev[1])
    lo, hi = min(keep, swap), max(keep, swap)
    ambiguous = hi > 0 and lo / hi > _TRACKING_AMBIGUITY
    return (cur if keep <= swap else cur[::-1]), ambiguous


def pbc_spectrum(params, k_samples=1024):
    """Band-tracked quasienergies on the uniform grid ``k = -pi + 2 pi m / K``.

    Bands are continued by nearest-eigenvalue matching between neighbouring
    k-points. Ambiguous matches are recorded in ``flagged`` rather than
    resolved heuristically.
    """
    if int(k_samples) != k_samples or k_samples < 16:
        raise ValidationError(f"k_samples must be an integer >= 16, got {k_samples!r}")
    K = int(k_samples)
    ks = -math.pi + 2 * math.pi * np.arange(K) / K
    raw = _eig2(_bloch_stack(ks, params.theta, params.gamma))
    lam = np.empty_like(raw)
    lam[0] = raw[0]
    flagged = []
    for m in range(1, K):
        lam[m], amb = _match(lam[m - 1], raw[m])
        if amb:
            flagged.append(m)
    wrapped, amb = _match(lam[-1], lam[0])
    if amb:
        flagged.insert(0, 0)
    # band j at the end continues into the start band whose value it matched
    closure = (0, 1) if wrapped[0] == lam[0, 0] and wrapped[1] == lam[0, 1] else (1, 0)
    if lam[0, 0] == lam[0, 1]:
        closure = (0, 1)
    bands = lam.T.copy()
    return SpectrumResult(
        "PBC", params, quasienergy(bands), bands, k=ks, flagged=tuple(flagged), closure=closure
    )


def dense_walk_matrix(params):
    """Explicit one-step matrix on a finite lattice.

    Periodic rings wrap the shift. Open chains reflect at the edges: the H
    component leaving site ``N-1`` returns as V on ``N-1`` and the V component
    leaving site 0 returns as H on 0, which keeps the lossless matrix unitary.
    """
    boundary = params.boundary
    if not boundary.finite:
        raise ValidationError("dense walk matrix needs an open or periodic lattice")
    N = boundary.sites
    lc = loss_matrix(params.gamma) @ coin_matrix(params.theta)
    U = np.zeros((2 * N, 2 * N), dtype=complex)
    x = np.arange(N)
    right = x + 1
    left = x - 1
    h_row = 2 * right
    v_row = 2 * left + 1
    if boundary.kind is BoundaryKind.PERIODIC:
        h_row[-1] = 0
        v_row[0] = 2 * (N - 1) + 1
    else:
        h_row[-1] = 2 * (N - 1) + 1
        v_row[0] = 0
    for p in (0, 1):
        cols = 2 * x + p
        U[h_row, cols] += lc[0, p]
        U[v_row, cols] += lc[1, p]
    return U


def obc_spectrum(params, with_states=False):
    """Quasienergies of the open chain, sorted by (Re E, Im E).

    With ``with_states`` the spatial profile ``|a_x|^2 + |b_x|^2`` of each right
    eigenvector is returned, normalized to unit sum.
    """
    boundary = params.boundary
    if boundary.kind is not BoundaryKind.OPEN:
        raise ValidationError("obc_spectrum needs an open boundary")
    if boundary.sites > MAX_OBC_SITES:
        raise ValidationError(f"at most {MAX_OBC_SITES} sites supported, got {boundary.sites}")
    M = dense_walk_matrix(params)
    w, V = eig_dense(M, vectors=with_states)
    E = quasienergy(w)
    order = np.lexsort((E.imag, E.real))
    profiles = None
    if with_states:
        V = V[:, order]
        prof = np.abs(V[0::2]) ** 2 + np.abs(V[1::2]) ** 2
        profiles = (prof / prof.sum(axis=0)).T
    return SpectrumResult("OBC", params, E[order], w[order], profiles=profiles)


def _unwrapped(lam):
    """Continuous ``E`` along a closed eigenvalue curve (Re not folded)."""
    return np.unwrap(-np.angle(lam)) + 1j * np.log(np.abs(lam))


def spectral_loop_area(pbc):
    """Enclosed area of each closed PBC curve in the complex-E plane.

    Uses ``|oint Re E d(Im E)|``, which equals the shoelace area for ordinary
    loops and stays well defined for curves that wrap the quasienergy zone.

    Raises
    ------
    BandTrackingError
        If band continuation was ambiguous anywhere on the grid.
    """
    if pbc.boundary != "PBC":
        raise ValidationError("loop area needs a PBC spectrum")
    if pbc.flagged:
        raise BandTrackingError(f"ambiguous band tracking at k-indices {list(pbc.flagged)}")
    areas = []
    for lam in pbc.curves():
        E = _unwrapped(np.append(lam, lam[0]))
        x, y = E.real, E.imag
        areas.append(abs(float(np.sum(0.5 * (x[1:] + x[:-1]) * np.diff(y)))))
    return areas


def curve_distance(pbc, E0):
    """Smallest distance in the E plane from ``E0`` to the PBC polylines."""
    E0 = complex(E0)
    best = math.inf
    for lam in pbc.curves():
        E = _unwrapped(np.append(lam, lam[0]))
        a, b = E[:-1], E[1:]
        d = b - a
        dd = np.abs(d) ** 2
        shifts = 2 * math.pi * np.arange(-3, 4)
        for z in E0 + shifts:
            t = np.clip(np.real((z - a) * np.conj(d)) / np.where(dd == 0, 1, dd), 0, 1)
            best = min(best, float(np.min(np.abs(a + t * d - z))))
    return best


def point_gap_winding(pbc, E0, min_distance=WINDING_MIN_DISTANCE):
    """Total winding number of the PBC curves around the reference energy ``E0``.

    Computed as summed argument increments of ``lam(k) - exp(-i E0)`` around
    each closed curve; the exponential map is conformal, so this equals the
    winding in the E plane while avoiding the branch cut of the logarithm.
    """
    if pbc.boundary != "PBC":
        raise ValidationError("winding needs a PBC spectrum")
    dist = curve_distance(pbc, E0)
    if dist <= min_distance:
        raise NumericalError(f"E0={E0} lies {dist:.2e} from the PBC curve; winding undefined")
    lam0 = np.exp(-1j * complex(E0))
    total = 0.0
    for lam in pbc.curves():
        z = lam - lam0
        total += float(np.sum(np.angle(np.roll(z, -1) / z)))
    return int(round(total / (2 * math.pi)))


def _edge_sites(N, fraction):
    if not 0 < fraction <= 0.5:
        raise ValidationError(f"edge fraction must lie in (0, 0.5], got {fraction!r}")
    return max(1, math.ceil(fraction * N - 1e-9))


def edge_mass(profile, fraction=DEFAULT_EDGE_FRACTION):
    """Probability within the ``ceil(fraction * N)`` sites at the heavier edge."""
    p = np.asarray(profile, dtype=float)
    n = _edge_sites(len(p), fraction)
    total = p.sum()
    return float(max(p[:n].sum(), p[-n:].sum()) / total)


def dominant_edge(profile, fraction=DEFAULT_EDGE_FRACTION):
    """``"left"`` or ``"right"``, whichever edge carries more mass."""
    p = np.asarray(profile, dtype=float)
    n = _edge_sites(len(p), fraction)
    return "right" if p[-n:].sum() > p[:n].sum() else "left"
