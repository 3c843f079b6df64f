"""Photon-counting simulation of the time-multiplexed walk experiment and
reconstruction of the coin density matrix from sigma_z / sigma_x counts.

Each launched photon either survives ``t`` round trips and is detected, giving
one event at a sampled ``(x, outcome)``, or is lost. Losses are outcome
independent, so they only thin the counts.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from nhqw.constants import (
    DEFAULT_DETECTION_EFFICIENCY,
    DEFAULT_SURVIVAL,
    NORM_TOL,
    RECONSTRUCTION_PSD_TOL,
)
from nhqw.core import Distribution
from nhqw.errors import NumericalDomainError, UnsupportedReconstruction, ValidationError
from nhqw.observables import ReducedDensityMatrix, entropy

__all__ = [
    "DetectionConfig",
    "CountsRecord",
    "BootstrapResult",
    "exact_distribution",
    "simulate_counts",
    "normalize_counts",
    "reconstruct_rho",
    "reconstruct_from_distributions",
    "bootstrap_error",
]

BASES = ("Z", "X")
_STREAM = {"Z": 0, "X": 1}


@dataclass(frozen=True)
class DetectionConfig:
    """Loss and sampling settings for one virtual measurement run."""

    per_step_survival: float = DEFAULT_SURVIVAL
    detection_efficiency: float = DEFAULT_DETECTION_EFFICIENCY
    shots: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        for name in ("per_step_survival", "detection_efficiency"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")
        if int(self.shots) != self.shots or self.shots < 1:
            raise ValidationError(f"shots must be a positive integer, got {self.shots!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError(f"seed must be a non-negative integer, got {self.seed!r}")

    def detection_probability(self, t):
        return self.per_step_survival**t * self.detection_efficiency

    @classmethod
    def for_expected_detections(cls, detections, t, **kwargs):
        """Config whose launched-photon count yields ``detections`` on average."""
        base = cls(**kwargs)
        p = base.detection_probability(t)
        if p <= 0:
            raise ValidationError("detection probability is zero")
        shots = max(1, math.ceil(detections / p))
        return cls(base.per_step_survival, base.detection_efficiency, shots, base.seed)


@dataclass(frozen=True, eq=False)
class CountsRecord:
    """Detector tallies per position: ``(N_H, N_V)`` for Z, ``(N_+, N_-)`` for X."""

    basis: str
    positions: np.ndarray
    counts: np.ndarray
    t: int

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValidationError(f"basis must be one of {BASES}, got {self.basis!r}")
        counts = np.asarray(self.counts, dtype=np.int64)
        pos = np.asarray(self.positions, dtype=np.int64)
        if counts.shape != (len(pos), 2):
            raise ValidationError(f"counts must have shape ({len(pos)}, 2), got {counts.shape}")
        if np.any(counts < 0):
            raise ValidationError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "positions", pos)

    @property
    def total_detected(self):
        return int(self.counts.sum())

    def __eq__(self, other):
        if not isinstance(other, CountsRecord):
            return NotImplemented
        return (
            self.basis == other.basis
            and self.t == other.t
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.counts, other.counts)
        )


@dataclass(frozen=True)
class BootstrapResult:
    stderr: float
    mean: float
    resamples: int
    degenerate: bool = False
    component_stderr: tuple = (0.0, 0.0, 0.0)  # alpha, beta, Re chi


def exact_distribution(state, basis="Z"):
    """Noise-free outcome probabilities of a projective measurement."""
    a, b = state.a, state.b
    if basis == "Z":
        return Distribution(state.positions, np.abs(a) ** 2, np.abs(b) ** 2, "Z")
    if basis == "X":
        return Distribution(
            state.positions, np.abs(a + b) ** 2 / 2, np.abs(a - b) ** 2 / 2, "X"
        )
    raise ValidationError(f"basis must be one of {BASES}, got {basis!r}")


def simulate_counts(state, cfg, basis):
    """Sample detector counts for ``cfg.shots`` launched photons.

    The RNG stream is derived from ``(cfg.seed, basis)`` so Z and X runs with
    the same config are independent yet reproducible.
    """
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise ValidationError("counts simulation needs a normalized state")
    dist = exact_distribution(state, basis)
    probs = np.column_stack([dist.p_h, dist.p_v]).ravel()
    probs = probs / max(1.0, probs.sum()) * cfg.detection_probability(state.t)  # rounding guard
    lost = max(0.0, 1.0 - probs.sum())
    rng = np.random.default_rng((cfg.seed, _STREAM[basis]))
    draw = rng.multinomial(cfg.shots, np.append(probs, lost))
    return CountsRecord(basis, dist.positions, draw[:-1].reshape(-1, 2), state.t)


def normalize_counts(rec):
    """Empirical outcome probabilities (counts over the total detected)."""
    total = rec.total_detected
    if total == 0:
        raise ValidationError(f"no detections in the {rec.basis} record")
    p = rec.counts / total
    return Distribution(rec.positions, p[:, 0], p[:, 1], rec.basis)


def _aligned(pz, px):
    support = np.union1d(pz.positions, px.positions)
    out = []
    for d in (pz, px):
        cols = np.zeros((len(support), 2))
        idx = np.searchsorted(support, d.positions)
        cols[idx, 0] = d.p_h
        cols[idx, 1] = d.p_v
        out.append(cols)
    return out


def reconstruct_from_distributions(pz, px):
    """Coin density matrix from sigma_z and sigma_x outcome distributions.

    ``alpha = sum P_H``, ``beta = sum P_V`` and
    ``chi = sum sign(P_+ - P_-) sqrt(P_H P_V)``; exact ties give zero sign.
    Cauchy-Schwarz keeps ``chi^2 <= alpha beta`` up to rounding, which is
    clamped away.
    """
    z, x = _aligned(pz, px)
    for name, arr in (("sigma_z", z), ("sigma_x", x)):
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValidationError(f"{name} probabilities must be finite and non-negative")
        if abs(arr.sum() - 1.0) > NORM_TOL:
            raise ValidationError(f"{name} probabilities sum to {arr.sum()!r}, not 1")
    ph, pv = z[:, 0], z[:, 1]
    sign = np.sign(x[:, 0] - x[:, 1])
    alpha, beta = float(ph.sum()), float(pv.sum())
    chi = float(np.sum(sign * np.sqrt(ph * pv)))
    det = alpha * beta - chi * chi
    if det < 0:
        if det < -RECONSTRUCTION_PSD_TOL:
            raise NumericalDomainError(f"reconstructed matrix is not PSD (det {det:.3e})")
        chi = math.copysign(math.sqrt(alpha * beta), chi)
        while alpha * beta - chi * chi < 0:  # sqrt can round up by an ulp
            chi = math.nextafter(chi, 0.0)
    return ReducedDensityMatrix(alpha, beta, complex(chi))


def reconstruct_rho(z, x, complex_amplitudes=False):
    """Reconstruct the coin density matrix from Z and X counts.

    Only valid for real walk amplitudes (|0,H> or |0,V> launches with the
    real coin); pass ``complex_amplitudes=True`` to have that refused.
    """
    if complex_amplitudes:
        raise UnsupportedReconstruction(
            "sigma_z and sigma_x counts cannot determine Im(chi) for complex amplitudes"
        )
    if z.basis != "Z" or x.basis != "X":
        raise ValidationError("expected a Z record and an X record")
    if z.t != x.t:
        raise ValidationError(f"records are from different steps ({z.t} vs {x.t})")
    return reconstruct_from_distributions(normalize_counts(z), normalize_counts(x))


def bootstrap_error(z, x, resamples=200, seed=0):
    """Standard error of the reconstructed entropy by multinomial resampling.

    If the Z record has a single occupied bin the entropy cannot fluctuate;
    a zero error is returned with ``degenerate=True`` and a warning.
    """
    if resamples < 100:
        raise ValidationError(f"need at least 100 resamples, got {resamples}")
    pz, px = normalize_counts(z), normalize_counts(x)
    if np.count_nonzero(z.counts) <= 1:
        warnings.warn("degenerate Z counts (single bin); bootstrap error is zero", stacklevel=2)
        s = entropy(reconstruct_from_distributions(pz, px))
        return BootstrapResult(0.0, s, resamples, degenerate=True)
    rng = np.random.default_rng(seed)
    fz = np.column_stack([pz.p_h, pz.p_v]).ravel()
    fx = np.column_stack([px.p_h, px.p_v]).ravel()
    nz, nx = z.total_detected, x.total_detected
    values = np.empty((resamples, 4))
    for i in range(resamples):
        cz = rng.multinomial(nz, fz).reshape(-1, 2) / nz
        cx = rng.multinomial(nx, fx).reshape(-1, 2) / nx
        rho = reconstruct_from_distributions(
            Distribution(z.positions, cz[:, 0], cz[:, 1], "Z"),
            Distribution(x.positions, cx[:, 0], cx[:, 1], "X"),
        )
        values[i] = (entropy(rho), rho.alpha, rho.beta, rho.chi.real)
    sd = values.std(axis=0, ddof=1)
    return BootstrapResult(
        float(sd[0]), float(values[:, 0].mean()), resamples, False, tuple(float(v) for v in sd[1:])
    )
