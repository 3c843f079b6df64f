"""Observables of walk states: coin entanglement, IPR, growth rates, fidelity."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from nhqw.constants import ALGEBRAIC_TOL, NORM_TOL, ZERO_AMPLITUDE
from nhqw.core import (
    Distribution,
    InitialState,
    WalkState,
    evolve,
    probability_distribution,
)
from nhqw.errors import NumericalDomainError, ValidationError

__all__ = [
    "ReducedDensityMatrix",
    "GrowthRateProfile",
    "reduced_density",
    "coin_eigenvalues",
    "entropy",
    "ipr",
    "growth_rates",
    "lyapunov_profile",
    "lyapunov_exponent",
    "polarization_averaged_growth",
    "fidelity",
]


@dataclass(frozen=True)
class ReducedDensityMatrix:
    """Coin state ``[[alpha, chi], [conj(chi), beta]]`` after tracing out position."""

    alpha: float
    beta: float
    chi: complex

    @property
    def matrix(self):
        return np.array(
            [[self.alpha, self.chi], [np.conj(self.chi), self.beta]], dtype=complex
        )

    @property
    def determinant(self):
        return self.alpha * self.beta - abs(self.chi) ** 2


def reduced_density(state):
    """Partial trace over position of a normalized walk state."""
    a, b = state.a, state.b
    alpha = float(np.vdot(a, a).real)
    beta = float(np.vdot(b, b).real)
    if abs(alpha + beta - 1.0) > NORM_TOL:
        raise ValidationError(
            f"reduced density needs a normalized state, got norm^2 = {alpha + beta!r}"
        )
    chi = complex(np.sum(a * np.conj(b)))
    return ReducedDensityMatrix(alpha, beta, chi)


def coin_eigenvalues(rho):
    """``(1 +- sqrt(1 - 4 (alpha beta - |chi|^2))) / 2``, larger first.

    The discriminant is evaluated as ``(alpha - beta)^2 + 4 |chi|^2``, equal to
    ``1 - 4 det`` at unit trace but free of the cancellation that costs eight
    digits near the maximally mixed state.

    Values within ``1e-12`` outside ``[0, 1]`` are clamped; anything further
    out raises ``NumericalDomainError``.
    """
    r = math.hypot(rho.alpha - rho.beta, 2.0 * abs(rho.chi))
    tr = rho.alpha + rho.beta
    lam = ((tr + r) / 2.0, (tr - r) / 2.0)
    for v in lam:
        if v < -ALGEBRAIC_TOL or v > 1.0 + ALGEBRAIC_TOL:
            raise NumericalDomainError(f"coin eigenvalue {v!r} outside [0, 1]")
    return tuple(min(max(v, 0.0), 1.0) for v in lam)


def entropy(rho):
    """Base-2 von Neumann entropy of the coin, with ``0 log 0 = 0``."""
    if isinstance(rho, WalkState):
        rho = reduced_density(rho)
    return float(-sum(v * math.log2(v) for v in coin_eigenvalues(rho) if v > 0.0))


def ipr(dist):
    """Inverse participation ratio ``sum_x P(x)^2``.

    Accepts a ``Distribution``, a ``WalkState`` or a plain probability vector.
    """
    if isinstance(dist, WalkState):
        dist = probability_distribution(dist)
    p = dist.total if isinstance(dist, Distribution) else np.asarray(dist, dtype=float)
    if abs(p.sum() - 1.0) > NORM_TOL:
        raise ValidationError(f"IPR needs a normalized distribution, got sum {p.sum()!r}")
    return float(np.sum(p * p))


@dataclass(frozen=True, eq=False)
class GrowthRateProfile:
    """Growth rates ``lambda(v)`` at the lattice velocities ``v = x / t``.

    ``rates`` is the profile itself (``lambda`` or the polarization average
    ``lambda_bar``); the resolved ``lambda_h`` / ``lambda_v`` are filled by
    ``polarization_averaged_growth``. Unreachable sites carry ``-inf``.
    """

    velocities: np.ndarray
    rates: np.ndarray
    t: int
    normalized: bool
    lambda_h: np.ndarray | None = None
    lambda_v: np.ndarray | None = None

    def rate_at(self, v):
        i = int(np.argmin(np.abs(self.velocities - v)))
        if abs(self.velocities[i] - v) > 1e-12:
            raise ValidationError(f"v={v} is not on the lattice grid for t={self.t}")
        return float(self.rates[i])

    def argmax_velocities(self, tol=1e-12):
        """All velocities whose rate is within ``tol`` of the maximum."""
        top = np.max(self.rates)
        return [float(v) for v in self.velocities[self.rates >= top - tol]]

    def peak_velocity(self):
        """Velocity of the maximum rate (the most negative one on exact ties)."""
        return float(self.velocities[int(np.argmax(self.rates))])


def growth_rates(amplitudes, t, norm_log=0.0):
    """``(ln|amp| + norm_log) / t``, ``-inf`` where ``|amp| < 1e-300``."""
    mag = np.abs(np.asarray(amplitudes))
    out = np.full(mag.shape, -np.inf)
    ok = mag >= ZERO_AMPLITUDE
    out[ok] = (np.log(mag[ok]) + norm_log) / t
    return out


def _cone(state, x0, t):
    """Indices of parity-allowed sites x0 - t, x0 - t + 2, ..., x0 + t in ``state``."""
    xs = np.arange(x0 - t, x0 + t + 1, 2)
    return xs, xs - state.offset


def _launch(params, init, t, normalized):
    if params.boundary.finite:
        raise ValidationError("growth rates are defined on the infinite line")
    if t < 2:
        raise ValidationError(f"growth rates need t >= 2, got {t}")
    run = replace(params, normalize_each_step=True)
    state = evolve(init, run, t)
    return state, (0.0 if normalized else state.norm_log)


def lyapunov_profile(init, params, t, normalized=True):
    """``lambda(v) = ln|psi_x(t)| / t`` with ``|psi_x|^2 = |a_x|^2 + |b_x|^2``.

    The walk is normalized every step. With ``normalized=False`` the discarded
    norm is added back, giving rates of the raw non-unitary evolution; the two
    differ by a v-independent shift.
    """
    state, shift = _launch(params, init, t, normalized)
    xs, idx = _cone(state, init.position, t)
    mag = np.sqrt(np.sum(np.abs(state.amps[idx]) ** 2, axis=1))
    return GrowthRateProfile((xs - init.position) / t, growth_rates(mag, t, shift), t, normalized)


def lyapunov_exponent(params, t=2000, init=None):
    """``lambda(0)``: the growth rate at the launch site after ``t`` steps."""
    init = init or InitialState.horizontal()
    return lyapunov_profile(init, params, t).rate_at(0.0)


def polarization_averaged_growth(params, t, normalized=True):
    """``lambda_bar(v) = (lambda_H(v) + lambda_V(v)) / 2``.

    ``lambda_H`` reads the H amplitude of an ``|0,H>`` launch, ``lambda_V`` the
    V amplitude of an ``|0,V>`` launch.
    """
    sh, shift_h = _launch(params, InitialState.horizontal(), t, normalized)
    sv, shift_v = _launch(params, InitialState.vertical(), t, normalized)
    xs, ih = _cone(sh, 0, t)
    _, iv = _cone(sv, 0, t)
    lam_h = growth_rates(sh.amps[ih, 0], t, shift_h)
    lam_v = growth_rates(sv.amps[iv, 1], t, shift_v)
    return GrowthRateProfile(xs / t, 0.5 * (lam_h + lam_v), t, normalized, lam_h, lam_v)


def _on_support(dist, support):
    ph = np.zeros(len(support))
    pv = np.zeros(len(support))
    idx = np.searchsorted(support, dist.positions)
    np.add.at(ph, idx, dist.p_h)
    np.add.at(pv, idx, dist.p_v)
    return ph, pv


def fidelity(p, q):
    """``sum_x sqrt(P_H Q_H) + sqrt(P_V Q_V)`` over the union of supports."""
    for name, d in (("p", p), ("q", q)):
        total = float(d.p_h.sum() + d.p_v.sum())
        if abs(total - 1.0) > NORM_TOL:
            raise ValidationError(f"{name} is not normalized (sum {total!r})")
    support = np.union1d(p.positions, q.positions)
    ph, pv = _on_support(p, support)
    qh, qv = _on_support(q, support)
    return float(np.sum(np.sqrt(ph * qh)) + np.sum(np.sqrt(pv * qv)))
