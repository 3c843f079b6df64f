"""State-vector evolution of the lossy one-dimensional coined walk.

One step is ``U = S [I (x) L(gamma) C(theta)]``: the coin mixes the two
polarizations on every site, the loss attenuates the V component by
``exp(-gamma)``, then H moves to ``x + 1`` and V to ``x - 1``.

Amplitudes are stored densely as an ``(n, 2)`` complex array whose row ``i``
holds ``(a_x, b_x)`` for ``x = offset + i``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from nhqw import _backend
from nhqw.constants import ALGEBRAIC_TOL
from nhqw.errors import BoundaryError, NumericalError, ValidationError

__all__ = [
    "BoundaryKind",
    "Boundary",
    "WalkParams",
    "InitialState",
    "WalkState",
    "Distribution",
    "coin_matrix",
    "loss_matrix",
    "step",
    "evolve",
    "iter_evolve",
    "probability_distribution",
]


class BoundaryKind(enum.Enum):
    INFINITE = "infinite"
    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class Boundary:
    """Lattice geometry: the infinite line, or a finite chain/ring of ``sites``."""

    kind: BoundaryKind = BoundaryKind.INFINITE
    sites: int | None = None

    def __post_init__(self):
        if self.kind is BoundaryKind.INFINITE:
            if self.sites is not None:
                raise ValidationError("infinite boundary takes no site count")
            return
        if self.sites is None or int(self.sites) != self.sites:
            raise ValidationError(f"{self.kind.value} boundary needs an integer site count")
        if self.sites < 2:
            raise ValidationError(f"need at least 2 sites, got {self.sites}")
        if self.kind is BoundaryKind.PERIODIC and self.sites % 2:
            raise ValidationError(f"periodic ring needs an even site count, got {self.sites}")

    @classmethod
    def infinite(cls):
        return cls(BoundaryKind.INFINITE)

    @classmethod
    def open(cls, sites):
        return cls(BoundaryKind.OPEN, sites)

    @classmethod
    def periodic(cls, sites):
        return cls(BoundaryKind.PERIODIC, sites)

    @property
    def finite(self):
        return self.kind is not BoundaryKind.INFINITE


@dataclass(frozen=True)
class WalkParams:
    """Coin angle ``theta`` (radians), loss ``gamma`` and lattice geometry."""

    theta: float
    gamma: float = 0.0
    boundary: Boundary = field(default_factory=Boundary.infinite)
    normalize_each_step: bool = True

    def __post_init__(self):
        if not math.isfinite(self.theta) or not 0.0 <= self.theta <= math.pi / 2:
            raise ValidationError(f"theta must lie in [0, pi/2], got {self.theta!r}")
        if not math.isfinite(self.gamma) or self.gamma < 0.0:
            raise ValidationError(f"gamma must be finite and >= 0, got {self.gamma!r}")

    def with_boundary(self, boundary):
        return replace(self, boundary=boundary)


@dataclass(frozen=True)
class InitialState:
    """Single-site launch ``|position> (x) (aH|H> + bV|V>)``."""

    position: int = 0
    aH: complex = 1.0
    bV: complex = 0.0

    def __post_init__(self):
        norm = abs(self.aH) ** 2 + abs(self.bV) ** 2
        if abs(norm - 1.0) > ALGEBRAIC_TOL:
            raise ValidationError(f"|aH|^2 + |bV|^2 must be 1, got {norm!r}")

    @classmethod
    def horizontal(cls, position=0):
        return cls(position, 1.0, 0.0)

    @classmethod
    def vertical(cls, position=0):
        return cls(position, 0.0, 1.0)

    @classmethod
    def circular(cls, position=0):
        """``(|H> + i|V>) / sqrt(2)``."""
        r = 1.0 / math.sqrt(2.0)
        return cls(position, r, 1j * r)

    @property
    def is_real(self):
        return complex(self.aH).imag == 0.0 and complex(self.bV).imag == 0.0

    def embed(self, boundary=None):
        """The state as a t=0 ``WalkState`` on ``boundary``."""
        boundary = boundary or Boundary.infinite()
        if not boundary.finite:
            amps = np.array([[self.aH, self.bV]], dtype=np.complex128)
            return WalkState(self.position, amps)
        if not 0 <= self.position < boundary.sites:
            raise ValidationError(
                f"position {self.position} outside lattice of {boundary.sites} sites"
            )
        amps = np.zeros((boundary.sites, 2), dtype=np.complex128)
        amps[self.position] = (self.aH, self.bV)
        return WalkState(0, amps)


@dataclass(frozen=True, eq=False)
class WalkState:
    """Amplitudes ``(a_x, b_x)`` on sites ``offset .. offset + len(amps) - 1``.

    ``norm_log`` accumulates ``ln`` of the norm removed by per-step
    normalization, so the unnormalized state is ``exp(norm_log) * amps``.
    """

    offset: int
    amps: np.ndarray
    t: int = 0
    norm_log: float = 0.0

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if amps.ndim != 2 or amps.shape[1] != 2:
            raise ValidationError(f"amps must have shape (n, 2), got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def positions(self):
        return np.arange(self.offset, self.offset + len(self.amps))

    @property
    def a(self):
        return self.amps[:, 0]

    @property
    def b(self):
        return self.amps[:, 1]

    def norm(self):
        return math.sqrt(float(np.vdot(self.amps, self.amps).real))

    def amplitude(self, x):
        """``(a_x, b_x)``; zero outside the stored window."""
        i = x - self.offset
        if 0 <= i < len(self.amps):
            return complex(self.amps[i, 0]), complex(self.amps[i, 1])
        return 0j, 0j

    def scaled(self, factor):
        return replace(self, amps=self.amps * factor)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Polarization-resolved probabilities over integer positions.

    For ``basis="X"`` the two columns hold ``P_+`` and ``P_-``.
    """

    positions: np.ndarray
    p_h: np.ndarray
    p_v: np.ndarray
    basis: str = "Z"

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.int64)
        ph = np.asarray(self.p_h, dtype=float)
        pv = np.asarray(self.p_v, dtype=float)
        if not pos.shape == ph.shape == pv.shape or pos.ndim != 1:
            raise ValidationError("positions, p_h and p_v must be equal-length 1-D arrays")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "p_h", ph)
        object.__setattr__(self, "p_v", pv)

    @property
    def total(self):
        """``P(x) = P_H(x) + P_V(x)``."""
        return self.p_h + self.p_v

    def as_dict(self):
        return {
            int(x): (float(h), float(v)) for x, h, v in zip(self.positions, self.p_h, self.p_v)
        }

    def argmax(self):
        """Position of the largest total probability."""
        return int(self.positions[np.argmax(self.total)])


def coin_matrix(theta):
    """Real reflection coin ``[[cos t, sin t], [sin t, -cos t]]``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [s, -c]])


def loss_matrix(gamma):
    """``diag(1, exp(-gamma))``: polarization-dependent loss on V."""
    if not gamma >= 0.0:
        raise ValidationError(f"gamma must be >= 0 (gain is unsupported), got {gamma!r}")
    return np.diag([1.0, math.exp(-gamma)])


_MODES = {BoundaryKind.INFINITE: 0, BoundaryKind.PERIODIC: 1, BoundaryKind.OPEN: 2}


def _check_consistent(state, boundary):
    if boundary.finite and (state.offset != 0 or len(state.amps) != boundary.sites):
        raise ValidationError(
            f"state window (offset {state.offset}, {len(state.amps)} sites) does not match "
            f"{boundary.kind.value} lattice of {boundary.sites} sites"
        )


def _advance(state, params, steps):
    boundary = params.boundary
    _check_consistent(state, boundary)
    if steps == 0:
        return state
    c, s = math.cos(params.theta), math.sin(params.theta)
    l = math.exp(-params.gamma)
    mode = _MODES[boundary.kind]
    if mode == 0:
        n = len(state.amps)
        buf = np.zeros((n + 2 * steps, 2), dtype=np.complex128)
        buf[steps:steps + n] = state.amps
        lo, hi = steps, steps + n - 1
    else:
        buf = np.array(state.amps, dtype=np.complex128, order="C")
        lo, hi = 0, len(buf) - 1
    kern = _backend.kernels()
    norm_log, status, done, lo, hi = kern.evolve_inplace(
        buf, c, s, l, steps, lo, hi, mode, bool(params.normalize_each_step)
    )
    if status == 1:
        raise BoundaryError(
            f"amplitude would leave the open lattice at step {state.t + done + 1}; "
            "use a larger lattice (N >= 2t + 1) or the infinite line"
        )
    if status == 2:
        raise NumericalError(f"state norm vanished at step {state.t + done}")
    if mode == 0:
        offset = state.offset - steps
        amps = buf[lo:hi + 1].copy()
    else:
        offset = 0
        amps = buf
    return WalkState(offset, amps, state.t + steps, state.norm_log + norm_log)


def step(state, params):
    """Apply one walk step: coin, then loss, then conditional shift.

    Raises
    ------
    BoundaryError
        On an open lattice when nonzero amplitude would leave the chain.
    """
    return _advance(state, params, 1)


def evolve(init, params, t):
    """Evolve a single-site launch (or an existing ``WalkState``) by ``t`` steps."""
    if t < 0 or int(t) != t:
        raise ValidationError(f"step count must be a non-negative integer, got {t!r}")
    state = init if isinstance(init, WalkState) else init.embed(params.boundary)
    return _advance(state, params, int(t))


def iter_evolve(init, params, t):
    """Yield the state after 0, 1, ..., ``t`` steps."""
    state = init if isinstance(init, WalkState) else init.embed(params.boundary)
    yield state
    for _ in range(int(t)):
        state = _advance(state, params, 1)
        yield state


def probability_distribution(state):
    """``P_H(x) = |a_x|^2`` and ``P_V(x) = |b_x|^2`` over the stored window."""
    amps = state.amps
    return Distribution(
        state.positions,
        amps[:, 0].real ** 2 + amps[:, 0].imag ** 2,
        amps[:, 1].real ** 2 + amps[:, 1].imag ** 2,
    )
