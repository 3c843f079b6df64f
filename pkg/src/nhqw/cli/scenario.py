"""Scenario files: one INI document describing one command and its grid.

Schema
------
``[scenario]``
    ``command`` (required): evolve, spectrum, lyapunov, growth,
    entropy-sweep, dynamics, virtual-lab or fidelity.
    ``output``: file stem, defaults to the command name with ``-`` as ``_``.
``[walk]``
    ``theta_deg`` (required) and ``gamma`` (default 0) are grids: a single
    number, a comma list, or ``start:stop:step`` with ``stop`` included.
    ``steps``, ``initial`` (H, V, circular or custom with ``a_h`` / ``b_v``),
    ``position``, ``boundary`` (infinite, open, periodic), ``sites``,
    ``normalize``. ``record`` (final or all) is evolve-only and ``t_min`` is
    dynamics-only.
``[spectrum]``
    ``k_samples`` (1024), ``sites`` (50), ``with_states`` (false).
``[detection]``
    ``survival`` (0.61), ``efficiency`` (0.498), ``detected`` (expected
    detections, default 1e5) or ``shots`` (launched photons), ``seed`` (0),
    ``resamples`` (200).
``[fidelity]``
    ``reference``: distribution CSV (``t,x,p_h,p_v``) relative to the
    scenario file. Without it the reference is a simulated Z measurement.

Anything else is rejected before any computation runs.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace
from itertools import product

from nhqw.constants import DEFAULT_DETECTION_EFFICIENCY, DEFAULT_SURVIVAL
from nhqw.core import Boundary, InitialState, WalkParams
from nhqw.errors import ConfigError, NHQWError

__all__ = ["COMMANDS", "Scenario", "parse_scenario", "load_scenario", "with_seed"]

COMMANDS = (
    "evolve",
    "spectrum",
    "lyapunov",
    "growth",
    "entropy-sweep",
    "dynamics",
    "virtual-lab",
    "fidelity",
)

_DEFAULT_STEPS = {"lyapunov": 2000}
_MIN_STEPS = {"lyapunov": 2, "growth": 2}
_NEEDS_NORMALIZED = {"entropy-sweep", "dynamics", "virtual-lab", "fidelity", "lyapunov"}

_WALK_KEYS = {
    "theta_deg", "gamma", "steps", "initial", "a_h", "b_v",
    "position", "boundary", "sites", "normalize",
}
_SECTIONS = {
    "scenario": ({"command", "output"}, set(COMMANDS)),
    "walk": (_WALK_KEYS | {"record", "t_min"}, set(COMMANDS)),
    "spectrum": ({"k_samples", "sites", "with_states"}, {"spectrum"}),
    "detection": (
        {"survival", "efficiency", "detected", "shots", "seed", "resamples"},
        {"virtual-lab", "fidelity"},
    ),
    "fidelity": ({"reference"}, {"fidelity"}),
}
_COMMAND_ONLY_KEYS = {("walk", "record"): "evolve", ("walk", "t_min"): "dynamics"}


@dataclass(frozen=True)
class Scenario:
    """A validated scenario. Angles stay in degrees here; ``params`` converts."""

    command: str
    theta_deg: tuple
    gamma: tuple = (0.0,)
    steps: int | None = None
    output: str | None = None
    initial: str = "H"
    a_h: complex = 1.0
    b_v: complex = 0.0
    position: int = 0
    boundary: str = "infinite"
    sites: int | None = None
    normalize: bool = True
    record: str = "final"
    t_min: int = 0
    k_samples: int = 1024
    spectrum_sites: int = 50
    with_states: bool = False
    survival: float = DEFAULT_SURVIVAL
    efficiency: float = DEFAULT_DETECTION_EFFICIENCY
    detected: float | None = 1e5
    shots: int | None = None
    seed: int = 0
    resamples: int = 200
    reference: str | None = None

    @property
    def stem(self):
        return self.output or self.command.replace("-", "_")

    @property
    def grid(self):
        """``(theta_deg, gamma)`` pairs, theta-major."""
        return list(product(self.theta_deg, self.gamma))

    def params(self, theta_deg, gamma):
        if self.boundary == "infinite":
            boundary = Boundary.infinite()
        else:
            boundary = getattr(Boundary, self.boundary)(self.sites)
        return WalkParams(math.radians(theta_deg), gamma, boundary, self.normalize)

    def initial_state(self):
        if self.initial == "H":
            return InitialState.horizontal(self.position)
        if self.initial == "V":
            return InitialState.vertical(self.position)
        if self.initial == "circular":
            return InitialState.circular(self.position)
        return InitialState(self.position, self.a_h, self.b_v)

    def to_text(self):
        """Serialize to a scenario document that parses back to ``self``."""
        lines = ["[scenario]", f"command = {self.command}"]
        if self.output is not None:
            lines.append(f"output = {self.output}")
        lines += [
            "",
            "[walk]",
            f"theta_deg = {_grid_text(self.theta_deg)}",
            f"gamma = {_grid_text(self.gamma)}",
        ]
        if self.steps is not None:
            lines.append(f"steps = {self.steps}")
        lines += [f"initial = {self.initial}", f"position = {self.position}"]
        if self.initial == "custom":
            lines += [f"a_h = {_complex_text(self.a_h)}", f"b_v = {_complex_text(self.b_v)}"]
        lines.append(f"boundary = {self.boundary}")
        if self.sites is not None:
            lines.append(f"sites = {self.sites}")
        lines.append(f"normalize = {str(self.normalize).lower()}")
        if self.command == "evolve":
            lines.append(f"record = {self.record}")
        if self.command == "dynamics":
            lines.append(f"t_min = {self.t_min}")
        if self.command == "spectrum":
            lines += [
                "",
                "[spectrum]",
                f"k_samples = {self.k_samples}",
                f"sites = {self.spectrum_sites}",
                f"with_states = {str(self.with_states).lower()}",
            ]
        if self.command in ("virtual-lab", "fidelity"):
            lines += [
                "",
                "[detection]",
                f"survival = {self.survival!r}",
                f"efficiency = {self.efficiency!r}",
            ]
            if self.shots is not None:
                lines.append(f"shots = {self.shots}")
            else:
                lines.append(f"detected = {self.detected!r}")
            lines += [f"seed = {self.seed}", f"resamples = {self.resamples}"]
        if self.command == "fidelity" and self.reference is not None:
            lines += ["", "[fidelity]", f"reference = {self.reference}"]
        return "\n".join(lines) + "\n"


def _grid_text(values):
    return ", ".join(repr(float(v)) for v in values)


def _complex_text(z):
    z = complex(z)
    return repr(z).strip("()")


class _Reader:
    """Typed access to one parsed document with located error messages."""

    def __init__(self, cp, source):
        self.cp = cp
        self.source = source

    def where(self, section, key):
        return f"{self.source}:[{section}].{key}"

    def fail(self, section, key, message):
        raise ConfigError(f"{self.where(section, key)}: {message}")

    def raw(self, section, key):
        if not self.cp.has_section(section) or key not in self.cp[section]:
            return None
        value = self.cp[section][key].strip()
        if not value:
            self.fail(section, key, "empty value")
        return value

    def require(self, section, key):
        value = self.raw(section, key)
        if value is None:
            raise ConfigError(f"{self.where(section, key)}: missing required key")
        return value

    def number(self, section, key, default, kind=float, lo=None, hi=None):
        value = self.raw(section, key)
        if value is None:
            return default
        try:
            x = float(value)
        except ValueError:
            self.fail(section, key, f"not a number: {value!r}")
        if kind is int:
            if not x.is_integer():
                self.fail(section, key, f"expected an integer, got {value!r}")
            x = int(x)
        if not math.isfinite(x):
            self.fail(section, key, f"not finite: {value!r}")
        if lo is not None and x < lo:
            self.fail(section, key, f"{x} is below the minimum {lo}")
        if hi is not None and x > hi:
            self.fail(section, key, f"{x} is above the maximum {hi}")
        return x

    def boolean(self, section, key, default):
        value = self.raw(section, key)
        if value is None:
            return default
        try:
            return self.cp[section].getboolean(key)
        except ValueError:
            self.fail(section, key, f"expected true or false, got {value!r}")

    def choice(self, section, key, default, options):
        value = self.raw(section, key)
        if value is None:
            return default
        if value not in options:
            self.fail(section, key, f"expected one of {', '.join(options)}, got {value!r}")
        return value

    def complex_number(self, section, key, default):
        value = self.raw(section, key)
        if value is None:
            return default
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            self.fail(section, key, f"not a complex number: {value!r}")

    def grid(self, section, key, default, lo, hi):
        value = self.raw(section, key) if default is not None else self.require(section, key)
        if value is None:
            return default
        try:
            if ":" in value:
                start, stop, stride = (float(p) for p in value.split(":"))
                if stride <= 0:
                    self.fail(section, key, "grid step must be positive")
                count = math.floor((stop - start) / stride + 1e-9) + 1
                values = [round(start + i * stride, 12) for i in range(count)]
            else:
                values = [float(p) for p in value.split(",")]
        except ValueError:
            self.fail(section, key, f"malformed grid {value!r}")
        if not values:
            self.fail(section, key, "grid is empty")
        for v in values:
            if not math.isfinite(v) or v < lo or v > hi:
                self.fail(section, key, f"value {v} outside [{lo}, {hi}]")
        if len(set(values)) != len(values):
            self.fail(section, key, "grid has repeated values")
        return tuple(values)


def _check_layout(cp, source, command):
    if cp.defaults():
        raise ConfigError(f"{source}:[DEFAULT]: keys outside a named section are not allowed")
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"{source}:[{section}]: unknown section")
        keys, commands = _SECTIONS[section]
        if command not in commands:
            raise ConfigError(f"{source}:[{section}]: section not used by command {command!r}")
        for key in cp[section]:
            if key not in keys:
                raise ConfigError(f"{source}:[{section}].{key}: unknown key")
            owner = _COMMAND_ONLY_KEYS.get((section, key))
            if owner is not None and owner != command:
                raise ConfigError(
                    f"{source}:[{section}].{key}: only valid for command {owner!r}"
                )


def parse_scenario(text, source="<scenario>"):
    """Parse and validate a scenario document.

    Raises
    ------
    ConfigError
        On syntax errors, unknown sections or keys, missing required keys and
        out-of-range values. The message names ``source:[section].key``.
    """
    cp = configparser.ConfigParser(interpolation=None, empty_lines_in_values=False)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {' '.join(str(exc).split())}") from None
    r = _Reader(cp, source)
    command = r.choice("scenario", "command", None, COMMANDS)
    if command is None:
        r.require("scenario", "command")
    _check_layout(cp, source, command)

    output = r.raw("scenario", "output")
    if output is not None and (("/" in output) or ("\\" in output) or output.startswith(".")):
        r.fail("scenario", "output", "must be a plain file stem")

    w = "walk"
    if command == "spectrum":
        steps = r.number(w, "steps", None, int, lo=0)
    else:
        steps = r.number(w, "steps", _DEFAULT_STEPS.get(command), int, lo=_MIN_STEPS.get(command, 0))
        if steps is None:
            r.require(w, "steps")
    initial = r.choice(w, "initial", "H", ("H", "V", "circular", "custom"))
    for key in ("a_h", "b_v"):
        if initial != "custom" and r.raw(w, key) is not None:
            r.fail(w, key, "only valid with initial = custom")
    boundary = r.choice(w, "boundary", "infinite", ("infinite", "open", "periodic"))
    sites = r.number(w, "sites", None, int, lo=2)
    if boundary != "infinite" and sites is None:
        r.require(w, "sites")
    if boundary == "infinite" and sites is not None:
        r.fail(w, "sites", "only valid with a finite boundary")
    normalize = r.boolean(w, "normalize", True)
    if command in _NEEDS_NORMALIZED and not normalize:
        r.fail(w, "normalize", f"command {command!r} needs normalized states")

    d = "detection"
    detected = r.number(d, "detected", None, lo=1)
    shots = r.number(d, "shots", None, int, lo=1)
    if detected is not None and shots is not None:
        r.fail(d, "shots", "give either detected or shots, not both")
    if detected is None and shots is None:
        detected = 1e5

    sc = Scenario(
        command=command,
        output=output,
        theta_deg=r.grid(w, "theta_deg", None, 0.0, 90.0),
        gamma=r.grid(w, "gamma", (0.0,), 0.0, math.inf),
        steps=steps,
        initial=initial,
        a_h=r.complex_number(w, "a_h", 1.0),
        b_v=r.complex_number(w, "b_v", 0.0),
        position=r.number(w, "position", 0, int),
        boundary=boundary,
        sites=sites,
        normalize=normalize,
        record=r.choice(w, "record", "final", ("final", "all")),
        t_min=r.number(w, "t_min", 0, int, lo=0),
        k_samples=r.number("spectrum", "k_samples", 1024, int, lo=16),
        spectrum_sites=r.number("spectrum", "sites", 50, int, lo=2, hi=500),
        with_states=r.boolean("spectrum", "with_states", False),
        survival=r.number(d, "survival", DEFAULT_SURVIVAL, lo=0.0, hi=1.0),
        efficiency=r.number(d, "efficiency", DEFAULT_DETECTION_EFFICIENCY, lo=0.0, hi=1.0),
        detected=detected,
        shots=shots,
        seed=r.number(d, "seed", 0, int, lo=0),
        resamples=r.number(d, "resamples", 200, int, lo=100),
        reference=r.raw("fidelity", "reference"),
    )
    _check_semantics(sc, r)
    return sc


def _check_semantics(sc, r):
    w = "walk"
    if sc.command == "dynamics" and sc.t_min > sc.steps:
        r.fail(w, "t_min", f"exceeds steps ({sc.steps})")
    if sc.command in ("growth", "lyapunov") and sc.boundary != "infinite":
        r.fail(w, "boundary", f"command {sc.command!r} runs on the infinite line")
    if sc.command == "spectrum" and sc.boundary != "infinite":
        r.fail(w, "boundary", "spectrum lattices are set in [spectrum]")
    if sc.command == "spectrum" and sc.spectrum_sites % 2:
        r.fail("spectrum", "sites", "must be even")
    if sc.command == "virtual-lab" and sc.initial not in ("H", "V"):
        if sc.initial != "custom" or sc.a_h.imag or sc.b_v.imag:
            r.fail(w, "initial", "virtual-lab reconstruction needs real amplitudes")
    try:
        init = sc.initial_state()
        sc.params(sc.theta_deg[0], sc.gamma[0])
        if sc.boundary != "infinite":
            init.embed(sc.params(sc.theta_deg[0], sc.gamma[0]).boundary)
    except NHQWError as exc:
        key = "a_h" if sc.initial == "custom" else "initial"
        if sc.boundary != "infinite":
            key = "sites" if "sites" in str(exc) or "even" in str(exc) else "position"
        raise ConfigError(f"{r.where(w, key)}: {exc}") from None


def load_scenario(path):
    """Read and parse a scenario file; ``OSError`` propagates."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario(text, source=str(path))


def with_seed(sc, seed):
    return replace(sc, seed=int(seed))

