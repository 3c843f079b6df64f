"""Execute a scenario: fan grid points out to a thread pool, write CSVs in
grid order.
"""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from nhqw.core import Boundary, Distribution, evolve, iter_evolve, probability_distribution
from nhqw.errors import ValidationError
from nhqw.observables import (
    entropy,
    fidelity,
    ipr,
    lyapunov_exponent,
    polarization_averaged_growth,
)
from nhqw.spectral import obc_spectrum, pbc_spectrum
from nhqw.virtual_lab import (
    DetectionConfig,
    bootstrap_error,
    exact_distribution,
    normalize_counts,
    reconstruct_rho,
    simulate_counts,
)

__all__ = ["HEADERS", "Table", "format_value", "build_tables", "write_tables", "run"]

HEADERS = {
    "distribution": ("t", "x", "p_h", "p_v"),
    "spectrum": ("boundary", "band_or_index", "k", "re_e", "im_e"),
    "profiles": ("index", "x", "probability"),
    "growth": ("v", "lambda_h", "lambda_v", "lambda_bar"),
    "entropy-sweep": ("theta_deg", "gamma", "entropy"),
    "dynamics": ("t", "entropy", "ipr"),
    "virtual-lab": ("quantity", "value", "stderr"),
    "lyapunov": ("theta_deg", "gamma", "lambda0"),
    "fidelity": ("theta_deg", "gamma", "t", "fidelity"),
}


@dataclass
class Table:
    name: str
    header: tuple
    rows: list

    def to_csv(self):
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(self.header)
        for row in self.rows:
            out.writerow([format_value(v) for v in row])
        return buf.getvalue()


def format_value(v):
    """12 significant digits for floats; integers and strings verbatim."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    x = float(v)
    if x == 0.0:
        x = 0.0  # drop the sign of -0
    return format(x, ".12g")


def _point_name(sc, theta, gamma):
    if len(sc.grid) == 1:
        return f"{sc.stem}.csv"
    return f"{sc.stem}_theta{theta:g}_gamma{gamma:g}.csv"


def _detection(sc, t):
    kwargs = dict(per_step_survival=sc.survival, detection_efficiency=sc.efficiency, seed=sc.seed)
    if sc.shots is not None:
        return DetectionConfig(shots=sc.shots, **kwargs)
    return DetectionConfig.for_expected_detections(sc.detected, t, **kwargs)


def _distribution_rows(state):
    d = probability_distribution(state)
    return [(state.t, int(x), ph, pv) for x, ph, pv in zip(d.positions, d.p_h, d.p_v)]


def _evolve(sc, theta, gamma):
    params = sc.params(theta, gamma)
    init = sc.initial_state()
    if sc.record == "all":
        rows = [r for s in iter_evolve(init, params, sc.steps) for r in _distribution_rows(s)]
    else:
        rows = _distribution_rows(evolve(init, params, sc.steps))
    return [Table(_point_name(sc, theta, gamma), HEADERS["distribution"], rows)]


def _spectrum(sc, theta, gamma):
    base = sc.params(theta, gamma)
    pbc = pbc_spectrum(base, sc.k_samples)
    obc = obc_spectrum(
        base.with_boundary(Boundary.open(sc.spectrum_sites)), with_states=sc.with_states
    )
    rows = [
        ("PBC", band, float(k), e.real, e.imag)
        for band in range(pbc.energies.shape[0])
        for k, e in zip(pbc.k, pbc.energies[band])
    ]
    rows += [("OBC", i, None, e.real, e.imag) for i, e in enumerate(obc.energies)]
    name = _point_name(sc, theta, gamma)
    tables = [Table(name, HEADERS["spectrum"], rows)]
    if sc.with_states:
        prof = [
            (i, x, float(p))
            for i in range(obc.profiles.shape[0])
            for x, p in enumerate(obc.profiles[i])
        ]
        tables.append(Table(name[:-4] + "_profiles.csv", HEADERS["profiles"], prof))
    return tables


def _growth(sc, theta, gamma):
    g = polarization_averaged_growth(sc.params(theta, gamma), sc.steps, normalized=sc.normalize)
    rows = list(zip(g.velocities, g.lambda_h, g.lambda_v, g.rates))
    return [Table(_point_name(sc, theta, gamma), HEADERS["growth"], rows)]


def _dynamics(sc, theta, gamma):
    rows = []
    for s in iter_evolve(sc.initial_state(), sc.params(theta, gamma), sc.steps):
        if s.t >= sc.t_min:
            rows.append((s.t, entropy(s), ipr(s)))
    return [Table(_point_name(sc, theta, gamma), HEADERS["dynamics"], rows)]


def _virtual_lab(sc, theta, gamma):
    state = evolve(sc.initial_state(), sc.params(theta, gamma), sc.steps)
    cfg = _detection(sc, sc.steps)
    z = simulate_counts(state, cfg, "Z")
    x = simulate_counts(state, cfg, "X")
    rho = reconstruct_rho(z, x)
    boot = bootstrap_error(z, x, sc.resamples, seed=sc.seed)
    a_err, b_err, c_err = boot.component_stderr
    rows = [
        ("entropy_exact", entropy(state), None),
        ("entropy", entropy(rho), boot.stderr),
        ("alpha", rho.alpha, a_err),
        ("beta", rho.beta, b_err),
        ("chi", rho.chi.real, c_err),
        ("shots", cfg.shots, None),
        ("detected_z", z.total_detected, None),
        ("detected_x", x.total_detected, None),
    ]
    return [Table(_point_name(sc, theta, gamma), HEADERS["virtual-lab"], rows)]


def read_distribution(path):
    """Load the last time slice of a ``t,x,p_h,p_v`` CSV as a ``Distribution``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != HEADERS["distribution"]:
            raise ValidationError(f"{path}: expected header {','.join(HEADERS['distribution'])}")
        rows = [tuple(float(v) for v in r) for r in reader if r]
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    t_last = max(r[0] for r in rows)
    rows = sorted(r[1:] for r in rows if r[0] == t_last)
    arr = np.array(rows)
    return Distribution(arr[:, 0].astype(np.int64), arr[:, 1], arr[:, 2])


# grid-valued commands: one row per (theta, gamma)

def _lyapunov_row(sc, theta, gamma):
    return (theta, gamma, lyapunov_exponent(sc.params(theta, gamma), sc.steps, sc.initial_state()))


def _entropy_row(sc, theta, gamma):
    return (theta, gamma, entropy(evolve(sc.initial_state(), sc.params(theta, gamma), sc.steps)))


def _fidelity_row(sc, theta, gamma, reference):
    state = evolve(sc.initial_state(), sc.params(theta, gamma), sc.steps)
    exact = exact_distribution(state, "Z")
    if reference is None:
        reference = normalize_counts(simulate_counts(state, _detection(sc, sc.steps), "Z"))
    return (theta, gamma, sc.steps, fidelity(exact, reference))


_PER_POINT = {
    "evolve": _evolve,
    "spectrum": _spectrum,
    "growth": _growth,
    "dynamics": _dynamics,
    "virtual-lab": _virtual_lab,
}
_PER_ROW = {"lyapunov": _lyapunov_row, "entropy-sweep": _entropy_row}


def resolve_threads(threads=None):
    """``threads``, else ``$NHQW_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("NHQW_THREADS", "").strip()
        threads = int(env) if env else 1
    if threads < 1:
        raise ValidationError(f"thread count must be positive, got {threads}")
    return threads


def build_tables(sc, threads=1, base_dir="."):
    """Compute every output table of ``sc``; order depends only on the grid."""
    if sc.command == "fidelity":
        reference = None
        if sc.reference is not None:
            reference = read_distribution(Path(base_dir) / sc.reference)
        job = lambda p: _fidelity_row(sc, *p, reference)  # noqa: E731
    elif sc.command in _PER_ROW:
        job = lambda p: _PER_ROW[sc.command](sc, *p)  # noqa: E731
    else:
        job = lambda p: _PER_POINT[sc.command](sc, *p)  # noqa: E731
    grid = sc.grid
    if threads > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, grid))
    else:
        results = [job(p) for p in grid]
    if sc.command in _PER_POINT:
        return [t for tables in results for t in tables]
    return [Table(f"{sc.stem}.csv", HEADERS[sc.command], results)]


def write_tables(tables, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for table in tables:
        path = out / table.name
        path.write_text(table.to_csv(), encoding="utf-8")
        paths.append(path)
    return paths


def run(sc, out_dir=".", threads=None, seed=None, base_dir="."):
    """Run a scenario and write its CSVs; returns the written paths."""
    if seed is not None:
        sc = replace(sc, seed=int(seed))
    tables = build_tables(sc, resolve_threads(threads), base_dir)
    return write_tables(tables, out_dir)

