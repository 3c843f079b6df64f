import math
import warnings

import numpy as np
import pytest

from nhqw.core import Distribution, InitialState, WalkParams, WalkState, evolve
from nhqw.errors import UnsupportedReconstruction, ValidationError
from nhqw.observables import entropy, fidelity, reduced_density
from nhqw.virtual_lab import (
    CountsRecord,
    DetectionConfig,
    bootstrap_error,
    exact_distribution,
    normalize_counts,
    reconstruct_from_distributions,
    reconstruct_rho,
    simulate_counts,
)

R2 = 1 / math.sqrt(2)
LOSSLESS_DETECTOR = dict(per_step_survival=1.0, detection_efficiency=1.0)


def walk(theta_deg, gamma=0.0, t=20, init=None):
    return evolve(init or InitialState.horizontal(), WalkParams(math.radians(theta_deg), gamma), t)


def counts_from_probabilities(state, total):
    """Noise-free records: exact probabilities scaled to ``total`` counts."""
    out = []
    for basis in ("Z", "X"):
        d = exact_distribution(state, basis)
        c = np.rint(np.column_stack([d.p_h, d.p_v]) * total).astype(np.int64)
        out.append(CountsRecord(basis, d.positions, c, state.t))
    return out


def random_real_state(rng, n=9):
    amps = rng.normal(size=(n, 2))
    amps /= np.linalg.norm(amps)
    return WalkState(-(n // 2), amps)


# -- configuration ---------------------------------------------------------------

@pytest.mark.parametrize(
    "kwargs",
    [
        dict(per_step_survival=1.2),
        dict(detection_efficiency=-0.1),
        dict(shots=0),
        dict(shots=2.5),
        dict(seed=-1),
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValidationError):
        DetectionConfig(**kwargs)


def test_shots_for_expected_detections():
    cfg = DetectionConfig.for_expected_detections(1e5, 20)
    p = 0.61**20 * 0.498
    assert cfg.shots == math.ceil(1e5 / p)
    assert cfg.shots * p == pytest.approx(1e5, rel=1e-9)


# -- sampling -------------------------------------------------------------------

def test_expected_detection_count():
    state = walk(45)
    cfg = DetectionConfig(shots=10**6, seed=1)
    p = 0.61**20 * 0.498
    mean = 10**6 * p
    sigma = math.sqrt(10**6 * p * (1 - p))
    for basis in ("Z", "X"):
        assert abs(simulate_counts(state, cfg, basis).total_detected - mean) <= 3 * sigma


def test_frequencies_within_three_sigma():
    state = walk(45, 0.1)
    shots = 10**7
    rec = simulate_counts(state, DetectionConfig(shots=shots, seed=5, **LOSSLESS_DETECTOR), "Z")
    d = exact_distribution(state, "Z")
    p = np.column_stack([d.p_h, d.p_v]).ravel()
    freq = rec.counts.ravel() / shots
    sigma = np.sqrt(p * (1 - p) / shots)
    assert np.all(np.abs(freq - p) <= 3 * sigma + 1e-15)


def test_sigma_x_eigenstate():
    state = InitialState(0, R2, R2).embed()
    rec = simulate_counts(state, DetectionConfig(shots=1000, seed=2, **LOSSLESS_DETECTOR), "X")
    np.testing.assert_array_equal(rec.counts, [[1000, 0]])


def test_same_seed_same_counts():
    state = walk(57, 0.05)
    cfg = DetectionConfig(shots=10**8, seed=42)
    assert simulate_counts(state, cfg, "Z") == simulate_counts(state, cfg, "Z")
    other = DetectionConfig(shots=10**8, seed=43)
    assert simulate_counts(state, cfg, "Z") != simulate_counts(state, other, "Z")


def test_simulation_needs_normalized_state():
    with pytest.raises(ValidationError):
        simulate_counts(WalkState(0, np.array([[1.0, 1.0]])), DetectionConfig(), "Z")


def test_losses_are_outcome_independent():
    state = walk(57, 0.1, t=10)
    a = simulate_counts(state, DetectionConfig(shots=300_000, seed=3, **LOSSLESS_DETECTOR), "Z")
    b = simulate_counts(
        state,
        DetectionConfig(per_step_survival=0.9, detection_efficiency=0.5, shots=1_700_000, seed=4),
        "Z",
    )
    pa, pb = normalize_counts(a), normalize_counts(b)
    fa = np.column_stack([pa.p_h, pa.p_v]).ravel()
    fb = np.column_stack([pb.p_h, pb.p_v]).ravel()
    p = np.column_stack(
        [exact_distribution(state, "Z").p_h, exact_distribution(state, "Z").p_v]
    ).ravel()
    sigma = np.sqrt(p * (1 - p) * (1 / a.total_detected + 1 / b.total_detected))
    assert np.all(np.abs(fa - fb) <= 3 * sigma + 1e-15)


# -- normalization ----------------------------------------------------------------

def test_normalize_counts_examples():
    rec = CountsRecord("Z", [-1, 1], [[0, 50], [50, 0]], 1)
    d = normalize_counts(rec)
    assert d.as_dict() == {-1: (0.0, 0.5), 1: (0.5, 0.0)}
    single = normalize_counts(CountsRecord("Z", [0, 1], [[0, 0], [0, 1]], 1))
    assert single.as_dict() == {0: (0.0, 0.0), 1: (0.0, 1.0)}


def test_normalize_counts_requires_detections():
    with pytest.raises(ValidationError):
        normalize_counts(CountsRecord("X", [0], [[0, 0]], 3))


def test_counts_record_validation():
    with pytest.raises(ValidationError):
        CountsRecord("Y", [0], [[1, 0]], 0)
    with pytest.raises(ValidationError):
        CountsRecord("Z", [0, 1], [[1, 0]], 0)
    with pytest.raises(ValidationError):
        CountsRecord("Z", [0], [[-1, 0]], 0)


def test_large_shot_fidelity():
    state = walk(45, 0.1)
    rec = simulate_counts(state, DetectionConfig(shots=10**6, seed=9, **LOSSLESS_DETECTOR), "Z")
    assert fidelity(exact_distribution(state), normalize_counts(rec)) > 0.999


# -- reconstruction ----------------------------------------------------------------

def test_reconstruction_identity_on_random_real_states(rng):
    for _ in range(50):
        state = random_real_state(rng)
        rho = reconstruct_from_distributions(
            exact_distribution(state, "Z"), exact_distribution(state, "X")
        )
        ref = reduced_density(state)
        assert rho.alpha == pytest.approx(ref.alpha, abs=1e-10)
        assert rho.beta == pytest.approx(ref.beta, abs=1e-10)
        assert rho.chi == pytest.approx(ref.chi, abs=1e-10)


def test_negative_coherence_recovered():
    amps = np.array([[0.6, -0.48], [0.0, 0.0], [0.48, 0.4]])
    amps /= np.linalg.norm(amps)
    state = WalkState(0, amps)
    rho = reconstruct_from_distributions(
        exact_distribution(state, "Z"), exact_distribution(state, "X")
    )
    assert rho.chi.real == pytest.approx(float(np.sum(amps[:, 0] * amps[:, 1])), abs=1e-10)


def test_exact_hadamard_reconstruction():
    state = walk(45)
    z, x = counts_from_probabilities(state, 10**15)
    assert entropy(reconstruct_rho(z, x)) == pytest.approx(entropy(state), abs=1e-6)
    assert entropy(reconstruct_rho(z, x)) == pytest.approx(0.858, abs=1e-3)


def test_complex_amplitudes_refused():
    z, x = counts_from_probabilities(walk(45, init=InitialState.circular()), 10**6)
    with pytest.raises(UnsupportedReconstruction):
        reconstruct_rho(z, x, complex_amplitudes=True)


def test_mismatched_records_refused():
    z, x = counts_from_probabilities(walk(45), 10**6)
    with pytest.raises(ValidationError):
        reconstruct_rho(x, z)
    z3, _ = counts_from_probabilities(walk(45, t=3), 10**6)
    with pytest.raises(ValidationError):
        reconstruct_rho(z3, x)


def test_pure_coin_state_sits_on_psd_boundary():
    pz = Distribution([0], [0.5], [0.5], "Z")
    px = Distribution([0], [1.0], [0.0], "X")
    rho = reconstruct_from_distributions(pz, px)
    assert rho.chi == 0.5 and rho.determinant == 0.0
    assert entropy(rho) == 0.0


def test_psd_clamp_survives_sqrt_rounding():
    # sqrt(alpha * beta) squares back to slightly more than alpha * beta here
    alpha, beta = 34646 / 68964, 34318 / 68964
    pz = Distribution([0], [alpha], [beta], "Z")
    px = Distribution([0], [1.0], [0.0], "X")
    rho = reconstruct_from_distributions(pz, px)
    assert rho.determinant >= 0.0
    assert rho.chi.real == pytest.approx(math.sqrt(alpha * beta), rel=1e-15)


def test_sign_ties_contribute_nothing():
    pz = Distribution([0, 1], [0.25, 0.25], [0.25, 0.25], "Z")
    px = Distribution([0, 1], [0.5, 0.25], [0.0, 0.25], "X")
    rho = reconstruct_from_distributions(pz, px)
    assert rho.chi == pytest.approx(0.25)


def test_negative_probabilities_rejected():
    pz = Distribution([0, 1], [0.6, -0.1], [0.3, 0.2], "Z")
    px = Distribution([0, 1], [1.0, 0.0], [0.0, 0.0], "X")
    with pytest.raises(ValidationError):
        reconstruct_from_distributions(pz, px)
    with pytest.raises(ValidationError):
        reconstruct_from_distributions(Distribution([0], [0.5], [0.2], "Z"), px)


# -- bootstrap ----------------------------------------------------------------------

def test_bootstrap_vanishing_noise():
    z, x = counts_from_probabilities(walk(65), 10**9)
    assert bootstrap_error(z, x, 100, seed=1).stderr < 1e-3


def test_bootstrap_scales_with_counts():
    state = walk(45)
    cfg = dict(**LOSSLESS_DETECTOR)
    full = [simulate_counts(state, DetectionConfig(shots=40_000, seed=s, **cfg), b)
            for s, b in ((1, "Z"), (1, "X"))]
    half = [simulate_counts(state, DetectionConfig(shots=20_000, seed=s, **cfg), b)
            for s, b in ((2, "Z"), (2, "X"))]
    e_full = bootstrap_error(*full, resamples=400, seed=3).stderr
    e_half = bootstrap_error(*half, resamples=400, seed=4).stderr
    assert e_half / e_full == pytest.approx(math.sqrt(2), rel=0.2)


def test_bootstrap_at_1e3_detections():
    state = walk(45)
    cfg = DetectionConfig.for_expected_detections(1000, 20, seed=8)
    z, x = simulate_counts(state, cfg, "Z"), simulate_counts(state, cfg, "X")
    err = bootstrap_error(z, x, 200, seed=8).stderr
    assert 0.021 / 3 <= err <= 0.021 * 3


def test_bootstrap_degenerate_counts():
    z = CountsRecord("Z", [0], [[500, 0]], 0)
    x = CountsRecord("X", [0], [[260, 240]], 0)
    with pytest.warns(UserWarning, match="degenerate"):
        res = bootstrap_error(z, x, 100)
    assert res.degenerate and res.stderr == 0.0 and res.mean == 0.0


def test_bootstrap_needs_enough_resamples():
    z, x = counts_from_probabilities(walk(45), 1000)
    with pytest.raises(ValidationError):
        bootstrap_error(z, x, 50)


def test_bootstrap_deterministic():
    z, x = counts_from_probabilities(walk(45), 5000)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert bootstrap_error(z, x, 100, seed=5) == bootstrap_error(z, x, 100, seed=5)


def test_entropy_estimator_consistency():
    state = walk(45)
    exact = entropy(state)
    errors = []
    for shots in (10**3, 10**4, 10**5, 10**6):
        devs = []
        for seed in range(20):
            cfg = DetectionConfig(shots=shots, seed=seed, **LOSSLESS_DETECTOR)
            rho = reconstruct_rho(simulate_counts(state, cfg, "Z"), simulate_counts(state, cfg, "X"))
            devs.append(abs(entropy(rho) - exact))
        errors.append(float(np.mean(devs)))
    assert all(a > b for a, b in zip(errors, errors[1:]))
