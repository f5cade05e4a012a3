import math

import numpy as np
import pytest

from equiproc.empproc import (
    ModulusReport,
    equicontinuity_probe,
    modulus_experiment,
    moment_scaling,
    nu_n,
    pilot_rho,
    qualified_pairs,
    stationary_means,
)
from equiproc.errors import ComplexityGateError
from equiproc.families import Huber, Indicator, Quantilogram
from equiproc.innovations import StreamKey
from equiproc.models import (
    AR1,
    BivariateCopy,
    InnovationSpec,
    LagPair,
    StationaryLaw,
    Uniform01Law,
    stationary_mean_oracle,
)

SEED = 20_240_818

AR_MODEL = AR1(phi=0.5, sigma=1.0, innovation=InnovationSpec("standard-normal"))
LAG = (LagPair(h=1),)
QFAM = Quantilogram(alpha=0.1)
QGRID = np.linspace(-1.5, 1.5, 128)
PILOT = 100_000


def ar_modulus(deltas, n, reps, Q=4, seed=SEED, threads=1, eta=0.5):
    return modulus_experiment(
        QFAM, AR_MODEL, LAG, deltas, n, Q, 1.0, reps, QGRID, seed,
        eta=eta, threads=threads, pilot_reps=PILOT,
    )


def test_nu_n_zero_for_constant_values():
    fam = Indicator(theta_box=((0.0, 1.0),))
    rows = np.full((9, 1), 0.7)
    assert nu_n(fam, 0.5, rows, 0.0) == 0.0
    assert nu_n(fam, 0.9, rows, 1.0) == 0.0


def test_nu_n_alternating_path_cancels_exact_mean():
    fam = Indicator(theta_box=((0.0, 1.0),))
    rows = np.array([[1.0], [0.0], [1.0], [0.0]])
    assert nu_n(fam, 0.5, rows, 0.5) == 0.0


def test_nu_n_matches_hand_value():
    fam = Indicator(theta_box=((0.0, 1.0),))
    rows = np.array([[0.1], [0.9], [0.2]])
    # values 1, 0, 1; mean 0.4 -> (2 - 1.2)/sqrt(3)
    assert math.isclose(nu_n(fam, 0.5, rows, 0.4), 0.8 / math.sqrt(3.0))


def test_nu_n_iid_indicator_variance_near_quarter():
    fam = Indicator(theta_box=((0.0, 1.0),))
    law = Uniform01Law()
    n, reps = 256, 1000
    u = law.sample(StreamKey(SEED, 1), n * reps).reshape(reps, n, 1)
    vals = np.array([nu_n(fam, 0.5, u[r], 0.5) for r in range(reps)])
    second = float((vals**2).mean())
    assert 0.25 * 0.9 < second < 0.25 * 1.1


def test_nu_n_rejects_empty_path():
    fam = Indicator(theta_box=((0.0, 1.0),))
    with pytest.raises(ValueError):
        nu_n(fam, 0.5, np.empty((0, 1)), 0.0)


def test_qualified_pairs_respects_two_se_margin():
    values = np.array([[0.0, 0.30, 0.10], [0.30, 0.0, 0.50], [0.10, 0.50, 0.0]])
    ses = np.array([[0.0, 0.01, 0.06], [0.01, 0.0, 0.01], [0.06, 0.01, 0.0]])
    ii, jj = qualified_pairs(values, ses, 0.4)
    # (0,1): 0.30 + 0.02 < 0.4 in; (0,2): 0.10 + 0.12 < 0.4 in; (1,2): 0.52 out
    assert list(zip(ii.tolist(), jj.tolist())) == [(0, 1), (0, 2)]
    ii, jj = qualified_pairs(values, ses, 0.2)
    assert list(zip(ii.tolist(), jj.tolist())) == []


def test_stationary_means_matches_oracle_closed_form():
    grid = np.array([-0.5, 0.0, 0.8])
    means = stationary_means(QFAM, grid, AR_MODEL, LAG)
    for theta, m in zip(grid, means):
        assert math.isclose(m, stationary_mean_oracle(AR_MODEL, QFAM, float(theta), embeddings=LAG), abs_tol=1e-12)


def test_stationary_means_path_fallback_matches_oracle():
    model = AR1(phi=0.4, sigma=1.0, innovation=InnovationSpec("uniform-0-1"))
    fam = Indicator(theta_box=((0.0, 3.0),))
    grid = np.array([0.8, 1.2])
    means = stationary_means(fam, grid, model)
    for theta, m in zip(grid, means):
        oracle = stationary_mean_oracle(model, fam, float(theta))
        assert math.isclose(m, oracle, abs_tol=1e-12)


def test_modulus_monotone_in_delta_up_to_noise():
    rep = ar_modulus([0.05, 0.1, 0.2, 0.4], n=200, reps=400)
    assert np.all(np.diff(rep.pair_counts) >= 0)
    for i in range(len(rep.deltas) - 1):
        slack = 2.0 * math.hypot(rep.std_errors[i], rep.std_errors[i + 1])
        assert rep.estimates[i] <= rep.estimates[i + 1] + slack


def test_modulus_small_delta_well_below_large_delta():
    rep = ar_modulus([0.05, 0.4], n=400, reps=500)
    gap = rep.estimates[1] - rep.estimates[0]
    assert gap > 2.0 * math.hypot(rep.std_errors[0], rep.std_errors[1])


def test_modulus_single_theta_grid_is_zero():
    rep = modulus_experiment(
        QFAM, AR_MODEL, LAG, [0.2], 100, 4, 1.0, 50, np.array([0.3]), SEED,
        pilot_reps=1000,
    )
    assert rep.pair_counts[0] == 0
    assert rep.estimates[0] == 0.0
    assert rep.exceed_freqs[0] == 0.0
    assert rep.no_pairs[0]


def test_modulus_tiny_delta_has_no_pairs():
    grid = np.linspace(-1.0, 1.0, 9)
    rep = modulus_experiment(
        QFAM, AR_MODEL, LAG, [0.01], 100, 4, 1.0, 50, grid, SEED,
        pilot_reps=1000,
    )
    assert rep.no_pairs[0]
    assert rep.estimates[0] == 0.0


def test_modulus_refuses_divergent_complexity():
    with pytest.raises(ComplexityGateError, match="diverges"):
        modulus_experiment(
            QFAM, AR_MODEL, LAG, [0.2], 100, 2, 1.0, 50, QGRID, SEED,
            pilot_reps=1000,
        )


def test_modulus_huber_runs_at_low_moment_order():
    fam = Huber(0.3, theta_box=((-1.0, 1.0),))
    grid = np.linspace(-1.0, 1.0, 33)
    rep = modulus_experiment(
        fam, AR_MODEL, (), [0.1, 0.3], 100, 2, 1.0, 100, grid, SEED,
        pilot_reps=2000,
    )
    assert rep.pair_counts[1] > rep.pair_counts[0] >= 0
    assert np.all(rep.estimates >= 0.0)


def test_modulus_validation_errors():
    with pytest.raises(ValueError):
        ar_modulus([0.2], n=100, reps=50, Q=3)
    with pytest.raises(ValueError):
        modulus_experiment(QFAM, AR_MODEL, LAG, [0.2], 100, 4, 0.0, 50, QGRID, SEED)
    with pytest.raises(ValueError):
        modulus_experiment(QFAM, AR_MODEL, LAG, [-0.1], 100, 4, 1.0, 50, QGRID, SEED)
    with pytest.raises(ValueError):
        modulus_experiment(QFAM, AR_MODEL, LAG, [0.2], 0, 4, 1.0, 50, QGRID, SEED)
    with pytest.raises(ValueError):
        modulus_experiment(QFAM, AR_MODEL, LAG, [0.2], 100, 4, 1.0, 50, np.array([]), SEED)


def test_probe_zero_beyond_deterministic_bound():
    n = 100
    eta = 4.0 * QFAM.bound * math.sqrt(n) + 1.0
    rep = equicontinuity_probe(
        QFAM, AR_MODEL, LAG, [0.4], eta, [n], 60, QGRID, SEED, pilot_reps=PILOT,
    )
    assert rep.pair_counts[0] > 0
    assert np.all(rep.freqs == 0.0)


def test_probe_small_delta_rarely_exceeds():
    rep = equicontinuity_probe(
        QFAM, AR_MODEL, LAG, [0.05], 0.5, [200, 400, 800], 200, QGRID, SEED,
        pilot_reps=PILOT,
    )
    assert rep.freqs.shape == (3, 1)
    assert np.all(rep.freqs <= 0.1)


def test_probe_frequencies_monotone_in_delta():
    rep = equicontinuity_probe(
        QFAM, AR_MODEL, LAG, [0.1, 0.4], 0.25, [200], 200, QGRID, SEED,
        pilot_reps=PILOT,
    )
    assert rep.freqs[0, 0] <= rep.freqs[0, 1] + 1e-12


def exact_symmetric_quantilogram_rho(theta):
    # median-level quantilogram on iid uniform pairs, partner 1 - theta
    return math.sqrt((1.0 - (4.0 * theta - 1.0) ** 2) / 8.0)


def test_moment_scaling_iid_control_matches_analytic_value():
    iid = AR1(phi=0.0, sigma=1.0, innovation=InnovationSpec("uniform-0-1"))
    fam = Quantilogram(alpha=0.5)
    mean_fn = lambda th: (0.5 - th) ** 2
    pairs = [((0.1,), (0.9,)), ((0.2,), (0.8,))]
    rep = moment_scaling(
        fam, iid, (BivariateCopy(),), pairs, 100, 2, 1.0, 800, SEED,
        mean_fn=mean_fn, pilot_reps=PILOT,
    )
    for k, (theta, _) in enumerate(((0.1, 0.9), (0.2, 0.8))):
        exact = exact_symmetric_quantilogram_rho(theta)
        assert abs(rep.rho_values[k] - exact) < 0.01
        # iid rows with matched means: the second moment equals rho^2 exactly
        assert abs(rep.moments[k] - exact**2) < 3.0 * rep.moment_ses[k] + 0.003
        ratio_exact = exact ** (2.0 / 3.0)
        tol = 3.0 * rep.moment_ses[k] / rep.taus[k] ** 2 + 0.02
        assert abs(rep.ratios[k] - ratio_exact) < tol
        assert rep.ratios[k] <= 1.0


def test_moment_scaling_identical_pair_is_zero():
    rep = moment_scaling(
        QFAM, AR_MODEL, LAG, [((0.3,), (0.3,))], 100, 4, 1.0, 50, SEED,
        pilot_reps=1000,
    )
    assert rep.rho_values[0] == 0.0
    assert rep.taus[0] == 0.0
    assert rep.moments[0] == 0.0
    assert rep.ratios[0] == 0.0


def ar_indicator_scaling(n, reps, seed=SEED, threads=1):
    fam = Indicator(theta_box=((-2.0, 2.0),))
    pairs = [((0.0,), (0.1,)), ((0.0,), (0.3,)), ((0.0,), (0.6,)), ((0.0,), (1.2,))]
    return moment_scaling(
        fam, AR_MODEL, (), pairs, n, 4, 1.0, reps, seed,
        pilot_reps=PILOT, threads=threads,
    )


def test_moment_scaling_ratios_finite_and_comparable():
    rep = ar_indicator_scaling(n=100, reps=600)
    assert np.all(np.isfinite(rep.ratios))
    assert np.all(rep.ratios > 0.0)
    nonzero = rep.ratios[rep.ratios > 0]
    assert nonzero.max() / nonzero.min() <= 50.0


def test_moment_scaling_max_ratio_stable_as_n_grows():
    small = ar_indicator_scaling(n=100, reps=600)
    large = ar_indicator_scaling(n=400, reps=600)
    assert 0.5 <= large.max_ratio / small.max_ratio <= 2.0


def test_moment_scaling_validation():
    with pytest.raises(ValueError):
        moment_scaling(QFAM, AR_MODEL, LAG, [], 100, 2, 1.0, 50, SEED)
    with pytest.raises(ValueError):
        moment_scaling(QFAM, AR_MODEL, LAG, [((0.1,), (0.2,))], 100, 5, 1.0, 50, SEED)


def test_modulus_threads_bit_identical():
    one = ar_modulus([0.1, 0.3], n=150, reps=300, threads=1)
    many = ar_modulus([0.1, 0.3], n=150, reps=300, threads=7)
    assert np.array_equal(one.estimates, many.estimates)
    assert np.array_equal(one.std_errors, many.std_errors)
    assert np.array_equal(one.exceed_freqs, many.exceed_freqs)


def test_moment_scaling_threads_bit_identical():
    one = ar_indicator_scaling(n=120, reps=300, threads=1)
    many = ar_indicator_scaling(n=120, reps=300, threads=5)
    assert np.array_equal(one.moments, many.moments)
    assert np.array_equal(one.ratios, many.ratios)


def test_pilot_rho_cache_reuses_result():
    law = StationaryLaw(AR_MODEL, LAG)
    a = pilot_rho(QFAM, QGRID, law, 5000)
    b = pilot_rho(QFAM, QGRID, law, 5000)
    assert a[0] is b[0]


def test_modulus_report_shape_contract():
    rep = ar_modulus([0.1, 0.2, 0.4], n=100, reps=100)
    assert isinstance(rep, ModulusReport)
    assert rep.estimates.shape == rep.std_errors.shape == (3,)
    assert rep.exceed_freqs.shape == rep.pair_counts.shape == (3,)
    assert rep.Q == 4 and rep.n == 100 and rep.reps == 100
