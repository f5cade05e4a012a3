import math

import numpy as np
import pytest

from equiproc.errors import ConfigError
from equiproc.families import Huber, MarginalInfo, Quantilogram, build_cover
from equiproc.gmc import (
    TOO_FAST,
    DecayReport,
    IndicatorCouplingSpec,
    bracket_coupling_norm,
    coupling_norm,
    family_coupling_norm,
    grid_refinement_gap,
    indicator_coupling,
)
from equiproc.models import AR1, ARCH1, LagPair

SEED = 20_240_817


def test_ar1_state_rate_recovered():
    model = AR1(phi=0.5, sigma=1.0)
    report = coupling_norm(model, range(1, 13), q=2.0, reps=4000, master_seed=SEED)
    assert report.status == "ok"
    assert 0.45 <= report.alpha_hat <= 0.55
    assert report.r_squared >= 0.98
    # closed form: each lag halves the gap, starting from two independent
    # stationary states with mean square 2 * 4/3
    for j, lag in enumerate(report.lags[:8]):
        exact = 0.5**lag * math.sqrt(8.0 / 3.0)
        assert abs(report.estimates[j] - exact) <= 4.0 * report.std_errors[j]


def test_memoryless_model_reports_zero_and_unresolved():
    report = coupling_norm(AR1(phi=0.0, sigma=2.0), [1, 2, 3, 4], q=2.0,
                           reps=1500, master_seed=SEED)
    assert np.all(report.estimates == 0.0)
    assert not report.used_in_fit.any()
    assert report.status == TOO_FAST
    assert math.isnan(report.alpha_hat)


def test_arch_decay_fits_geometric():
    model = ARCH1(omega=0.5, a1=0.4)
    report = coupling_norm(model, range(1, 11), q=1.0, reps=4000, master_seed=SEED)
    assert report.status == "ok"
    assert report.slope < 0.0
    assert report.r_squared >= 0.9


def test_estimates_decay_monotonically_within_noise():
    report = coupling_norm(AR1(phi=0.6, sigma=1.0), range(1, 11), q=2.0,
                           reps=3000, master_seed=SEED)
    for j in range(len(report.lags) - 1):
        slack = 2.0 * (report.std_errors[j] + report.std_errors[j + 1])
        assert report.estimates[j + 1] <= report.estimates[j] + slack


def test_validation_of_lags_reps_and_orders():
    model = AR1(phi=0.5, sigma=1.0)
    with pytest.raises(ValueError):
        coupling_norm(model, [1, 2], q=2.0, reps=999, master_seed=1)
    with pytest.raises(ValueError):
        coupling_norm(model, [2, 2], q=2.0, reps=2000, master_seed=1)
    with pytest.raises(ValueError):
        coupling_norm(model, [0, 1], q=2.0, reps=2000, master_seed=1)
    with pytest.raises(ValueError):
        coupling_norm(model, [1, 2], q=0.0, reps=2000, master_seed=1)
    with pytest.raises(ValueError):
        family_coupling_norm(AR1(phi=0.5, sigma=1.0), (LagPair(1),), Quantilogram(alpha=0.1),
                             [], [1, 2], 2.0, 2000, 1)


def test_quantilogram_family_decay_on_ar1():
    model = AR1(phi=0.5, sigma=1.0)
    grid = np.linspace(-2.0, 2.0, 129)
    report = family_coupling_norm(model, (LagPair(1),), Quantilogram(alpha=0.1),
                                  grid, range(1, 9), 2.0, 6000, SEED)
    assert report.status == "ok"
    assert report.slope < 0.0
    assert report.r_squared >= 0.9


def test_quantilogram_family_zero_on_iid():
    report = family_coupling_norm(AR1(phi=0.0, sigma=1.0), (LagPair(1),),
                                  Quantilogram(alpha=0.1), np.linspace(-2, 2, 33),
                                  [1, 2, 3], 2.0, 1200, SEED)
    assert np.all(report.estimates == 0.0)
    assert report.status == TOO_FAST


def test_huber_family_norm_dominated_by_state_norm():
    model = AR1(phi=0.5, sigma=1.0)
    fam = Huber(delta=0.8, theta_box=((-1.5, 1.5),))
    lags = range(1, 9)
    state = coupling_norm(model, lags, q=2.0, reps=2000, master_seed=SEED)
    member = family_coupling_norm(model, (), fam, np.linspace(-1.5, 1.5, 65),
                                  lags, 2.0, 2000, SEED)
    # same seed, same coupled draws: clipping is a contraction, so the
    # domination is exact sample by sample
    assert np.all(member.estimates <= state.estimates + 1e-12)


def test_bracket_norms_on_quantilogram_cover_decay():
    model = AR1(phi=0.5, sigma=1.0)
    fam = Quantilogram(alpha=0.1, theta_box=((-2.0, 2.0),))
    cover = build_cover(fam, 0.4, MarginalInfo(lipschitz=0.35))
    report = bracket_coupling_norm(model, (LagPair(1),), cover, range(1, 7),
                                   2.0, 4000, SEED)
    assert report.slope < 0.0
    assert report.status == "ok"


def test_constant_bounding_functions_give_zero_report():
    model = AR1(phi=0.5, sigma=1.0)
    hub = Huber(delta=1.0, theta_box=((-1.0, 1.0),))
    cover = build_cover(hub, 0.2, MarginalInfo(lipschitz=0.35))
    report = bracket_coupling_norm(model, (), cover, [1, 2, 3, 4], 2.0, 1200, SEED)
    assert np.all(report.estimates == 0.0)
    assert report.status == TOO_FAST

    singleton = build_cover(Huber(delta=1.0, theta_box=((0.3, 0.3),)), 0.2,
                            MarginalInfo(lipschitz=0.35))
    report = bracket_coupling_norm(model, (), singleton, [1, 2], 2.0, 1200, SEED)
    assert np.all(report.estimates == 0.0)


def test_indicator_coupling_constant_direction():
    model = AR1(phi=0.5, sigma=1.0)
    spec = IndicatorCouplingSpec(u_col=0, lam_box=((-1.0, 1.0),))
    report = indicator_coupling(model, spec, range(1, 9), 2.0, 4000, SEED,
                                lam_grid=np.linspace(-1.0, 1.0, 101))
    assert report.status == "ok"
    assert report.slope < 0.0
    assert report.r_squared >= 0.9


def test_indicator_coupling_zero_for_iid_level():
    spec = IndicatorCouplingSpec(u_col=0, lam_box=((-1.0, 1.0),))
    report = indicator_coupling(AR1(phi=0.0, sigma=1.0), spec, [1, 2, 3], 2.0,
                                1200, SEED, lam_grid=np.linspace(-1, 1, 21))
    assert np.all(report.estimates == 0.0)


def test_strict_and_weak_senses_agree():
    model = AR1(phi=0.5, sigma=1.0)
    grid = np.linspace(-1.0, 1.0, 51)
    strict = indicator_coupling(model, IndicatorCouplingSpec(u_col=0, sense="strict"),
                                range(1, 7), 2.0, 2000, SEED, lam_grid=grid)
    weak = indicator_coupling(model, IndicatorCouplingSpec(u_col=0, sense="weak"),
                              range(1, 7), 2.0, 2000, SEED, lam_grid=grid)
    for j in range(6):
        slack = 3.0 * (strict.std_errors[j] + weak.std_errors[j]) + 1e-12
        assert abs(strict.estimates[j] - weak.estimates[j]) <= slack


def test_functional_direction_case_checks_the_map():
    model = AR1(phi=0.5, sigma=1.0)
    good = IndicatorCouplingSpec(
        u_col=1, v_cols=(0,), w_cols=(0,), lam_box=((-1.0, 1.0),),
        case="functional", functional_map=lambda w: w,
    )
    report = indicator_coupling(model, good, [1, 2, 3, 4], 2.0, 1200, SEED,
                                lam_grid=np.linspace(-1, 1, 21),
                                embeddings=(LagPair(1),))
    assert isinstance(report, DecayReport)

    bad = IndicatorCouplingSpec(
        u_col=1, v_cols=(0,), w_cols=(0,), lam_box=((-1.0, 1.0),),
        case="functional", functional_map=lambda w: w + 1.0,
    )
    with pytest.raises(ConfigError):
        indicator_coupling(model, bad, [1, 2], 2.0, 1200, SEED,
                           lam_grid=np.linspace(-1, 1, 21), embeddings=(LagPair(1),))


def test_singleton_case_rejects_varying_direction_columns():
    model = AR1(phi=0.5, sigma=1.0)
    spec = IndicatorCouplingSpec(u_col=1, v_cols=(0,), lam_box=((-1.0, 1.0),),
                                 case="singleton")
    with pytest.raises(ConfigError):
        indicator_coupling(model, spec, [1, 2], 2.0, 1200, SEED,
                           lam_grid=np.linspace(-1, 1, 21), embeddings=(LagPair(1),))


def test_declared_conditional_independence_is_not_checked():
    model = AR1(phi=0.5, sigma=1.0)
    spec = IndicatorCouplingSpec(u_col=1, v_cols=(0,), w_cols=(0,),
                                 lam_box=((-1.0, 1.0),),
                                 case="conditional-independent")
    report = indicator_coupling(model, spec, [1, 2, 3], 2.0, 1200, SEED,
                                lam_grid=np.linspace(-1, 1, 21),
                                embeddings=(LagPair(1),))
    assert isinstance(report, DecayReport)


def test_rate_is_stable_across_norm_orders():
    model = AR1(phi=0.5, sigma=1.0)
    grid = np.linspace(-2.0, 2.0, 65)
    low = family_coupling_norm(model, (LagPair(1),), Quantilogram(alpha=0.1),
                               grid, range(1, 8), 1.0, 8000, SEED)
    high = family_coupling_norm(model, (LagPair(1),), Quantilogram(alpha=0.1),
                                grid, range(1, 8), 4.0, 8000, SEED)
    assert low.status == "ok" and high.status == "ok"
    assert abs(low.alpha_hat - high.alpha_hat) <= 0.15


def test_threads_do_not_change_report_bytes():
    model = ARCH1(omega=0.5, a1=0.4)
    one = coupling_norm(model, range(1, 7), q=1.0, reps=3000, master_seed=SEED, threads=1)
    many = coupling_norm(model, range(1, 7), q=1.0, reps=3000, master_seed=SEED, threads=7)
    assert np.array_equal(one.estimates, many.estimates)
    assert np.array_equal(one.std_errors, many.std_errors)
    assert one.slope == many.slope and one.alpha_hat == many.alpha_hat


def test_grid_refinement_gap_is_noise_small():
    out = grid_refinement_gap(AR1(phi=0.5, sigma=1.0), (LagPair(1),),
                              Quantilogram(alpha=0.25), [1, 2, 3, 4], 2.0, 2000,
                              SEED, per_dim=64)
    assert out["max_gap"] <= 3.0 * out["combined_se"] + 1e-6
