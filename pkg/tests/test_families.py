import dataclasses
import math

import numpy as np
import pytest
from scipy import special

from equiproc.errors import CoverCapError
from equiproc.families import (
    CensoredQR,
    DominancePair,
    DominanceResidual,
    Huber,
    Indicator,
    IntervalCover,
    MarginalInfo,
    Quantilogram,
    Sign,
    box_grid,
    bracket_count_fn,
    bracketing_integral,
    bracketing_number,
    build_cover,
    rho,
    rho_matrix,
    verify_cover,
)
from equiproc.innovations import StreamKey
from equiproc.models import GaussianLaw, Uniform01Law


def test_member_values_match_hand_results():
    quant = Quantilogram(alpha=0.9)
    assert quant.evaluate(0.5, [1.2, 0.8]) == pytest.approx(0.81)
    assert Indicator().evaluate(0.7, [0.3]) == 1.0
    assert DominancePair().evaluate(0.0, [-0.5, 0.5]) == 1.0
    assert Sign().evaluate(0.0, [-0.2]) == -1.0
    assert Huber(delta=0.5).evaluate(0.0, [2.0]) == 0.5

    fam = DominanceResidual(z_dim=1, theta_box=((-1, 1), (0, 1), (0, 1)))
    # thresholds: 0.5 * 0.4 + 0.1 = 0.3 and 1.0 * 0.5 + 0.1 = 0.6
    assert fam.evaluate([0.1, 0.4, 0.5], [0.2, 0.5, 1.0, 1.0]) == 1.0

    cq = CensoredQR(z_dim=2, delta_z=1.0, theta_box=((-1, 1), (-1, 1)))
    val = cq.evaluate([0.5, 0.0], [0.3, 2.0, 1.0, -0.4])
    assert np.allclose(val, [1.0, -0.4])
    val = cq.evaluate([0.5, 0.0], [0.3, 0.1, 1.0, -0.4])
    assert np.allclose(val, [0.0, 0.0])


def test_rho_closed_forms():
    est = rho(Indicator(), 0.3, 0.5, Uniform01Law())
    assert est.value == pytest.approx(math.sqrt(0.2))
    assert est.std_error == 0.0
    assert est.method == "closed-form"

    est = rho(Sign(), 0.3, 0.5, Uniform01Law())
    assert est.value == pytest.approx(2.0 * math.sqrt(0.2))

    gauss = GaussianLaw()
    est = rho(Indicator(theta_box=((-2, 2),)), 0.0, 1.0, gauss)
    assert est.value == pytest.approx(math.sqrt(special.ndtr(1.0) - 0.5))


def test_rho_zero_at_equal_parameters():
    est = rho(Quantilogram(alpha=0.3), 0.4, 0.4, GaussianLaw(dim=2), reps=500)
    assert est.value == 0.0 and est.std_error == 0.0


def test_rho_rejects_tiny_rep_counts():
    with pytest.raises(ValueError):
        rho(Indicator(), 0.2, 0.3, Uniform01Law(), reps=99)
    with pytest.raises(ValueError):
        rho_matrix(Indicator(), [0.2, 0.3], Uniform01Law(), reps=50)


def _quantilogram_rho_by_enumeration(alpha, lo, hi):
    # regions relative to the two thresholds, coordinates independent
    p = np.array([special.ndtr(lo), special.ndtr(hi) - special.ndtr(lo), 1.0 - special.ndtr(hi)])
    below_lo = np.array([1.0, 0.0, 0.0])
    below_hi = np.array([1.0, 1.0, 0.0])
    total = 0.0
    for i in range(3):
        for j in range(3):
            f_lo = (alpha - below_lo[i]) * (alpha - below_lo[j])
            f_hi = (alpha - below_hi[i]) * (alpha - below_hi[j])
            total += p[i] * p[j] * (f_lo - f_hi) ** 2
    return math.sqrt(total)


def test_quantilogram_rho_matches_enumeration_under_product_normal():
    fam = Quantilogram(alpha=0.3)
    est = rho(fam, 0.9, 0.2, GaussianLaw(dim=2))
    exact = _quantilogram_rho_by_enumeration(0.3, 0.2, 0.9)
    assert est.method.startswith("monte-carlo")
    assert est.std_error > 0.0
    assert abs(est.value - exact) <= 3.0 * est.std_error


def test_rho_matrix_agrees_with_closed_form():
    thetas = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
    values, ses = rho_matrix(Indicator(), thetas, Uniform01Law(), reps=20_000)
    exact = np.sqrt(np.abs(thetas[:, None] - thetas[None, :]))
    assert np.allclose(values, values.T)
    assert np.all(np.diag(values) == 0.0)
    assert np.all(np.abs(values - exact) <= 4.0 * ses + 0.01)


def test_rho_is_a_pseudometric_on_a_triple():
    fam = Quantilogram(alpha=0.5)
    law = GaussianLaw(dim=2)
    ab = rho(fam, 0.1, 0.5, law)
    bc = rho(fam, 0.5, 1.1, law)
    ac = rho(fam, 0.1, 1.1, law)
    slack = 3.0 * (ab.std_error + bc.std_error + ac.std_error)
    assert ac.value <= ab.value + bc.value + slack


def test_root_gap_modulus_stays_bounded():
    fam = Quantilogram(alpha=0.5)
    law = Uniform01Law(dim=2)
    for i, gap in enumerate(np.geomspace(1e-3, 1e-1, 7)):
        est = rho(fam, 0.3, 0.3 + gap, law, reps=200_000, key=StreamKey(911, i))
        ratio = est.value / math.sqrt(gap)
        # theory bound for indicator-difference pairs is 2 sqrt(L)
        assert ratio <= 2.0 + 3.0 * est.std_error / math.sqrt(gap) + 0.05


def test_huber_members_are_one_lipschitz():
    fam = Huber(delta=0.7, theta_box=((-1.5, 1.5),))
    rng = np.random.default_rng(7)
    xs = rng.normal(size=(4000, 1))
    thetas = rng.uniform(-1.5, 1.5, size=12)
    for a in thetas:
        for b in thetas:
            gap = np.abs(fam.evaluate_path(a, xs) - fam.evaluate_path(b, xs))
            assert gap.max() <= abs(a - b) + 1e-12


def test_members_respect_uniform_bound():
    rng = np.random.default_rng(21)
    x1 = rng.normal(scale=3.0, size=(8192, 1))
    x2 = rng.normal(scale=3.0, size=(8192, 2))
    cases = [
        (Indicator(), x1, np.linspace(0, 1, 128)),
        (Sign(), x1, np.linspace(-1, 1, 128)),
        (Huber(delta=0.4), x1, np.linspace(-1, 1, 128)),
        (Quantilogram(alpha=0.2), x2, np.linspace(-2, 2, 128)),
        (DominancePair(), x2, np.linspace(-3, 3, 128)),
    ]
    total = 0
    for fam, rows, thetas in cases:
        grid = fam.evaluate_grid(thetas, rows)
        assert np.abs(grid).max() <= fam.bound
        total += grid.size
    cq = CensoredQR(z_dim=2, delta_z=1.5, theta_box=((-1, 1), (-1, 1)))
    rows = np.column_stack([
        rng.normal(size=4096),
        rng.normal(size=4096),
        rng.uniform(-1.5, 1.5, size=4096),
        rng.uniform(-1.5, 1.5, size=4096),
    ])
    grid = cq.evaluate_grid(box_grid(cq.theta_box, per_dim=16), rows)
    assert np.abs(grid).max() <= cq.bound
    total += grid.size
    assert total >= 1_000_000


def test_cover_sizes_match_hand_counts():
    info = MarginalInfo(lipschitz=1.0)
    quant = Quantilogram(alpha=0.5, theta_box=((0.0, 1.0),))
    assert bracketing_number(quant, 0.2, info) == 100
    assert build_cover(quant, 0.2, info).size == 100
    assert bracketing_number(Indicator(), 0.5, info) == 4
    hub = Huber(delta=1.0, theta_box=((-1.0, 1.0),))
    assert bracketing_number(hub, 0.2, info) == 10


def test_bracketing_number_halving_ratios():
    info = MarginalInfo(lipschitz=1.0)
    quant = Quantilogram(alpha=0.5, theta_box=((0.0, 1.0),))
    ratio = bracketing_number(quant, 0.1, info) / bracketing_number(quant, 0.2, info)
    assert 3.5 <= ratio <= 4.5
    hub = Huber(delta=1.0, theta_box=((-1.0, 1.0),))
    ratio = bracketing_number(hub, 0.1, info) / bracketing_number(hub, 0.2, info)
    assert 1.8 <= ratio <= 2.2


def test_wide_scales_need_one_bracket():
    info = MarginalInfo(lipschitz=1.0)
    assert bracketing_number(Indicator(), 1.0, info) == 1
    # clip level small against the scale: any two members differ by <= 2 delta
    hub = Huber(delta=0.05, theta_box=((-1.0, 1.0),))
    assert bracketing_number(hub, 0.2, info) == 1
    cover = build_cover(hub, 0.2, info)
    b = cover.bounding_values(0, np.zeros((5, 1)))
    assert np.all(b <= 0.2)


def test_bracketing_number_cap_trips():
    info = MarginalInfo(lipschitz=1.0)
    quant = Quantilogram(alpha=0.5, theta_box=((0.0, 1.0),))
    with pytest.raises(CoverCapError):
        bracketing_number(quant, 1e-5, info)
    with pytest.raises(CoverCapError):
        build_cover(quant, 1e-5, info)
    assert bracketing_number(quant, 1e-5, info, cap=10**12) == 4 * 10**10


def test_singleton_box_gets_one_zero_bracket():
    info = MarginalInfo(lipschitz=1.0)
    fam = Indicator(theta_box=((0.4, 0.4),))
    assert bracketing_number(fam, 0.05, info) == 1
    cover = build_cover(fam, 0.05, info)
    sample = np.random.default_rng(3).uniform(size=(2000, 1))
    assert np.all(cover.bounding_values(0, sample) == 0.0)
    check = verify_cover(cover, sample, np.array([0.4]))
    assert check.passed


def test_interval_assignment_prefers_lowest_bracket():
    cover = IntervalCover(Indicator(), 0.5, np.array([0.0, 0.5, 1.0]))
    assert cover.assign(0.0) == 0
    assert cover.assign(0.5) == 0
    assert cover.assign(0.75) == 1
    assert cover.assign(1.0) == 1
    with pytest.raises(ValueError):
        cover.assign(1.5)


def test_quantilogram_cover_passes_verification():
    info = MarginalInfo(lipschitz=1.0)
    fam = Quantilogram(alpha=0.5, theta_box=((0.0, 1.0),))
    cover = build_cover(fam, 0.2, info)
    sample = np.random.default_rng(11).uniform(size=(10_000, 2))
    check = verify_cover(cover, sample, np.linspace(0.0, 1.0, 301))
    assert check.passed
    assert check.worst_domination_margin <= 0.0
    assert np.all(check.sizes <= 0.2 + 3.0 * check.size_ses)
    # direct size oracle: each bracket is a pair of width-0.01 bands
    assert np.all(check.sizes <= math.sqrt(2 * 0.01 + 2 * 0.01**2) + 5.0 * check.size_ses)


def test_huber_cover_has_constant_bounds_and_verifies():
    info = MarginalInfo(lipschitz=1.0)
    fam = Huber(delta=1.0, theta_box=((-1.0, 1.0),))
    cover = build_cover(fam, 0.2, info)
    sample = np.random.default_rng(13).normal(size=(10_000, 1))
    b = cover.bounding_values(3, sample)
    assert np.all(b == b[0]) and b[0] == pytest.approx(0.2)
    check = verify_cover(cover, sample, np.linspace(-1.0, 1.0, 201))
    assert check.passed


class _ZeroedCover(IntervalCover):
    def bounding_values(self, k, rows):
        return np.zeros(len(rows))


def test_zeroed_bounds_fail_verification():
    info = MarginalInfo(lipschitz=1.0)
    fam = Quantilogram(alpha=0.5, theta_box=((0.0, 1.0),))
    cover = build_cover(fam, 0.2, info)
    broken = _ZeroedCover(cover.family, cover.delta, cover.edges)
    sample = np.random.default_rng(17).uniform(size=(10_000, 2))
    check = verify_cover(broken, sample, np.linspace(0.0, 1.0, 301))
    assert not check.passed
    assert check.worst_domination_margin > 0.0


def _residual_rows(rng, count):
    z1 = np.column_stack([np.ones(count), rng.uniform(-1.0, 1.0, count)])
    z2 = np.column_stack([np.ones(count), rng.uniform(-1.0, 1.0, count)])
    return np.column_stack([rng.normal(size=count), z1, rng.normal(size=count), z2])


def test_residual_ball_cover_verifies_and_shrunk_radius_fails():
    eta1, eta2 = (0.1, 0.1), (-0.1, 0.0)
    fam = DominanceResidual(
        z_dim=2,
        theta_box=((-0.5, 0.5), (0.1, 0.1), (0.1, 0.1), (-0.1, -0.1), (0.0, 0.0)),
    )
    info = MarginalInfo(lipschitz=0.4, design_bound=math.sqrt(2.0))
    cover = build_cover(fam, 0.6, info)
    assert cover.size == math.ceil(1.0 / (2.0 * cover.radius / math.sqrt(5.0)))

    rng = np.random.default_rng(19)
    rows = _residual_rows(rng, 10_000)
    thetas = np.linspace(-0.5, 0.5, 161)
    grid = np.column_stack([
        thetas,
        np.broadcast_to(eta1 + eta2, (161, 4)),
    ])
    check = verify_cover(cover, rows, grid)
    assert check.passed

    shrunk = dataclasses.replace(cover, radius=cover.radius / 10.0)
    bad = verify_cover(shrunk, rows, grid)
    assert not bad.passed
    assert bad.worst_domination_margin > 0.0


def test_censored_ball_cover_verifies():
    fam = CensoredQR(z_dim=1, delta_z=1.0, theta_box=((-0.3, 0.3),))
    info = MarginalInfo(lipschitz=0.45)
    cover = build_cover(fam, 0.4, info)
    assert cover.size == 2
    rng = np.random.default_rng(23)
    rows = np.column_stack([
        rng.normal(size=12_000),
        rng.normal(loc=0.5, size=12_000),
        rng.uniform(-1.0, 1.0, size=12_000),
    ])
    check = verify_cover(cover, rows, np.linspace(-0.3, 0.3, 61))
    assert check.passed
    assert cover.assign(0.0) == 0


def test_lipschitz_estimated_from_a_sample():
    rng = np.random.default_rng(29)
    uniform_info = MarginalInfo(sample=rng.uniform(size=50_000))
    assert 0.8 <= uniform_info.lipschitz_constant() <= 1.4
    normal_info = MarginalInfo(sample=rng.normal(size=50_000))
    assert 0.3 <= normal_info.lipschitz_constant() <= 0.55
    with pytest.raises(ValueError):
        MarginalInfo().lipschitz_constant()


def test_bracketing_integral_analytic_values():
    out = bracketing_integral(lambda x: x**-2.0, gamma=1.0, Q=4)
    assert not out.divergent
    assert out.value == pytest.approx(6.0, abs=1e-6)

    out = bracketing_integral(lambda x: 1.0, gamma=1.0, Q=2)
    assert out.value == pytest.approx(1.5, abs=1e-8)

    out = bracketing_integral(lambda x: x**-2.0, gamma=1.0, Q=2)
    assert out.divergent
    assert out.value is None
    assert out.exponent == pytest.approx(-4.0 / 3.0)


def test_bracketing_integral_for_recipe_counts():
    info = MarginalInfo(lipschitz=1.0)
    quant = Quantilogram(alpha=0.5, theta_box=((0.0, 1.0),))
    counts = bracket_count_fn(quant, info)
    out = bracketing_integral(counts, gamma=1.0, Q=4)
    assert not out.divergent
    # integrand is close to x^(-1/3) (4 x^-2)^(1/4); exact value sqrt(2) * 6
    assert 8.0 < out.value < 9.5

    assert bracketing_integral(counts, gamma=1.0, Q=2).divergent

    hub = Huber(delta=1.0, theta_box=((-1.0, 1.0),))
    out = bracketing_integral(bracket_count_fn(hub, info), gamma=1.0, Q=2)
    assert not out.divergent
    assert out.value > 0.0


def test_box_grid_layout_and_cap():
    grid = box_grid(((0.0, 1.0), (2.0, 2.0)), per_dim=5)
    assert grid.shape == (5, 2)
    assert np.all(grid[:, 1] == 2.0)
    grid = box_grid(((0.0, 1.0), (0.0, 1.0)), per_dim=3)
    assert np.allclose(grid[:3, 0], 0.0)
    assert np.allclose(grid[:3, 1], [0.0, 0.5, 1.0])
    with pytest.raises(CoverCapError):
        box_grid(((0.0, 1.0),) * 3, per_dim=4000)
