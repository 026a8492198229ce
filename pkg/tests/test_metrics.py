from fractions import Fraction

import numpy as np
import pytest

from altcsit.channel import CsitPattern, LambdaDistribution, draw_channels, lambda_of
from altcsit.decoder import combine, oracle_identifiability, solve
from altcsit.metrics import (DofAccount, baseline_mix, dof_account, fit_slope,
                             power_normalization, rate_sweep, sum_rate)
from altcsit.scheme import NotSynergistic, SymbolSet, classify_case, encode, mirror_pattern, transmit

from conftest import EXEMPLARS

CASE1 = CsitPattern.parse("DD,ND,PN,NN")


def _system(pattern, seed=0, trials=200, noise_power=1.0, symbols=None):
    case = classify_case(pattern)
    ch = draw_channels(seed, 4, trials)
    s = symbols if symbols is not None else SymbolSet.random(seed + 1, trials)
    block = encode(pattern, case, s, ch)
    block = block.scaled(power_normalization(block))
    return ch, s, block, combine(case, ch, transmit(block, ch, noise_power, seed + 2))


def test_baseline_mix_values():
    assert baseline_mix(lambda_of(CASE1)) == Fraction(67, 60)
    assert baseline_mix(LambdaDistribution(Fraction(1), Fraction(0), Fraction(0))) == Fraction(4, 3)
    assert baseline_mix(LambdaDistribution(Fraction(0), Fraction(0), Fraction(1))) == 1
    assert baseline_mix(lambda_of(CASE1)) < Fraction(5, 4)


def test_dof_account_full_block():
    _, s, _, system = _system(CASE1, noise_power=0.0, trials=None)
    rep = solve(system).attach_truth(s.as_array())
    acct = dof_account(rep, CASE1)
    assert acct == DofAccount(5, 4) and acct.dof == Fraction(5, 4)


def test_dof_account_batched():
    _, s, _, system = _system(CASE1, noise_power=0.0, trials=10)
    rep = solve(system).attach_truth(s.as_array())
    accts = dof_account(rep, CASE1)
    assert len(accts) == 10 and all(a.dof == Fraction(5, 4) for a in accts)


def test_dof_truncated_block():
    ch, _, block, _ = _system(CASE1, noise_power=0.0, trials=None)
    ranks = oracle_identifiability(CASE1, ch, block, slots=(1, 2, 3))
    assert DofAccount.from_ranks(ranks, 3).dof <= 1


def test_dof_zero_symbols():
    assert DofAccount.from_ranks((0, 0), 4).dof == 0


def test_power_normalization_unit_peak():
    _, _, block, _ = _system(CASE1)
    energy = np.sum(np.abs(block.precoders) ** 2, axis=-1).max(axis=(-2, -1))
    np.testing.assert_allclose(energy, 1.0, rtol=1e-12)


def test_sum_rate_vanishes_at_low_power():
    _, _, _, system = _system(CASE1)
    assert sum_rate(system, 1e-12).max() < 1e-9


def test_sum_rate_monotone_in_power():
    _, _, _, system = _system(CASE1)
    rates = np.stack([sum_rate(system, p) for p in 2.0 ** np.arange(0, 40, 4)])
    assert np.all(np.diff(rates, axis=0) >= -1e-9)


def test_sum_rate_rejects_nonpositive_power():
    _, _, _, system = _system(CASE1)
    with pytest.raises(ValueError):
        sum_rate(system, 0.0)


def test_fit_slope_exact_line():
    p = 2.0 ** np.arange(5)
    slope, intercept = fit_slope(p, 1.25 * np.log2(p) + 3)
    assert np.isclose(slope, 1.25) and np.isclose(intercept, 3)


def test_rate_sweep_errors():
    with pytest.raises(ValueError):
        rate_sweep(CASE1, [1.0, 2.0], 0)
    with pytest.raises(ValueError):
        rate_sweep(CASE1, [1.0], 5)
    with pytest.raises(ValueError):
        rate_sweep(CASE1, [2.0, 1.0], 5)
    with pytest.raises(NotSynergistic):
        rate_sweep(CsitPattern.parse("NN,ND,DD,PN"), [1.0, 2.0], 5)


def test_rate_sweep_deterministic():
    a = rate_sweep(CASE1, 2.0 ** np.array([10, 20]), 50, seed=4)
    b = rate_sweep(CASE1, 2.0 ** np.array([10, 20]), 50, seed=4)
    assert np.array_equal(a.mean_rate, b.mean_rate) and a.slope == b.slope


@pytest.mark.parametrize("pattern", EXEMPLARS, ids=str)
def test_high_power_slope(pattern):
    sweep = rate_sweep(pattern, 2.0 ** np.linspace(30, 40, 5), 300, seed=1)
    assert abs(sweep.slope - 1.25) < 0.05
    assert sweep.resample_count == 0


def test_top_half_slope_close_to_full():
    sweep = rate_sweep(CASE1, 2.0 ** np.linspace(20, 40, 5), 300, seed=2)
    assert abs(sweep.top_half_slope() - sweep.slope) < 0.02
    assert len(sweep.rows()) == 5


def test_mirrored_slope_matches():
    powers = 2.0 ** np.linspace(30, 40, 3)
    a = rate_sweep(CASE1, powers, 200, seed=5)
    b = rate_sweep(mirror_pattern(CASE1), powers, 200, seed=5)
    assert abs(a.slope - b.slope) < 0.01
