import numpy as np
import pytest

from ihrlab.core import DegradationParams
from ihrlab.experiment1 import (
    Exp1Config,
    TrialRecord,
    bin_sizes,
    collapse_fraction,
    evaluate_trial,
    quantile_bins,
    run_experiment1,
    sample_trial,
)


@pytest.fixture(scope="module")
def default_trials():
    return run_experiment1(Exp1Config())


def test_sample_trial_bounds_and_invariants(default_trials):
    cfg = Exp1Config()
    for rec in default_trials:
        assert 0.10 <= rec.u < 1.80
        assert 0.05 <= rec.k < 0.90
        assert rec.ihr == cfg.capacity_c / (rec.u + rec.k)
        assert rec.collapsed == (rec.accuracy < cfg.degradation.collapse_threshold)


def test_sample_trial_deterministic():
    cfg = Exp1Config()
    assert sample_trial(cfg, 17) == sample_trial(cfg, 17)


def test_run_matches_per_trial_sampling(default_trials):
    cfg = Exp1Config()
    for i in (0, 1, 199, 399):
        assert default_trials[i] == sample_trial(cfg, i)


def test_sample_trial_index_range():
    with pytest.raises(IndexError):
        sample_trial(Exp1Config(), 400)


def test_zero_noise_trial_composes_core():
    cfg = Exp1Config(degradation=DegradationParams(accuracy_noise_sd=0.0))
    rec = evaluate_trial(cfg, 0, 0.55, 0.35, 0.0)
    assert rec.accuracy == pytest.approx(0.7221, abs=1e-12)
    assert rec.collapsed is True


def test_zero_noise_config_draws_exact_zero():
    cfg = Exp1Config(degradation=DegradationParams(accuracy_noise_sd=0.0))
    rec = sample_trial(cfg, 3)
    d = cfg.degradation
    assert rec.accuracy == d.base_accuracy - d.coef_u * rec.u - d.coef_k * rec.k - d.coef_interaction * (rec.u * rec.k)


def test_empty_run():
    assert run_experiment1(Exp1Config(n_trials=0)) == []


def test_ihr_bounds(default_trials):
    assert all(1.0 / 2.70 < r.ihr <= 1.0 / 0.15 for r in default_trials)
    assert [r.trial_index for r in default_trials] == list(range(400))


def test_reproducible_and_worker_independent(default_trials):
    assert run_experiment1(Exp1Config()) == default_trials
    assert run_experiment1(Exp1Config(), workers=7) == default_trials


def test_seed_changes_results(default_trials):
    assert run_experiment1(Exp1Config(master_seed=1)) != default_trials


def test_config_invariants():
    with pytest.raises(ValueError, match="u_lo < u_hi"):
        Exp1Config(u_hi=0.05)
    with pytest.raises(ValueError, match="k_lo < k_hi"):
        Exp1Config(k_lo=1.0)
    with pytest.raises(ValueError, match="n_bins <= n_trials"):
        Exp1Config(n_trials=4, n_bins=8)


def test_bin_sizes_remainder_rule():
    assert bin_sizes(400, 8) == [50] * 8
    assert bin_sizes(10, 3) == [4, 3, 3]
    assert bin_sizes(11, 4) == [3, 3, 3, 2]


def _records(ihrs, collapsed=None):
    collapsed = collapsed or [False] * len(ihrs)
    return [TrialRecord(i, 0.0, 0.0, x, 0.0, c) for i, (x, c) in enumerate(zip(ihrs, collapsed))]


def test_quantile_bins_ten_into_three():
    recs = _records([0.9, 0.1, 0.5, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6, 1.0])
    bins = quantile_bins(recs, 3)
    assert [b.count for b in bins] == [4, 3, 3]
    assert [b.upper for b in bins] == [0.4, 0.7, 1.0]
    assert bins[0].lower == 0.1 and bins[1].lower == 0.4
    assert bins[0].mean_ihr == pytest.approx(0.25)


def test_quantile_bins_tie_break_by_trial_index():
    recs = _records([0.5, 0.5, 0.5, 0.5], [True, False, True, False])
    bins = quantile_bins(recs, 2)
    # indices 0, 1 land in the first bin
    assert [b.collapse_prob for b in bins] == [0.5, 0.5]
    recs = _records([0.5, 0.5, 0.5, 0.5], [True, True, False, False])
    assert [b.collapse_prob for b in quantile_bins(recs, 2)] == [1.0, 0.0]


def test_quantile_bins_errors():
    with pytest.raises(ValueError):
        quantile_bins([], 3)
    with pytest.raises(ValueError):
        quantile_bins(_records([0.1, 0.2]), 0)


def test_default_bins_partition(default_trials):
    bins = quantile_bins(default_trials, 8)
    assert [b.count for b in bins] == [50] * 8
    assert sum(b.count for b in bins) == 400
    means = [b.mean_ihr for b in bins]
    assert all(b > a for a, b in zip(means, means[1:]))
    assert all(b.lower < b.upper for b in bins[1:])
    ordered = sorted(r.ihr for r in default_trials)
    assert [b.upper for b in bins] == ordered[49::50]
    # every trial in exactly one bin
    for r in default_trials:
        hits = [j for j, b in enumerate(bins) if b.lower < r.ihr <= b.upper or (j == 0 and r.ihr == b.lower)]
        assert len(hits) == 1


def test_default_bins_shape(default_trials):
    probs = [b.collapse_prob for b in quantile_bins(default_trials, 8)]
    assert all(p >= 0.98 for p in probs[:5])
    assert probs[-1] <= 0.02
    assert all(b - a <= 0.05 for a, b in zip(probs, probs[1:]))


def test_collapse_fraction_close_to_model(default_trials):
    # P(acc < 0.74) under the stated model is 0.8101 (quadrature); binomial sd ~0.02
    assert collapse_fraction(default_trials) == pytest.approx(0.8101, abs=0.06)
    assert collapse_fraction([]) == 0.0


def test_model_collapse_probability_by_quadrature():
    from scipy import integrate, stats

    def integrand(k, u):
        mean = 0.96 - 0.22 * u - 0.18 * k - 0.28 * u * k
        return stats.norm.cdf((0.74 - mean) / 0.015)

    val, _ = integrate.dblquad(integrand, 0.10, 1.80, 0.05, 0.90)
    p = val / (1.70 * 0.85)
    big = run_experiment1(Exp1Config(n_trials=40_000, master_seed=99))
    assert collapse_fraction(big) == pytest.approx(p, abs=4 * np.sqrt(p * (1 - p) / 40_000))
