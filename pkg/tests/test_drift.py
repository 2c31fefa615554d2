import numpy as np
import pytest

from ihrlab.core import REFERENCE_IHR_STAR
from ihrlab.drift import (
    DEFAULT_SIGMAS,
    DriftConfig,
    RegimeStats,
    Trajectory,
    run_noise_sweep,
    simulate_batch,
    simulate_run,
    summarize_regime,
)

from oracles import drift_closed_form

# (mean_ihr, ihr_sd, collapse_rate, frac_below_star) reported for selected noise levels
REPORTED_SWEEP = {
    0.000: (1.071, 0.133, 0.663, 0.775),
    0.050: (1.075, 0.152, 0.660, 0.775),
    0.100: (1.089, 0.208, 0.640, 0.738),
    0.150: (1.120, 0.326, 0.618, 0.695),
    0.200: (1.159, 0.452, 0.597, 0.664),
    0.225: (1.233, 4.809, 0.589, 0.648),
    0.300: (1.991, 19.760, 0.574, 0.620),
}


@pytest.fixture(scope="module")
def sweep():
    return dict(run_noise_sweep(DriftConfig()))


def test_default_sigma_grid():
    assert len(DEFAULT_SIGMAS) == 13
    assert DEFAULT_SIGMAS[0] == 0.0 and DEFAULT_SIGMAS[-1] == 0.3
    assert np.allclose(np.diff(DEFAULT_SIGMAS), 0.025)


def test_zero_noise_first_step():
    tr = simulate_run(DriftConfig(), None, 0)
    assert tr.ihr[0] == pytest.approx(1.2 / 0.9, abs=1e-15)
    assert len(tr.ihr) == len(tr.u) == len(tr.c) == len(tr.collapse_event) == 120


def test_zero_noise_matches_closed_form_elementwise():
    cfg = DriftConfig()
    tr = simulate_run(cfg, None, 5)
    ref = drift_closed_form(0.55, 0.35, 0.0025, 0.0015, 1.2, 120)
    assert list(tr.u) == [r[0] for r in ref]
    assert list(tr.k) == [r[1] for r in ref]
    assert list(tr.ihr) == [r[2] for r in ref]


def test_zero_noise_threshold_crossing():
    tr = simulate_run(DriftConfig(), None, 0)
    below = np.flatnonzero(tr.ihr < REFERENCE_IHR_STAR)
    assert below[0] == 27
    assert tr.ihr[27] == pytest.approx(1.2 / 1.008, abs=1e-12)
    assert below.size == 93


def test_zero_noise_regime_anchor():
    ref = drift_closed_form(0.55, 0.35, 0.0025, 0.0015, 1.2, 120)
    closed_mean = sum(r[2] for r in ref) / 120
    assert closed_mean == pytest.approx(1.070545, abs=1e-6)
    stats = summarize_regime(simulate_batch(DriftConfig(n_runs=3)), REFERENCE_IHR_STAR)
    assert stats.frac_below_star == 0.775
    assert stats.mean_ihr == pytest.approx(closed_mean, abs=1e-12)
    assert stats.mean_ihr == pytest.approx(1.071, abs=0.001)


def test_zero_noise_runs_identical():
    one = run_noise_sweep(DriftConfig(n_runs=1), [0.0])
    many = run_noise_sweep(DriftConfig(n_runs=400), [0.0])
    assert one[0][1].mean_ihr == pytest.approx(many[0][1].mean_ihr, rel=1e-14)
    assert one[0][1].ihr_sd == pytest.approx(many[0][1].ihr_sd, abs=1e-14)
    assert one[0][1].frac_below_star == many[0][1].frac_below_star


def test_constant_trajectory_summary():
    n = 10
    tr = Trajectory(0, *(np.ones(n) * v for v in (0.5, 0.5, 2.0, 2.0, 0.01)), np.zeros(n, dtype=np.int8))
    stats = summarize_regime([tr], 1.194)
    assert stats == RegimeStats(mean_ihr=2.0, ihr_sd=0.0, collapse_rate=pytest.approx(0.01), frac_below_star=0.0)


def test_summarize_empty():
    with pytest.raises(ValueError):
        summarize_regime([], 1.194)


def test_summary_list_and_batch_agree():
    batch = simulate_batch(DriftConfig(noise_sd=0.1, n_runs=20))
    a = summarize_regime(batch)
    b = summarize_regime(batch.runs())
    assert a.mean_ihr == pytest.approx(b.mean_ihr, rel=1e-14)
    assert a.frac_below_star == b.frac_below_star


def test_frac_below_monotone_in_threshold():
    batch = simulate_batch(DriftConfig(noise_sd=0.1, n_runs=50))
    fracs = [summarize_regime(batch, s).frac_below_star for s in np.linspace(0.8, 1.6, 17)]
    assert all(b >= a for a, b in zip(fracs, fracs[1:]))


def test_high_noise_positivity():
    batch = simulate_batch(DriftConfig(noise_sd=0.3))
    assert np.all(batch.ihr > 0)
    assert np.all((batch.collapse_prob > 0) & (batch.collapse_prob < 1))
    assert np.all(batch.u >= 0.001) and np.all(batch.k >= 0.001)
    assert np.any(batch.u == 0.001) or np.any(batch.k == 0.001)


@pytest.mark.parametrize("sigma", [0.0, 0.1, 0.3])
def test_events_consistent_with_probabilities(sigma):
    batch = simulate_batch(DriftConfig(noise_sd=sigma))
    p = batch.collapse_prob
    se = np.sqrt(np.sum(p * (1 - p))) / p.size
    assert abs(batch.collapse_event.mean() - p.mean()) <= 3 * se


def test_u_and_k_noise_independent():
    cfg = DriftConfig(noise_sd=0.1, n_runs=400)
    batch = simulate_batch(cfg)
    t = np.arange(cfg.horizon_t)
    eu = (batch.u - (0.55 + 0.0025 * t)).ravel()
    ek = (batch.k - (0.35 + 0.0015 * t)).ravel()
    assert abs(np.corrcoef(eu, ek)[0, 1]) < 0.02
    assert eu.std() == pytest.approx(0.1, rel=0.02)


def test_noise_is_not_accumulated():
    cfg = DriftConfig(noise_sd=0.1, n_runs=400)
    batch = simulate_batch(cfg)
    t = np.arange(cfg.horizon_t)
    dev = batch.u - (0.55 + 0.0025 * t)
    # spread stays flat over time instead of growing like sqrt(t)
    assert dev[:, -1].std() == pytest.approx(dev[:, 0].std(), rel=0.2)


def test_worker_count_does_not_change_results():
    cfg = DriftConfig(noise_sd=0.2, n_runs=37)
    a = simulate_batch(cfg, workers=1)
    b = simulate_batch(cfg, workers=5)
    for name in ("u", "k", "c", "ihr", "collapse_prob", "collapse_event"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert run_noise_sweep(cfg, [0.0, 0.1, 0.3], workers=3) == run_noise_sweep(cfg, [0.0, 0.1, 0.3])


def test_single_run_equals_batch_row():
    cfg = DriftConfig(noise_sd=0.15)
    batch = simulate_batch(cfg, run_indices=np.arange(10))
    tr = simulate_run(cfg, None, 7)
    assert np.array_equal(tr.ihr, batch.ihr[7])
    assert np.array_equal(tr.collapse_event, batch.collapse_event[7])


def test_independent_levels_option():
    cfg = DriftConfig(n_runs=50)
    shared = run_noise_sweep(cfg, [0.1, 0.1])
    independent = run_noise_sweep(cfg, [0.1, 0.1], common_noise=False)
    assert shared[0] == shared[1]
    assert independent[0] != independent[1]


def test_config_invariants():
    with pytest.raises(ValueError):
        DriftConfig(u0=0.0, k0=0.0)
    with pytest.raises(ValueError):
        DriftConfig(horizon_t=0)
    with pytest.raises(ValueError):
        DriftConfig(noise_sd=-0.1)


def test_sweep_interpretable_regime(sweep):
    for sigma in (0.05, 0.10, 0.15, 0.20):
        mean, _, rate, frac = REPORTED_SWEEP[sigma]
        got = sweep[sigma]
        assert got.mean_ihr == pytest.approx(mean, abs=0.05)
        assert got.frac_below_star == pytest.approx(frac, abs=0.05)
        assert got.collapse_rate == pytest.approx(rate, abs=0.06)


def test_sweep_artifact_regime(sweep):
    assert sweep[0.3].ihr_sd > 5
    assert sweep[0.3].mean_ihr > 1.5
    means = [sweep[s].mean_ihr for s in DEFAULT_SIGMAS]
    assert all(b >= a for a, b in zip(means, means[1:]))
