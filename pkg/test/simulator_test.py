import matplotlib.pyplot as plt
import numpy as np
import pytest

from dominter import config, simulator
from dominter.analytic import CancellationPolicy
from dominter.fading import Rayleigh
from dominter.filtering import Sector, Tabulated
from dominter.pointfield import RadialPowerLaw, UniformDensity
from dominter.simulator import Scenario
from dominter.utils import db_grid, db_to_linear


@pytest.fixture
def scenario(link4, dense):
    return Scenario(m=2, params=link4, density=dense, trials=4000, master_seed=11, label="k1")


def test_scenario_validation(link4, dense):
    with pytest.raises(ValueError):
        Scenario(m=4, params=link4, density=dense)
    with pytest.raises(ValueError):
        Scenario(m=2, params=link4, density=dense, trials=0)
    with pytest.raises(ValueError):
        Scenario(m=2, params=link4, density=dense, region_multiplier=0.5)
    with pytest.raises(ValueError):
        Scenario(m=2, params=link4, density=dense, region_multiplier=5.0)
    with pytest.raises(ValueError):
        Scenario(m=2, params=link4, density=dense, master_seed=-1)
    with pytest.raises(ValueError, match="region_multiplier"):
        Scenario(m=2, params=link4, density=dense, fixed_count=1, region_multiplier=2.0)


def test_scenario_zones(scenario):
    assert scenario.zones.n_max == pytest.approx(100.0)
    assert scenario.region_radius == pytest.approx(1e3)
    assert scenario.with_trials(10).trials == 10
    assert scenario.with_seed(3).master_seed == 3


def test_run_trial_is_pure(scenario):
    assert simulator.run_trial(scenario, 17) == simulator.run_trial(scenario, 17)
    assert simulator.run_trial(scenario, 17) != simulator.run_trial(scenario, 18)


def test_trial_bounds(scenario):
    for i in range(200):
        rec = simulator.run_trial(scenario, i)
        assert rec.nearest <= rec.total
        assert rec.top1 + rec.top2 <= rec.total * (1 + 1e-12)
        assert rec.total <= rec.upper * (1 + 1e-12)
        # no fading: the strongest survivor is the nearest one
        assert rec.nearest == rec.top1


def test_empty_field(link4):
    empty = Scenario(m=2, params=link4, density=UniformDensity(0.0), trials=50)
    assert simulator.run_trial(empty, 0) == simulator.TrialRecord(0.0, 0.0)
    curve = simulator.estimate_outage_curve(empty, [0.0, 10.0])
    assert np.all(curve.count_total == 0)


def test_single_interferer(scenario):
    single = Scenario(
        m=2,
        params=scenario.params,
        density=scenario.density,
        fixed_count=1,
        trials=500,
    )
    for i in range(50):
        rec = simulator.run_trial(single, i)
        assert rec.survivors == 1
        assert rec.nearest == rec.total
    report = simulator.dominance_report(single, [0.0, 10.0, 20.0])
    assert np.all(report.ratio[~report.insufficient] == 1.0)

    # cancelling the only interferer leaves nothing
    cancelled = Scenario(
        m=2,
        params=scenario.params,
        density=scenario.density,
        policy=CancellationPolicy.complete(2),
        fixed_count=1,
        trials=10,
    )
    assert simulator.run_trial(cancelled, 0) == simulator.TrialRecord(0.0, 0.0)


def test_counts_independent_of_chunking(scenario):
    grid = db_grid(30, 70, 5)
    small = scenario.with_trials(600)
    a = simulator.estimate_outage_curve(small, grid, chunk_size=600)
    b = simulator.estimate_outage_curve(small, grid, chunk_size=37)
    c = simulator.estimate_outage_curve(small, grid, workers=2, chunk_size=50)
    assert np.array_equal(a.count_total, b.count_total)
    assert np.array_equal(a.count_nearest, b.count_nearest)
    assert np.array_equal(a.count_total, c.count_total)
    assert np.array_equal(a.count_nearest, c.count_nearest)


def test_reservoir_independent_of_chunking(scenario):
    small = scenario.with_trials(500)
    a = simulator.estimate_outage_curve(small, [40.0], chunk_size=500, retain=50)
    b = simulator.estimate_outage_curve(small, [40.0], chunk_size=64, retain=50)
    assert a.retained.shape == (50, 2)
    assert np.array_equal(a.retained, b.retained)

    q = a.quantiles([0.1, 0.5, 0.9])
    assert np.all(np.diff(q) >= 0)

    with pytest.raises(ValueError, match="retain"):
        simulator.estimate_outage_curve(small.with_trials(10), [40.0]).quantiles([0.5])


def test_monotone_coupling(scenario):
    grid = db_grid(-10, 30, 5)
    near = scenario.with_trials(300)
    far = Scenario(
        m=2,
        params=near.params,
        density=near.density,
        region_multiplier=2.5,
        trials=300,
        master_seed=near.master_seed,
    )
    for i in range(20):
        assert simulator.run_trial(far, i).total >= simulator.run_trial(near, i).total
    a = simulator.estimate_outage_curve(near, grid)
    b = simulator.estimate_outage_curve(far, grid)
    assert np.all(b.count_total >= a.count_total)


def test_nearest_matches_exact(scenario, standard_error):
    grid = db_grid(36, 70, 2)
    curve = simulator.estimate_outage_curve(scenario, grid)
    se = standard_error(curve.p_exact, curve.trials)
    assert np.all(np.abs(curve.p_nearest - curve.p_exact) < 4 * se)
    assert np.all(curve.p_total >= curve.p_nearest)


def test_second_nearest_matches_exact(link4, dense, standard_error):
    k2 = Scenario(
        m=2,
        params=link4,
        density=dense,
        policy=CancellationPolicy.complete(2),
        trials=4000,
        master_seed=5,
    )
    curve = simulator.estimate_outage_curve(k2, db_grid(30, 60, 3))
    se = standard_error(curve.p_exact, curve.trials)
    assert np.all(np.abs(curve.p_nearest - curve.p_exact) < 4 * se)


def test_radial_density(link4, standard_error):
    density = RadialPowerLaw(1e-4, 0.5, r_ref=1e3)
    radial = Scenario(m=2, params=link4, density=density, trials=3000, master_seed=2)
    curve = simulator.estimate_outage_curve(radial, db_grid(30, 48, 3))
    assert np.all(np.isfinite(curve.p_exact))
    se = standard_error(curve.p_exact, curve.trials)
    assert np.all(np.abs(curve.p_nearest - curve.p_exact) < 4 * se)


def test_rayleigh_nearest_matches_faded_exact(link4, sparse, standard_error):
    faded = Scenario(
        m=2, params=link4, density=sparse, fading=Rayleigh(), trials=4000, master_seed=3
    )
    curve = simulator.estimate_outage_curve(faded, db_grid(30, 60, 5))
    assert curve.fading_shift == pytest.approx(0.886226925453)
    se = standard_error(curve.p_exact, curve.trials)
    assert np.all(np.abs(curve.p_nearest - curve.p_exact) < 4 * se)


def test_partial_nearest_is_attenuated_nearest(link4, dense):
    partial = Scenario(
        m=2,
        params=link4,
        density=dense,
        policy=CancellationPolicy.partial(2, 0.1),
        trials=50,
    )
    plain = Scenario(m=2, params=link4, density=dense, trials=50)
    for i in range(20):
        p = simulator.run_trial(partial, i)
        n = simulator.run_trial(plain, i)
        assert p.total <= n.total
        assert p.nearest <= n.nearest


def test_analytic_columns(link4, dense):
    d_db = np.array([40.0, 60.0])
    plain = simulator.analytic_curve(Scenario(m=2, params=link4, density=dense), d_db)
    assert plain["p_exact"][0] == pytest.approx(1 - np.exp(-1))
    assert plain["d0_db"] == pytest.approx(40.0)
    assert plain["q_factor"] == 1.0

    sector = Scenario(m=2, params=link4, density=dense, filter=Sector(0.1))
    cols = simulator.analytic_curve(sector, d_db)
    assert np.all(np.isnan(cols["p_exact"]))
    assert cols["q_factor"] == 10.0
    assert cols["fading_shift"] == pytest.approx(0.1)
    assert cols["p_approx"][1] == pytest.approx(plain["p_approx"][1] / 10)

    partial = Scenario(
        m=2, params=link4, density=dense, policy=CancellationPolicy.partial(2, 0.1)
    )
    cols = simulator.analytic_curve(partial, d_db)
    assert np.all(np.isnan(cols["p_exact"]))
    assert cols["p_approx"][1] == pytest.approx(plain["p_approx"][1] * np.sqrt(0.1))


def test_blocking_filter(link4, dense):
    shut = Scenario(
        m=2,
        params=link4,
        density=dense,
        filter=Tabulated([0.0, 1.0], [0.0, 0.0]),
        trials=200,
        master_seed=4,
    )
    d_db = np.array([40.0, 60.0])
    with pytest.warns(RuntimeWarning, match="blocks every interferer"):
        cols = simulator.analytic_curve(shut, d_db)
    assert np.isinf(cols["q_factor"])
    assert cols["fading_shift"] == 0.0
    assert np.all(cols["p_approx"] == 0.0)
    assert np.all(cols["regime_valid"])

    with pytest.warns(RuntimeWarning):
        curve = simulator.estimate_outage_curve(shut, d_db)
    assert np.all(curve.count_total == 0)
    assert curve.pass_rate() == 1.0


def test_sector_filter_thins_tail(link4, dense, standard_error):
    sector = Scenario(
        m=2, params=link4, density=dense, filter=Sector(0.1), trials=4000, master_seed=9
    )
    grid = db_grid(40, 60, 5)
    curve = simulator.estimate_outage_curve(sector, grid)
    # the mainlobe nodes form a Poisson field of a tenth of the density
    thinned = -np.expm1(-100.0 * db_to_linear(grid) ** -0.5 / 10)
    se = standard_error(thinned, curve.trials)
    assert np.all(curve.p_total >= curve.p_nearest)
    assert np.all(np.abs(curve.p_total - thinned) < 4 * se + 0.2 * thinned)


def test_within_ci_and_pass_rate(scenario):
    curve = simulator.estimate_outage_curve(scenario, db_grid(44, 70, 2))
    assert curve.within_ci().dtype == bool
    assert np.all(curve.regime_valid)
    assert 0.0 <= curve.pass_rate() <= 1.0
    lo, hi = curve.ci_total
    assert np.all(lo <= curve.p_total) and np.all(curve.p_total <= hi)
    assert np.all(curve.half_width_total > 0)


def test_few_trials_give_wide_intervals(scenario):
    curve = simulator.estimate_outage_curve(scenario.with_trials(10), db_grid(20, 80, 10))
    assert np.all(curve.half_width_total > 0.15)


def test_grid_validation(scenario):
    with pytest.raises(ValueError):
        simulator.estimate_outage_curve(scenario, [])
    with pytest.raises(AssertionError):
        simulator.estimate_outage_curve(scenario, [50.0, 40.0])


def test_dominance_report(scenario, tmp_path):
    x_db = db_grid(40, 70, 3)
    report = simulator.dominance_report(scenario, x_db)
    ok = ~report.insufficient
    assert np.all(report.ratio[ok] >= 1.0)
    assert np.all(report.lower_ratio[ok] <= report.ratio[ok])
    assert np.all(report.ratio[ok] <= report.upper_ratio[ok])
    assert np.all(report.ci_lo[ok] <= report.ratio[ok])
    assert np.all(report.ratio[ok] <= report.ci_hi[ok])
    assert report.expected_tail_index == 0.5
    assert np.isnan(report.tail_index[-1])
    assert len(report.tail_index) == len(x_db)

    fig, ax = plt.subplots(nrows=1)
    ax.plot(report.x_db, report.ratio, label="total / nearest")
    ax.fill_between(report.x_db, report.ci_lo, report.ci_hi, alpha=0.3)
    ax.plot(report.x_db, report.upper_ratio, ":", label="upper bound")
    ax.set_xlabel("x [dB]")
    ax.legend()
    fig.savefig(tmp_path / "dominance.png", dpi=150)
    plt.close("all")


def _preset_scenario(name, label):
    (s,) = [s for s in config.preset(name).scenarios if s.label == label]
    return s.with_seed(1)


@pytest.mark.slow
@pytest.mark.parametrize(
    "name, label, grid",
    [
        ("fig3", "nu4", (51, 63, 4)),
        ("fig4", "k1", (81, 93, 4)),
        ("fig4", "k2", (60, 69, 3)),
        ("fig4", "partial", (72, 84, 4)),
        ("fig5", "k1", (74, 86, 4)),
        ("fig5", "k2", (54, 62, 4)),
    ],
)
def test_dominance_in_tail(name, label, grid):
    # acceptance scale: ratio within [1, 1.15] wherever the outage is below 1e-2,
    # and the upper interval edge does not grow toward the tail beyond its own width
    s = _preset_scenario(name, label)
    report = simulator.dominance_report(s, db_grid(*grid), workers=8)
    tail = (report.p_total <= 1e-2) & ~report.insufficient
    assert np.count_nonzero(tail) >= 3
    assert np.all((report.ratio[tail] >= 1.0) & (report.ratio[tail] <= 1.15))

    hi = report.ci_hi[tail]
    width = hi - report.ci_lo[tail]
    assert np.all(np.diff(hi) <= width[1:])


@pytest.mark.slow
def test_rayleigh_shift_constant(link4, sparse):
    faded = Scenario(
        m=2, params=link4, density=sparse, fading=Rayleigh(), trials=1000000, master_seed=1
    )
    plain = Scenario(m=2, params=link4, density=sparse, trials=1, master_seed=1)
    grid = db_grid(60, 88, 4)
    curve = simulator.estimate_outage_curve(faded, grid, workers=8)
    reference = simulator.analytic_curve(plain, grid)["p_exact"]
    tail = curve.p_total <= 1e-2
    ratio = curve.p_total[tail] / reference[tail]
    assert np.all((ratio >= 0.886 * 0.9) & (ratio <= 0.886 * 1.1))


@pytest.mark.slow
def test_exponential_cancellation_scaling_mc(link4, dense):
    d = [70.0]
    k1 = Scenario(m=2, params=link4, density=dense, trials=10000000, master_seed=1)
    k2 = Scenario(
        m=2,
        params=link4,
        density=dense,
        policy=CancellationPolicy.complete(2),
        trials=10000000,
        master_seed=1,
    )
    p1 = simulator.estimate_outage_curve(k1, d, workers=8).p_total[0]
    p2 = simulator.estimate_outage_curve(k2, d, workers=8).p_total[0]
    assert p2 == pytest.approx(p1 ** 2 / 2, rel=0.15)


@pytest.mark.slow
def test_compare_pass_rate(link4, dense):
    s = Scenario(m=2, params=link4, density=dense, trials=1000000, master_seed=1)
    curve = simulator.estimate_outage_curve(s, db_grid(50, 80, 2), workers=8)
    assert curve.pass_rate() >= 0.9


@pytest.mark.slow
def test_partial_cancellation_is_a_shift(link4, dense):
    # alpha = 0.1 costs 10 dB: the partial curve at D matches the plain one at D + 10 dB
    k1 = Scenario(m=2, params=link4, density=dense, trials=2000000, master_seed=1)
    partial = Scenario(
        m=2,
        params=link4,
        density=dense,
        policy=CancellationPolicy.partial(2, 0.1),
        trials=2000000,
        master_seed=2,
    )
    grid = db_grid(80, 90, 2)
    a = simulator.estimate_outage_curve(k1, grid, workers=8)
    b = simulator.estimate_outage_curve(partial, grid - 10.0, workers=8)
    assert np.allclose(b.p_total, a.p_total, rtol=0.15)
