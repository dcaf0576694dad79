import matplotlib.pyplot as plt
import numpy as np
import pytest
from scipy.stats import chi2_contingency

from dominter import pointfield
from dominter.pointfield import RadialPiecewise, RadialPowerLaw, UniformDensity


@pytest.mark.parametrize("m, c_m", [(1, 2.0), (2, np.pi), (3, 4 * np.pi / 3)])
def test_uniform_average_count(m, c_m):
    density = UniformDensity(0.3)
    assert pointfield.average_count(density, m, 2.0) == pytest.approx(c_m * 0.3 * 2.0 ** m)


def test_average_count_negative_radius():
    with pytest.raises(ValueError):
        pointfield.average_count(UniformDensity(1.0), 2, -1.0)


def test_power_law_flat_matches_uniform():
    r = np.linspace(0.1, 50, 20)
    flat = RadialPowerLaw(0.02, 0.0)
    uniform = UniformDensity(0.02)
    for m in (1, 2, 3):
        assert np.allclose(flat.average_count(m, r), uniform.average_count(m, r))


def test_power_law_diverges():
    with pytest.raises(ValueError, match="beta"):
        RadialPowerLaw(1.0, -2.0).average_count(2, 1.0)


def test_piecewise_single_level_matches_uniform():
    r = np.linspace(0.0, 30, 31)
    piecewise = RadialPiecewise([5.0, 10.0], [0.1, 0.1, 0.1])
    assert np.allclose(piecewise.average_count(2, r), UniformDensity(0.1).average_count(2, r))


def test_piecewise_validation():
    with pytest.raises(ValueError):
        RadialPiecewise([5.0], [0.1])
    with pytest.raises(ValueError):
        RadialPiecewise([5.0, 2.0], [0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        RadialPiecewise([5.0], [0.1, -0.2])


@pytest.mark.parametrize(
    "density",
    [
        UniformDensity(0.05),
        RadialPowerLaw(0.05, 1.5, r_ref=2.0),
        RadialPowerLaw(0.05, -1.0),
        RadialPiecewise([2.0, 6.0], [0.2, 0.0, 0.05]),
    ],
)
def test_inverse_average_count(density):
    r = np.linspace(0.5, 20, 40)
    if isinstance(density, RadialPiecewise):
        # the empty shell is not invertible
        r = r[(r < 2.0) | (r > 6.0)]
    n = density.average_count(2, r)
    assert np.allclose(density.inverse_average_count(2, n), r)


def test_shell_count_is_derivative():
    density = RadialPowerLaw(0.05, 0.7)
    r = np.linspace(1, 10, 10)
    h = 1e-6
    numeric = (density.average_count(2, r + h) - density.average_count(2, r - h)) / (2 * h)
    assert np.allclose(density.shell_count(2, r), numeric, rtol=1e-6)


def test_sample_field_count(rng, standard_error):
    density = UniformDensity(0.01)
    n_bar = float(density.average_count(2, 10.0))
    counts = np.array([len(pointfield.sample_field(density, 2, 10.0, rng)) for _ in range(4000)])
    assert abs(counts.mean() - n_bar) < 4 * np.sqrt(n_bar / len(counts))


def test_disjoint_shells_independent_poisson(rng):
    # N(R) = 4, split into (0, R/2] with mean 1 and (R/2, R] with mean 3
    density = UniformDensity(4.0 / np.pi)
    n_fields = 10000
    inner = np.empty(n_fields, dtype=int)
    outer = np.empty(n_fields, dtype=int)
    for i in range(n_fields):
        r = pointfield.sample_field(density, 2, 1.0, rng).distances
        inner[i] = np.count_nonzero(r <= 0.5)
        outer[i] = len(r) - inner[i]

    for counts, mean in ((inner, 1.0), (outer, 3.0)):
        assert abs(counts.mean() - mean) < 4 * np.sqrt(mean / n_fields)
        assert counts.var() / counts.mean() == pytest.approx(1.0, abs=0.1)

    table = np.zeros((4, 7))
    np.add.at(table, (np.minimum(inner, 3), np.minimum(outer, 6)), 1)
    _, p_value, _, _ = chi2_contingency(table)
    assert p_value > 0.01


def test_sample_field_sorted_and_inside(rng):
    density = RadialPowerLaw(0.5, 1.0)
    pf = pointfield.sample_field(density, 2, 5.0, rng, inner_radius=2.0)
    assert len(pf) > 0
    assert np.all(np.diff(pf.distances) >= 0)
    assert np.all(pf.distances > 2.0)
    assert np.all(pf.distances <= 5.0)


def test_sample_field_fixed_count(rng):
    pf = pointfield.sample_field(UniformDensity(1e-6), 2, 10.0, rng, count=7)
    assert len(pf) == 7


def test_sample_field_empty(rng):
    pf = pointfield.sample_field(UniformDensity(0.0), 3, 10.0, rng)
    assert len(pf) == 0


def test_sample_field_invalid_radii(rng):
    with pytest.raises(ValueError):
        pointfield.sample_field(UniformDensity(1.0), 2, 0.0, rng)
    with pytest.raises(ValueError):
        pointfield.sample_field(UniformDensity(1.0), 2, 1.0, rng, inner_radius=1.0)


def test_kth_nearest_distance(rng, standard_error, tmp_path):
    density = UniformDensity(0.05)
    k = 2
    r = np.linspace(0.5, 6, 12)
    trials = 4000
    kth = np.full(trials, np.inf)
    for i in range(trials):
        d = pointfield.sample_field(density, 2, 10.0, rng).distances
        if len(d) >= k:
            kth[i] = d[k - 1]
    empirical = np.array([np.mean(kth <= ri) for ri in r])
    exact = pointfield.kth_nearest_distance_cdf(density, 2, k, r)
    assert np.all(np.abs(empirical - exact) < 4 * standard_error(exact, trials))

    fig, ax = plt.subplots(nrows=1)
    ax.plot(r, exact, label="exact")
    ax.plot(r, empirical, ".", label="sampled")
    ax.set_xlabel("r")
    ax.set_ylabel(r"$F_2(r)$")
    ax.legend()
    fig.savefig(tmp_path / "kth_nearest.png", dpi=150)
    plt.close("all")


def test_nearest_distance_cdf():
    density = UniformDensity(0.1)
    r = np.array([0.0, 1.0, 3.0])
    assert np.allclose(
        pointfield.nearest_distance_cdf(density, 2, r), 1 - np.exp(-0.1 * np.pi * r ** 2)
    )
    with pytest.raises(ValueError):
        pointfield.kth_nearest_distance_cdf(density, 2, 0, 1.0)
