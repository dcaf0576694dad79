import matplotlib.pyplot as plt
import numpy as np
import pytest
from scipy.special import gamma

from dominter import fading
from dominter.analytic import CancellationPolicy, outage
from dominter.fading import (
    Composite,
    LogNormal,
    Nakagami,
    NoFading,
    Rayleigh,
    Rice,
    Weibull,
)
from dominter.utils import db_to_linear

MODELS = [
    Rayleigh(),
    LogNormal(0.5),
    Composite(0.5),
    Nakagami(2.5),
    Weibull(1.7),
    Rice(3.0),
]


def test_lognormal_moment_closed_form():
    assert fading.fractional_moment(LogNormal(1.0), 0.5) == pytest.approx(np.exp(0.125), abs=1e-9)


def test_lognormal_from_db():
    assert LogNormal.from_db(10.0).sigma == pytest.approx(np.log(10.0))
    with pytest.raises(ValueError):
        LogNormal(0.0)


def test_rayleigh_moment():
    assert fading.fractional_moment(Rayleigh(), 0.5) == pytest.approx(0.886226925453, abs=1e-10)


@pytest.mark.parametrize("model", [Nakagami(1.0), Weibull(1.0), Rice(0.0)])
def test_rayleigh_special_cases(model):
    for q in (0.25, 0.5, 1.0, 2.0):
        assert fading.fractional_moment(model, q) == pytest.approx(gamma(q + 1.0), rel=1e-7)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_unit_mean_or_median(model):
    if isinstance(model, LogNormal):
        assert model.ccdf(1.0) == pytest.approx(0.5)
    else:
        assert fading.fractional_moment(model, 1.0) == pytest.approx(1.0, rel=1e-7)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_moment_matches_sampling(model, rng):
    g = fading.sample_gain(model, rng, 200000)
    for q in (0.25, 0.5, 1.0, 2.0):
        samples = g ** q
        se = samples.std() / np.sqrt(len(samples))
        assert abs(samples.mean() - fading.fractional_moment(model, q)) < 4 * se


def test_quadrature_moment_matches_closed_form():
    # the base class quadrature against the Nakagami closed form
    model = Nakagami(2.5)
    for q in (0.25, 0.5, 1.0, 2.0):
        numeric = fading.FadingModel.moment(model, q)
        assert numeric == pytest.approx(model.moment(q), rel=1e-8)


def test_composite_density_and_tail():
    model = Composite(0.5)
    x = 2.0
    h = 1e-3
    numeric = -(model.ccdf(x + h) - model.ccdf(x - h)) / (2 * h)
    assert model.pdf(x) == pytest.approx(numeric, rel=1e-4)
    assert model.ccdf(0.0) == 1.0


def test_moment_order_zero():
    for model in MODELS + [NoFading()]:
        assert fading.fractional_moment(model, 0.0) == 1.0
    with pytest.raises(ValueError):
        fading.fractional_moment(Rayleigh(), -0.5)


def test_tail_dominance():
    for model in MODELS:
        assert fading.tail_dominance_check(model, 1.0)
    # closed-form tails only; the composite tail is itself a quadrature
    for model in (Rayleigh(), LogNormal(0.5), Nakagami(2.5), Weibull(1.7), Rice(3.0)):
        assert fading.tail_dominance_check(model, 1.0, numeric=True)
    with pytest.raises(ValueError):
        fading.tail_dominance_check(Rayleigh(), 0.0)


def test_fading_shift_policy_orders():
    model = LogNormal(1.0)
    assert fading.fading_shift(model, None, 2, 4).shift == pytest.approx(np.exp(0.125))
    assert fading.fading_shift(model, CancellationPolicy.complete(2), 2, 4).shift == pytest.approx(
        np.exp(0.5)
    )


def test_to_dict():
    assert Nakagami(2.0).to_dict() == {"kind": "nakagami", "m": 2.0}
    assert LogNormal(1.0).to_dict() == {"kind": "lognormal", "sigma": 1.0}
    assert Rayleigh() == Rayleigh()
    assert LogNormal(1.0) != LogNormal(2.0)


def test_faded_outage_without_fading(link4, sparse):
    d = db_to_linear(45.0)
    exact = outage(d, None, sparse, 2, link4).p_exact
    assert fading.faded_outage(d, NoFading(), None, sparse, 2, link4) == pytest.approx(exact)


@pytest.mark.parametrize("k", [1, 2])
def test_faded_outage_approaches_shifted_approximation(link4, sparse, k):
    policy = CancellationPolicy.complete(k)
    model = Rayleigh()
    shift = fading.fading_shift(model, policy, 2, 4)
    ratios = []
    for d_db in (60.0, 70.0, 80.0):
        d = db_to_linear(d_db)
        exact = fading.faded_outage(d, model, policy, sparse, 2, link4)
        approx = outage(d, policy, sparse, 2, link4, shift).p_approx
        ratios.append(exact / approx)
    ratios = np.array(ratios)
    assert np.all(np.abs(ratios - 1) < 0.06)
    # the ratio tends to 1 along the tail
    assert np.all(np.diff(np.abs(ratios - 1)) < 0)


def test_faded_outage_rejects_partial(link4, sparse):
    with pytest.raises(ValueError, match="partial"):
        fading.faded_outage(1e6, Rayleigh(), CancellationPolicy.partial(2, 0.1), sparse, 2, link4)


def test_faded_outage_decomposition(link4, sparse):
    model = Rayleigh()
    d = db_to_linear(70.0)
    parts = fading.faded_outage_decomposition(d, model, None, sparse, 2, link4)
    total = fading.faded_outage(d, model, None, sparse, 2, link4)
    assert parts.total == pytest.approx(total, rel=1e-6)
    assert parts.high_gain <= parts.high_gain_bound
    assert parts.high_gain < 1e-6 * parts.low_gain
    assert parts.low_gain / parts.leading == pytest.approx(1.0, abs=0.03)
    with pytest.raises(ValueError):
        fading.faded_outage_decomposition(d, model, None, sparse, 2, link4, split=1.0)


def test_faded_curves_plot(link4, sparse, tmp_path):
    d_db = np.arange(30.0, 80.0, 2.0)
    fig, ax = plt.subplots(nrows=1)
    for model in (NoFading(), Rayleigh(), LogNormal.from_db(6.0)):
        p = [fading.faded_outage(db_to_linear(x), model, None, sparse, 2, link4) for x in d_db]
        ax.semilogy(d_db, p, label=model.name)
    ax.set_xlabel("D [dB]")
    ax.set_ylabel(r"$P_\mathrm{out}$")
    ax.legend()
    fig.savefig(tmp_path / "faded_outage.png", dpi=150)
    plt.close("all")
