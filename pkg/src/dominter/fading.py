r"""
Fading power gains and their fractional moments.

A fading model multiplies the average power of every interferer by an i.i.d. gain :math:`g`. Far into the outage tail the outage probability of the :math:`k`-th strongest interferer is shifted by the constant

.. math::

    M_q = \mathbb{E}[g^q] = \int_0^\infty x^q f_g(x) \, dx, \qquad q = km/\nu

as long as the tail of :math:`g` is lighter than :math:`x^{-q}`.

.. note::

    :class:`LogNormal` is normalized to **median** 1 (:math:`\ln g \sim \mathcal{N}(0, \sigma^2)`), not mean 1, so every positive fractional moment exceeds 1. ``sigma`` is in nepers; use :meth:`LogNormal.from_db` for a spread quoted in dB.
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import gamma, gammaln

from .analytic import FadingShift, nbar_of_inr, outage
from .utils import integrate, poisson_tail, sigma_db_to_neper


class FadingModel:
    r"""
    Base class. Subclasses provide ``sample``, ``pdf`` and ``ccdf``; ``moment`` and ``expect`` fall back to adaptive quadrature over the density.
    """

    name = "base"
    # analytic verdict that Pr{g > x} x^q -> 0 for every finite q
    light_tail = False

    def sample(self, rng, size=None):
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def ccdf(self, x):
        raise NotImplementedError

    def expect(self, func, lower=0.0, upper=np.inf, epsrel=1e-9):
        r"""
        :math:`\int_a^b \mathrm{func}(x) f_g(x) \, dx` by adaptive quadrature.
        """
        return integrate(
            lambda x: func(x) * self.pdf(x),
            lower,
            upper,
            label="{:} expectation".format(self.name),
            epsrel=epsrel,
        )

    def moment(self, q):
        if q == 0:
            return 1.0
        return self.expect(lambda x: x ** q)

    def to_dict(self):
        return {"kind": self.name}

    def __eq__(self, other):
        return type(self) == type(other) and self.__dict__ == other.__dict__

    def __repr__(self):
        args = ", ".join("{:}={:g}".format(k, v) for k, v in self.__dict__.items())
        return "{:}({:})".format(type(self).__name__, args)


class NoFading(FadingModel):
    r"""
    Deterministic unit gain.
    """

    name = "none"
    light_tail = True

    def sample(self, rng, size=None):
        return np.ones(size) if size is not None else 1.0

    def ccdf(self, x):
        return np.where(np.asarray(x, dtype=float) < 1.0, 1.0, 0.0)

    def expect(self, func, lower=0.0, upper=np.inf, epsrel=1e-9):
        return float(func(1.0)) if lower <= 1.0 < upper else 0.0

    def moment(self, q):
        return 1.0


class Rayleigh(FadingModel):
    r"""
    Rayleigh fading: exponential power gain with unit mean, :math:`f_g(x) = e^{-x}`, and :math:`M_q = \Gamma(q + 1)`.
    """

    name = "rayleigh"
    light_tail = True

    def sample(self, rng, size=None):
        return rng.exponential(1.0, size)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, np.exp(-x), 0.0)

    def ccdf(self, x):
        return np.exp(-np.maximum(np.asarray(x, dtype=float), 0.0))

    def moment(self, q):
        return float(gamma(q + 1.0))


class LogNormal(FadingModel):
    r"""
    Log-normal shadowing with median 1: :math:`\ln g \sim \mathcal{N}(0, \sigma^2)` and :math:`M_q = e^{(\sigma q)^2/2}`.

    Args:
        sigma (float): standard deviation of :math:`\ln g` [Np], positive
    """

    name = "lognormal"
    light_tail = True

    def __init__(self, sigma):
        if not sigma > 0:
            raise ValueError("log-normal sigma must be positive, got {:}".format(sigma))
        self.sigma = float(sigma)

    @classmethod
    def from_db(cls, sigma_db):
        return cls(sigma_db_to_neper(sigma_db))

    def sample(self, rng, size=None):
        return np.exp(self.sigma * rng.standard_normal(size))

    def pdf(self, x):
        return stats.lognorm.pdf(x, s=self.sigma)

    def ccdf(self, x):
        return stats.lognorm.sf(x, s=self.sigma)

    def expect(self, func, lower=0.0, upper=np.inf, epsrel=1e-9):
        # integrate over the standard normal variable z = ln(g) / sigma
        with np.errstate(divide="ignore"):
            z_lo = np.log(lower) / self.sigma
            z_hi = np.log(upper) / self.sigma
        return integrate(
            lambda z: func(np.exp(self.sigma * z)) * stats.norm.pdf(z),
            z_lo,
            z_hi,
            label="log-normal expectation",
            epsrel=epsrel,
        )

    def moment(self, q):
        return float(np.exp((self.sigma * q) ** 2 / 2.0))

    def to_dict(self):
        return {"kind": self.name, "sigma": self.sigma}


class Composite(FadingModel):
    r"""
    Rayleigh fading on top of median-1 log-normal shadowing, :math:`g = g_s g_l`, with :math:`M_q = \Gamma(q + 1) e^{(\sigma q)^2/2}`. The density and tail are one-dimensional integrals over the shadowing variable.

    Args:
        sigma (float): log-normal spread [Np]
    """

    name = "composite"
    light_tail = True

    def __init__(self, sigma):
        if not sigma > 0:
            raise ValueError("log-normal sigma must be positive, got {:}".format(sigma))
        self.sigma = float(sigma)

    @classmethod
    def from_db(cls, sigma_db):
        return cls(sigma_db_to_neper(sigma_db))

    def sample(self, rng, size=None):
        return rng.exponential(1.0, size) * np.exp(self.sigma * rng.standard_normal(size))

    def pdf(self, x):
        if x <= 0:
            return 0.0
        return integrate(
            lambda z: np.exp(-x * np.exp(-self.sigma * z) - self.sigma * z)
            * stats.norm.pdf(z),
            -np.inf,
            np.inf,
            label="composite density",
            epsrel=1e-8,
        )

    def ccdf(self, x):
        if x <= 0:
            return 1.0
        return integrate(
            lambda z: np.exp(-x * np.exp(-self.sigma * z)) * stats.norm.pdf(z),
            -np.inf,
            np.inf,
            label="composite tail",
            epsrel=1e-8,
        )

    def expect(self, func, lower=0.0, upper=np.inf, epsrel=1e-8):
        def inner(z):
            scale = np.exp(self.sigma * z)
            return integrate(
                lambda x: func(scale * x) * np.exp(-x),
                lower / scale,
                upper / scale,
                label="composite inner expectation",
                epsrel=epsrel,
            )

        return integrate(
            lambda z: inner(z) * stats.norm.pdf(z),
            -np.inf,
            np.inf,
            label="composite expectation",
            epsrel=epsrel,
        )

    def moment(self, q):
        return float(gamma(q + 1.0) * np.exp((self.sigma * q) ** 2 / 2.0))

    def to_dict(self):
        return {"kind": self.name, "sigma": self.sigma}


class Nakagami(FadingModel):
    r"""
    Nakagami-:math:`m` fading: Gamma power gain with shape :math:`m_f` and unit mean,

    .. math::

        M_q = \frac{\Gamma(m_f + q)}{\Gamma(m_f) m_f^q}

    Args:
        m_f (float): fading figure, :math:`m_f \ge 1/2` (:math:`m_f = 1` is Rayleigh)
    """

    name = "nakagami"
    light_tail = True

    def __init__(self, m_f):
        if not m_f >= 0.5:
            raise ValueError("Nakagami fading figure must be >= 0.5, got {:}".format(m_f))
        self.m_f = float(m_f)

    def sample(self, rng, size=None):
        return rng.gamma(self.m_f, 1.0 / self.m_f, size)

    def pdf(self, x):
        return stats.gamma.pdf(x, a=self.m_f, scale=1.0 / self.m_f)

    def ccdf(self, x):
        return stats.gamma.sf(x, a=self.m_f, scale=1.0 / self.m_f)

    def moment(self, q):
        return float(np.exp(gammaln(self.m_f + q) - gammaln(self.m_f) - q * np.log(self.m_f)))

    def to_dict(self):
        return {"kind": self.name, "m": self.m_f}


class Weibull(FadingModel):
    r"""
    Weibull power gain with unit mean, :math:`\Pr\{g > x\} = e^{-(x/\lambda)^c}` with :math:`\lambda = 1/\Gamma(1 + 1/c)`. Fractional moments by quadrature.

    Args:
        shape (float): :math:`c > 0`
    """

    name = "weibull"
    light_tail = True

    def __init__(self, shape):
        if not shape > 0:
            raise ValueError("Weibull shape must be positive, got {:}".format(shape))
        self.shape = float(shape)
        self.scale = float(1.0 / gamma(1.0 + 1.0 / self.shape))

    def sample(self, rng, size=None):
        return self.scale * rng.weibull(self.shape, size)

    def pdf(self, x):
        return stats.weibull_min.pdf(x, self.shape, scale=self.scale)

    def ccdf(self, x):
        return stats.weibull_min.sf(x, self.shape, scale=self.scale)

    def to_dict(self):
        return {"kind": self.name, "shape": self.shape}

    def __repr__(self):
        return "Weibull(shape={:g})".format(self.shape)


class Rice(FadingModel):
    r"""
    Rician fading with unit mean power: a noncentral :math:`\chi^2` power gain with 2 degrees of freedom, noncentrality :math:`2K` and scale :math:`1/(2(K+1))`. Fractional moments by quadrature. :math:`K = 0` is Rayleigh.

    Args:
        k_factor (float): ratio of specular to scattered power, :math:`K \ge 0`
    """

    name = "rice"
    light_tail = True

    def __init__(self, k_factor):
        if not k_factor >= 0:
            raise ValueError("Rice K factor must be nonnegative, got {:}".format(k_factor))
        self.k_factor = float(k_factor)
        self.scale = 1.0 / (2.0 * (self.k_factor + 1.0))

    def sample(self, rng, size=None):
        if self.k_factor == 0:
            return rng.exponential(1.0, size)
        return self.scale * rng.noncentral_chisquare(2, 2 * self.k_factor, size)

    def pdf(self, x):
        if self.k_factor == 0:
            return stats.expon.pdf(x)
        return stats.ncx2.pdf(x, 2, 2 * self.k_factor, scale=self.scale)

    def ccdf(self, x):
        if self.k_factor == 0:
            return stats.expon.sf(x)
        return stats.ncx2.sf(x, 2, 2 * self.k_factor, scale=self.scale)

    def to_dict(self):
        return {"kind": self.name, "k_factor": self.k_factor}

    def __repr__(self):
        return "Rice(k_factor={:g})".format(self.k_factor)


def sample_gain(model, rng, size=None):
    r"""
    Draw i.i.d. power gains from a fading model.

    Args:
        model (FadingModel): fading model
        rng (numpy.random.Generator): random stream
        size (int): number of draws, ``None`` for a scalar
    """
    return model.sample(rng, size)


def fractional_moment(model, q):
    r"""
    Fractional moment :math:`M_q = \mathbb{E}[g^q]`. Closed forms for Rayleigh, log-normal, composite and Nakagami; adaptive quadrature (relative tolerance :math:`10^{-9}`) otherwise.

    Args:
        model (FadingModel): fading model
        q (float): order, :math:`q \ge 0`

    Raises:
        RuntimeError: if the quadrature does not converge
    """
    if q < 0:
        raise ValueError("moment order must be nonnegative, got {:}".format(q))
    return model.moment(q)


def tail_dominance_check(model, q, numeric=False):
    r"""
    Whether the tail of the gain is lighter than :math:`x^{-q}`, i.e. :math:`\Pr\{g > x\} x^q \to 0`.

    The built-in models all have exponential or log-normal tails and pass analytically. Other models (or ``numeric=True``) are checked by evaluating :math:`\Pr\{g > x\} x^q` at :math:`x = 10^2, 10^3, 10^4`, which must be identically zero or strictly decreasing.

    Args:
        model: fading model with a ``ccdf`` method
        q (float): order, :math:`q > 0`
        numeric (bool): skip the analytic verdict
    """
    if not q > 0:
        raise ValueError("tail order must be positive, got {:}".format(q))
    if not numeric and getattr(model, "light_tail", False):
        return True

    x = np.array([1e2, 1e3, 1e4])
    values = np.array([float(model.ccdf(xi)) for xi in x]) * x ** q
    if not np.all(np.isfinite(values)):
        return False
    if np.all(values == 0):
        return True
    return bool(np.all(np.diff(values) <= 0) and values[-1] < values[0])


def fading_shift(model, policy, m, nu):
    r"""
    :class:`~dominter.analytic.FadingShift` of a fading model under a cancellation policy.
    """
    return FadingShift.for_policy(model, policy, m, nu)


def _exact_tail(D, policy, density, m, params):
    if policy is not None and policy.is_partial:
        raise ValueError(
            "no exact law for {:} cancellation; use the shifted approximation instead".format(
                policy.kind
            )
        )
    k = 1 if policy is None else policy.k

    def tail(g):
        if g <= 0:
            return 0.0
        return float(poisson_tail(k, nbar_of_inr(D / g, density, m, params)))

    return tail


def faded_outage(D, model, policy, density, m, params):
    r"""
    Exact outage probability of the :math:`k`-th nearest interferer under fading,

    .. math::

        P_\mathrm{out} = \int_0^\infty f_g(g) \bar{F}_{d_k}(D/g) \, dg

    by adaptive quadrature.

    Args:
        D (float): distortion-free INR
        model (FadingModel): fading model
        policy (CancellationPolicy): none or complete cancellation
        density (DensityModel): node density
        m (int): dimension
        params (LinkParams): link budget
    """
    if not D > 0:
        raise ValueError("distortion-free INR must be positive, got {:}".format(D))
    return model.expect(_exact_tail(D, policy, density, m, params), epsrel=1e-8)


@dataclass(frozen=True)
class FadedOutageParts:
    r"""
    Split of the faded outage integral at :math:`g = D^s`.

    :ivar low_gain: :math:`I_1`, the contribution of gains below :math:`D^s`
    :ivar high_gain: :math:`I_2`, the contribution of gains above :math:`D^s`
    :ivar high_gain_bound: :math:`\Pr\{g > D^s\} \ge I_2`
    :ivar leading: small-outage approximation :math:`M_q \bar{N}^k/k!` that :math:`I_1` approaches
    """

    d: float
    split: float
    low_gain: float
    high_gain: float
    high_gain_bound: float
    leading: float

    @property
    def total(self):
        return self.low_gain + self.high_gain


def faded_outage_decomposition(D, model, policy, density, m, params, split=0.5):
    r"""
    Decompose the faded outage integral at :math:`g = D^s`, :math:`0 < s < 1`. For large :math:`D` the low-gain part carries the whole shifted approximation while the high-gain part is bounded by the (fast-decaying) tail of the gain.

    Returns:
        FadedOutageParts
    """
    if not 0 < split < 1:
        raise ValueError("split exponent must lie in (0, 1), got {:}".format(split))
    tail = _exact_tail(D, policy, density, m, params)
    g_split = D ** split
    low = model.expect(tail, 0.0, g_split, epsrel=1e-8)
    high = model.expect(tail, g_split, np.inf, epsrel=1e-8)
    shift = fading_shift(model, policy, m, params.nu)
    leading = outage(D, policy, density, m, params, shift).p_approx
    return FadedOutageParts(
        d=float(D),
        split=float(split),
        low_gain=low,
        high_gain=high,
        high_gain_bound=float(model.ccdf(g_split)),
        leading=leading,
    )
