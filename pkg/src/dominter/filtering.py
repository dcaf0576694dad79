r"""
Linear filtering at the receiver (antenna pattern, frequency selectivity) through a normalized power gain :math:`0 \le K(z) \le 1` of a random filtering variable :math:`z \sim f_z`.

For a uniform Poisson field the filter thins the interferers that exceed any INR by the statistical selectivity

.. math::

    Q = \left( \int_{\Delta z} K^{m/\nu}(z) f_z(z) \, dz \right)^{-1} \ge 1
"""

import warnings

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .analytic import density_bound, outage
from .utils import integrate


class FilterModel:
    r"""
    Base class. Subclasses provide ``gain(z)``, ``sample`` and ``moment``.
    """

    name = "base"

    def gain(self, z):
        raise NotImplementedError

    def sample(self, rng, size=None):
        raise NotImplementedError

    def moment(self, q):
        raise NotImplementedError

    def to_dict(self):
        return {"kind": self.name}

    def __eq__(self, other):
        return type(self) == type(other) and self.__dict__ == other.__dict__

    def __repr__(self):
        args = ", ".join("{:}={:g}".format(k, v) for k, v in self.__dict__.items())
        return "{:}({:})".format(type(self).__name__, args)


class Isotropic(FilterModel):
    r"""
    No filtering, :math:`K \equiv 1` and :math:`Q = 1`.
    """

    name = "isotropic"

    def gain(self, z):
        return np.ones_like(np.asarray(z, dtype=float))

    def sample(self, rng, size=None):
        return np.ones(size) if size is not None else 1.0

    def moment(self, q):
        return 1.0


class Sector(FilterModel):
    r"""
    Sector antenna: full gain over a fraction :math:`p` of the directions and a flat backlobe elsewhere. With :math:`z \sim U[0, 1)`, :math:`K(z) = 1` for :math:`z < p` and the backlobe level otherwise, so

    .. math::

        Q = \left(p + (1 - p) b^{m/\nu}\right)^{-1}

    Args:
        p (float): mainlobe fraction, :math:`0 < p \le 1`
        backlobe (float): backlobe power gain, :math:`0 \le b < 1`
    """

    name = "sector"

    def __init__(self, p, backlobe=0.0):
        if not 0 < p <= 1:
            raise ValueError("sector fraction p must lie in (0, 1], got {:}".format(p))
        if not 0 <= backlobe < 1:
            raise ValueError("backlobe must lie in [0, 1), got {:}".format(backlobe))
        self.p = float(p)
        self.backlobe = float(backlobe)

    def gain(self, z):
        return np.where(np.asarray(z, dtype=float) < self.p, 1.0, self.backlobe)

    def sample(self, rng, size=None):
        return self.gain(rng.random(size))

    def moment(self, q):
        if q == 0:
            return 1.0
        return self.p + (1.0 - self.p) * self.backlobe ** q

    def to_dict(self):
        return {"kind": self.name, "p": self.p, "backlobe": self.backlobe}


class CosPower(FilterModel):
    r"""
    Smooth single-lobe pattern :math:`K(z) = \cos^n(z/2)` over angle of arrival :math:`z \sim U[-\pi, \pi)`.

    Args:
        n (float): pattern exponent, :math:`n \ge 0` (0 is isotropic)
    """

    name = "cos_power"

    def __init__(self, n):
        if not n >= 0:
            raise ValueError("pattern exponent n must be nonnegative, got {:}".format(n))
        self.n = float(n)

    def gain(self, z):
        return np.cos(np.asarray(z, dtype=float) / 2.0) ** self.n

    def sample(self, rng, size=None):
        return self.gain(rng.uniform(-np.pi, np.pi, size))

    def moment(self, q):
        if q == 0 or self.n == 0:
            return 1.0
        return integrate(
            lambda z: np.cos(z / 2.0) ** (self.n * q) / (2.0 * np.pi),
            -np.pi,
            np.pi,
            label="cos-power pattern moment",
        )

    def to_dict(self):
        return {"kind": self.name, "n": self.n}


class Tabulated(FilterModel):
    r"""
    Tabulated gain :math:`K(z)` with an optional weight column for :math:`f_z` (uniform over the table range when omitted). Both are linearly interpolated between samples, and :math:`f_z` is normalized to integrate to 1. A multi-variable filter enters as a table pre-marginalized over its joint density.

    Args:
        z (array): strictly increasing filtering variable samples
        gain (array): :math:`K(z)` samples in :math:`[0, 1]`
        weights (array): unnormalized :math:`f_z` samples, optional
    """

    name = "tabulated"
    # sub-intervals per table interval for the inverse-CDF sampler
    refine = 32

    def __init__(self, z, gain, weights=None):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        gain = np.atleast_1d(np.asarray(gain, dtype=float))
        if z.shape != gain.shape:
            raise ValueError("z and gain columns must have the same length")
        if np.any(np.diff(z) <= 0):
            raise ValueError("z must be strictly increasing")
        if np.any(gain < 0) or np.any(gain > 1):
            raise ValueError("filter gain must lie in [0, 1]")
        if weights is None:
            weights = np.ones_like(z)
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        if weights.shape != z.shape or np.any(weights < 0):
            raise ValueError("weights must be nonnegative and match z")

        self.z = z
        self.gain_table = gain
        self.weights = weights

        if len(z) > 1:
            norm = trapezoid(weights, z)
            if not norm > 0:
                raise ValueError("weights must not vanish over the table")
            self._norm = norm
            zz = np.concatenate(
                [np.linspace(a, b, self.refine, endpoint=False) for a, b in zip(z[:-1], z[1:])]
                + [z[-1:]]
            )
            cdf = cumulative_trapezoid(np.interp(zz, z, weights), zz, initial=0.0)
            self._zz = zz
            self._cdf = cdf / cdf[-1]

    @classmethod
    def from_file(cls, path):
        r"""
        Load a whitespace-delimited table with columns ``z, K`` and an optional third ``f_z`` weight column.
        """
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] not in (2, 3):
            raise ValueError(
                "filter table {:} needs 2 or 3 columns, found {:}".format(path, data.shape[1])
            )
        weights = data[:, 2] if data.shape[1] == 3 else None
        return cls(data[:, 0], data[:, 1], weights)

    def gain(self, z):
        return np.interp(z, self.z, self.gain_table)

    def pdf_z(self, z):
        return np.interp(z, self.z, self.weights, left=0.0, right=0.0) / self._norm

    def sample(self, rng, size=None):
        if len(self.z) == 1:
            value = self.gain_table[0]
            return np.full(size, value) if size is not None else float(value)
        z = np.interp(rng.random(size), self._cdf, self._zz)
        return self.gain(z)

    def moment(self, q):
        if len(self.z) == 1:
            return float(self.gain_table[0] ** q)
        points = self.z[1:-1] if len(self.z) > 2 else None
        return integrate(
            lambda t: self.gain(t) ** q * self.pdf_z(t),
            self.z[0],
            self.z[-1],
            label="tabulated pattern moment",
            limit=max(200, 4 * len(self.z)),
            points=points,
        )

    def to_dict(self):
        return {
            "kind": self.name,
            "z": self.z.tolist(),
            "gain": self.gain_table.tolist(),
            "weights": self.weights.tolist(),
        }

    def __eq__(self, other):
        return (
            isinstance(other, Tabulated)
            and np.array_equal(self.z, other.z)
            and np.array_equal(self.gain_table, other.gain_table)
            and np.array_equal(self.weights, other.weights)
        )

    def __repr__(self):
        return "Tabulated({:} points)".format(len(self.z))


def filter_moment(filter, q):
    r"""
    :math:`\mathbb{E}[K^q(z)]` over :math:`f_z`, clipped at 1 (:math:`K \le 1`).
    """
    return min(float(filter.moment(q)), 1.0)


def q_factor(filter, m, nu):
    r"""
    Statistical selectivity :math:`Q = 1/\mathbb{E}[K^{m/\nu}]` of a filter.

    A filter with :math:`K \equiv 0` blocks everything; :math:`Q = \infty` is returned with a ``RuntimeWarning``.

    Args:
        filter (FilterModel): filter
        m (int): dimension
        nu (float): path-loss exponent
    """
    moment = filter_moment(filter, m / nu)
    if moment == 0:
        warnings.warn(RuntimeWarning("{:} blocks every interferer: Q is infinite".format(filter)))
        return np.inf
    return 1.0 / moment


def apply_filter(filter, rng, size=None):
    r"""
    Draw :math:`z \sim f_z` and return the power gains :math:`K(z)`, independently per interferer.
    """
    return filter.sample(rng, size)


def filtered_outage(D, filter, density, m, params, policy=None):
    r"""
    Outage probability behind a filter: the unfiltered result with :math:`\bar{N}_\mathrm{max}` replaced by :math:`\bar{N}_\mathrm{max}/Q`,

    .. math::

        P_\mathrm{out} = 1 - e^{-\bar{N}(D)/Q} \approx \frac{\bar{N}_\mathrm{max}}{Q D^{m/\nu}}

    Only uniform densities are supported.

    Returns:
        OutagePoint
    """
    if not density.is_uniform:
        raise ValueError("filtered outage is only available for a uniform density")
    return outage(D, policy, density, m, params, q_factor=q_factor(filter, m, params.nu))


def filtered_density_bound(epsilon, D, filter, m, params, policy=None):
    r"""
    Outage/density tradeoff behind a filter: the unfiltered bound times :math:`Q`.

    Returns:
        TradeoffBound
    """
    return density_bound(
        epsilon, D, policy, m, params, q_factor=q_factor(filter, m, params.nu)
    )
