r"""
Poisson fields of interferers around a receiver at the origin.

Only radii are materialized: the interference power of a node depends on its distance alone, and the filtering variables are attached downstream by :mod:`dominter.filtering`.
"""

import numpy as np

from .constants import unit_ball
from .utils import poisson_tail


def _check_dimension(m):
    if m not in unit_ball:
        raise ValueError("dimension must be 1, 2 or 3, got {:}".format(m))


class DensityModel:
    r"""
    Base class for a radially symmetric node density :math:`\rho(r)` [nodes per unit :math:`m`-volume].

    Subclasses implement the ball integral :math:`\bar{N}(r) = \int_{V(r)} \rho \, dV` and its inverse in closed form, so the sampler never integrates numerically.
    """

    is_uniform = False

    def average_count(self, m, r):
        raise NotImplementedError

    def shell_count(self, m, r):
        r"""
        Radial derivative :math:`d\bar{N}/dr = m c_m r^{m-1} \rho(r)`.
        """
        _check_dimension(m)
        r = np.asarray(r, dtype=float)
        return m * unit_ball[m] * r ** (m - 1) * self.rho(r)

    def inverse_average_count(self, m, n):
        raise NotImplementedError

    def rho(self, r):
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) == type(other) and self.__dict__ == other.__dict__


class UniformDensity(DensityModel):
    r"""
    Constant density, :math:`\bar{N}(r) = c_m \rho_0 r^m`.

    Args:
        rho0 (float): density, :math:`\rho_0 \ge 0`
    """

    is_uniform = True

    def __init__(self, rho0):
        if not rho0 >= 0:
            raise ValueError("rho0 must be nonnegative, got {:}".format(rho0))
        self.rho0 = float(rho0)

    def rho(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.rho0)

    def average_count(self, m, r):
        _check_dimension(m)
        return unit_ball[m] * self.rho0 * np.asarray(r, dtype=float) ** m

    def inverse_average_count(self, m, n):
        _check_dimension(m)
        return (np.asarray(n, dtype=float) / (unit_ball[m] * self.rho0)) ** (1.0 / m)

    def __repr__(self):
        return "UniformDensity(rho0={:g})".format(self.rho0)


class RadialPowerLaw(DensityModel):
    r"""
    Power-law density :math:`\rho(r) = \rho_0 (r / r_\mathrm{ref})^\beta`, giving

    .. math::

        \bar{N}(r) = \frac{\rho_0 m c_m r_\mathrm{ref}^{-\beta}}{m + \beta} r^{m + \beta}

    The ball integral is finite only for :math:`\beta > -m`, which is checked when the dimension is known.

    Args:
        rho0 (float): density at :math:`r_\mathrm{ref}`
        beta (float): radial exponent
        r_ref (float): reference radius
    """

    def __init__(self, rho0, beta, r_ref=1.0):
        if not rho0 >= 0:
            raise ValueError("rho0 must be nonnegative, got {:}".format(rho0))
        if not r_ref > 0:
            raise ValueError("r_ref must be positive, got {:}".format(r_ref))
        self.rho0 = float(rho0)
        self.beta = float(beta)
        self.r_ref = float(r_ref)

    def _prefactor(self, m):
        _check_dimension(m)
        if not self.beta > -m:
            raise ValueError(
                "beta = {:} makes the ball integral diverge in {:} dimensions (need beta > -{:})".format(
                    self.beta, m, m
                )
            )
        return self.rho0 * m * unit_ball[m] * self.r_ref ** (-self.beta) / (m + self.beta)

    def rho(self, r):
        return self.rho0 * (np.asarray(r, dtype=float) / self.r_ref) ** self.beta

    def average_count(self, m, r):
        return self._prefactor(m) * np.asarray(r, dtype=float) ** (m + self.beta)

    def inverse_average_count(self, m, n):
        a = self._prefactor(m)
        return (np.asarray(n, dtype=float) / a) ** (1.0 / (m + self.beta))

    def __repr__(self):
        return "RadialPowerLaw(rho0={:g}, beta={:g}, r_ref={:g})".format(
            self.rho0, self.beta, self.r_ref
        )


class RadialPiecewise(DensityModel):
    r"""
    Piecewise-constant density over concentric shells.

    ``levels[0]`` holds inside ``breakpoints[0]``, ``levels[i]`` on ``[breakpoints[i-1], breakpoints[i])`` and ``levels[-1]`` beyond the last breakpoint. The ball integral is accumulated shell by shell in closed form.

    Args:
        breakpoints (array): strictly increasing positive radii
        levels (array): nonnegative densities, one more than ``breakpoints``
    """

    def __init__(self, breakpoints, levels):
        breakpoints = np.atleast_1d(np.asarray(breakpoints, dtype=float))
        levels = np.atleast_1d(np.asarray(levels, dtype=float))
        if len(levels) != len(breakpoints) + 1:
            raise ValueError(
                "need len(levels) == len(breakpoints) + 1, got {:} and {:}".format(
                    len(levels), len(breakpoints)
                )
            )
        if np.any(breakpoints <= 0) or np.any(np.diff(breakpoints) <= 0):
            raise ValueError("breakpoints must be positive and strictly increasing")
        if np.any(levels < 0):
            raise ValueError("levels must be nonnegative")
        self.breakpoints = breakpoints
        self.levels = levels

    def __eq__(self, other):
        return (
            isinstance(other, RadialPiecewise)
            and np.array_equal(self.breakpoints, other.breakpoints)
            and np.array_equal(self.levels, other.levels)
        )

    def rho(self, r):
        idx = np.searchsorted(self.breakpoints, np.asarray(r, dtype=float), side="right")
        return self.levels[idx]

    def _edges(self):
        return np.concatenate([[0.0], self.breakpoints])

    def _cumulative(self, m):
        # count inside each breakpoint
        _check_dimension(m)
        edges = self._edges()
        shells = unit_ball[m] * self.levels[:-1] * (edges[1:] ** m - edges[:-1] ** m)
        return np.concatenate([[0.0], np.cumsum(shells)])

    def average_count(self, m, r):
        r = np.asarray(r, dtype=float)
        cum = self._cumulative(m)
        edges = self._edges()
        idx = np.searchsorted(self.breakpoints, r, side="right")
        return cum[idx] + unit_ball[m] * self.levels[idx] * (r ** m - edges[idx] ** m)

    def inverse_average_count(self, m, n):
        n = np.asarray(n, dtype=float)
        cum = self._cumulative(m)
        edges = self._edges()
        # a count lying exactly on a shell total maps to that shell's outer edge
        idx = np.searchsorted(cum[1:], n, side="left")
        with np.errstate(divide="ignore", invalid="ignore"):
            inside = edges[idx] ** m + (n - cum[idx]) / (unit_ball[m] * self.levels[idx])
        inside = np.where(self.levels[idx] > 0, inside, edges[idx] ** m)
        return inside ** (1.0 / m)

    def __repr__(self):
        return "RadialPiecewise(breakpoints={:}, levels={:})".format(
            list(self.breakpoints), list(self.levels)
        )


class PointField:
    r"""
    One realization of interferer distances around the receiver.

    Args:
        dimension (int): :math:`m \in \{1, 2, 3\}`
        distances (array): radii, sorted ascending, all in :math:`(0, R]`
        region_radius (float): :math:`R`
    """

    def __init__(self, dimension, distances, region_radius):
        _check_dimension(dimension)
        distances = np.asarray(distances, dtype=float)
        assert distances.ndim == 1, "distances must be a flat array"
        assert np.all(np.diff(distances) >= 0), "distances must be sorted ascending"
        self.dimension = dimension
        self.distances = distances
        self.region_radius = float(region_radius)

    def __len__(self):
        return len(self.distances)


def average_count(density, m, r):
    r"""
    Average number of nodes in the ball of radius :math:`r`,

    .. math::

        \bar{N}(r) = \int_{V(r)} \rho \, dV

    with :math:`c_1 = 2`, :math:`c_2 = \pi`, :math:`c_3 = 4\pi/3` for the uniform case :math:`\bar{N} = c_m \rho r^m`.

    Args:
        density (DensityModel): node density
        m (int): dimension
        r (float or array): radius, :math:`r \ge 0`

    Returns:
        expected count (same shape as ``r``)
    """
    if np.any(np.asarray(r) < 0):
        raise ValueError("radius must be nonnegative")
    return density.average_count(m, r)


def sample_field(density, m, region_radius, rng, inner_radius=0.0, count=None):
    r"""
    Draw one Poisson field on the shell :math:`(r_\mathrm{in}, R]`.

    The node count is Poisson with mean :math:`\bar{N}(R) - \bar{N}(r_\mathrm{in})` and the radii are i.i.d. by inverse transform of :math:`\bar{N}(r)`, using :math:`u \in (0, 1]` so that no node lands on the inner edge.

    Args:
        density (DensityModel): node density
        m (int): dimension
        region_radius (float): outer radius :math:`R > 0`
        rng (numpy.random.Generator): random stream
        inner_radius (float): inner radius, default 0 (full ball)
        count (int): if given, condition on exactly this many nodes

    Returns:
        PointField: the sampled distances, ascending
    """
    if not region_radius > 0:
        raise ValueError("region_radius must be positive, got {:}".format(region_radius))
    if not 0 <= inner_radius < region_radius:
        raise ValueError("inner_radius must lie in [0, region_radius)")

    n_in = float(density.average_count(m, inner_radius)) if inner_radius > 0 else 0.0
    n_out = float(density.average_count(m, region_radius))
    if count is None:
        count = rng.poisson(n_out - n_in)

    if count == 0 or n_out == n_in:
        return PointField(m, np.empty(0), region_radius)

    u = 1.0 - rng.random(count)
    r = density.inverse_average_count(m, n_in + u * (n_out - n_in))
    # rounding in the inverse can step a hair past the edge
    r = np.minimum(r, region_radius)
    return PointField(m, np.sort(r), region_radius)


def kth_nearest_distance_cdf(density, m, k, r):
    r"""
    CDF of the distance to the :math:`k`-th nearest node,

    .. math::

        F_k(r) = 1 - e^{-\bar{N}(r)} \sum_{i=0}^{k-1} \frac{\bar{N}(r)^i}{i!}

    Args:
        density (DensityModel): node density
        m (int): dimension
        k (int): order, :math:`k \ge 1`
        r (float or array): radius, :math:`r \ge 0`
    """
    if k < 1:
        raise ValueError("order k must be at least 1, got {:}".format(k))
    n = average_count(density, m, r)
    return poisson_tail(k, n)


def nearest_distance_cdf(density, m, r):
    r"""
    CDF of the nearest-node distance, :math:`F_1(r) = 1 - e^{-\bar{N}(r)}`.
    """
    return kth_nearest_distance_cdf(density, m, 1, r)
