r"""
Link budget: distance to interference-to-noise ratio (INR), and the interference zones.

All powers are normalized by the receiver noise power internally, so only the combination :math:`G = P_t g_t g_r a_\nu / P_0` enters, and it is carried as :math:`\ln G` to keep :math:`r^{-\nu}` finite at tiny radii.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinkParams:
    r"""
    Standard link budget :math:`P_a = P_t g_t g_r a_\nu r^{-\nu}`.

    Args:
        nu (float): path-loss exponent, :math:`\nu \ge 1`
        a_nu (float): path gain at unit distance
        p_t (float): transmit power [W]
        p_0 (float): receiver noise power [W]
        g_t (float): transmit antenna gain
        g_r (float): receive antenna gain
    """

    nu: float
    a_nu: float = 1.0
    p_t: float = 1.0
    p_0: float = 1.0
    g_t: float = 1.0
    g_r: float = 1.0

    def __post_init__(self):
        if not self.nu >= 1:
            raise ValueError("path-loss exponent nu must be >= 1, got {:}".format(self.nu))
        for name in ("a_nu", "p_t", "p_0", "g_t", "g_r"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError("{:} must be positive, got {:}".format(name, value))

    @property
    def log_gain(self):
        r"""
        :math:`\ln G`, the INR of an interferer at unit distance in nepers.
        """
        return (
            np.log(self.p_t)
            + np.log(self.g_t)
            + np.log(self.g_r)
            + np.log(self.a_nu)
            - np.log(self.p_0)
        )


@dataclass(frozen=True)
class Zones:
    r"""
    Potential interference zone: radius :math:`R_\mathrm{max}` where a lone interferer reaches the noise floor, and the average count :math:`\bar{N}_\mathrm{max}` inside it.
    """

    r_max: float
    n_max: float


def inr_of_distance(params, r):
    r"""
    INR of an interferer at distance :math:`r`,

    .. math::

        d = \frac{P_t g_t g_r a_\nu r^{-\nu}}{P_0}

    Args:
        params (LinkParams): link budget
        r (float or array): distance, :math:`r > 0`

    Returns:
        INR (linear)
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("distance must be positive: the point-source model breaks down at r = 0")
    return np.exp(params.log_gain - params.nu * np.log(r))


def r_of_inr(params, D):
    r"""
    Radius of the active interference zone, :math:`r(D) = (P_t g_t g_r a_\nu / P_0 D)^{1/\nu}`, the exact inverse of :func:`inr_of_distance`.

    Args:
        params (LinkParams): link budget
        D (float or array): INR, :math:`D > 0`
    """
    D = np.asarray(D, dtype=float)
    if np.any(D <= 0):
        raise ValueError("INR must be positive")
    return np.exp((params.log_gain - np.log(D)) / params.nu)


def zones(params, density, m):
    r"""
    Potential interference zone for a density,

    .. math::

        R_\mathrm{max} = r(1), \qquad \bar{N}_\mathrm{max} = \bar{N}(R_\mathrm{max})

    which is :math:`c_m R_\mathrm{max}^m \rho` for a uniform density.

    Args:
        params (LinkParams): link budget
        density (DensityModel): node density
        m (int): dimension

    Returns:
        Zones
    """
    r_max = float(r_of_inr(params, 1.0))
    n_max = float(density.average_count(m, r_max))
    return Zones(r_max=r_max, n_max=n_max)
