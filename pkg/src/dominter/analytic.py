r"""
Closed-form outage results for Poisson interferer fields.

Throughout, :math:`\bar{N}(D)` is the average number of interferers whose (average) INR exceeds :math:`D`, i.e. the average count inside the active interference zone :math:`r(D)`. For a uniform density,

.. math::

    \bar{N}(D) = \bar{N}_\mathrm{max} D^{-m/\nu}

and the exact law of the :math:`k`-th strongest INR is the Poisson order statistic

.. math::

    \Pr\{d_k > D\} = 1 - e^{-\bar{N}(D)} \sum_{i=0}^{k-1} \frac{\bar{N}(D)^i}{i!}
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaincinv, gammaln

from .constants import unit_ball
from .propagation import r_of_inr, zones
from .utils import linear_to_db, poisson_head, poisson_tail, solve_decreasing


class CancellationPolicy:
    r"""
    Which of the nearest interferers are removed or attenuated before the outage test.

    * ``none``: nothing is cancelled (the same as ``complete`` with :math:`k = 1`)
    * ``complete``: the :math:`k-1` nearest interferers contribute nothing
    * ``partial``: the :math:`k-1` nearest are each attenuated to :math:`\alpha P`
    * ``hybrid``: the :math:`k-2` nearest are removed and the :math:`(k-1)`-th is attenuated to :math:`\alpha P`

    Use the classmethod constructors rather than the raw initializer.

    Args:
        kind (str): one of ``none``, ``complete``, ``partial``, ``hybrid``
        k (int): order; the :math:`k`-th nearest is the first interferer left untouched
        alpha (float): attenuation level, :math:`0 \le \alpha \le 1`
    """

    kinds = ("none", "complete", "partial", "hybrid")

    def __init__(self, kind="none", k=1, alpha=1.0):
        if kind not in self.kinds:
            raise ValueError(
                "unknown cancellation kind {:}, choose from {:}".format(kind, self.kinds)
            )
        k = int(k)
        if kind == "none":
            k = 1
        elif kind == "complete" and k < 1:
            raise ValueError("complete cancellation needs k >= 1, got {:}".format(k))
        elif kind == "partial" and k < 2:
            raise ValueError("partial cancellation needs k >= 2, got {:}".format(k))
        elif kind == "hybrid" and k < 3:
            raise ValueError("hybrid cancellation needs k >= 3, got {:}".format(k))
        if not 0 <= alpha <= 1:
            raise ValueError("alpha must lie in [0, 1], got {:}".format(alpha))
        if kind == "complete" and k == 1:
            kind = "none"

        self.kind = kind
        self.k = k
        self.alpha = float(alpha) if kind in ("partial", "hybrid") else 0.0

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def complete(cls, k):
        return cls("complete", k)

    @classmethod
    def partial(cls, k, alpha):
        return cls("partial", k, alpha)

    @classmethod
    def hybrid(cls, k, alpha):
        return cls("hybrid", k, alpha)

    @property
    def is_partial(self):
        return self.kind in ("partial", "hybrid")

    @property
    def leading_order(self):
        r"""
        Power of :math:`\bar{N}(D)` in the small-outage approximation: :math:`k` for complete cancellation, 1 for partial, :math:`k-1` for hybrid.
        """
        if self.kind == "partial":
            return 1
        if self.kind == "hybrid":
            return self.k - 1
        return self.k

    def weights(self, n):
        r"""
        Power multipliers for ``n`` interferers sorted by ascending distance.
        """
        w = np.ones(n)
        if self.kind == "complete":
            w[: self.k - 1] = 0.0
        elif self.kind == "partial":
            w[: self.k - 1] = self.alpha
        elif self.kind == "hybrid":
            w[: self.k - 2] = 0.0
            w[self.k - 2 : self.k - 1] = self.alpha
        return w

    def _check_alpha(self):
        if self.is_partial and self.alpha == 0:
            raise ValueError(
                "alpha = 0 removes the attenuated interferers completely; use CancellationPolicy.complete({:}) instead".format(
                    self.k
                )
            )

    def log_coefficient(self, m, nu):
        r"""
        :math:`\ln c` in the small-outage approximation :math:`P_\mathrm{out} \approx c\,\bar{N}^j`.
        """
        if self.kind == "partial":
            return (m / nu) * np.log(self.alpha)
        if self.kind == "hybrid":
            return (self.k - 1) * (m / nu) * np.log(self.alpha) - gammaln(self.k)
        return -gammaln(self.k + 1)

    def log_regime_count(self, m, nu):
        r"""
        :math:`\ln` of the largest :math:`\bar{N}(D)` for which the approximation is in its accurate regime: :math:`D > D_0` for complete cancellation, :math:`D > D_0/\alpha` for partial and :math:`D > D_0/\alpha^{k-1}` for hybrid.
        """
        if self.kind == "partial":
            return (m / nu) * np.log(self.alpha)
        if self.kind == "hybrid":
            return (self.k - 1) * (m / nu) * np.log(self.alpha)
        return 0.0

    def __eq__(self, other):
        return (
            isinstance(other, CancellationPolicy)
            and self.kind == other.kind
            and self.k == other.k
            and self.alpha == other.alpha
        )

    def __repr__(self):
        if self.kind == "none":
            return "CancellationPolicy.none()"
        if self.kind == "complete":
            return "CancellationPolicy.complete({:})".format(self.k)
        return "CancellationPolicy.{:}({:}, {:g})".format(self.kind, self.k, self.alpha)


@dataclass(frozen=True)
class OutagePoint:
    r"""
    Outage probability at one distortion-free INR.

    ``p_exact`` is ``None`` where no exact closed form exists (partial/hybrid cancellation, or a fading shift applied).
    """

    d: float
    p_exact: Optional[float]
    p_approx: float
    regime_valid: bool

    @property
    def d_db(self):
        return float(linear_to_db(self.d))


@dataclass(frozen=True)
class FadingShift:
    r"""
    Multiplicative shift :math:`M_q` of the small-outage approximation under fading, with :math:`q` the leading order times :math:`m/\nu`.
    """

    moment_order: float = 0.0
    shift: float = 1.0

    def __post_init__(self):
        if not self.shift > 0:
            raise ValueError("fading shift must be positive, got {:}".format(self.shift))

    @classmethod
    def for_policy(cls, model, policy, m, nu):
        r"""
        Shift for a fading model (anything with a ``moment(q)`` method) under a cancellation policy: :math:`q = km/\nu` for complete cancellation, :math:`m/\nu` for partial and :math:`(k-1)m/\nu` for hybrid.
        """
        if policy is None:
            policy = CancellationPolicy.none()
        q = policy.leading_order * m / nu
        return cls(moment_order=q, shift=float(model.moment(q)))


@dataclass(frozen=True)
class TradeoffBound:
    r"""
    Largest admissible average count inside the active zone, and the matching uniform density, for a target outage :math:`\epsilon`. The exact columns are ``None`` when only the small-:math:`\epsilon` form exists.
    """

    epsilon: float
    d: float
    q_factor: float
    n_bar_exact: Optional[float]
    n_bar_small_eps: float
    rho_exact: Optional[float]
    rho_small_eps: float


@dataclass(frozen=True)
class AlphaThreshold:
    r"""
    Attenuation level below which the :math:`k`-th (uncancelled) interferer dominates the partially cancelled ones.
    """

    variant: str
    k: int
    d: float
    raw: float

    @property
    def alpha_max(self):
        return min(self.raw, 1.0)


@dataclass(frozen=True)
class CapacityResult:
    r"""
    Outage capacity [nat/s/Hz] at SNR :math:`\gamma` with the outage INR :math:`D_\epsilon` from root finding and, for a uniform density, its closed form.
    """

    gamma: float
    epsilon: float
    d_eps: float
    d_eps_closed: Optional[float]
    capacity: float
    capacity_high_sir: float
    capacity_low_sir: float
    capacity_low_sir_closed: Optional[float] = None

    @property
    def d_eps_db(self):
        return float(linear_to_db(self.d_eps))


def _policy(policy):
    return CancellationPolicy.none() if policy is None else policy


def _require_uniform(density, what):
    if not density.is_uniform:
        raise ValueError(
            "{:} is only available for a uniform density (got {:})".format(what, density)
        )


def _check_epsilon(epsilon):
    if not 0 < epsilon < 1:
        raise ValueError("target outage epsilon must lie in (0, 1), got {:}".format(epsilon))


def nbar_of_inr(D, density, m, params):
    r"""
    Average number of interferers with INR above :math:`D`, :math:`\bar{N}(D) = \bar{N}(r(D))`.
    """
    return density.average_count(m, r_of_inr(params, D))


def inr_cdf(D, k, density, m, params):
    r"""
    CDF of the :math:`k`-th strongest (average power) INR,

    .. math::

        F_{d_k}(D) = e^{-\bar{N}(D)} \sum_{i=0}^{k-1} \frac{\bar{N}(D)^i}{i!}

    which reduces to :math:`e^{-\bar{N}(D)}` for :math:`k = 1`.

    Args:
        D (float or array): INR, :math:`D > 0`
        k (int): order, :math:`k \ge 1`
        density (DensityModel): node density
        m (int): dimension
        params (LinkParams): link budget
    """
    if k < 1:
        raise ValueError("order k must be at least 1, got {:}".format(k))
    return poisson_head(k, nbar_of_inr(D, density, m, params))


def inr_pdf(D, k, density, m, params):
    r"""
    Density of the :math:`k`-th strongest INR,

    .. math::

        f_{d_k}(D) = \frac{\bar{N}(D)^{k-1} e^{-\bar{N}(D)}}{(k-1)!} \left| \frac{d\bar{N}}{dD} \right|, \qquad \left| \frac{d\bar{N}}{dD} \right| = \frac{r(D)}{\nu D} \frac{d\bar{N}}{dr}

    For a uniform density :math:`|d\bar{N}/dD| = (m/\nu) \bar{N}(D)/D`.
    """
    if k < 1:
        raise ValueError("order k must be at least 1, got {:}".format(k))
    D = np.asarray(D, dtype=float)
    r = r_of_inr(params, D)
    n = density.average_count(m, r)
    dn_dd = density.shell_count(m, r) * r / (params.nu * D)
    with np.errstate(divide="ignore"):
        log_head = (k - 1) * np.log(n) - n - gammaln(k)
    return np.where(n > 0, np.exp(log_head) * dn_dd, 0.0)


def outage(D, policy, density, m, params, fading_shift=None, q_factor=1.0):
    r"""
    Outage probability :math:`\Pr\{d_k > D\}` under a cancellation policy.

    The exact value (complete cancellation or none, any density) is the Poisson tail. The approximation is

    .. math::

        P_\mathrm{out} \approx \frac{M}{k!} \bar{N}^k, \quad
        M \alpha^{m/\nu} \bar{N}, \quad
        \frac{M \alpha^{(k-1)m/\nu}}{(k-1)!} \bar{N}^{k-1}

    for complete, partial and hybrid cancellation, with :math:`M` the fading shift and :math:`\bar{N} = \bar{N}(D)/Q` for a filter of statistical selectivity :math:`Q`. The approximation is clipped at 1.

    Args:
        D (float): distortion-free INR, :math:`D > 0`
        policy (CancellationPolicy): cancellation policy, ``None`` for no cancellation
        density (DensityModel): node density
        m (int): dimension
        params (LinkParams): link budget
        fading_shift (FadingShift): fading multiplier, default none
        q_factor (float): statistical selectivity :math:`Q \ge 1` of a receive filter

    Returns:
        OutagePoint
    """
    if not D > 0:
        raise ValueError("distortion-free INR must be positive, got {:}".format(D))
    policy = _policy(policy)
    policy._check_alpha()
    shift = 1.0 if fading_shift is None else fading_shift.shift
    if policy.is_partial:
        _require_uniform(density, "{:} cancellation".format(policy.kind))
    if shift != 1.0:
        _require_uniform(density, "the fading shift")

    n = float(nbar_of_inr(D, density, m, params)) / q_factor
    p_exact = None
    if not policy.is_partial and shift == 1.0:
        p_exact = float(poisson_tail(policy.k, n))

    j = policy.leading_order
    with np.errstate(divide="ignore"):
        log_p = np.log(shift) + policy.log_coefficient(m, params.nu) + j * np.log(n)
        regime_valid = bool(np.log(n) < policy.log_regime_count(m, params.nu))
    p_approx = float(min(np.exp(log_p), 1.0))

    return OutagePoint(d=float(D), p_exact=p_exact, p_approx=p_approx, regime_valid=regime_valid)


def critical_inr(density, m, params, q_factor=1.0):
    r"""
    Critical INR :math:`D_0` where :math:`\bar{N}(D_0) = Q` (one effective interferer in the active zone). For a uniform density,

    .. math::

        D_0 = (\bar{N}_\mathrm{max}/Q)^{\nu/m}

    Radial densities are solved by bisection on :math:`\ln D`.
    """
    if density.is_uniform:
        n_max = zones(params, density, m).n_max
        if n_max == 0:
            return 0.0
        return float(np.exp(params.nu / m * (np.log(n_max) - np.log(q_factor))))
    return solve_decreasing(
        lambda d: nbar_of_inr(d, density, m, params) / q_factor,
        1.0,
        label="average count",
    )


def outage_piecewise(D, policy, density, m, params, fading_shift=None, q_factor=1.0):
    r"""
    Threshold-effect approximation: 1 below the critical INR, the small-outage approximation of :func:`outage` above it.
    """
    if D < critical_inr(density, m, params, q_factor):
        return 1.0
    return outage(D, policy, density, m, params, fading_shift, q_factor).p_approx


def density_bound(epsilon, D, policy, m, params, q_factor=1.0):
    r"""
    Outage/density tradeoff: the largest average count :math:`\bar{N}` inside the active zone :math:`r(D)` with :math:`P_\mathrm{out} \le \epsilon`, and the matching uniform density :math:`\rho = \bar{N}/(c_m r(D)^m)`.

    For complete cancellation of order :math:`k`,

    .. math::

        \bar{N} \le Q (k!\epsilon)^{1/k}, \qquad \rho \le Q c_m^{-1} (k!\epsilon)^{1/k} (P_\mathrm{max}/P_t a_\nu)^{m/\nu}

    with the exact bound from the Poisson tail (:math:`-\ln(1-\epsilon)` for :math:`k=1`). Partial and hybrid cancellation only have the small-:math:`\epsilon` form.

    Args:
        epsilon (float): target outage in :math:`(0, 1)`
        D (float): distortion-free INR :math:`P_\mathrm{max}/P_0`
        policy (CancellationPolicy): cancellation policy
        m (int): dimension
        params (LinkParams): link budget
        q_factor (float): filter selectivity :math:`Q`

    Returns:
        TradeoffBound
    """
    _check_epsilon(epsilon)
    policy = _policy(policy)
    policy._check_alpha()
    k = policy.k
    nu = params.nu

    if policy.kind == "partial":
        small = epsilon * policy.alpha ** (-m / nu)
        exact = None
    elif policy.kind == "hybrid":
        small = np.exp((gammaln(k) + np.log(epsilon)) / (k - 1)) * policy.alpha ** (-m / nu)
        exact = None
    else:
        small = np.exp((gammaln(k + 1) + np.log(epsilon)) / k)
        exact = -np.log1p(-epsilon) if k == 1 else gammaincinv(k, epsilon)

    volume = unit_ball[m] * float(r_of_inr(params, D)) ** m
    small = float(q_factor * small)
    exact = None if exact is None else float(q_factor * exact)
    return TradeoffBound(
        epsilon=epsilon,
        d=float(D),
        q_factor=float(q_factor),
        n_bar_exact=exact,
        n_bar_small_eps=small,
        rho_exact=None if exact is None else exact / volume,
        rho_small_eps=small / volume,
    )


def required_alpha(D, k, density, m, params, variant="hybrid", fading=None):
    r"""
    Attenuation level needed for the uncancelled :math:`k`-th interferer to dominate.

    ``hybrid`` (:math:`k-2` removed, the :math:`(k-1)`-th attenuated, :math:`k \ge 3`):

    .. math::

        \alpha < D^{-1/(k-1)} \left( \frac{M_{km/\nu}}{M_{(k-1)m/\nu}} \frac{\bar{N}_\mathrm{max}}{k} \right)^{\nu/(m(k-1))}

    ``partial`` (all :math:`k-1` nearest attenuated, :math:`k \ge 2`):

    .. math::

        \alpha < D^{-(k-1)} \left( \frac{M_{km/\nu}}{M_{m/\nu}} \frac{\bar{N}_\mathrm{max}^{k-1}}{k!} \right)^{\nu/m}

    Without fading all moments are 1.

    Args:
        D (float): distortion-free INR
        k (int): order of the first uncancelled interferer
        density (DensityModel): uniform node density
        m (int): dimension
        params (LinkParams): link budget
        variant (str): ``hybrid`` or ``partial``
        fading: fading model with a ``moment(q)`` method, or ``None``

    Returns:
        AlphaThreshold
    """
    if not D > 0:
        raise ValueError("distortion-free INR must be positive, got {:}".format(D))
    _require_uniform(density, "required_alpha")
    nu = params.nu

    def moment(q):
        return 1.0 if fading is None else float(fading.moment(q))

    with np.errstate(divide="ignore"):
        log_n_max = np.log(zones(params, density, m).n_max)

    if variant == "hybrid":
        if k < 3:
            raise ValueError("the hybrid threshold needs k >= 3, got {:}".format(k))
        ratio = moment(k * m / nu) / moment((k - 1) * m / nu)
        log_raw = -np.log(D) / (k - 1) + nu / (m * (k - 1)) * (
            np.log(ratio) + log_n_max - np.log(k)
        )
    elif variant == "partial":
        if k < 2:
            raise ValueError("the partial threshold needs k >= 2, got {:}".format(k))
        ratio = moment(k * m / nu) / moment(m / nu)
        log_raw = -(k - 1) * np.log(D) + nu / m * (
            np.log(ratio) + (k - 1) * log_n_max - gammaln(k + 1)
        )
    else:
        raise ValueError("variant must be 'hybrid' or 'partial', got {:}".format(variant))

    with np.errstate(over="ignore"):
        raw = float(np.exp(log_raw))
    return AlphaThreshold(variant=variant, k=k, d=float(D), raw=raw)


def outage_capacity(
    gamma, epsilon, policy, density, m, params, fading_shift=None, q_factor=1.0
):
    r"""
    Outage capacity

    .. math::

        C_\epsilon = \ln\left(1 + \frac{\gamma}{D_\epsilon}\right)

    with :math:`D_\epsilon` the INR at which the outage probability equals :math:`\epsilon`, found by bisection on the exact law (or on the approximation when no exact law exists). The high- and low-SIR forms are :math:`\ln\gamma - \ln D_\epsilon` and :math:`\gamma/D_\epsilon`; the low-SIR form is also evaluated with the closed form below, which for complete cancellation reads :math:`\gamma (k!\epsilon)^{\nu/(mk)} / \bar{N}_\mathrm{max}^{\nu/m}`. For a uniform density the closed form

    .. math::

        D_\epsilon \approx \bar{N}_\mathrm{max}^{\nu/m} (k!\epsilon)^{-\nu/(mk)}

    (generalized to every policy, fading shift and :math:`Q`) is reported too.

    Args:
        gamma (float): SNR of the desired link, :math:`\gamma > 0`
        epsilon (float): target outage in :math:`(0, 1)`
        policy (CancellationPolicy): cancellation policy
        density (DensityModel): node density
        m (int): dimension
        params (LinkParams): link budget
        fading_shift (FadingShift): optional fading multiplier
        q_factor (float): filter selectivity

    Returns:
        CapacityResult

    Raises:
        OverflowError: when :math:`D_\epsilon` does not fit in a double.
    """
    if not gamma > 0:
        raise ValueError("SNR gamma must be positive, got {:}".format(gamma))
    _check_epsilon(epsilon)
    policy = _policy(policy)

    def p_out(d):
        point = outage(d, policy, density, m, params, fading_shift, q_factor)
        return point.p_exact if point.p_exact is not None else point.p_approx

    d_eps = solve_decreasing(p_out, epsilon, label="outage probability")

    d_closed = None
    if density.is_uniform:
        shift = 1.0 if fading_shift is None else fading_shift.shift
        j = policy.leading_order
        log_n_star = (
            np.log(epsilon) - np.log(shift) - policy.log_coefficient(m, params.nu)
        ) / j
        log_n_max = np.log(zones(params, density, m).n_max)
        with np.errstate(over="ignore"):
            d_closed = float(
                np.exp(params.nu / m * (log_n_max - np.log(q_factor) - log_n_star))
            )

    return CapacityResult(
        gamma=float(gamma),
        epsilon=float(epsilon),
        d_eps=d_eps,
        d_eps_closed=d_closed,
        capacity=float(np.log1p(gamma / d_eps)),
        capacity_high_sir=float(np.log(gamma) - np.log(d_eps)),
        capacity_low_sir=float(gamma / d_eps),
        capacity_low_sir_closed=None if d_closed is None else float(gamma / d_closed),
    )
