import logging
import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import bisect
from scipy.special import gammainc, gammaincc
from scipy.stats import norm

from .constants import confidence, ln_float_max, neper_per_db

logger = logging.getLogger(__name__)


def db_to_linear(x_db):
    r"""
    Convert a power ratio from decibels to linear units, :math:`10^{x/10}`.
    """
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    r"""
    Convert a (positive) power ratio to decibels, :math:`10 \log_{10} x`.
    """
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def sigma_db_to_neper(sigma_db):
    r"""
    Convert a log-normal shadowing spread quoted in dB to the natural-log (neper) standard deviation used by :class:`~dominter.fading.LogNormal`, :math:`\sigma_\mathrm{Np} = \sigma_\mathrm{dB} \ln 10 / 10`.
    """
    return sigma_db * neper_per_db


def db_grid(start, stop, step):
    r"""
    Inclusive grid of dB values from ``start`` to ``stop`` (the endpoint is kept when it lands on the step).

    Args:
        start (float): first value [dB]
        stop (float): last value [dB], must exceed ``start``
        step (float): spacing [dB], must be positive

    Returns:
        numpy.ndarray: ascending grid [dB]
    """
    if not step > 0:
        raise ValueError("grid step must be positive, got {:}".format(step))
    if not start < stop:
        raise ValueError(
            "grid start ({:}) must be smaller than stop ({:})".format(start, stop)
        )
    n = int(np.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(n + 1)


def poisson_tail(k, mean):
    r"""
    Probability that a Poisson variable with the given mean is at least ``k``,

    .. math::

        \Pr\{N \ge k\} = 1 - e^{-\bar{N}} \sum_{i=0}^{k-1} \frac{\bar{N}^i}{i!}

    evaluated as the regularized lower incomplete gamma function (``-expm1`` for :math:`k=1`) so that tiny probabilities keep full relative precision.

    Args:
        k (int): order, :math:`k \ge 1`
        mean (float or array): Poisson mean :math:`\bar{N} \ge 0`
    """
    mean = np.asarray(mean, dtype=float)
    if k == 1:
        return -np.expm1(-mean)
    return gammainc(k, mean)


def poisson_head(k, mean):
    r"""
    Complement of :func:`poisson_tail`, :math:`\Pr\{N < k\}`.
    """
    mean = np.asarray(mean, dtype=float)
    if k == 1:
        return np.exp(-mean)
    return gammaincc(k, mean)


def wilson_interval(successes, trials, level=confidence):
    r"""
    Wilson score interval for a binomial proportion.

    Args:
        successes (int or array): number of exceedances
        trials (int): number of trials, at least 1
        level (float): two-sided confidence level

    Returns:
        tuple: (lower, upper) arrays, clipped to :math:`[0, 1]` and always containing the point estimate
    """
    assert trials >= 1, "Wilson interval needs at least one trial"
    successes = np.asarray(successes, dtype=float)
    z = norm.ppf(0.5 + level / 2.0)
    p = successes / trials
    z2n = z ** 2 / trials
    center = (p + z2n / 2.0) / (1.0 + z2n)
    half = z / (1.0 + z2n) * np.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials))
    return np.clip(center - half, 0.0, p), np.clip(center + half, p, 1.0)


def integrate(
    func, a, b, label="integrand", epsrel=1e-9, epsabs=0.0, limit=200, points=None
):
    r"""
    Adaptive quadrature (``scipy.integrate.quad``) that turns non-convergence into an error.

    ``IntegrationWarning`` is caught. If the returned error estimate is still within :math:`10^{-6}` of the value, the result is kept and a ``RuntimeWarning`` is raised; otherwise a ``RuntimeError`` carrying the label, interval, estimate and error estimate is raised.

    Returns:
        float: the integral
    """
    kw = {"epsabs": epsabs, "epsrel": epsrel, "limit": limit}
    if points is not None:
        kw["points"] = points

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        value, abserr = quad(func, a, b, **kw)

    trouble = [w for w in caught if issubclass(w.category, IntegrationWarning)]
    if trouble:
        msg = "quadrature of {:} over [{:}, {:}]: estimate {:.6e}, error estimate {:.2e} ({:})".format(
            label, a, b, value, abserr, str(trouble[0].message).strip().splitlines()[0]
        )
        if not np.isfinite(value) or abserr > 1e-6 * abs(value) + 1e-300:
            raise RuntimeError(msg)
        warnings.warn(RuntimeWarning(msg))
    return value


def solve_decreasing(func, target, x0=1.0, rtol=1e-10, label="function"):
    r"""
    Solve :math:`f(x) = y` for a positive, nonincreasing :math:`f` by bisection on :math:`\ln x`.

    The bracket is grown geometrically from ``x0`` in both directions until it encloses the crossing; the comparison is done on :math:`\ln f - \ln y` so that targets down to the smallest doubles are resolved.

    Args:
        func (callable): nonincreasing function of :math:`x > 0`
        target (float): positive target value
        x0 (float): starting guess for the bracket
        rtol (float): relative tolerance on :math:`\ln x`
        label (str): used in error messages

    Returns:
        float: :math:`x` such that :math:`f(x) = y`

    Raises:
        OverflowError: if the crossing lies beyond the float range; the message reports the dB value reached.
    """
    log_target = np.log(target)

    def gap(u):
        with np.errstate(divide="ignore"):
            return float(np.log(func(np.exp(u)))) - log_target

    # keep exp(u) finite at the edge of the bracket
    top = ln_float_max - 1e-6
    lo = hi = np.log(x0)
    step = 1.0
    while gap(hi) > 0:
        if hi >= top:
            raise OverflowError(
                "{:} stays above {:.3e} beyond {:.1f} dB".format(
                    label, target, 10 * hi / np.log(10)
                )
            )
        hi = min(hi + step, top)
        step *= 2.0
    step = 1.0
    while gap(lo) <= 0:
        if lo <= -top:
            raise OverflowError(
                "{:} stays below {:.3e} beyond {:.1f} dB".format(
                    label, target, 10 * lo / np.log(10)
                )
            )
        lo = max(lo - step, -top)
        step *= 2.0
    logger.debug("%s bracket: [%.4g, %.4g] (ln x)", label, lo, hi)

    root = bisect(gap, lo, hi, xtol=1e-13, rtol=rtol, maxiter=500)
    return float(np.exp(root))
