r"""
Monte-Carlo engine for interference outage.

A trial samples a Poisson field around the receiver, applies the cancellation policy by distance order, multiplies every node by independent fading and filter gains, and records two statistics:

* the *nearest* statistic: the faded/filtered INR of the surviving interferer with the largest post-cancellation average INR (the :math:`k`-th nearest under complete cancellation);
* the *total* statistic: the sum of the INRs of all surviving interferers.

Exceedances of a fixed INR grid are counted per chunk of trials and reduced by integer addition, so the result does not depend on the number of workers or on the order in which chunks finish.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.stats import norm

from . import streams
from .analytic import CancellationPolicy, FadingShift, critical_inr, outage
from .constants import confidence
from .fading import NoFading, faded_outage, sample_gain
from .filtering import Isotropic, apply_filter, filter_moment, q_factor
from .pointfield import DensityModel, sample_field
from .propagation import LinkParams, inr_of_distance, zones
from .utils import db_to_linear, linear_to_db, wilson_interval

logger = logging.getLogger(__name__)

# largest simulated region, in units of the potential interference zone radius
MAX_REGION_MULTIPLIER = 4.0


@dataclass(frozen=True)
class Scenario:
    r"""
    Complete description of one experiment.

    Args:
        m (int): dimension
        params (LinkParams): link budget
        density (DensityModel): node density
        policy (CancellationPolicy): cancellation applied by distance order
        fading: fading model of every interferer
        filter: receive filter applied to every interferer
        region_multiplier (float): simulated radius in units of :math:`R_\mathrm{max}`, in :math:`[1, 4]`
        trials (int): number of Monte-Carlo trials
        master_seed (int): 64-bit seed of the counter-based streams
        fixed_count (int): if given, every trial has exactly this many interferers in the potential interference zone (requires ``region_multiplier = 1``)
        label (str): name used in tables
    """

    m: int
    params: LinkParams
    density: DensityModel
    policy: CancellationPolicy = field(default_factory=CancellationPolicy.none)
    fading: object = field(default_factory=NoFading)
    filter: object = field(default_factory=Isotropic)
    region_multiplier: float = 1.0
    trials: int = 1000000
    master_seed: int = 0
    fixed_count: Optional[int] = None
    label: str = "default"

    def __post_init__(self):
        if self.m not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3, got {:}".format(self.m))
        if not self.trials >= 1:
            raise ValueError("trials must be at least 1, got {:}".format(self.trials))
        if not 1.0 <= self.region_multiplier <= MAX_REGION_MULTIPLIER:
            raise ValueError(
                "region_multiplier must lie in [1, {:g}], got {:}".format(
                    MAX_REGION_MULTIPLIER, self.region_multiplier
                )
            )
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.fixed_count is not None:
            if self.fixed_count < 0:
                raise ValueError("fixed_count must be nonnegative")
            if self.region_multiplier != 1.0:
                raise ValueError("fixed_count needs region_multiplier = 1")

    @property
    def zones(self):
        return zones(self.params, self.density, self.m)

    @property
    def region_radius(self):
        return self.region_multiplier * self.zones.r_max

    def with_trials(self, trials):
        return replace(self, trials=trials)

    def with_seed(self, master_seed):
        return replace(self, master_seed=master_seed)


@dataclass(frozen=True)
class TrialRecord:
    r"""
    Statistics of one trial. ``top1`` and ``top2`` are the two largest surviving INRs and ``survivors`` their count, which bound the total from both sides.
    """

    nearest: float
    total: float
    top1: float = 0.0
    top2: float = 0.0
    survivors: int = 0

    @property
    def lower(self):
        r"""
        :math:`X_1 + X_2 \le` total.
        """
        return self.top1 + self.top2

    @property
    def upper(self):
        r"""
        :math:`X_1 + (N-1) X_2 \ge` total.
        """
        return self.top1 + max(self.survivors - 1, 0) * self.top2


def _shell_nodes(scenario, trial_index, shell, r_max):
    # every shell is sampled in full and then truncated, so enlarging the
    # region only ever adds nodes
    outer = (shell + 1) * r_max
    rng = streams.trial_stream(
        scenario.master_seed, trial_index, streams.shell_substream(shell, streams.FIELD)
    )
    count = scenario.fixed_count if shell == 0 else None
    pf = sample_field(
        scenario.density, scenario.m, outer, rng, inner_radius=shell * r_max, count=count
    )
    r = pf.distances
    n = len(r)

    gains = np.ones(n)
    if n and not isinstance(scenario.fading, NoFading):
        rng = streams.trial_stream(
            scenario.master_seed,
            trial_index,
            streams.shell_substream(shell, streams.FADING),
        )
        gains = gains * sample_gain(scenario.fading, rng, n)
    if n and not isinstance(scenario.filter, Isotropic):
        rng = streams.trial_stream(
            scenario.master_seed,
            trial_index,
            streams.shell_substream(shell, streams.FILTER),
        )
        gains = gains * apply_filter(scenario.filter, rng, n)

    keep = r <= scenario.region_multiplier * r_max
    return r[keep], gains[keep]


def run_trial(scenario, trial_index):
    r"""
    Run one trial.

    The record is a pure function of ``(scenario, trial_index)``: all draws come from the counter-based streams of that trial.

    Args:
        scenario (Scenario): experiment
        trial_index (int): trial number, :math:`0 \le i <` ``scenario.trials``

    Returns:
        TrialRecord
    """
    assert 0 <= trial_index < scenario.trials, "trial_index out of range"
    r_max = scenario.zones.r_max
    n_shells = int(np.ceil(scenario.region_multiplier))

    parts = [_shell_nodes(scenario, trial_index, j, r_max) for j in range(n_shells)]
    r = np.concatenate([p[0] for p in parts])
    gains = np.concatenate([p[1] for p in parts])
    if len(r) == 0:
        return TrialRecord(0.0, 0.0)

    average = inr_of_distance(scenario.params, r) * scenario.policy.weights(len(r))
    live = average > 0
    if not np.any(live):
        return TrialRecord(0.0, 0.0)

    values = average * gains
    nearest = values[np.argmax(average)]
    survivors = values[live]
    if len(survivors) > 1:
        top2, top1 = np.partition(survivors, -2)[-2:]
    else:
        top1, top2 = survivors[0], 0.0

    return TrialRecord(
        nearest=float(nearest),
        total=float(survivors.sum()),
        top1=float(top1),
        top2=float(top2),
        survivors=int(len(survivors)),
    )


def _exceedances(values, grid):
    # number of values strictly above each grid point
    ordered = np.sort(values)
    return len(values) - np.searchsorted(ordered, grid, side="right")


def _bottom(priority, index, samples, retain):
    order = np.lexsort((index, priority))[:retain]
    return priority[order], index[order], samples[order]


STATISTICS = ("nearest", "total", "lower", "upper")


def _run_chunk(scenario, start, stop, grid, retain):
    n = stop - start
    table = np.empty((n, len(STATISTICS)))
    for j, i in enumerate(range(start, stop)):
        rec = run_trial(scenario, i)
        table[j] = (rec.nearest, rec.total, rec.lower, rec.upper)

    counts = np.stack([_exceedances(table[:, s], grid) for s in range(len(STATISTICS))])

    kept = None
    if retain:
        index = np.arange(start, stop)
        priority = np.array(
            [
                streams.trial_stream(scenario.master_seed, i, streams.PRIORITY).random()
                for i in index
            ]
        )
        kept = _bottom(priority, index, table[:, :2], retain)
    return counts, kept


def _accumulate(scenario, grid, workers=1, chunk_size=2000, retain=0):
    r"""
    Exceedance counts of every statistic over ``grid`` (linear INR), plus the merged reservoir.
    """
    chunks = [
        (start, min(start + chunk_size, scenario.trials))
        for start in range(0, scenario.trials, chunk_size)
    ]
    logger.info(
        "%s: %d trials in %d chunks on %d worker(s)",
        scenario.label,
        scenario.trials,
        len(chunks),
        workers,
    )

    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [
                executor.submit(_run_chunk, scenario, start, stop, grid, retain)
                for start, stop in chunks
            ]
            results = [f.result() for f in futures]
    else:
        results = []
        for start, stop in chunks:
            results.append(_run_chunk(scenario, start, stop, grid, retain))
            logger.debug("%s: trials %d-%d done", scenario.label, start, stop)

    counts = np.zeros((len(STATISTICS), len(grid)), dtype=np.int64)
    for c, _ in results:
        counts += c

    retained = None
    if retain:
        priority = np.concatenate([k[0] for _, k in results])
        index = np.concatenate([k[1] for _, k in results])
        samples = np.concatenate([k[2] for _, k in results])
        _, index, samples = _bottom(priority, index, samples, retain)
        retained = samples[np.argsort(index)]
    return dict(zip(STATISTICS, counts)), retained


@dataclass
class OutageCurve:
    r"""
    Empirical and analytic outage probabilities over a grid of distortion-free INRs.

    :ivar d_db: INR grid [dB]
    :ivar trials: number of trials
    :ivar count_nearest: trials whose nearest statistic exceeds each grid point
    :ivar count_total: trials whose total statistic exceeds each grid point
    :ivar p_exact: exact analytic outage (``nan`` where no exact law applies)
    :ivar p_approx: small-outage approximation with fading and filter shifts
    :ivar regime_valid: whether the approximation is in its accurate regime
    :ivar d0_db: critical INR [dB]
    :ivar fading_shift: combined fading and filter multiplier of the approximation
    :ivar q_factor: statistical selectivity of the filter
    :ivar retained: reservoir of per-trial ``(nearest, total)`` rows, or ``None``
    """

    d_db: np.ndarray
    trials: int
    count_nearest: np.ndarray
    count_total: np.ndarray
    p_exact: np.ndarray
    p_approx: np.ndarray
    regime_valid: np.ndarray
    d0_db: float
    fading_shift: float
    q_factor: float
    retained: Optional[np.ndarray] = None

    @property
    def p_nearest(self):
        return self.count_nearest / self.trials

    @property
    def p_total(self):
        return self.count_total / self.trials

    @property
    def ci_nearest(self):
        return wilson_interval(self.count_nearest, self.trials, confidence)

    @property
    def ci_total(self):
        return wilson_interval(self.count_total, self.trials, confidence)

    @property
    def half_width_total(self):
        lo, hi = self.ci_total
        return (hi - lo) / 2.0

    @property
    def reference(self):
        r"""
        Analytic value checked against the simulation: exact where available, otherwise the approximation.
        """
        return np.where(np.isfinite(self.p_exact), self.p_exact, self.p_approx)

    def within_ci(self):
        r"""
        Whether the analytic reference lies inside the 99% interval of the total statistic.
        """
        lo, hi = self.ci_total
        ref = self.reference
        return (lo <= ref) & (ref <= hi)

    def pass_rate(self):
        r"""
        Fraction of regime-valid grid points passing :meth:`within_ci` (``nan`` if none are valid).
        """
        valid = np.asarray(self.regime_valid, dtype=bool)
        if not np.any(valid):
            return float("nan")
        return float(np.mean(self.within_ci()[valid]))

    def quantiles(self, levels, statistic="total"):
        r"""
        Quantiles [dB] of a statistic from the retained reservoir.
        """
        if self.retained is None:
            raise ValueError("no samples retained; rerun with retain > 0")
        column = {"nearest": 0, "total": 1}[statistic]
        with np.errstate(divide="ignore"):
            return linear_to_db(np.quantile(self.retained[:, column], levels))


def analytic_curve(scenario, d_db):
    r"""
    Analytic columns of a scenario over a grid [dB].

    The approximation carries the combined multiplier :math:`M_q(g)\,\mathbb{E}[K^q]` with :math:`q` the policy's leading order times :math:`m/\nu`, which reduces to :math:`1/Q` for an unfaded filter without cancellation. The exact column is the Poisson tail without fading and filtering, the numerically integrated faded law with fading only, and ``nan`` otherwise.

    A filter that blocks every interferer has :math:`Q = \infty` (with a ``RuntimeWarning``), a multiplier of 0 and an approximation of 0.

    Returns:
        dict: ``p_exact``, ``p_approx``, ``regime_valid`` arrays and ``d0_db``, ``fading_shift``, ``q_factor`` scalars
    """
    m, params, policy = scenario.m, scenario.params, scenario.policy
    d = db_to_linear(d_db)
    q = policy.leading_order * m / params.nu
    selectivity = float(q_factor(scenario.filter, m, params.nu))
    gain_moment = filter_moment(scenario.filter, q)
    blocked = gain_moment == 0
    shift = FadingShift(q, 1.0 if blocked else float(scenario.fading.moment(q)) * gain_moment)

    plain_fading = isinstance(scenario.fading, NoFading)
    plain_filter = isinstance(scenario.filter, Isotropic)
    have_approx = scenario.density.is_uniform or (shift.shift == 1.0 and not policy.is_partial)

    p_exact = np.full(len(d), np.nan)
    p_approx = np.full(len(d), np.nan)
    valid = np.zeros(len(d), dtype=bool)
    if blocked:
        # no interferer gets through: the outage is 0 at every INR
        p_approx[:] = 0.0
        valid[:] = True
        have_approx = False
    for i, di in enumerate(d):
        if have_approx:
            point = outage(di, policy, scenario.density, m, params, shift)
            p_approx[i] = point.p_approx
            valid[i] = point.regime_valid
        if policy.is_partial or not plain_filter:
            continue
        if plain_fading:
            p_exact[i] = outage(di, policy, scenario.density, m, params).p_exact
        else:
            p_exact[i] = faded_outage(di, scenario.fading, policy, scenario.density, m, params)

    with np.errstate(divide="ignore"):
        d0_db = float(linear_to_db(critical_inr(scenario.density, m, params)))
    return {
        "p_exact": p_exact,
        "p_approx": p_approx,
        "regime_valid": valid,
        "d0_db": d0_db,
        "fading_shift": 0.0 if blocked else shift.shift,
        "q_factor": selectivity,
    }


def estimate_outage_curve(scenario, d_db, workers=1, chunk_size=2000, retain=0):
    r"""
    Empirical outage curve of a scenario with 99% Wilson intervals and the analytic columns attached.

    Args:
        scenario (Scenario): experiment
        d_db (array): nonempty ascending grid of distortion-free INRs [dB]
        workers (int): worker processes; the result does not depend on it
        chunk_size (int): trials per unit of work
        retain (int): size of the per-trial sample reservoir (0 disables it)

    Returns:
        OutageCurve
    """
    d_db = np.atleast_1d(np.asarray(d_db, dtype=float))
    if len(d_db) == 0:
        raise ValueError("INR grid is empty")
    assert np.all(np.diff(d_db) > 0), "INR grid must be ascending"

    counts, retained = _accumulate(scenario, db_to_linear(d_db), workers, chunk_size, retain)
    columns = analytic_curve(scenario, d_db)
    return OutageCurve(
        d_db=d_db,
        trials=scenario.trials,
        count_nearest=counts["nearest"],
        count_total=counts["total"],
        retained=retained,
        **columns,
    )


@dataclass
class DominanceReport:
    r"""
    Ratio of the total-statistic tail to the nearest-statistic tail, which tends to 1 deep in the outage tail.

    :ivar x_db: threshold grid [dB]
    :ivar ratio: :math:`\Pr\{\sum > x\}/\Pr\{X > x\}` (``nan`` where the denominator has no exceedances)
    :ivar ci_lo: lower end of the 99% delta-method interval of the ratio
    :ivar ci_hi: upper end
    :ivar insufficient: grid points with no nearest-statistic exceedance
    :ivar lower_ratio: the same ratio for the lower sandwich bound :math:`X_1 + X_2`
    :ivar upper_ratio: the same ratio for the upper sandwich bound :math:`X_1 + (N-1)X_2`
    :ivar tail_index: local decay exponent :math:`-\ln(P(ax)/P(x))/\ln a` of the nearest statistic between neighbouring grid points (last entry ``nan``)
    :ivar expected_tail_index: leading order times :math:`m/\nu`
    """

    x_db: np.ndarray
    trials: int
    p_nearest: np.ndarray
    p_total: np.ndarray
    ratio: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    insufficient: np.ndarray
    lower_ratio: np.ndarray
    upper_ratio: np.ndarray
    tail_index: np.ndarray
    expected_tail_index: float


def dominance_report(scenario, x_db, workers=1, chunk_size=2000):
    r"""
    Compare the total-interference tail with the nearest-interferer tail over a threshold grid.

    The ratio interval uses the delta method on :math:`\ln R`. Since the nearest event implies the total event,

    .. math::

        \mathrm{Var}(\ln \hat{R}) \approx \frac{1 - p_n}{n p_n} - \frac{1 - p_t}{n p_t}

    Args:
        scenario (Scenario): experiment
        x_db (array): ascending threshold grid [dB]
        workers (int): worker processes
        chunk_size (int): trials per unit of work

    Returns:
        DominanceReport
    """
    x_db = np.atleast_1d(np.asarray(x_db, dtype=float))
    if len(x_db) == 0:
        raise ValueError("threshold grid is empty")
    assert np.all(np.diff(x_db) > 0), "threshold grid must be ascending"

    counts, _ = _accumulate(scenario, db_to_linear(x_db), workers, chunk_size)
    n = scenario.trials
    c_near = counts["nearest"]
    insufficient = c_near == 0

    with np.errstate(divide="ignore", invalid="ignore"):
        p_n = c_near / n
        p_t = counts["total"] / n
        ratio = np.where(insufficient, np.nan, counts["total"] / c_near)
        var = (1 - p_n) / (n * p_n) - (1 - p_t) / (n * p_t)
        half = norm.ppf(0.5 + confidence / 2.0) * np.sqrt(np.maximum(var, 0.0))
        lower_ratio = np.where(insufficient, np.nan, counts["lower"] / c_near)
        upper_ratio = np.where(insufficient, np.nan, counts["upper"] / c_near)

        log_a = np.diff(x_db) * np.log(10.0) / 10.0
        tail = -np.diff(np.log(p_n)) / log_a
    tail = np.where(np.isfinite(tail), tail, np.nan)

    return DominanceReport(
        x_db=x_db,
        trials=n,
        p_nearest=p_n,
        p_total=p_t,
        ratio=ratio,
        ci_lo=np.where(insufficient, np.nan, ratio * np.exp(-half)),
        ci_hi=np.where(insufficient, np.nan, ratio * np.exp(half)),
        insufficient=insufficient,
        lower_ratio=lower_ratio,
        upper_ratio=upper_ratio,
        tail_index=np.append(tail, np.nan),
        expected_tail_index=scenario.policy.leading_order * scenario.m / scenario.params.nu,
    )
