# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: light
#       format_version: '1.5'
#       jupytext_version: 1.11.2
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# + nbsphinx="hidden"
# %matplotlib inline

# + nbsphinx="hidden"
# %run notebook_setup
# -

# # Outage curves
#
# This tutorial walks through the closed-form outage laws and checks them against the simulator. We use a planar field ($m = 2$) with path-loss exponent $\nu = 4$, and choose the density so that on average 100 nodes sit inside the potential interference zone.

import matplotlib.pyplot as plt
import numpy as np

from dominter import analytic, simulator
from dominter.analytic import CancellationPolicy
from dominter.fading import Rayleigh
from dominter.pointfield import UniformDensity
from dominter.propagation import LinkParams, zones
from dominter.utils import db_grid, db_to_linear, linear_to_db

params = LinkParams(nu=4, p_t=1.0, p_0=1e-12)
density = UniformDensity(100 / (np.pi * 1e6))
z = zones(params, density, 2)
print("R_max = {:.0f}, N_max = {:.1f}".format(z.r_max, z.n_max))

# The critical INR $D_0$ is where the average count inside the active zone drops to one. Above it, outage is a rare event caused by the nearest interferer.

d0 = analytic.critical_inr(density, 2, params)
print("D0 = {:.1f} dB".format(float(linear_to_db(d0))))

# ## Cancellation policies
#
# Cancelling the $k-1$ nearest interferers changes the slope of the outage tail from $\bar{N}(D)$ to $\bar{N}(D)^k/k!$. Partial cancellation only shifts the curve by the attenuation $\alpha$.

d_db = db_grid(20, 80, 1)
policies = {
    "no cancellation": CancellationPolicy.none(),
    "k = 2": CancellationPolicy.complete(2),
    "k = 3": CancellationPolicy.complete(3),
    "partial, alpha = 0.1": CancellationPolicy.partial(2, 0.1),
}

fig, ax = plt.subplots(nrows=1)
for label, policy in policies.items():
    points = [analytic.outage(d, policy, density, 2, params) for d in db_to_linear(d_db)]
    p = [pt.p_exact if pt.p_exact is not None else pt.p_approx for pt in points]
    ax.semilogy(d_db, p, label=label)
ax.axvline(linear_to_db(d0), color="0.5", ls=":")
ax.set_ylim(1e-6, 1.5)
ax.set_xlabel("D [dB]")
ax.set_ylabel(r"$P_\mathrm{out}$")
ax.legend()

# ## Monte-Carlo check
#
# A scenario bundles the link, the density and the policy with a trial count and a master seed. The simulator records two statistics per trial: the INR of the strongest surviving interferer and the total INR of all survivors. The first has exactly the law above; the second converges to it in the tail.

scenario = simulator.Scenario(m=2, params=params, density=density, trials=20000, master_seed=1)
curve = simulator.estimate_outage_curve(scenario, db_grid(30, 70, 2))

fig, ax = plt.subplots(nrows=1)
lo, hi = curve.ci_total
ax.fill_between(curve.d_db, lo, hi, color="C0", alpha=0.3, label="99% interval")
ax.semilogy(curve.d_db, curve.p_total, "o", ms=3, label="total, simulated")
ax.semilogy(curve.d_db, curve.p_nearest, "x", ms=3, label="nearest, simulated")
ax.semilogy(curve.d_db, curve.p_exact, "k-", label="exact")
ax.set_xlabel("D [dB]")
ax.set_ylabel(r"$P_\mathrm{out}$")
ax.legend()

print("pass rate: {:.2f}".format(curve.pass_rate()))

# The dominance report makes the comparison explicit: the ratio of the two tails approaches 1 as the threshold grows.

report = simulator.dominance_report(scenario, db_grid(40, 70, 3))
fig, ax = plt.subplots(nrows=1)
ax.plot(report.x_db, report.ratio, "o-")
ax.fill_between(report.x_db, report.ci_lo, report.ci_hi, alpha=0.3)
ax.axhline(1.0, color="0.5", ls=":")
ax.set_xlabel("x [dB]")
ax.set_ylabel("total / nearest")

# ## Fading
#
# With fading the tail keeps its slope and moves by a constant: the fractional moment $\mathbb{E}[g^{km/\nu}]$ of the gain. For Rayleigh fading and $k = 1$ that is $\Gamma(3/2) \approx 0.886$.

faded = simulator.Scenario(
    m=2, params=params, density=density, fading=Rayleigh(), trials=20000, master_seed=1
)
curve = simulator.estimate_outage_curve(faded, db_grid(30, 70, 2))
print("fading shift: {:.3f}".format(curve.fading_shift))

fig, ax = plt.subplots(nrows=1)
ax.semilogy(curve.d_db, curve.p_total, "o", ms=3, label="Rayleigh, simulated")
ax.semilogy(curve.d_db, curve.p_exact, "k-", label="Rayleigh, exact")
ax.semilogy(curve.d_db, curve.p_approx, "k--", label="shifted approximation")
ax.set_xlabel("D [dB]")
ax.set_ylabel(r"$P_\mathrm{out}$")
ax.legend()

# ## Density and capacity
#
# Inverting the tail gives the largest density that keeps outage below a target, and the outage capacity of the desired link.

for k in (1, 2, 3):
    b = analytic.density_bound(0.01, db_to_linear(60.0), CancellationPolicy.complete(k), 2, params)
    print("k = {:}: rho <= {:.3e}".format(k, b.rho_exact))

gamma_db = np.arange(0.0, 81.0, 5.0)
fig, ax = plt.subplots(nrows=1)
for k in (1, 2):
    c = [
        analytic.outage_capacity(
            db_to_linear(g), 0.01, CancellationPolicy.complete(k), density, 2, params
        ).capacity
        for g in gamma_db
    ]
    ax.plot(gamma_db, c, label="k = {:}".format(k))
ax.set_xlabel(r"$\gamma$ [dB]")
ax.set_ylabel(r"$C_\epsilon$ [nat/s/Hz]")
ax.legend()
