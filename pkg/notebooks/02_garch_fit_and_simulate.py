"""
GJR-GARCH: simulate, refit, filter
==================================

The null model is a GJR-GARCH(1,1,1) with standardized Student-t shocks.
Here a series is simulated from S&P500-like parameters, refitted by maximum
likelihood, and the fitted model filters the conditional volatility.
"""

import math

import numpy as np

from vgvalid import GjrGarchParams, NoiseFamily, filter_volatility, fit, simulate
from vgvalid.garch import relaxation_time, unconditional_variance

truth = GjrGarchParams(alpha0=0.002, alpha1=0.0, beta1=0.926, gamma1=0.14,
                       noise=NoiseFamily.student_t(8.9))
print(f"persistence {truth.persistence:.3f}, relaxation time {relaxation_time(truth):.1f} days, "
      f"unconditional variance {unconditional_variance(truth):.3f}")

returns, vol = simulate(truth, 5000, math.sqrt(unconditional_variance(truth)), seed=0)

# alpha1 = 0 sits on the boundary, so its estimate is snapped to 0 with no
# standard error; the others should land within a few standard errors.
report = fit(returns)
print(report.table())

# Filtering the simulated returns with the true parameters and the same
# starting value reproduces the simulated volatility path.
again = filter_volatility(truth, returns, vol.values[0])
print("max |filtered - simulated| =", float(np.max(np.abs(again.values - vol.values))))

# With a heavy-tailed t(8.9) shock and persistence 0.996 the fourth moment of
# returns is infinite, so the sample variance of even 10^6 draws wanders.
for seed in range(3):
    r, _ = simulate(truth, 10 ** 6, math.sqrt(0.5), seed=seed)
    print(f"seed {seed}: sample variance {np.var(r.values):.4f} (target 0.5)")
