"""Monte-Carlo oracle for the quadratic statistical-linearization example.

Reference values for the posterior of conditioning x ~ N(1, 0.04) on
h(x, v) = x^2 + v = 0 with v ~ N(0, 0.01), computed by brute-force sample
moments of the joint Gaussian rather than by sigma points. 10^7 samples
are split into 100 batches; the batch spread gives the standard error of
each reported quantity. The printed numbers are frozen into
tests/test_gaussian.py.
"""

import numpy as np

N_BATCHES = 100
BATCH = 100_000

rng = np.random.Generator(np.random.Philox(20260817))

post_means = np.empty(N_BATCHES)
post_vars = np.empty(N_BATCHES)
for b in range(N_BATCHES):
    x = rng.normal(1.0, 0.2, size=BATCH)
    v = rng.normal(0.0, 0.1, size=BATCH)
    h = x**2 + v
    mean_h = h.mean()
    cov_xh = np.mean((x - x.mean()) * (h - mean_h))
    cov_hh = np.var(h)
    gain = cov_xh / cov_hh
    post_means[b] = x.mean() + gain * (0.0 - mean_h)
    post_vars[b] = np.var(x) - gain * cov_hh * gain

mean_est = post_means.mean()
var_est = post_vars.mean()
mean_se = post_means.std(ddof=1) / np.sqrt(N_BATCHES)
var_se = post_vars.std(ddof=1) / np.sqrt(N_BATCHES)

print(f"posterior mean: {mean_est:.10f}  se {mean_se:.3e}")
print(f"posterior var : {var_est:.10f}  se {var_se:.3e}")

# Closed-form moments of the same linearization, for cross-checking:
# E[x^2] = 1.04, Cov(x, x^2) = 2 mu sigma^2 = 0.08,
# Var(x^2) + Var(v) = 0.1632 + 0.01 = 0.1732.
gain = 0.08 / 0.1732
print(f"closed form   : mean {1.0 - gain * 1.04:.10f}  var {0.04 - 0.08 * gain:.10f}")
