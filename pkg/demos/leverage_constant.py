# %% [markdown]
# # Calibrating the leverage sample-size constant
#
# The sample size is `r = c * rho/eps^2 * ln(rho / (eps^2 sqrt(delta)))`.
# We scan `c` and record how often `||I - U'R'RU||` exceeds `eps`.

# %%
from spectralfs.linalg import random_orthonormal
from spectralfs.samplers import (
    LEVERAGE_CONSTANT,
    calibrate_leverage_constant,
    leverage_failure_rate,
    leverage_sample_size,
)

d, rho, eps, delta = 500, 5, 0.5, 0.1
u = random_orthonormal(d, rho, seed=7)
for c in (0.25, 0.5, 0.75, 1.0, 1.5):
    r = leverage_sample_size(rho, eps, delta, c)
    rate = leverage_failure_rate(u, r, eps, trials=500, seed=8)
    print(f"c={c:4.2f}  r={r:4d}  failure rate {rate:.3f}")

# %%
c = calibrate_leverage_constant(d, rho, eps, delta)
print(f"calibrated c = {c}, shipped default = {LEVERAGE_CONSTANT}")
