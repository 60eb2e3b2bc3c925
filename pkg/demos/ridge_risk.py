# %% [markdown]
# # Fixed-design ridge risk after feature selection
#
# Compare the analytic risk of the full linear kernel with the kernel
# built from sampled features, and check the formula by simulation.

# %%
import numpy as np

from spectralfs import SyntheticSpec, synth_regression, thin_svd
from spectralfs.harness import compare_risk, select_features
from spectralfs.risk import kernel, monte_carlo_risk, risk, risk_inflation_factor, sampled_kernel

x, y, beta, z = synth_regression(SyntheticSpec(n=30, d=1000, k=90, seed=0, noise_sigma=1.0))
u = thin_svd(x).u

# %% [markdown]
# ## Risk ratios across the regularization path

# %%
print(" lam  method    full      sampled   ratio  distortion  cap")
for method in ("bss", "leverage"):
    s = select_features(method, x, None, 240, seed=0)
    for lam in (0.1, 0.3, 0.5, 0.7):
        c = compare_risk(x, z, 1.0, s, lam, u=u)
        cap = risk_inflation_factor(c.delta_hat) if c.delta_hat < 1 else float("inf")
        print(f"{lam:4.1f}  {method:8s} {c.full:9.4f} {c.sampled:9.4f} "
              f"{c.sampled / c.full:6.3f}  {c.delta_hat:10.3f} {cap:6.2f}")

# %% [markdown]
# ## Monte-Carlo check of the closed form

# %%
s = select_features("bss", x, None, 240)
for name, k in (("full", kernel(x)), ("sampled", sampled_kernel(x, s))):
    rep = risk(k, z, 0.3, 1.0)
    mean, se = monte_carlo_risk(k, z, 0.3, 1.0, trials=20000, seed=1)
    print(f"{name:8s} analytic {rep.total:.4f}  simulated {mean:.4f} +/- {se:.4f}")
