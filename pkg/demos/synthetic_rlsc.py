# %% [markdown]
# # Feature selection for RLSC on synthetic data
#
# Thirty points in a thousand dimensions. The first `k` features carry
# the label through their class-conditional mean; the rest are noise.

# %%
import numpy as np

from spectralfs import SyntheticSpec, synth_classification, thin_svd
from spectralfs.bss import certify_spectral_bound
from spectralfs.harness import cross_validate_rlsc, select_features, top_features

x, y = synth_classification(SyntheticSpec(n=30, d=1000, k=90, seed=0))
svd = thin_svd(x)
print(f"X is {x.shape[0]} x {x.shape[1]}, rank {svd.rho}, condition number {svd.condition_number:.1f}")

# %% [markdown]
# ## How close is each sampled Gram matrix to the identity?
#
# For the randomized and deterministic spectral methods we can measure
# `||I - U'R'RU||` directly.

# %%
for method in ("bss", "leverage"):
    s = select_features(method, x, y, 80, seed=0)
    print(f"{method:9s} r={s.r}  distortion={certify_spectral_bound(svd.u, s):.3f}")

# %% [markdown]
# ## Ten-fold cross-validation, ten repeats

# %%
lambdas = [0.0, 0.1, 0.5, 0.9]
for method in ("bss", "leverage", "rrqr", "info-gain"):
    cv = cross_validate_rlsc(x, y, method, 80, lambdas, folds=10, repeats=10, seed=0)
    err = cv.repeat_error_pct().mean(axis=0)
    top = top_features(cv.selections, 1000, m=5)
    print(f"{method:9s} error% {np.round(err, 2)}  top features {top.tolist()}")
