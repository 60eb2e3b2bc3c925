# %% [markdown]
# # BSS against leverage sampling on the bundled document corpora
#
# Two small synthetic bag-of-words corpora ship with the package. Terms
# shorter than five characters are dropped on load.

# %%
from spectralfs.harness import ExperimentConfig, format_results, run_rlsc_experiment
from spectralfs.ingest import DEMO_CORPORA, filter_short_terms, load_demo_corpus

for name in DEMO_CORPORA:
    c = filter_short_terms(load_demo_corpus(name))
    print(f"{name}: {c.matrix.d} terms, {c.matrix.n} documents")

# %% [markdown]
# One repeat of ten-fold CV per corpus keeps this quick. The acceptance
# suite uses three.

# %%
for name in DEMO_CORPORA:
    cfg = ExperimentConfig(task="rlsc", selectors=["bss", "leverage"], r_values=[300, 400],
                           lambdas=[0.1, 0.3], folds=10, repeats=1, timing=False,
                           data={"kind": "demo", "name": name})
    print(name)
    print(format_results(run_rlsc_experiment(cfg)))
