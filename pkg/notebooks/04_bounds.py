"""
Evaluating the closed-form bounds
=================================

Most of the analytic guarantees are astronomically loose at small sizes; the
calculators keep everything in log space and flag vacuous values.
"""

# %%
from rqcdesigns import bounds as bd

# %%
for t in (2, 3, 4):
    ln = bd.design_length(20, t, 2, 1e-3)
    print(f"t={t}: design length {ln.value:.4g} (ln)  {ln.alt_values['log2']:.4g} (log2)")

# %%
for n in (10, 100, 1000):
    r = bd.converse_lower_bound(n, 4, 2, 0.1)
    print(f"converse n={n}: {r.value:.4g}  vacuous={r.vacuous}  reasons={r.reasons}")

# %%
r = bd.hiding_bound(20, 2, 20 ** 7, 20, 0.1)
print(f"hiding bound: log10 = {r.log10_value:.1f}, vacuous={r.vacuous}, t={r.extras['t']:.3f}")
