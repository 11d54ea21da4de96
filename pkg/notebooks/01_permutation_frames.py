"""
Permutation frames and their Gram matrices
==========================================

The fixed space of a Haar-averaged two-site moment operator is spanned by
vectorised permutation operators.  They are not orthogonal, so the projector
needs the dual frame.  This script looks at how far from orthogonal they are.
"""

# %%
import numpy as np

from rqcdesigns import permgroup as pg

# %%
# Overlaps only depend on the cycle count of ``pi sigma^-1``.
for t in (2, 3):
    frame = pg.build_frame(t, 2)
    print(f"t={t}, q=2: {frame.size} permutations, rank {frame.rank}")
    print(np.round(frame.gram, 4))

# %%
# Over ``n`` sites the Gram matrix is the entrywise ``n``-th power, and its
# row sums have a closed form.  The frame becomes nearly orthonormal once
# ``t^2 << d^n``.
print(" n  column sum   bound    deviation  t^2/d^n")
for n in range(2, 9):
    diag = pg.frame_diagnostics(n, 3, 2)
    if not diag["precondition_met"]:
        continue
    print(f"{n:2d}  {diag['column_sum']:.6f}  {diag['column_sum_bound']:.6f}  "
          f"{diag['deviation']:.6f}  {diag['deviation_bound']:.6f}")
