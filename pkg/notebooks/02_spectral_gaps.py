"""
Spectral gaps of the local and parallel walks
=============================================

Deflated power iteration gives the second eigenvalue of the moment operator of
one walk step.  We compare it with the closed-form guarantees.
"""

# %%
from rqcdesigns import bounds as bd
from rqcdesigns import spectra as sp

# %%
# Local walk at ``t = 2``: gaps of the Hamiltonian level off as the chain grows.
for n in (2, 3, 4, 5):
    g = sp.tpe_value(n, 2, 2)
    gap = (n - 1) * (1 - g.value)
    bound = bd.tpe_gap_bound(n, 2, 2)
    print(f"n={n}: g={g.value:.6f} (residual {g.residual:.1e}, {g.iterations} its)  "
          f"gap={gap:.6f}  guarantee g <= {bound.value:.6f}")

# %%
# Parallel walk and the detectability chain at ``n = 4``.
norm = sp.detectability_norm(4, 2, 2).value
gap = sp.hamiltonian_gap(4, 2, 2).value
lam = sp.tpe_value(4, 2, 2, "plr").value
print(f"||P_odd P_even - P_c|| = {norm:.6f} <= {bd.detectability_bound(gap).value:.6f}")
print(f"lambda_2(parallel)     = {lam:.6f} <= {bd.parallel_from_detectability(norm).value:.6f}")

# %%
# Smallest eigenvalue of the Haar Choi-type state on its support.
for t in (1, 2, 3):
    print(f"N=2, t={t}: {sp.rho_haar_min_eig(2, t).value:.6f}  (2^-2t = {2.0 ** (-2 * t):.6f})")
