"""
Frame potentials and local indistinguishability
===============================================

Sampling explicit circuits gives two cheap diagnostics: the frame potential,
which decreases to ``t!`` as the walk mixes, and the local distance between
two orthogonal states after a deep parallel circuit.
"""

# %%
from rqcdesigns import haar_mc as mc

# %%
# Frame potential of the local walk on three qubits, ``t = 2``.
for steps in (0, 1, 2, 5, 10, 20, 40):
    r = mc.frame_potential("lr", 3, 2, steps, 2, 400, seed=0)
    print(f"steps={steps:3d}: {r.estimate:10.3f} +- {r.std_error:.3f}")
print("Haar value:", mc.haar_frame_potential(8, 2))

# %%
# Local distinguishability on eight qubits, regions of up to two sites.
for steps in (0, 4, 16, 240):
    rec = mc.tqo_experiment(8, 2, steps, 2, seed=1)
    print(f"layers={steps:4d}: dist0={rec.dist0:.3f} dist1={rec.dist1:.3f} "
          f"cross={rec.cross:.3f}  (bound {rec.bound:.3f})")
