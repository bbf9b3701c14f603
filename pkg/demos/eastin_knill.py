"""How large must the subsystems of an approximately covariant code be?

Run with ``python3 demos/eastin_knill.py``.
"""

import math

from covqec import reptheory

print("qubit code on three subsystems of dimension d")
for d in [2, 4, 16, 256]:
    for n in [1, 10]:
        r = reptheory.ek_eps_lower_from_dims(2, n, (d, d, d))
        print(f"  d={d:4d} n={n:3d} eps >= {r.value:.6f}")

print()
print("subsystems no larger than the logical space")
for d_L in [2, 5, 10]:
    r = reptheory.ek_eps_lower_from_dims(d_L, 10, (d_L,) * 10)
    print(f"  d_L={d_L:3d}: eps >= {r.value:.4f} (1/(2n) = {1 / 20:.4f})")

print()
print("required subsystem dimension for d_L=1000, n=10")
for eps in [1e-1, 1e-2, 1e-3]:
    ln = reptheory.ek_log_min_subsystem_dim(1000, 10, eps)
    print(f"  eps={eps:g}: max d_i >= 10^{ln / math.log(10):.1f}")
