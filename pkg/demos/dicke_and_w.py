"""Many-body codes: Dicke states in the thermodynamic regime and W states.

Run with ``python3 demos/dicke_and_w.py``.
"""

import math

from covqec import bounds, certify, codespace, noise, special

print("Dicke code, d=2, levels m in {0, 10}")
print(f"{'N':>6} {'(1-F) N^2':>10} {'certificate':>12} {'cert * N':>9}")
for N in [100, 200, 400, 800, 1600]:
    F = special.dicke_fidelity(2, 10, N)
    code = codespace.dicke_thermo(N, 2, 2)
    c = certify.certify_reference(code, noise.window_erasure(N, 2)).bound
    print(f"{N:6d} {(1 - F) * N * N:10.4f} {c:12.6e} {c * N:9.4f}")

print()
print("W-state code under single erasures")
print(f"{'d_L':>4} {'n':>4} {'eps_ref':>10} {'sqrt(2/n)':>10} {'nu':>8} {'thm1':>10} {'cert':>10}")
for d_L in [2, 3]:
    for n in [9, 25, 49, 100]:
        code = codespace.w_state_code(d_L, n)
        model = noise.uniform_single_erasure(n)
        c = certify.certify_reference(code, model)
        lo = bounds.thm1_worst_lower(code, model).value
        print(f"{d_L:4d} {n:4d} {c.eps:10.6f} {math.sqrt(2 / n):10.6f} {c.nu:8.5f} {lo:10.6f} {c.bound:10.6f}")
