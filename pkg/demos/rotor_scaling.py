"""Certificates and lower bounds for the three-rotor codes as the cutoff grows.

Run with ``python3 demos/rotor_scaling.py``.
"""

import math

import numpy as np

from covqec import bounds, certify, codespace, fidelity, noise

model = noise.uniform_single_erasure(3)

print("sharp cutoff, h=1")
print(f"{'m':>5} {'minorization':>14} {'thm1 lower':>12} {'f_e':>14}")
ms, ups, lows = [20, 40, 80, 160], [], []
for m in ms:
    code = codespace.three_rotor_sharp(1, m)
    up = certify.certify_minorization(code, model).bound
    lo = bounds.thm1_worst_lower(code, model).value
    fe = fidelity.fe_via_constant_channel(code, model).value
    ups.append(up)
    lows.append(lo)
    print(f"{m:5d} {up:14.6e} {lo:12.6e} {fe:14.12f}")
print("log-log slopes: certificate %.3f, lower bound %.3f"
      % (np.polyfit(np.log(ms), np.log(ups), 1)[0], np.polyfit(np.log(ms), np.log(lows), 1)[0]))

print()
print("smooth cutoff, h=2")
print(f"{'w':>5} {'reference cert':>15} {'thm2 lower':>12} {'slack':>10}")
for w in [4, 8, 16, 32]:
    code = codespace.three_rotor_smooth(2, w)
    ref = list(code.logical_labels).index(0)
    up = certify.certify_reference(code, model, ref).bound
    W = 2 * math.sqrt(2 * math.log(12 * w / 2)) * w
    _, worst = bounds.thm2_bounds(code, model, lambda a: (-W, W))
    print(f"{w:5d} {up:15.6e} {worst.value:12.6e} {code.meta['truncation_slack']:10.2e}")
