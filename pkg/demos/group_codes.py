"""Finite-group codes: exact erasure correction and a failing control.

Run with ``python3 demos/group_codes.py``.
"""

from covqec import groupcodes

for name in ["Z2", "Z3", "S3"]:
    G = groupcodes.builtin_group(name)
    c422 = groupcodes.code_422(G)
    kl = [groupcodes.verify_kl_erasure(c422, (i,)) for i in range(4)]
    flip = groupcodes.phaseflip_code(G, 3)
    bad = groupcodes.verify_kl_erasure(flip, (0,))
    print(f"{name}: |G|={G.order} abelian={G.is_abelian()}")
    print(f"  [[4,2,2]]-type code, d_L={c422.d_L}: max KL violation {max(kl):.1e}")
    print(f"  phaseflip code: KL violation on subsystem 1 = {bad:.4f}")
    for m in [2, 3]:
        c = groupcodes.code_2m(G, m)
        worst = max(groupcodes.verify_kl_erasure(c, (i,)) for i in range(c.n_sub))
        print(f"  2m-subsystem code, m={m}: n={c.n_sub}, max single-erasure KL {worst:.1e}")
