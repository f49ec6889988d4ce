"""
Why the extra ear-shoulder limbs matter
=======================================

A body without a head stands next to a head with one shoulder. A weak
spurious neck-nose field links them. The tree alone glues them together;
the extra limbs keep them apart.
"""
from pafparse import ParseConfig, detect_parts, parse_poses
from pafparse.scenes import redundant_veto_scene

scene, stack, topo = redundant_veto_scene()
cands = detect_parts(stack)
for use in (True, False):
    people = parse_poses(cands, stack, topo, config=ParseConfig(use_redundant=use))
    print(f"redundant limbs {'on ' if use else 'off'}: {len(people)} people, parts per person "
          f"{[p.n_parts for p in people]}")
