"""Walk through link-tag trajectories and duplicate-series matching.

Three roadside units issue one signed tag per physical contact.  An
honest vehicle builds a unique tag series; a vehicle claiming three
identities can only relay each contact's single tag to all of them, so
the three trajectories end up byte-identical and get grouped.

Run:  python3 demos/walk_tag_trajectories.py
"""

import numpy as np

from vanet_sybil import (
    RsuDirectory,
    Trajectory,
    TrustAuthority,
    append_tag,
    detect_duplicate_series,
)

rng = np.random.default_rng(7)
directory = RsuDirectory()
authority = TrustAuthority(directory, rng.bytes(32))
rsus = [directory.add_rsu(f"rsu{i}", rng.bytes(32), 50.0 + 100.0 * i) for i in range(3)]

honest = Trajectory("honest_car")
sybil_identities = [Trajectory(f"claimed_{c}") for c in "abc"]

# Both vehicles drive past all three units; the forger relays one tag per
# contact to every claimed identity.
for pass_number, rsu in enumerate(rsus):
    t = 10.0 + 30.0 * pass_number
    honest_tag = authority.authorize(rsu.issue_tag(t, rng))
    append_tag(honest, honest_tag, directory)
    shared_tag = authority.authorize(rsu.issue_tag(t + 2.0, rng))
    for trajectory in sybil_identities:
        append_tag(trajectory, shared_tag, directory)

print("trajectories (unit @ time, nonce prefix):")
for trajectory in [honest, *sybil_identities]:
    chain = "  ->  ".join(
        f"{tag.rsu_id}@{tag.issue_time:g} {tag.nonce.hex()[:6]}" for tag in trajectory.tags
    )
    print(f"  {trajectory.identity:<10} {chain}")

groups = detect_duplicate_series([honest, *sybil_identities], match_length=2)
print("\nduplicate trailing series (match length 2):")
for group in groups:
    print(f"  {sorted(group)}  <- one physical vehicle behind all of these")
if not groups:
    print("  none")
