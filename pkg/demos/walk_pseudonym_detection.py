"""Walk through the pseudonym-hash detection pipeline on a tiny pool.

Builds a 6-vehicle pool, stages a multi-identity vehicle and an honest
coarse collision in front of one roadside box, and prints what the box
reports and how the authority rules on each report.

Run:  python3 demos/walk_pseudonym_detection.py
"""

from vanet_sybil import (
    Beacon,
    HashKey,
    KeyRole,
    RsbObserver,
    dmv_adjudicate,
    generate_pool,
)

coarse_key = HashKey(KeyRole.GLOBAL_COARSE, b"demo-coarse-key-demo-coarse-key!")
fine_key = HashKey(KeyRole.DMV_FINE, b"demo-fine-key!!!demo-fine-key!!!")

# Narrow widths (3 coarse bits, 2 fine bits) force visible collisions.
pool = generate_pool(coarse_key, fine_key, 6, 4, coarse_bits=3, fine_bits=2, rng_seed=1)

print("pool layout (coarse / fine per vehicle):")
for vehicle, block in pool.assignments.items():
    coarse = pool.coarse_of[block[0]]
    fine = pool.fine_of[block[0]]
    print(f"  {vehicle}: coarse={coarse} fine={fine} pseudonyms={[p.hex()[:8] for p in block]}")

# Pick a vehicle and let it broadcast two of its own pseudonyms 2 s apart,
# then find an honest vehicle sharing its coarse value to stage a collision.
cheater = "veh0000"
cheater_block = pool.assignments[cheater]
cheater_coarse = pool.coarse_of[cheater_block[0]]
honest = next(
    v
    for v, block in pool.assignments.items()
    if v != cheater and pool.coarse_of[block[0]] == cheater_coarse
)
print(f"\n{cheater} will forge a second identity; {honest} shares its coarse value {cheater_coarse}")

observer = RsbObserver("rsb_demo", coarse_key=coarse_key, coarse_bits=3)
broadcasts = [
    Beacon("idA", cheater_block[0], 10.0, 50.0, 30.0),
    Beacon("idB", cheater_block[1], 12.0, 52.0, 30.0),   # same vehicle, 2 s later
    Beacon("idC", pool.assignments[honest][0], 13.0, 60.0, 28.0),  # honest collision
]

print("\nroadside box output:")
for beacon in broadcasts:
    for report in observer.observe(beacon):
        verdict = dmv_adjudicate(report, coarse_key, fine_key, coarse_bits=3, fine_bits=2)
        pair = ", ".join(p.hex()[:8] for p in report.pseudonyms)
        print(f"  t={report.window_end:5.1f}  pair ({pair})  coarse={report.coarse}")
        if verdict.is_sybil:
            owner = pool.owner_of(verdict.pseudonyms[0])
            print(f"      authority: sybil, fine group {verdict.fine}, owner {owner}")
        else:
            print("      authority: false alarm (fine values differ)")
