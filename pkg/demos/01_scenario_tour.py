#!/usr/bin/env python3
"""Tour of scenario synthesis: geometry, clusters, demands, and link rates.

Builds the full-scale 16-beam system, prints the hexagonal beam lattice, the
two-beam clusters with their dual-polarization carriers, the heterogeneous
demand profile, and a slice of the SINR/rate table.
"""
import numpy as np

from bhca import ModcodTable, adjacency_pairs, compute_rate_table, generate_scenario
from bhca.cli import resolve_config_path
from bhca.scenario import load_config

config = load_config(resolve_config_path("table2"))
scenario = generate_scenario(config)

print(f"system: {config.num_beams} beams, {config.num_clusters} clusters, "
      f"{config.users_per_beam} users/beam, seed {config.rng_seed}")
print(f"hopping window: {config.slots_per_window} slots x {config.slot_duration * 1e3:.1f} ms")
print()

print("beam lattice (km):")
for beam in scenario.beams:
    print(f"  beam {beam.id:2d} at ({beam.x_km:6.1f}, {beam.y_km:6.1f})")
print()

print("clusters and carriers:")
for cluster in scenario.clusters:
    carriers = scenario.carriers_of_cluster(cluster.id)
    pol = ", ".join(f"carrier {c.id} ({c.polarization} on beam {c.beam_id})" for c in carriers)
    print(f"  cluster {cluster.id}: beams {cluster.beam_ids} | {pol}")
print()

pairs = adjacency_pairs(scenario)
print(f"adjacent cluster pairs (never co-illuminated): {sorted(pairs)}")
print()

demand = scenario.demand_matrix()
window = config.hopping_window_duration
print("per-cluster demand (Mbps):")
for cluster in scenario.clusters:
    mbps = demand[cluster.id].sum() / window / 1e6
    n_high = sum(scenario.users[u].high_demand for u in cluster.user_ids)
    print(f"  cluster {cluster.id}: {mbps:7.1f} Mbps  ({n_high} high-demand users of {len(cluster.user_ids)})")
high_total = sum(u.high_demand for u in scenario.users)
print(f"total demand: {demand.sum() / window / 1e6:.1f} Mbps, "
      f"{high_total}/{len(scenario.users)} users in the high-demand band")
print()

rates = compute_rate_table(scenario, ModcodTable.default())
print("rate table slice (cluster 0):")
print("  SINR dB:")
print(np.array2string(rates.sinr_db[0], precision=1))
print("  Mbps per carrier:")
print(np.array2string(rates.rate_bps[0] / 1e6, precision=1))
