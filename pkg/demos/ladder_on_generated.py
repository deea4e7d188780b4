"""Strengthen the root relaxation of a generated fulfillment network.

Builds a Group-1 sized instance, then climbs the configuration ladder with a
few separation rounds per step, and finally prices metric cuts with the
Lagrangian loop. Expect around a minute on one core.
"""

import sys

from mcnd_bounds.bench import format_table, run_ladder
from mcnd_bounds.ecommerce import gen_group
from mcnd_bounds.metric import aggregate, lagrangian_loop
from mcnd_bounds.model import build_bin_model

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
inst = gen_group(1, seed)
print(inst.name, inst.summary())

rows = run_ladder(inst, ["a", "b", "d", "e"], max_rounds=4)
print(format_table(rows))

res = lagrangian_loop(build_bin_model(inst), aggregate(inst, "origin"))
print(f"\nmetric pass: LP {res.base_value:,.0f} -> {res.value:,.0f} with "
      f"{len(res.integrals)} integral cuts; {len(res.helpers)} helper cuts left for the MIP")
