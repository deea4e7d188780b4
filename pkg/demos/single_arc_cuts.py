"""Walk through cut families on one capacitated arc.

Two commodities (demand 60 and 70, module size 100) share the arc at a
fractional LP point. The packing cut lifts installed capacity from 0.58 to
0.9; a four-commodity arc then shows the post-processing lift and the
row-generation search finding the same stronger cut.
"""

import numpy as np

from mcnd_bounds.arcset import arc_sets, make_arc_set
from mcnd_bounds.gensacpack import rowgen_separate
from mcnd_bounds.instance import Arc, Commodity, Instance, Node, Path
from mcnd_bounds.model import build_bin_model
from mcnd_bounds.oracle import enumerate_S, validate_cut
from mcnd_bounds.sacpack import packing_cut, postprocess_lift, separate_sacpack
from mcnd_bounds.solver import solve_lp


def one_arc(demands, q=100):
    arcs = [Arc(0, 0, 1, q, 1.0, 0.0), Arc(1, 0, 1, q, 0.0, 0.0, direct=True)]
    comms = [Commodity(k, 0, 1, d) for k, d in enumerate(demands)]
    paths = [Path(2 * k + j, k, (j,)) for k in range(len(demands)) for j in (0, 1)]
    return Instance([Node(0), Node(1)], arcs, comms, paths, name="one-arc")


def installed(model, values):
    return sum(t * values[c] for t, c in enumerate(model.cap_index[0], start=1))


inst = one_arc([60, 70])
model = build_bin_model(inst)
pin = {model.x_index[p.id]: (v, v) for p, v in zip((p for p in inst.paths if p.arcs == (0,)), (0.5, 0.4))}
model = model.with_bounds(pin)
point = solve_lp(model)
print(f"installed modules at the LP point: {installed(model, point.values):.2f}")

(arc,) = arc_sets(model, inst)
res = separate_sacpack(arc, point)
print(f"separated cut alphas {res.cut.alphas}, violation {res.violation:.2f}")
model.add_cut(res.cut)
print(f"installed modules after the cut:   {installed(model, solve_lp(model).values):.2f}")

arc = make_arc_set(0, 100, 2, [(1, 30, [0]), (2, 30, [1]), (3, 30, [2]), (4, 60, [3])])
vals = np.array([0.5, 0.5, 0.5, 0.5, 0.75, 0.0])
cut = packing_cut(arc, [0, 1, 2, 3])
lifted = postprocess_lift(cut, arc, vals)
print(f"\npacking cut alphas {cut.alphas}, violation {cut.violation(vals):+.2f}")
print(f"lifted coefficients {dict(lifted.x_coefs)}, alphas {lifted.alphas}, "
      f"violation {lifted.violation(vals):+.2f}")

rg = rowgen_separate(arc, vals, B=3)
print(f"row generation: {rg.status} after {rg.info['state'].iterations} iterations, alphas {rg.cut.alphas}")

points = enumerate_S(arc)
print(f"all three cuts valid on {len(points)} enumerated points:",
      all(validate_cut(c, points).valid for c in (cut, lifted, rg.cut)))
