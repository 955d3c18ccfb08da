import numpy as np, time
from meshmatch import datasets, features, preprocess, product, matcher
from meshmatch.matcher import build_cardinality_problem
from meshmatch import ilp

base = datasets.icosphere(3)
pair = datasets.synthetic_pair(base, (0,0,1), (0,1,0))
ref = max(pair.mesh_x.area, pair.mesh_y.area)
cx, mx = preprocess.decimate(pair.mesh_x, preprocess.target_triangle_count(pair.mesh_x, ref, density=28))
cy, my = preprocess.decimate(pair.mesh_y, preprocess.target_triangle_count(pair.mesh_y, ref, density=28))
Wx = features.transfer_to_coarse(features.position_features(pair.mesh_x), mx)
Wy = features.transfer_to_coarse(features.position_features(pair.mesh_y), my)
sp = product.enumerate_product_triangles(cx, cy)
cs = product.build_constraints(cx, cy, sp)
costs = features.cost_vector(sp, features.triangle_features(cx, Wx), features.triangle_features(cy, Wy))
x_max = cx.n_triangles + cy.n_triangles
print('x_max', x_max, 'cols', len(sp), flush=True)
for x in range(1, x_max + 1):
    t0 = time.perf_counter()
    s = ilp.solve(build_cardinality_problem(costs, cs, x), time_budget=15.0)
    print(f'x={x} {s.status.value} g={s.objective} h={None if s.objective is None else round(s.objective/x,4)} nodes={s.nodes} lps={s.lp_solves} t={time.perf_counter()-t0:.1f}', flush=True)
