import numpy as np, time, sys
from meshmatch import datasets, features, preprocess, product, matcher, refine, metrics
from meshmatch.matcher import MatchConfig

density = float(sys.argv[1]) if len(sys.argv) > 1 else 16
normal_b = (0,1,0) if len(sys.argv) <= 2 else tuple(int(v) for v in sys.argv[2].split(','))
budget = 60.0

t_all = time.perf_counter()
import os
base = datasets.icosphere(int(os.environ.get("SUBDIV","2")))
pair = datasets.synthetic_pair(base, (0,0,1), normal_b)
ref = max(pair.mesh_x.area, pair.mesh_y.area)
cx, mx = preprocess.decimate(pair.mesh_x, preprocess.target_triangle_count(pair.mesh_x, ref, density=density))
cy, my = preprocess.decimate(pair.mesh_y, preprocess.target_triangle_count(pair.mesh_y, ref, density=density))
Wfx = features.position_features(pair.mesh_x)
Wfy = features.position_features(pair.mesh_y)
Wx = features.transfer_to_coarse(Wfx, mx)
Wy = features.transfer_to_coarse(Wfy, my)

cfg = MatchConfig(mode='exact', ilp_budget=budget, wall_limit=None)
t0 = time.perf_counter()
res = matcher.match_pair(cx, cy, Wx, Wy, cfg)
t_match = time.perf_counter()-t0
print(f'density={density} overlap={pair.overlap_fraction:.3f} coarse=({cx.n_triangles},{cy.n_triangles})')
print('match', round(t_match,1), 's x*', res.x_star, 'h*', round(res.h_star,4), 'globopt', res.globally_optimal, 'evals', len(res.evaluations))

fine_pairs = refine.upsample(res.vertex_pairs, mx, my, Wfx, Wfy)
mask_x, mask_y = refine.upsample_masks(res.overlap_x, res.overlap_y, mx, my)
iou_x = metrics.iou(mask_x, pair.overlap_x)
iou_y = metrics.iou(mask_y, pair.overlap_y)
errors, curve, auc = metrics.geodesic_error_curve(fine_pairs, pair.pairs, pair.mesh_y)
matched = np.isfinite(errors)
print('IoU x', round(iou_x,3), 'y', round(iou_y,3),
      '| matched frac', round(matched.mean(),3),
      'err<0.1 among matched', round((errors[matched] < 0.1).mean(), 3) if matched.any() else None,
      'AUC', round(auc,1))
print('coarse pairs', len(res.vertex_pairs), 'fine pairs', len(fine_pairs), 'total', round(time.perf_counter()-t_all,1), 's')
