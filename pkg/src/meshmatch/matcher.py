"""Fractional matching objective: cardinality sweep with harmonic-bound pruning.

The mean matching cost g(x)/x is minimized by solving cardinality-fixed
binary programs at selected x and discarding intervals whose lower
bound h(k) - sum_{i=j}^{k-1} 1/i cannot beat the incumbent mean. The
bound follows from g(x+1) <= g(x) + 1 (an extra product triangle can
always pair with an unconstrained boundary element at cost <= 1), which
telescopes to h(k) - h(j) <= sum_{i=j}^{k-1} 1/i.
"""

import dataclasses
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import features as feat
from . import ilp
from . import product as prod
from . import preprocess, refine

logger = logging.getLogger(__name__)

PRUNE_TOL = 1e-9


class NoMatchingError(RuntimeError):
    """No feasible matching exists (or none was found within the limits)."""


@dataclass
class MatchConfig:
    mode: str = "exact"  # "exact" or "heuristic"
    ilp_budget: float = 900.0  # seconds per subproblem in exact mode; None = unlimited
    budget_ladder: tuple = (10.0, 60.0, 300.0, 900.0)
    initial_spacing: int = 50
    wall_limit: float = 36000.0  # global ceiling per pair; None = unlimited
    jobs: int = 1
    log_path: str = None
    attempts: int = 0
    shrink_meshes: bool = False
    shrink_factor: float = 2.0 / 3.0
    max_attempts: int = 3


@dataclass
class SearchState:
    evaluated: dict = field(default_factory=dict)  # x -> (g, h, status, wall)
    frontier: list = field(default_factory=list)  # pending [j, k] intervals
    best_x: int = None
    best_h: float = float("inf")
    best_assignment: np.ndarray = None
    x_max: int = 0
    initial_spacing: int = 50

    def record(self, x, solution):
        g = solution.objective if solution.feasible else None
        h = (g / x) if g is not None else float("inf")
        self.evaluated[x] = (g, h, solution.status, solution.wall_time)
        if solution.feasible and (
            h < self.best_h - PRUNE_TOL
            or (abs(h - self.best_h) <= PRUNE_TOL and (self.best_x is None or x < self.best_x))
        ):
            self.best_x = x
            self.best_h = h
            self.best_assignment = solution.assignment

    def conclusive(self):
        return all(
            status in (ilp.SolveStatus.OPTIMAL, ilp.SolveStatus.INFEASIBLE)
            for _, _, status, _ in self.evaluated.values()
        )


def harmonic_sum(j, k):
    """Sum of 1/i for i in [j, k-1]."""
    if k <= j:
        return 0.0
    return float(np.sum(1.0 / np.arange(j, k, dtype=np.float64)))


def interval_lower_bound(j, k, h_k):
    """Lower bound on h(x) for every x in [j, k].

    Valid whenever g(k) is solved to optimality: h(k) - h(x) is at most
    the harmonic tail from x, which is largest at x = j.
    """
    if not 1 <= j < k:
        raise ValueError("need 1 <= j < k")
    return h_k - harmonic_sum(j, k)


def build_cardinality_problem(costs, constraints, x):
    """The cardinality-x binary program for one product space."""
    n = constraints.n_columns
    le = sp.vstack([constraints.pi_x, constraints.pi_y], format="csr")
    le_rhs = np.ones(le.shape[0])
    cover = sp.csr_matrix(
        (np.ones(len(constraints.nb_columns)),
         (np.zeros(len(constraints.nb_columns), dtype=np.int64), constraints.nb_columns)),
        shape=(1, n),
    )
    return ilp.IlpProblem(
        costs=costs,
        cardinality=int(x),
        eq=constraints.boundary,
        eq_rhs=np.zeros(constraints.boundary.shape[0]),
        le=le,
        le_rhs=le_rhs,
        ge=cover,
        ge_rhs=np.ones(1),
    )


class _RunLog:
    """Append-only per-subproblem log: ``x, g(x), h(x), status, wall_time``."""

    def __init__(self, path=None):
        self.path = path
        self.rows = []

    def add(self, x, solution):
        g = solution.objective if solution.feasible else float("inf")
        h = g / x if np.isfinite(g) else float("inf")
        row = (x, g, h, solution.status.value, solution.wall_time)
        self.rows.append(row)
        if self.path:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(f"{x}, {g:.12g}, {h:.12g}, {solution.status.value}, "
                         f"{solution.wall_time:.3f}\n")


def _evaluate_batch(xs, costs, constraints, budget, deadline, state, log, jobs):
    """Solve the subproblems for a batch of cardinalities."""

    def run(x):
        eff = budget
        if deadline is not None:
            remaining = deadline - time.perf_counter()
            if remaining <= 0:
                return x, None
            eff = remaining if eff is None else min(eff, remaining)
        problem = build_cardinality_problem(costs, constraints, x)
        return x, ilp.solve(problem, time_budget=eff)

    if jobs > 1 and len(xs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, xs))
    else:
        results = [run(x) for x in xs]
    hit_wall = False
    for x, solution in sorted(results):
        if solution is None:
            hit_wall = True
            continue
        state.record(x, solution)
        if log is not None:
            log.add(x, solution)
    return hit_wall


def pruned_search(space, constraints, costs, config, log=None):
    """Minimize g(x)/x over x in [1, x_max] with interval pruning.

    Evaluates g at spaced starting points, then repeatedly bisects every
    interval whose harmonic lower bound stays below the incumbent mean
    (strictly, tolerance 1e-9). Intervals whose right endpoint was not
    solved to optimality are always bisected: an unproven endpoint
    cannot prune. Raises NoMatchingError when no cardinality admits a
    feasible matching.
    """
    if log is None:
        log = _RunLog(config.log_path)
    x_max = space.n_x_triangles + space.n_y_triangles
    state = SearchState(x_max=x_max, initial_spacing=config.initial_spacing)
    if len(constraints.nb_columns) == 0:
        raise NoMatchingError(
            "no non-boundary triangle pairs: the coverage constraint is unsatisfiable"
        )
    if x_max < 1:
        raise NoMatchingError("empty product space")
    deadline = (
        time.perf_counter() + config.wall_limit if config.wall_limit is not None else None
    )
    budget = config.ilp_budget

    points = sorted(set(range(1, x_max + 1, config.initial_spacing)) | {1, x_max})
    hit_wall = _evaluate_batch(points, costs, constraints, budget, deadline, state, log,
                               config.jobs)
    state.frontier = [
        [points[i], points[i + 1]]
        for i in range(len(points) - 1)
        if points[i + 1] - points[i] > 1
    ]

    while state.frontier and not hit_wall:
        survivors = []
        for j, k in state.frontier:
            g_k, h_k, status_k, _ = state.evaluated[k]
            if status_k == ilp.SolveStatus.OPTIMAL:
                if interval_lower_bound(j, k, h_k) >= state.best_h - PRUNE_TOL:
                    continue  # provably no better mean inside
            survivors.append([j, k])
        if not survivors:
            break
        mids = sorted({(j + k) // 2 for j, k in survivors} - set(state.evaluated))
        if mids:
            hit_wall = _evaluate_batch(mids, costs, constraints, budget, deadline, state,
                                       log, config.jobs)
        next_frontier = []
        for j, k in survivors:
            mid = (j + k) // 2
            for a, b in ((j, mid), (mid, k)):
                if b - a > 1:
                    next_frontier.append([a, b])
        state.frontier = next_frontier

    if state.best_assignment is None:
        raise NoMatchingError("no cardinality admits a feasible matching")
    selected = np.nonzero(state.best_assignment)[0]
    g_star = float(costs[selected].sum())
    mask_x, mask_y = refine.overlap_masks(
        space, selected, space.n_x_vertices, space.n_y_vertices
    )
    return refine.MatchingResult(
        selected=selected,
        x_star=int(state.best_x),
        g_star=g_star,
        h_star=float(state.best_h),
        globally_optimal=(not state.frontier) and (not hit_wall) and state.conclusive(),
        overlap_x=mask_x,
        overlap_y=mask_y,
        evaluations=dict(state.evaluated),
    )


def heuristic_search(space, constraints, costs, config, log=None):
    """Budget-laddered search trading optimality for runtime.

    Runs the pruned sweep with the smallest per-subproblem budget and
    returns the best feasible incumbent. When no subproblem finishes at
    a rung, the whole sweep is retried at the next larger budget. The
    global-optimality flag survives only when every subproblem reports
    a conclusive status.
    """
    if log is None:
        log = _RunLog(config.log_path)
    if len(constraints.nb_columns) == 0:
        raise NoMatchingError(
            "no non-boundary triangle pairs: the coverage constraint is unsatisfiable"
        )
    last_error = None
    for rung, budget in enumerate(config.budget_ladder):
        attempt = dataclasses.replace(config, ilp_budget=float(budget))
        try:
            result = pruned_search(space, constraints, costs, attempt, log=log)
            return result
        except NoMatchingError as err:
            last_error = err
            all_conclusive = _log_all_conclusive(log)
            if all_conclusive:
                raise  # proven infeasible; more time cannot help
            logger.info("no subproblem finished within %.1fs, escalating budget", budget)
    raise NoMatchingError(f"budget ladder exhausted: {last_error}")


def _log_all_conclusive(log):
    seen = {}
    for x, _, _, status, _ in log.rows:
        seen[x] = status
    if not seen:
        return False
    return all(
        s in (ilp.SolveStatus.OPTIMAL.value, ilp.SolveStatus.INFEASIBLE.value)
        for s in seen.values()
    )


def fallback_policy(config):
    """Escalation after a failed attempt: halve the spacing, then shrink.

    The first retry reduces the initial interval spacing from 50 to 25;
    the second switches on mesh shrinking (both meshes decimated to 2/3
    of their current triangle targets) while keeping the spacing. More
    than ``max_attempts`` escalations is a hard failure.
    """
    attempts = config.attempts + 1
    if attempts > config.max_attempts:
        raise RuntimeError(
            f"matching failed after {config.attempts} fallback escalations"
        )
    updated = dataclasses.replace(config, attempts=attempts)
    if attempts == 1:
        updated = dataclasses.replace(updated, initial_spacing=max(1, config.initial_spacing // 2))
    else:
        updated = dataclasses.replace(updated, shrink_meshes=True)
    return updated


def exhaustive_sweep(space, constraints, costs, time_budget=None):
    """Oracle sweep: solve every cardinality in [1, x_max] outright."""
    x_max = space.n_x_triangles + space.n_y_triangles
    out = {}
    for x in range(1, x_max + 1):
        problem = build_cardinality_problem(costs, constraints, x)
        out[x] = ilp.solve(problem, time_budget=time_budget)
    return out


# ----------------------------------------------------------------------
# pair-level orchestration


def match_pair(mesh_x, mesh_y, features_x, features_y, config=None, log=None):
    """Full matching of one (already preprocessed) mesh pair.

    Lifts per-vertex features to extended elements, builds the product
    space and its constraints, runs the configured search, and resolves
    the selected product triangles into vertex correspondences.
    """
    config = config or MatchConfig()
    space = prod.enumerate_product_triangles(mesh_x, mesh_y)
    constraints = prod.build_constraints(mesh_x, mesh_y, space)
    ext_x = feat.triangle_features(mesh_x, features_x)
    ext_y = feat.triangle_features(mesh_y, features_y)
    costs = feat.cost_vector(space, ext_x, ext_y)
    search = heuristic_search if config.mode == "heuristic" else pruned_search
    result = search(space, constraints, costs, config, log=log)
    result.vertex_pairs = refine.to_vertex_correspondences(
        space, result.selected, ext_x, ext_y
    )
    _check_output(constraints, result, costs)
    return result


def match_with_fallback(mesh_x, mesh_y, features_x, features_y, config=None):
    """Matching with the retry policy applied on failure.

    Returns (result, mesh_x, mesh_y, extra_map_x, extra_map_y); the
    extra decimation maps are None unless a shrinking retry fired.
    """
    config = config or MatchConfig()
    cur_x, cur_y = mesh_x, mesh_y
    feats_x, feats_y = features_x, features_y
    extra_map_x = extra_map_y = None
    while True:
        try:
            result = match_pair(cur_x, cur_y, feats_x, feats_y, config)
            return result, cur_x, cur_y, extra_map_x, extra_map_y
        except NoMatchingError:
            config = fallback_policy(config)  # raises after max_attempts
            logger.warning("matching attempt failed; retrying (attempt %d)", config.attempts)
            if config.shrink_meshes:
                target_x = max(4, int(cur_x.n_triangles * config.shrink_factor))
                target_y = max(4, int(cur_y.n_triangles * config.shrink_factor))
                cur_x, dm_x = preprocess.decimate(cur_x, target_x)
                cur_y, dm_y = preprocess.decimate(cur_y, target_y)
                feats_x = feat.transfer_to_coarse(feats_x, dm_x)
                feats_y = feat.transfer_to_coarse(feats_y, dm_y)
                extra_map_x = _compose_maps(extra_map_x, dm_x)
                extra_map_y = _compose_maps(extra_map_y, dm_y)


def _compose_maps(outer, inner):
    if outer is None:
        return inner
    composed = inner.fine_to_coarse[outer.fine_to_coarse]
    return preprocess.DecimationMap(fine_to_coarse=composed)


def _check_output(constraints, result, costs):
    """Independent feasibility evaluation of a returned matching."""
    g = np.zeros(constraints.n_columns, dtype=np.int64)
    g[result.selected] = 1
    if constraints.boundary.shape[0]:
        assert np.abs(constraints.boundary.astype(np.int64) @ g).max(initial=0) == 0
    assert (constraints.pi_x @ g <= 1).all() and (constraints.pi_y @ g <= 1).all()
    assert g[constraints.nb_columns].sum() >= 1
    mean = costs[result.selected].sum() / max(len(result.selected), 1)
    assert abs(mean - result.h_star) <= 1e-9
