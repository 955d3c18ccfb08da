"""Binary linear programs: branch-and-bound over an LP-relaxation bound.

Problems carry equality, upper-bound, and lower-bound rows with integer
coefficients, plus a mandatory cardinality row fixing the number of
selected variables. LP relaxations are solved with scipy's HiGHS dual
simplex (deterministic single-threaded); the tree search uses
best-bound node selection and most-fractional branching, and every
incumbent is re-verified by exact integer constraint evaluation.
"""

import heapq
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

INT_TOL = 1e-6
OBJ_TOL = 1e-9


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    FEASIBLE_TIMEOUT = "FeasibleTimeout"
    INFEASIBLE = "Infeasible"
    TIMEOUT_NO_SOLUTION = "TimeoutNoSolution"


def _as_csr(mat, n):
    if mat is None:
        return sp.csr_matrix((0, n))
    mat = sp.csr_matrix(mat)
    if mat.shape[1] != n:
        raise ValueError("constraint matrix width does not match variable count")
    return mat


@dataclass
class IlpProblem:
    """min <costs, g> s.t. eq g = eq_rhs, le g <= le_rhs, ge g >= ge_rhs,
    sum(g) = cardinality, g binary."""

    costs: np.ndarray
    cardinality: int
    eq: sp.csr_matrix = None
    eq_rhs: np.ndarray = None
    le: sp.csr_matrix = None
    le_rhs: np.ndarray = None
    ge: sp.csr_matrix = None
    ge_rhs: np.ndarray = None

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=np.float64).ravel()
        n = len(self.costs)
        self.eq = _as_csr(self.eq, n)
        self.le = _as_csr(self.le, n)
        self.ge = _as_csr(self.ge, n)
        self.eq_rhs = self._rhs(self.eq_rhs, self.eq.shape[0])
        self.le_rhs = self._rhs(self.le_rhs, self.le.shape[0])
        self.ge_rhs = self._rhs(self.ge_rhs, self.ge.shape[0])
        if self.cardinality < 1:
            raise ValueError("cardinality must be a positive integer")

    @staticmethod
    def _rhs(rhs, m):
        if rhs is None:
            rhs = np.zeros(m)
        rhs = np.asarray(rhs, dtype=np.float64).ravel()
        if len(rhs) != m:
            raise ValueError("right-hand side length does not match row count")
        return rhs

    @property
    def n(self):
        return len(self.costs)

    def check_feasible(self, assignment):
        """Exact integer feasibility check of a binary assignment."""
        g = np.asarray(assignment, dtype=np.int64).ravel()
        if len(g) != self.n or ((g != 0) & (g != 1)).any():
            return False
        if int(g.sum()) != self.cardinality:
            return False
        if self.eq.shape[0] and not np.array_equal(
            self.eq.astype(np.int64) @ g, self.eq_rhs.astype(np.int64)
        ):
            return False
        if self.le.shape[0] and (self.le.astype(np.int64) @ g > self.le_rhs.astype(np.int64)).any():
            return False
        if self.ge.shape[0] and (self.ge.astype(np.int64) @ g < self.ge_rhs.astype(np.int64)).any():
            return False
        return True

    def objective(self, assignment):
        return float(self.costs @ np.asarray(assignment, dtype=np.float64))


@dataclass
class IlpSolution:
    assignment: np.ndarray
    objective: float
    status: SolveStatus
    wall_time: float = 0.0
    nodes: int = 0
    lp_solves: int = 0

    @property
    def feasible(self):
        return self.status in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE_TIMEOUT)


# ----------------------------------------------------------------------
# LP relaxation backend


class _LpResult:
    __slots__ = ("status", "x", "objective")

    def __init__(self, status, x=None, objective=None):
        self.status = status  # optimal | infeasible | fail
        self.x = x
        self.objective = objective


class _Relaxation:
    """Shared LP data for one problem; nodes vary only variable bounds."""

    def __init__(self, problem):
        n = problem.n
        ub_parts = []
        ub_rhs = []
        if problem.le.shape[0]:
            ub_parts.append(problem.le)
            ub_rhs.append(problem.le_rhs)
        if problem.ge.shape[0]:
            ub_parts.append(-problem.ge)
            ub_rhs.append(-problem.ge_rhs)
        self.A_ub = sp.vstack(ub_parts, format="csr") if ub_parts else None
        self.b_ub = np.concatenate(ub_rhs) if ub_rhs else None
        self.A_eq = sp.vstack(
            [problem.eq, sp.csr_matrix(np.ones((1, n)))], format="csr"
        )
        self.b_eq = np.concatenate([problem.eq_rhs, [float(problem.cardinality)]])
        self.costs = problem.costs

    def solve(self, lb, ub):
        res = linprog(
            self.costs,
            A_ub=self.A_ub,
            b_ub=self.b_ub,
            A_eq=self.A_eq,
            b_eq=self.b_eq,
            bounds=np.column_stack([lb, ub]),
            method="highs-ds",
        )
        if res.status == 0:
            return _LpResult("optimal", res.x, float(res.fun))
        if res.status == 2:
            return _LpResult("infeasible")
        return _LpResult("fail")


def lp_relax(problem):
    """Optimal value of the continuous relaxation in [0, 1]^n.

    Lower-bounds every feasible integer objective. Returns +inf when
    the relaxation is proven infeasible and falls back to 0 on
    numerical failure (a valid bound since costs are non-negative).
    """
    res = _Relaxation(problem).solve(np.zeros(problem.n), np.ones(problem.n))
    if res.status == "optimal":
        return res.objective
    if res.status == "infeasible":
        return float("inf")
    return 0.0


def _greedy_seed(problem, x_lp):
    """Round the LP solution and repair upper-bound rows by dropping
    the costliest selected variables; accept only if exactly feasible."""
    cand = (x_lp >= 0.5).astype(np.int64)
    le = problem.le.astype(np.int64)
    rhs = problem.le_rhs.astype(np.int64)
    for _ in range(problem.n):
        if le.shape[0] == 0:
            break
        lhs = le @ cand
        bad = np.nonzero(lhs > rhs)[0]
        if len(bad) == 0:
            break
        row = le.getrow(int(bad[0]))
        cols = row.indices[row.data > 0]
        cols = [c for c in cols if cand[c] == 1]
        if not cols:
            return None
        drop = max(cols, key=lambda c: (problem.costs[c], c))
        cand[drop] = 0
    if problem.check_feasible(cand):
        return cand
    return None


def solve(problem, time_budget=None):
    """Branch-and-bound solve of a binary program under a wall budget.

    Node selection is best-bound first (ties by depth, then insertion
    order), branching on the most fractional variable (ties by lowest
    index). Every accepted incumbent is re-verified by exact integer
    constraint evaluation. With an expired budget the best incumbent is
    returned with an honest status.
    """
    t0 = time.perf_counter()
    relax = _Relaxation(problem)
    n = problem.n
    c = problem.costs

    counters = {"nodes": 0, "lps": 0}

    def out_of_time():
        return time_budget is not None and time.perf_counter() - t0 >= time_budget

    def node_lp(fixes):
        lb = np.zeros(n)
        ub = np.ones(n)
        for var, val in fixes.items():
            lb[var] = ub[var] = float(val)
        counters["lps"] += 1
        return relax.solve(lb, ub)

    def fixed_bound(fixes):
        return float(sum(c[v] for v, val in fixes.items() if val == 1))

    incumbent = None
    inc_obj = float("inf")

    root = node_lp({})
    if root.status == "infeasible":
        return IlpSolution(None, None, SolveStatus.INFEASIBLE,
                           time.perf_counter() - t0, 0, counters["lps"])
    if root.status == "optimal":
        seed = _greedy_seed(problem, root.x)
        if seed is not None:
            incumbent = seed
            inc_obj = problem.objective(seed)

    heap = []
    tie = [0]

    def push(bound, depth, fixes, x):
        heapq.heappush(heap, (bound, depth, tie[0], fixes, x))
        tie[0] += 1

    if root.status == "optimal":
        push(root.objective, 0, {}, root.x)
    else:  # numerical failure at the root: keep searching from scratch
        push(fixed_bound({}), 0, {}, None)

    timed_out = False
    while heap:
        if out_of_time():
            timed_out = True
            break
        bound, depth, _, fixes, x = heapq.heappop(heap)
        counters["nodes"] += 1
        if bound >= inc_obj - OBJ_TOL:
            continue
        if x is not None:
            frac = np.abs(x - np.round(x))
            if frac.max(initial=0.0) <= INT_TOL:
                cand = np.round(x).astype(np.int64)
                if problem.check_feasible(cand):
                    obj = problem.objective(cand)
                    if obj < inc_obj - OBJ_TOL:
                        incumbent, inc_obj = cand, obj
                    continue
                branch_var = _first_unfixed(fixes, n)
            else:
                branch_var = int(np.argmax(np.minimum(frac, 1.0 - frac)))
        else:
            branch_var = _first_unfixed(fixes, n)
        if branch_var is None:
            continue
        for val in (0, 1):
            if out_of_time():
                timed_out = True
                break
            child_fixes = dict(fixes)
            child_fixes[branch_var] = val
            res = node_lp(child_fixes)
            if res.status == "infeasible":
                continue
            if res.status == "optimal":
                if res.objective >= inc_obj - OBJ_TOL:
                    continue
                frac = np.abs(res.x - np.round(res.x))
                if frac.max(initial=0.0) <= INT_TOL:
                    cand = np.round(res.x).astype(np.int64)
                    if problem.check_feasible(cand):
                        obj = problem.objective(cand)
                        if obj < inc_obj - OBJ_TOL:
                            incumbent, inc_obj = cand, obj
                        continue
                push(res.objective, depth + 1, child_fixes, res.x)
            else:  # numerical failure: keep the node with a weak valid bound
                if len(child_fixes) < n:
                    push(fixed_bound(child_fixes), depth + 1, child_fixes, None)

    wall = time.perf_counter() - t0
    if timed_out and heap:
        if incumbent is not None:
            return IlpSolution(incumbent, inc_obj, SolveStatus.FEASIBLE_TIMEOUT,
                               wall, counters["nodes"], counters["lps"])
        return IlpSolution(None, None, SolveStatus.TIMEOUT_NO_SOLUTION,
                           wall, counters["nodes"], counters["lps"])
    if incumbent is not None:
        assert problem.check_feasible(incumbent)
        return IlpSolution(incumbent, inc_obj, SolveStatus.OPTIMAL,
                           wall, counters["nodes"], counters["lps"])
    return IlpSolution(None, None, SolveStatus.INFEASIBLE,
                       wall, counters["nodes"], counters["lps"])


def _first_unfixed(fixes, n):
    for j in range(n):
        if j not in fixes:
            return j
    return None


# ----------------------------------------------------------------------
# MPS bridge to external solvers


def export_mps(problem, path, name="MESHMATCH"):
    """Write the program as a fixed-layout MPS file.

    Rows are named EQ#, LE#, GE# in original order plus the CARD
    cardinality row; variables are X# binaries. Values are printed with
    17 significant digits so a re-parse reproduces the problem exactly.
    """
    lines = [f"NAME          {name}", "ROWS", " N  COST"]
    for i in range(problem.eq.shape[0]):
        lines.append(f" E  EQ{i}")
    for i in range(problem.le.shape[0]):
        lines.append(f" L  LE{i}")
    for i in range(problem.ge.shape[0]):
        lines.append(f" G  GE{i}")
    lines.append(" E  CARD")
    lines.append("COLUMNS")
    lines.append("    MARKER                 'MARKER'                 'INTORG'")
    eq = problem.eq.tocsc()
    le = problem.le.tocsc()
    ge = problem.ge.tocsc()

    def col_entries(j):
        entries = [("COST", problem.costs[j])]
        for prefix, mat in (("EQ", eq), ("LE", le), ("GE", ge)):
            col = mat.getcol(j).tocoo()
            for r, v in sorted(zip(col.row, col.data)):
                entries.append((f"{prefix}{r}", float(v)))
        entries.append(("CARD", 1.0))
        return entries

    for j in range(problem.n):
        entries = col_entries(j)
        for k in range(0, len(entries), 2):
            chunk = entries[k : k + 2]
            line = f"    X{j:<9}"
            for rname, val in chunk:
                line += f"{rname:<10}{val:.17g}   "
            lines.append(line.rstrip())
    lines.append("    MARKER                 'MARKER'                 'INTEND'")
    lines.append("RHS")
    rhs_entries = []
    for i, v in enumerate(problem.eq_rhs):
        rhs_entries.append((f"EQ{i}", float(v)))
    for i, v in enumerate(problem.le_rhs):
        rhs_entries.append((f"LE{i}", float(v)))
    for i, v in enumerate(problem.ge_rhs):
        rhs_entries.append((f"GE{i}", float(v)))
    rhs_entries.append(("CARD", float(problem.cardinality)))
    for k in range(0, len(rhs_entries), 2):
        chunk = rhs_entries[k : k + 2]
        line = "    RHS       "
        for rname, val in chunk:
            line += f"{rname:<10}{val:.17g}   "
        lines.append(line.rstrip())
    lines.append("BOUNDS")
    for j in range(problem.n):
        lines.append(f" BV BND       X{j}")
    lines.append("ENDATA")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_mps(path):
    """Parse a file written by :func:`export_mps` back into an IlpProblem."""
    section = None
    row_sense = {}
    row_order = []
    col_entries = {}
    rhs = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line.startswith(" "):
                section = line.split()[0]
                continue
            fields = line.split()
            if section == "ROWS":
                sense, rname = fields[0], fields[1]
                row_sense[rname] = sense
                row_order.append(rname)
            elif section == "COLUMNS":
                if "'MARKER'" in fields:
                    continue
                var = fields[0]
                for k in range(1, len(fields), 2):
                    col_entries.setdefault(var, []).append((fields[k], float(fields[k + 1])))
            elif section == "RHS":
                for k in range(1, len(fields), 2):
                    rhs[fields[k]] = float(fields[k + 1])
    var_names = sorted(col_entries, key=lambda v: int(v[1:]))
    n = len(var_names)
    costs = np.zeros(n)
    groups = {"EQ": {}, "LE": {}, "GE": {}}
    for j, var in enumerate(var_names):
        for rname, val in col_entries[var]:
            if rname == "COST":
                costs[j] = val
            elif rname == "CARD":
                continue
            else:
                prefix, idx = rname[:2], int(rname[2:])
                groups[prefix].setdefault(idx, []).append((j, val))
    mats = {}
    rhs_vecs = {}
    for prefix in ("EQ", "LE", "GE"):
        count = sum(1 for rname in row_order if rname.startswith(prefix) and rname != "CARD")
        rows, cols, vals = [], [], []
        for idx, entries in groups[prefix].items():
            for j, v in entries:
                rows.append(idx)
                cols.append(j)
                vals.append(v)
        mats[prefix] = sp.csr_matrix((vals, (rows, cols)), shape=(count, n))
        rhs_vecs[prefix] = np.array([rhs.get(f"{prefix}{i}", 0.0) for i in range(count)])
    cardinality = int(round(rhs.get("CARD", 0)))
    return IlpProblem(
        costs=costs,
        cardinality=cardinality,
        eq=mats["EQ"],
        eq_rhs=rhs_vecs["EQ"],
        le=mats["LE"],
        le_rhs=rhs_vecs["LE"],
        ge=mats["GE"],
        ge_rhs=rhs_vecs["GE"],
    )


def load_assignment(path, problem):
    """Validate and score an externally produced 0/1 assignment file."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                values.append(int(line))
    g = np.asarray(values, dtype=np.int64)
    if len(g) != problem.n:
        raise ValueError(f"assignment has {len(g)} entries for {problem.n} variables")
    if problem.check_feasible(g):
        return IlpSolution(g, problem.objective(g), SolveStatus.FEASIBLE_TIMEOUT)
    return IlpSolution(g, None, SolveStatus.INFEASIBLE)
