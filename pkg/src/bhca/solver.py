"""Exact MILP solving at desk scale: LP relaxations, branch-and-bound, and
an enumeration oracle for tiny instances.

Node relaxations exploit slot interchangeability: time-slots whose columns
carry identical branching bounds are exchangeable, so an optimal relaxation
point exists that is uniform within each such class. Each node therefore
solves a collapsed LP with one column block per slot class and expands the
result back to the full column space. ``solve_lp`` deliberately bypasses the
collapse so tests can cross-check the two routes against each other.
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from heapq import heappush, heappop

import numpy as np

from .model import LESS, LinearConstraint, ModelInstance, SlotStructure, VariableCatalog
from .simplex import LpSolution, solve_dense

BRANCH_RULES = ("most_fractional", "lowest_index")
NODE_ORDERS = ("best_bound", "depth_first")


@dataclass
class SolverOptions:
    integrality_tol: float = 1e-6
    feas_tol: float = 1e-8
    node_limit: int = 1_000_000
    time_limit: float | None = None
    branch_rule: str = "most_fractional"
    node_order: str = "best_bound"
    worker_count: int = 1

    def __post_init__(self):
        if not 0.0 < self.integrality_tol <= 1e-3:
            raise ValueError("integrality_tol must be in (0, 1e-3]")
        if not 0.0 < self.feas_tol <= 1e-3:
            raise ValueError("feas_tol must be in (0, 1e-3]")
        if self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")
        if self.branch_rule not in BRANCH_RULES:
            raise ValueError(f"branch_rule must be one of {BRANCH_RULES}")
        if self.node_order not in NODE_ORDERS:
            raise ValueError(f"node_order must be one of {NODE_ORDERS}")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")


@dataclass
class MilpSolution:
    values: np.ndarray
    objective: float
    status: str          # optimal | feasible | infeasible
    nodes_explored: int
    wall_time: float
    gap: float


class _ReducedLp:
    __slots__ = ("c", "A", "senses", "b", "lo", "hi", "_expand")

    def __init__(self, c, A, senses, b, lo, hi, expand):
        self.c = c
        self.A = A
        self.senses = senses
        self.b = b
        self.lo = lo
        self.hi = hi
        self._expand = expand

    def expand(self, x_red: np.ndarray) -> np.ndarray:
        return self._expand(x_red)


class _Reducer:
    """Builds node LPs, collapsing interchangeable slots when the model
    carries slot structure.

    Two exact reductions stack on top of each other for planner models:
    slots whose columns share identical branching bounds collapse to one
    column block (slot interchangeability), and slots whose illumination
    pattern is fully decided fold away entirely, substituting ``q = beta * z``
    into the coupling rows. With ``use_slots=False`` (or no structure) the
    full dense problem is emitted.
    """

    def __init__(self, model: ModelInstance, use_slots: bool = True):
        self.model = model
        n = model.num_cols
        m = model.num_rows
        indptr, cols, coefs, senses, rhs = model.row_arrays
        self.entry_row = np.repeat(np.arange(m, dtype=np.int64), np.diff(indptr))
        self.entry_col = cols
        self.entry_val = coefs
        self.senses = senses
        self.rhs = rhs

        ss = model.slot_structure if use_slots else None
        self.ss = ss
        if ss is None:
            return
        T = ss.num_slots
        k = ss.slot_cols.shape[1]
        r = ss.slot_rows.shape[1]
        self.T, self.k, self.r = T, k, r
        self.col_slot = np.full(n, -1, dtype=np.int64)
        self.col_pos = np.zeros(n, dtype=np.int64)
        for t in range(T):
            self.col_slot[ss.slot_cols[t]] = t
            self.col_pos[ss.slot_cols[t]] = np.arange(k)
        self.row_slot = np.full(m, -1, dtype=np.int64)
        self.row_pos = np.zeros(m, dtype=np.int64)
        for t in range(T):
            self.row_slot[ss.slot_rows[t]] = t
            self.row_pos[ss.slot_rows[t]] = np.arange(r)
        self.static_cols = np.nonzero(self.col_slot < 0)[0]
        self.static_rows = np.nonzero(self.row_slot < 0)[0]
        self.static_col_idx = np.full(n, -1, dtype=np.int64)
        self.static_col_idx[self.static_cols] = np.arange(self.static_cols.size)
        self.static_row_idx = np.full(m, -1, dtype=np.int64)
        self.static_row_idx[self.static_rows] = np.arange(self.static_rows.size)

        # Planner layout knowledge enables decided-slot folding: positions
        # 0..L-1 of a slot block are the z columns, the rest are q columns
        # ordered like beta.
        cat = model.catalog
        self.planner = (
            isinstance(cat, VariableCatalog)
            and model.pairs is not None
            and model.active_clusters_per_slot is not None
        )
        if self.planner:
            L = cat.num_clusters
            self.n_z = L
            q_count = k - L
            self.q_beta_col = np.empty(q_count, dtype=np.int64)
            self.q_cluster = np.empty(q_count, dtype=np.int64)
            CU = cat.num_carriers * cat.num_users
            for p in range(q_count):
                self.q_beta_col[p] = cat.off_beta + p
                self.q_cluster[p] = p // CU
            if np.any(model.objective[ss.slot_cols.ravel()] != 0.0):
                self.planner = False  # folding assumes slot columns carry no objective
            self.pair_list = sorted(model.pairs) if model.pairs else []
            self.n_t_cap = model.active_clusters_per_slot

    def reduce(self, lo: np.ndarray, hi: np.ndarray) -> _ReducedLp | None:
        """Build the node LP for the given column bounds.

        Returns None when decided illumination patterns already violate the
        per-slot activation cap or an adjacency exclusion.
        """
        model = self.model
        if self.ss is None:
            n = model.num_cols
            m = model.num_rows
            A = np.zeros((m, n))
            A[self.entry_row, self.entry_col] = self.entry_val
            return _ReducedLp(
                model.objective.copy(), A, list(self.senses), self.rhs.copy(),
                lo, hi, lambda x: x,
            )

        ss = self.ss
        T, k, r = self.T, self.k, self.r

        # Decided-slot folding (planner models): slots with every z fixed by
        # branching contribute q = beta * z directly to the coupling rows.
        fold_mult = np.zeros(model.num_cols)  # per q column of decided slots
        decided = np.zeros(T, dtype=bool)
        if self.planner:
            n_z = self.n_z
            for t in range(T):
                zc = ss.slot_cols[t, :n_z]
                if np.all(lo[zc] == hi[zc]):
                    zfix = lo[zc]
                    if zfix.sum() > self.n_t_cap + 1e-9:
                        return None
                    for (p1, p2) in self.pair_list:
                        if zfix[p1] + zfix[p2] > 1.0 + 1e-9:
                            return None
                    decided[t] = True
                    qc = ss.slot_cols[t, n_z:]
                    fold_mult[qc] = zfix[self.q_cluster]

        undecided = np.nonzero(~decided)[0]
        sig_to_class: dict[bytes, int] = {}
        class_of = np.full(T, -1, dtype=np.int64)
        reps = []
        for t in undecided:
            cols_t = ss.slot_cols[t]
            sig = lo[cols_t].tobytes() + hi[cols_t].tobytes()
            g = sig_to_class.get(sig)
            if g is None:
                g = len(reps)
                sig_to_class[sig] = g
                reps.append(t)
            class_of[t] = g
        G = len(reps)
        reps_arr = np.asarray(reps, dtype=np.int64) if reps else np.empty(0, dtype=np.int64)

        n_sc = self.static_cols.size
        n_sr = self.static_rows.size
        n_red = n_sc + G * k
        m_red = n_sr + G * r

        er, ec, ev = self.entry_row, self.entry_col, self.entry_val
        row_slot_e = self.row_slot[er]
        static_row_e = row_slot_e < 0
        class_row_e = np.where(static_row_e, -1, class_of[np.maximum(row_slot_e, 0)])
        rep_row_e = (class_row_e >= 0) & (
            reps_arr[np.maximum(class_row_e, 0)] == row_slot_e if G else False
        )
        include = static_row_e | rep_row_e
        target_row = np.where(
            static_row_e,
            self.static_row_idx[er],
            n_sr + np.maximum(class_row_e, 0) * r + self.row_pos[er],
        )

        col_slot_e = self.col_slot[ec]
        class_col_e = np.where(col_slot_e < 0, -1, class_of[np.maximum(col_slot_e, 0)])
        target_col = np.where(
            col_slot_e < 0,
            self.static_col_idx[ec],
            n_sc + np.maximum(class_col_e, 0) * k + self.col_pos[ec],
        )
        vals = ev
        if self.planner and decided.any():
            # Decided-slot q entries retarget onto beta with the fixed z
            # weight; entries in decided rows were already excluded above.
            col_decided_e = (col_slot_e >= 0) & decided[np.maximum(col_slot_e, 0)]
            vals = np.where(col_decided_e, ev * fold_mult[ec], ev)
            fold_target = self.static_col_idx[self.model_beta_lookup(ec)]
            target_col = np.where(col_decided_e, fold_target, target_col)
        keep = include & (vals != 0.0)
        A = np.zeros((m_red, n_red))
        np.add.at(A, (target_row[keep], target_col[keep]), vals[keep])

        senses_red = list(self.senses[self.static_rows])
        b_red = [self.rhs[self.static_rows]]
        for g in range(G):
            rows_g = ss.slot_rows[reps_arr[g]]
            senses_red.extend(self.senses[rows_g])
            b_red.append(self.rhs[rows_g])
        b_red = np.concatenate(b_red)

        obj_cols = np.nonzero(model.objective)[0]
        c_red = np.zeros(n_red)
        oc_slot = self.col_slot[obj_cols]
        oc_class = np.where(oc_slot < 0, -1, class_of[np.maximum(oc_slot, 0)])
        oc_target = np.where(
            oc_slot < 0,
            self.static_col_idx[obj_cols],
            n_sc + np.maximum(oc_class, 0) * k + self.col_pos[obj_cols],
        )
        np.add.at(c_red, oc_target, model.objective[obj_cols])

        lo_red = np.empty(n_red)
        hi_red = np.empty(n_red)
        lo_red[:n_sc] = lo[self.static_cols]
        hi_red[:n_sc] = hi[self.static_cols]
        for g in range(G):
            cols_g = ss.slot_cols[reps_arr[g]]
            lo_red[n_sc + g * k:n_sc + (g + 1) * k] = lo[cols_g]
            hi_red[n_sc + g * k:n_sc + (g + 1) * k] = hi[cols_g]

        static_cols = self.static_cols
        static_col_idx = self.static_col_idx
        slot_cols = ss.slot_cols
        n_full = model.num_cols
        planner = self.planner
        n_z = self.n_z if planner else 0
        q_beta_col = self.q_beta_col if planner else None
        q_cluster = self.q_cluster if planner else None
        lo_snapshot = lo.copy()

        def expand(x_red: np.ndarray) -> np.ndarray:
            x = np.empty(n_full)
            x[static_cols] = x_red[:n_sc]
            for t in range(T):
                g = class_of[t]
                if g >= 0:
                    x[slot_cols[t]] = x_red[n_sc + g * k:n_sc + (g + 1) * k]
                else:
                    zc = slot_cols[t, :n_z]
                    zfix = lo_snapshot[zc]
                    x[zc] = zfix
                    beta_vals = x_red[static_col_idx[q_beta_col]]
                    x[slot_cols[t, n_z:]] = beta_vals * zfix[q_cluster]
            return x

        return _ReducedLp(c_red, A, senses_red, b_red, lo_red, hi_red, expand)

    def model_beta_lookup(self, cols: np.ndarray) -> np.ndarray:
        """Map q column ids to their beta column ids (planner layout)."""
        cat = self.model.catalog
        rel = np.maximum(cols - cat.off_q, 0)
        return cat.off_beta + rel // cat.num_slots


def solve_lp(model: ModelInstance, fixings: dict[int, tuple[float, float]] | None = None) -> LpSolution:
    """Solve the model's LP relaxation (binaries relaxed to [0,1]) without the
    slot collapse. ``fixings`` narrows column bounds, e.g. ``{j: (1.0, 1.0)}``."""
    lo = model.lower.copy()
    hi = model.upper.copy()
    if fixings:
        for j, (l, h) in fixings.items():
            if l > h:
                raise ValueError(f"fixing for column {j} has lo > hi")
            lo[j] = max(lo[j], l)
            hi[j] = min(hi[j], h)
    red = _Reducer(model, use_slots=False).reduce(lo, hi)
    return solve_dense(red.c, red.A, red.senses, red.b, red.lo, red.hi)


def _maximal_cliques(num_vertices: int, edges) -> list[tuple[int, ...]]:
    """Maximal cliques of a small graph, sorted for determinism."""
    adj = [set() for _ in range(num_vertices)]
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    cliques: list[tuple[int, ...]] = []

    def extend(r: set, p: set, x: set):
        if not p and not x:
            cliques.append(tuple(sorted(r)))
            return
        for v in sorted(p):
            extend(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    extend(set(), set(range(num_vertices)), set())
    return sorted(c for c in cliques if len(c) >= 2)


def _augment_for_search(model: ModelInstance) -> ModelInstance:
    """Build the solver's internal copy of a planner model.

    Four exact, bound-preserving rewrites tighten and shrink the node LPs:

    - add per-(carrier, slot) capacity rows ``sum_u q <= z``, which every
      integral illumination pattern satisfies (z=1 makes them the carrier
      fill budget, z=0 forces q=0), so no integer point is cut;
    - replace the pairwise non-adjacency rows with maximal-clique rows
      ``sum_{l in K} z <= 1``: every slot illuminates an independent set of
      the adjacency graph, so at most one member of any clique is active;
    - drop the product-envelope rows that duplicate the column bounds
      (``q >= 0``) or follow from the capacity rows (``q <= z``);
    - drop <=-rows that the variable bounds already satisfy at their maximum
      (the carrier-count caps when delta_max equals the carrier count).

    The published model is untouched; exports, audits, and constraint counts
    all work off the unaugmented instance.
    """
    cat = model.catalog
    if not isinstance(cat, VariableCatalog) or model.slot_structure is None:
        return model
    L, C, U, T = cat.num_clusters, cat.num_carriers, cat.num_users, cat.num_slots

    cliques = _maximal_cliques(L, model.pairs or ())
    in_large_clique = set()
    for clique in cliques:
        if len(clique) >= 3:
            for a in clique:
                for b in clique:
                    if a < b:
                        in_large_clique.add((a, b))

    lo, hi = model.lower, model.upper
    drop = np.zeros(model.num_rows, dtype=bool)
    c6_membership = {}
    if model.pairs:
        for (a, b) in sorted(model.pairs):
            for t in range(T):
                c6_membership[f"C6_l{a + 1}_l{b + 1}_t{t + 1}"] = (a, b)
    for i, row in enumerate(model.constraints):
        tag = row.tag
        # C9a duplicates the q lower bound and C9b follows from the capacity
        # rows. C9d only forces q upward; since q carries no objective weight
        # and enters supply floors positively, raising it is always free, so
        # node LP values are unchanged without it (incumbents later restore
        # q = beta * z exactly).
        if tag.startswith("C9a_") or tag.startswith("C9b_") or tag.startswith("C9d_"):
            drop[i] = True
        elif tag.startswith("C6_") and c6_membership.get(tag) in in_large_clique:
            drop[i] = True
        elif row.sense == LESS:
            worst = 0.0
            for col, coef in zip(row.cols, row.coefs):
                worst += coef * (hi[col] if coef > 0 else lo[col])
                if not np.isfinite(worst):
                    break
            if np.isfinite(worst) and worst <= row.rhs + 1e-12:
                drop[i] = True
    keep_map = np.cumsum(~drop) - 1
    rows = [row for i, row in enumerate(model.constraints) if not drop[i]]

    extra_by_slot: list[list[int]] = [[] for _ in range(T)]
    for clique in cliques:
        if len(clique) < 3:
            continue
        for t in range(T):
            cols = tuple(cat.z_col(l, t) for l in clique)
            extra_by_slot[t].append(len(rows))
            name = "_".join(f"l{l + 1}" for l in clique)
            rows.append(
                LinearConstraint(cols, (1.0,) * len(clique), LESS, 1.0, f"CLIQ_{name}_t{t + 1}")
            )
    for l in range(L):
        for c in range(C):
            for t in range(T):
                cols = tuple(cat.q_col(l, c, u, t) for u in range(U)) + (cat.z_col(l, t),)
                coefs = (1.0,) * U + (-1.0,)
                extra_by_slot[t].append(len(rows))
                rows.append(
                    LinearConstraint(cols, coefs, LESS, 0.0, f"CAPq_l{l + 1}_c{c + 1}_t{t + 1}")
                )

    ss = model.slot_structure
    slot_rows = []
    for t in range(T):
        kept = [int(keep_map[r]) for r in ss.slot_rows[t] if not drop[r]]
        slot_rows.append(kept + extra_by_slot[t])
    slot_rows = np.asarray(slot_rows, dtype=np.int64)
    return ModelInstance(
        catalog=cat,
        constraints=tuple(rows),
        objective=model.objective,
        lower=model.lower,
        upper=model.upper,
        binary=model.binary,
        epsilon_fill=model.epsilon_fill,
        epsilon_tiebreak=model.epsilon_tiebreak,
        big_m=model.big_m,
        slot_structure=SlotStructure(num_slots=T, slot_cols=ss.slot_cols, slot_rows=slot_rows),
        rate_per_slot=model.rate_per_slot,
        demand=model.demand,
        pairs=model.pairs,
        active_clusters_per_slot=model.active_clusters_per_slot,
        delta_max=model.delta_max,
    )


def _pick_branch_var(x: np.ndarray, pool: np.ndarray, rule: str, tol: float) -> int:
    if pool.size == 0:
        return -1
    frac = np.abs(x[pool] - np.round(x[pool]))
    if rule == "lowest_index":
        idx = np.nonzero(frac > tol)[0]
        return int(pool[idx[0]]) if idx.size else -1
    j = int(np.argmax(frac))
    return int(pool[j]) if frac[j] > tol else -1


def solve_milp(model: ModelInstance, options: SolverOptions | None = None, log=None) -> MilpSolution:
    """Branch-and-bound over the model's binaries.

    The incumbent objective never decreases; the search returns ``optimal``
    once the best open bound is within ``integrality_tol`` of the incumbent.
    Hitting a node or time limit returns ``feasible`` with the best incumbent
    and a positive gap (a final dive guarantees an incumbent exists for any
    feasible model). Deterministic for fixed options and ``worker_count=1``.
    """
    opts = options or SolverOptions()
    t_start = time.perf_counter()
    search_model = _augment_for_search(model)
    reducer = _Reducer(search_model)
    binary_cols = np.nonzero(model.binary)[0]
    tol = opts.integrality_tol
    n = model.num_cols
    emit = log if log is not None else (lambda line: None)

    # Branch illumination binaries first: assignment binaries carry no
    # objective weight, so once every z is integral the assignments round
    # exactly (a=1 where the fill-rate clears the activation floor, largest
    # fills first under the carrier cap) and a polish LP finishes the node.
    cat = model.catalog
    planner = isinstance(cat, VariableCatalog) and model.rate_per_slot is not None
    if planner:
        z_pool = np.arange(cat.off_z, cat.off_tu, dtype=np.int64)
        a_pool = np.arange(cat.off_a, cat.off_beta, dtype=np.int64)
    else:
        z_pool = binary_cols
        a_pool = np.empty(0, dtype=np.int64)

    def canonical(x):
        """Snap binaries to exact integers and restore q = beta * z.

        Supplies can only grow (q rises to the product), so feasibility of
        the supply floors is preserved and every stored incumbent satisfies
        the product envelope exactly.
        """
        x = x.copy()
        x[binary_cols] = np.round(x[binary_cols])
        if planner:
            L, C, U, T = cat.num_clusters, cat.num_carriers, cat.num_users, cat.num_slots
            beta = x[cat.off_beta:cat.off_q].reshape(L, C, U)
            z = x[cat.off_z:cat.off_tu].reshape(L, T)
            x[cat.off_q:cat.off_z] = (beta[:, :, :, None] * z[:, None, None, :]).ravel()
        return x

    def round_assignments(x):
        fixed = {}
        if not planner:
            for j in binary_cols:
                fixed[int(j)] = (float(np.round(x[j])), float(np.round(x[j])))
            return fixed
        L, C, U = cat.num_clusters, cat.num_carriers, cat.num_users
        beta = x[cat.off_beta:cat.off_q].reshape(L, C, U)
        for l in range(L):
            for u in range(U):
                fills = [(-beta[l, c, u], c) for c in range(C) if beta[l, c, u] >= model.epsilon_fill]
                chosen = {c for _, c in sorted(fills)[: model.delta_max]}
                for c in range(C):
                    v = 1.0 if c in chosen else 0.0
                    fixed[cat.a_col(l, c, u)] = (v, v)
        for j in z_pool:
            v = float(np.round(x[j]))
            fixed[int(j)] = (v, v)
        return fixed

    def node_lp(overrides):
        lo = model.lower.copy()
        hi = model.upper.copy()
        for j, (l, h) in overrides.items():
            lo[j] = l
            hi[j] = h
        red = reducer.reduce(lo, hi)
        if red is None:
            return None
        sol = solve_dense(red.c, red.A, red.senses, red.b, red.lo, red.hi, feas_tol=opts.feas_tol)
        if sol.status == "unbounded":
            raise RuntimeError("LP relaxation unbounded: the model is malformed")
        if sol.status != "optimal":
            return None
        return sol.objective, red.expand(sol.values)

    best_x: np.ndarray | None = None
    best_obj = -np.inf
    nodes = 0
    push_id = itertools.count()

    # Open nodes: best_bound uses a max-heap on the parent bound estimate;
    # depth_first uses a stack. Children are pushed down-then-up so the
    # up-branch is explored first. The search always starts with a LIFO dive
    # until the first incumbent exists, then switches to the requested order.
    open_nodes: list = []
    state = {"diving": True}
    want_heap = opts.node_order == "best_bound"

    def heap_active():
        return want_heap and not state["diving"]

    def push(est, overrides):
        item = (-est, next(push_id), est, overrides)
        if heap_active():
            heappush(open_nodes, item)
        else:
            open_nodes.append(item)

    def pop():
        return heappop(open_nodes) if heap_active() else open_nodes.pop()

    def end_dive():
        if state["diving"]:
            state["diving"] = False
            if want_heap:
                open_nodes.sort()

    def open_bound():
        if not open_nodes:
            return -np.inf
        if heap_active():
            return open_nodes[0][2]
        return max(item[2] for item in open_nodes)

    def rel_gap(bound):
        if best_obj == -np.inf:
            return np.inf
        return max(0.0, (bound - best_obj) / max(1.0, abs(best_obj)))

    pool = ThreadPoolExecutor(opts.worker_count) if opts.worker_count > 1 else None
    limit_hit = False
    try:
        push(np.inf, {})
        while open_nodes:
            if nodes >= opts.node_limit:
                limit_hit = True
                break
            if opts.time_limit is not None and time.perf_counter() - t_start > opts.time_limit:
                limit_hit = True
                break
            if best_x is not None and open_bound() <= best_obj + tol:
                break

            batch = []
            while open_nodes and len(batch) < opts.worker_count and nodes + len(batch) < opts.node_limit + 1:
                batch.append(pop())
            if pool is not None and len(batch) > 1:
                results = list(pool.map(lambda it: node_lp(it[3]), batch))
            else:
                results = [node_lp(it[3]) for it in batch]

            for (_, _, est, overrides), result in zip(batch, results):
                nodes += 1
                if result is None:
                    emit(f"node={nodes} bound={best_obj!r} incumbent={best_obj!r} gap={rel_gap(best_obj)!r}")
                    continue
                obj, x = result
                if best_x is not None and obj <= best_obj + tol:
                    emit(f"node={nodes} bound={obj!r} incumbent={best_obj!r} gap={rel_gap(max(obj, best_obj))!r}")
                    continue
                j = _pick_branch_var(x, z_pool, opts.branch_rule, tol)
                if j < 0:
                    # Illumination integral: round the assignments, re-solve
                    # the continuous block exactly, and take the incumbent.
                    fixed = dict(overrides)
                    fixed.update(round_assignments(x))
                    polished = node_lp(fixed)
                    if polished is not None and polished[0] > best_obj:
                        best_obj, best_x = polished[0], canonical(polished[1])
                        end_dive()
                    if polished is not None and polished[0] >= obj - tol:
                        emit(f"node={nodes} bound={obj!r} incumbent={best_obj!r} gap={rel_gap(max(open_bound(), obj))!r}")
                        continue
                    j = _pick_branch_var(x, a_pool, opts.branch_rule, tol)
                    if j < 0:
                        if polished is None and obj > best_obj:
                            # Fully integral relaxation point.
                            best_obj, best_x = obj, canonical(x)
                            end_dive()
                        emit(f"node={nodes} bound={obj!r} incumbent={best_obj!r} gap={rel_gap(max(open_bound(), obj))!r}")
                        continue
                down = dict(overrides)
                down[j] = (0.0, 0.0)
                up = dict(overrides)
                up[j] = (1.0, 1.0)
                push(obj, down)
                push(obj, up)
                emit(f"node={nodes} bound={obj!r} incumbent={best_obj!r} gap={rel_gap(max(open_bound(), obj))!r}")

        if limit_hit and best_x is None:
            # Never truncate silently: dive up-first until some incumbent exists.
            extra = 0
            while open_nodes and best_x is None and extra <= 4 * binary_cols.size + 8:
                _, _, est, overrides = pop()
                result = node_lp(overrides)
                nodes += 1
                extra += 1
                if result is None:
                    continue
                obj, x = result
                j = _pick_branch_var(x, z_pool, opts.branch_rule, tol)
                if j < 0:
                    fixed = dict(overrides)
                    fixed.update(round_assignments(x))
                    polished = node_lp(fixed)
                    if polished is not None:
                        best_obj, best_x = polished[0], canonical(polished[1])
                        break
                    j = _pick_branch_var(x, a_pool, opts.branch_rule, tol)
                    if j < 0:
                        best_obj, best_x = obj, canonical(x)
                        break
                up = dict(overrides)
                up[j] = (1.0, 1.0)
                push(obj, up)
    finally:
        if pool is not None:
            pool.shutdown(wait=False)

    wall = time.perf_counter() - t_start
    if best_x is None:
        return MilpSolution(
            values=np.zeros(n), objective=-np.inf, status="infeasible",
            nodes_explored=nodes, wall_time=wall, gap=np.inf,
        )
    bound = max(best_obj, open_bound()) if open_nodes else best_obj
    gap = rel_gap(bound)
    status = "feasible" if (limit_hit and gap > tol) else "optimal"
    if status == "optimal":
        gap = min(gap, tol)
    return MilpSolution(
        values=best_x, objective=float(best_obj), status=status,
        nodes_explored=nodes, wall_time=wall, gap=float(gap),
    )


MAX_ORACLE_BINARIES = 24
MAX_ORACLE_PATTERNS = 2_000_000


def brute_force(model: ModelInstance) -> MilpSolution:
    """Enumeration oracle for tiny planner models.

    Enumerates every (assignment, illumination) pattern that passes the cheap
    carrier-count / activation-cap / adjacency filters, solves the continuous
    (fill-rate, floors) LP for each, and returns the best. Exact up to LP
    tolerance; refuses models with more than 24 binaries.
    """
    cat = model.catalog
    if not isinstance(cat, VariableCatalog) or model.rate_per_slot is None:
        raise ValueError("brute_force requires a planner model built by build_model")
    n_bin = int(model.binary.sum())
    if n_bin > MAX_ORACLE_BINARIES:
        raise ValueError(f"brute_force caps at {MAX_ORACLE_BINARIES} binaries, model has {n_bin}")
    L, C, U, T = cat.num_clusters, cat.num_carriers, cat.num_users, cat.num_slots
    R = model.rate_per_slot
    demand = model.demand
    d_cluster = demand.sum(axis=1)
    eps_fill = model.epsilon_fill
    eps_obj = model.epsilon_tiebreak
    n_t = model.active_clusters_per_slot
    pairs = model.pairs

    slot_patterns = []
    for mask in range(2 ** L):
        active = [l for l in range(L) if mask >> l & 1]
        if len(active) > n_t:
            continue
        if any((a, b) in pairs for a in active for b in active if a < b):
            continue
        slot_patterns.append(tuple(active))

    carrier_sets = [
        tuple(c for c in range(C) if mask >> c & 1)
        for mask in range(2 ** C)
        if bin(mask).count("1") <= model.delta_max
    ]

    total = len(slot_patterns) ** T * len(carrier_sets) ** (L * U)
    if total > MAX_ORACLE_PATTERNS:
        raise ValueError(f"oracle enumeration would visit {total} patterns")

    # Inner LP columns: beta (L*C*U), tU (L), tL, theta.
    n_beta = L * C * U
    n_cols = n_beta + L + 2
    tu0 = n_beta
    tl_col = n_beta + L
    th_col = n_beta + L + 1

    def beta_idx(l, c, u):
        return (l * C + c) * U + u

    c_obj = np.zeros(n_cols)
    c_obj[th_col] = 1.0
    c_obj[tu0:tu0 + L] = eps_obj
    c_obj[tl_col] = eps_obj

    rows_c2 = np.zeros((L * C, n_cols))
    for l in range(L):
        for c in range(C):
            for u in range(U):
                rows_c2[l * C + c, beta_idx(l, c, u)] = 1.0
    template_c4 = np.zeros((L * U, n_cols))
    for l in range(L):
        for u in range(U):
            for c in range(C):
                template_c4[l * U + u, beta_idx(l, c, u)] = R[l, c, u] / demand[l, u]
            template_c4[l * U + u, tu0 + l] = -1.0
    template_c5 = np.zeros((L, n_cols))
    for l in range(L):
        for c in range(C):
            for u in range(U):
                template_c5[l, beta_idx(l, c, u)] = R[l, c, u] / d_cluster[l]
        template_c5[l, tl_col] = -1.0
    rows_c8 = np.zeros((L + 1, n_cols))
    for l in range(L):
        rows_c8[l, th_col] = 1.0
        rows_c8[l, tu0 + l] = -1.0
    rows_c8[L, th_col] = 1.0
    rows_c8[L, tl_col] = -1.0

    senses = ["<="] * (L * C) + [">="] * (L * U) + [">="] * L + ["<="] * (L + 1)
    b = np.zeros(L * C + L * U + L + L + 1)
    b[:L * C] = 1.0

    t_start = time.perf_counter()
    best_obj = -np.inf
    best = None
    evaluated = 0
    for z_pattern in itertools.product(slot_patterns, repeat=T):
        n_active = np.zeros(L)
        for active in z_pattern:
            for l in active:
                n_active[l] += 1.0
        A = np.vstack([
            rows_c2,
            template_c4 * np.repeat(n_active, U)[:, None],
            template_c5 * n_active[:, None],
            rows_c8,
        ])
        # Slot scaling must leave the floor columns intact.
        A[L * C:L * C + L * U, tu0:] = template_c4[:, tu0:]
        A[L * C + L * U:L * C + L * U + L, tu0:] = template_c5[:, tu0:]
        for a_pattern in itertools.product(carrier_sets, repeat=L * U):
            lo = np.zeros(n_cols)
            hi = np.concatenate([np.zeros(n_beta), np.full(L + 2, np.inf)])
            for l in range(L):
                for u in range(U):
                    assigned = a_pattern[l * U + u]
                    for c in assigned:
                        j = beta_idx(l, c, u)
                        lo[j] = eps_fill
                        hi[j] = 1.0
            sol = solve_dense(c_obj, A, senses, b, lo, hi)
            evaluated += 1
            if sol.status != "optimal":
                continue
            if sol.objective > best_obj:
                best_obj = sol.objective
                best = (z_pattern, a_pattern, sol.values.copy())

    if best is None:
        return MilpSolution(
            values=np.zeros(model.num_cols), objective=-np.inf, status="infeasible",
            nodes_explored=evaluated, wall_time=time.perf_counter() - t_start, gap=np.inf,
        )

    z_pattern, a_pattern, inner = best
    x = np.zeros(model.num_cols)
    beta = inner[:n_beta].reshape(L, C, U)
    z = np.zeros((L, T))
    for t, active in enumerate(z_pattern):
        for l in active:
            z[l, t] = 1.0
    for l in range(L):
        for u in range(U):
            for c in a_pattern[l * U + u]:
                x[cat.a_col(l, c, u)] = 1.0
    x[cat.off_beta:cat.off_q] = beta.ravel()
    q = beta[:, :, :, None] * z[:, None, None, :]
    x[cat.off_q:cat.off_z] = q.ravel()
    x[cat.off_z:cat.off_tu] = z.ravel()
    x[cat.off_tu:cat.off_tl] = inner[tu0:tu0 + L]
    x[cat.tl_col] = inner[tl_col]
    x[cat.theta_col] = inner[th_col]
    return MilpSolution(
        values=x, objective=float(best_obj), status="optimal",
        nodes_explored=evaluated, wall_time=time.perf_counter() - t_start, gap=0.0,
    )
