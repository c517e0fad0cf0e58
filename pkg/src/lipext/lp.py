"""Deterministic two-phase simplex over any scalar field, plus column
generation.

Conventions. A problem is ``min`` or ``max`` of ``c^T x`` over rows
``a_i^T x {<=,=,>=} b_i`` with each variable either nonnegative or free.
Reported duals ``y`` satisfy, at an optimum,

* min: ``b^T y = value``, ``(A^T y)_j <= c_j`` (``=`` for free vars),
  ``y_i >= 0`` on ``>=`` rows, ``y_i <= 0`` on ``<=`` rows;
* max: ``b^T y = value``, ``(A^T y)_j >= c_j`` (``=`` for free vars),
  ``y_i >= 0`` on ``<=`` rows, ``y_i <= 0`` on ``>=`` rows.

Bland's rule everywhere: entering column of smallest index with improving
reduced cost, leaving row breaking ratio ties by smallest basic index.
Exact fields terminate with certified strong duality; the float mode uses
the single tolerance ``eps`` of its field.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import LpError, NumericFailure, PricerStall
from .fields import Field, FieldTag

_MAX_PIVOTS = 2_000_000


class Rel(str, enum.Enum):
    LE = "<="
    EQ = "=="
    GE = ">="


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class Sense(str, enum.Enum):
    MIN = "min"
    MAX = "max"


@dataclass
class LpProblem:
    """Dense LP; rows are (coeffs, rel, rhs) triples over the variables."""

    field: Field
    sense: Sense
    objective: list
    nonneg: list[bool]
    rows: list[tuple[list, Rel, object]] = dc_field(default_factory=list)
    name: str = "lp"

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def add_row(self, coeffs: Sequence, rel: Rel, rhs) -> None:
        coeffs = list(coeffs)
        if len(coeffs) != self.n_vars:
            raise LpError(f"row length {len(coeffs)} != {self.n_vars} variables")
        self.rows.append((coeffs, rel, rhs))


@dataclass
class LpSolution:
    status: LpStatus
    x: Optional[list]
    duals: Optional[list]
    value: Optional[object]
    iterations: int = 0

    def verify(self, problem: LpProblem) -> None:
        """Re-check primal/dual feasibility and strong duality from scratch.

        Exact fields verify exactly; float mode verifies within the field
        tolerance and raises NumericFailure on violation.
        """
        if self.status is not LpStatus.OPTIMAL:
            return
        f = problem.field
        err = NumericFailure if f.tag is FieldTag.F64 else LpError
        x, y = self.x, self.duals
        for j, nn in enumerate(problem.nonneg):
            if nn and f.sign(x[j]) < 0:
                raise err(f"variable {j} negative: {x[j]}")
        cx = sum((c * v for c, v in zip(problem.objective, x)), f.zero)
        if not f.is_zero(cx - self.value):
            raise err("objective value mismatch")
        by = f.zero
        for (coeffs, rel, rhs), yi in zip(problem.rows, y):
            lhs = sum((c * v for c, v in zip(coeffs, x)), f.zero)
            gap = f.sign(lhs - rhs)
            if rel is Rel.LE and gap > 0:
                raise err(f"row violated: {f.format(lhs)} </= {f.format(rhs)}")
            if rel is Rel.GE and gap < 0:
                raise err(f"row violated: {f.format(lhs)} >/= {f.format(rhs)}")
            if rel is Rel.EQ and gap != 0:
                raise err(f"row violated: {f.format(lhs)} != {f.format(rhs)}")
            sy = f.sign(yi)
            if problem.sense is Sense.MIN:
                if (rel is Rel.LE and sy > 0) or (rel is Rel.GE and sy < 0):
                    raise err("dual sign condition violated")
            else:
                if (rel is Rel.LE and sy < 0) or (rel is Rel.GE and sy > 0):
                    raise err("dual sign condition violated")
            by = by + yi * rhs
        if not f.is_zero(by - self.value):
            raise err("strong duality gap")
        for j in range(problem.n_vars):
            red = problem.objective[j] - sum(
                (problem.rows[i][0][j] * y[i] for i in range(len(problem.rows))),
                f.zero,
            )
            s = f.sign(red)
            if problem.nonneg[j]:
                bad = s < 0 if problem.sense is Sense.MIN else s > 0
            else:
                bad = s != 0
            if bad:
                raise err(f"dual constraint violated at variable {j}")


def solve(problem: LpProblem, *, via_dual: bool = False, check: bool = True) -> LpSolution:
    """Certified exact simplex, or HiGHS in float mode.

    ``via_dual`` solves the explicit dual instead (profitable in exact
    arithmetic when rows vastly outnumber variables) and maps back; the
    float backend copes with tall problems natively, so the flag only
    affects exact fields. Every optimal result is re-verified from the
    original data unless ``check`` is disabled.
    """
    if problem.field.tag is FieldTag.F64:
        sol = _solve_float(problem)
    elif via_dual:
        sol = _solve_via_dual(problem)
    else:
        sol = _solve_direct(problem)
    if check and sol.status is LpStatus.OPTIMAL:
        sol.verify(problem)
    return sol


# -- direct path ------------------------------------------------------------


def _solve_float(problem: LpProblem) -> LpSolution:
    """Float backend: scipy's HiGHS with tightened tolerances.

    The exact kernel's Bland pivoting has no termination guarantee once
    comparisons carry a tolerance, and the projection masters here are
    heavily degenerate, so the numeric mode delegates to a production
    solver and keeps our own from-scratch verification as the gate.
    """
    from scipy.optimize import linprog

    f = problem.field
    minimize = problem.sense is Sense.MIN
    c = [v if minimize else -v for v in problem.objective]
    a_ub, b_ub, ub_map = [], [], []  # ub_map: (row index, sign)
    a_eq, b_eq, eq_map = [], [], []
    for i, (coeffs, rel, rhs) in enumerate(problem.rows):
        if rel is Rel.EQ:
            a_eq.append(coeffs)
            b_eq.append(rhs)
            eq_map.append(i)
        elif rel is Rel.LE:
            a_ub.append(coeffs)
            b_ub.append(rhs)
            ub_map.append((i, 1))
        else:
            a_ub.append([-x for x in coeffs])
            b_ub.append(-rhs)
            ub_map.append((i, -1))
    bounds = [(0, None) if nn else (None, None) for nn in problem.nonneg]
    res = linprog(
        c,
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, None, None, None)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, None, None, None)
    if res.status != 0:
        raise NumericFailure(f"float backend failed: {res.message}")
    x = [float(v) for v in res.x]
    y = [0.0] * len(problem.rows)
    for (i, s), marg in zip(ub_map, res.ineqlin.marginals if a_ub else []):
        y[i] = s * float(marg)
    for i, marg in zip(eq_map, res.eqlin.marginals if a_eq else []):
        y[i] = float(marg)
    value = float(res.fun)
    if not minimize:
        value = -value
        y = [-v for v in y]
    its = int(res.nit) if hasattr(res, "nit") else 0
    return LpSolution(LpStatus.OPTIMAL, x, y, value, its)


def _solve_direct(problem: LpProblem) -> LpSolution:
    f = problem.field
    minimize = problem.sense is Sense.MIN
    cost = list(problem.objective) if minimize else [-c for c in problem.objective]

    # variable mapping: free variables split into a difference of two
    col_var: list[tuple[int, int]] = []  # (original var, sign)
    for j, nn in enumerate(problem.nonneg):
        col_var.append((j, 1))
        if not nn:
            col_var.append((j, -1))
    n_struct = len(col_var)
    struct_cost = [cost[v] if s > 0 else -cost[v] for v, s in col_var]

    m = len(problem.rows)
    flip = [1] * m
    rows_int: list[tuple[list, Rel, object]] = []
    for i, (coeffs, rel, rhs) in enumerate(problem.rows):
        row = [coeffs[v] if s > 0 else -coeffs[v] for v, s in col_var]
        if f.sign(rhs) < 0:
            row = [-x for x in row]
            rhs = -rhs
            rel = {Rel.LE: Rel.GE, Rel.GE: Rel.LE, Rel.EQ: Rel.EQ}[rel]
            flip[i] = -1
        rows_int.append((row, rel, rhs))

    n_slack = sum(1 for _, rel, _ in rows_int if rel is not Rel.EQ)
    n_art = sum(1 for _, rel, _ in rows_int if rel is not Rel.LE)
    ncols = n_struct + n_slack + n_art
    art_start = n_struct + n_slack

    tableau = []
    basis = []
    init_col = []
    slack_at = n_struct
    art_at = art_start
    for row, rel, rhs in rows_int:
        full = row + [f.zero] * (n_slack + n_art) + [rhs]
        if rel is Rel.LE:
            full[slack_at] = f.one
            basis.append(slack_at)
            init_col.append(slack_at)
            slack_at += 1
        elif rel is Rel.GE:
            full[slack_at] = -f.one
            slack_at += 1
            full[art_at] = f.one
            basis.append(art_at)
            init_col.append(art_at)
            art_at += 1
        else:
            full[art_at] = f.one
            basis.append(art_at)
            init_col.append(art_at)
            art_at += 1
        tableau.append(full)

    is_art = [c >= art_start for c in range(ncols)]
    k = _ExactKernel(f, tableau, basis, ncols)

    # phase 1: drive the artificial sum to zero
    phase1_cost = [f.one if is_art[c] else f.zero for c in range(ncols)]
    k.set_costs(phase1_cost, allowed=lambda c: True)
    status = k.run()
    if status is not LpStatus.OPTIMAL or f.sign(k.objective()) > 0:
        return LpSolution(LpStatus.INFEASIBLE, None, None, None, k.pivots)
    k.pivot_out_artificials(is_art)

    # phase 2
    phase2_cost = struct_cost + [f.zero] * (n_slack + n_art)
    k.set_costs(phase2_cost, allowed=lambda c: not is_art[c])
    status = k.run()
    if status is LpStatus.UNBOUNDED:
        return LpSolution(LpStatus.UNBOUNDED, None, None, None, k.pivots)

    xcols = k.column_values()
    x = [f.zero] * problem.n_vars
    for cidx, (v, s) in enumerate(col_var):
        x[v] = x[v] + (xcols[cidx] if s > 0 else -xcols[cidx])
    y_int = [k.dual_of(init_col[i]) for i in range(m)]
    y = [yi if flip[i] > 0 else -yi for i, yi in enumerate(y_int)]
    value = k.objective()
    if not minimize:
        value = -value
        y = [-yi for yi in y]
    return LpSolution(LpStatus.OPTIMAL, x, y, value, k.pivots)


class _ExactKernel:
    """Tableau simplex over an exact field (also usable with floats)."""

    def __init__(self, f: Field, tableau, basis, ncols):
        self.f = f
        self.t = tableau
        self.basis = basis
        self.ncols = ncols
        self.pivots = 0
        self.cost: list = []
        self.allowed: Callable[[int], bool] = lambda c: True
        self.obj = f.zero

    def set_costs(self, cost, allowed):
        f = self.f
        self.allowed = allowed
        red = list(cost) + [f.zero]
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if not f.is_zero(cb):
                row = self.t[i]
                red = [r - cb * a if a else r for r, a in zip(red, row)]
        self.red = red

    def objective(self):
        # the eliminated rhs entry of the cost row carries -value
        return -self.red[-1]

    def run(self) -> LpStatus:
        f = self.f
        while True:
            enter = -1
            for c in range(self.ncols):
                if self.allowed(c) and f.sign(self.red[c]) < 0:
                    enter = c
                    break
            if enter < 0:
                return LpStatus.OPTIMAL
            leave = -1
            best = None
            for i, row in enumerate(self.t):
                a = row[enter]
                if f.sign(a) <= 0:
                    continue
                ratio = row[-1] / a
                if best is None or f.lt(ratio, best):
                    best, leave = ratio, i
                elif f.eq(ratio, best) and self.basis[i] < self.basis[leave]:
                    leave = i
            if leave < 0:
                return LpStatus.UNBOUNDED
            self._pivot(leave, enter)
            if self.pivots > _MAX_PIVOTS:
                raise LpError("pivot limit exceeded")

    def _pivot(self, leave: int, enter: int):
        f = self.f
        self.pivots += 1
        prow = self.t[leave]
        pv = prow[enter]
        prow = [x / pv if x else x for x in prow]
        self.t[leave] = prow
        for i, row in enumerate(self.t):
            if i == leave:
                continue
            fac = row[enter]
            if not f.is_zero(fac):
                self.t[i] = [a - fac * b if b else a for a, b in zip(row, prow)]
        fac = self.red[enter]
        if not f.is_zero(fac):
            self.red = [a - fac * b if b else a for a, b in zip(self.red, prow)]
        self.basis[leave] = enter

    def pivot_out_artificials(self, is_art):
        f = self.f
        for i in range(len(self.t)):
            if not is_art[self.basis[i]]:
                continue
            for c in range(self.ncols):
                if not is_art[c] and not f.is_zero(self.t[i][c]):
                    self._pivot(i, c)
                    break

    def column_values(self):
        f = self.f
        vals = [f.zero] * self.ncols
        for i, b in enumerate(self.basis):
            vals[b] = self.t[i][-1]
        return vals

    def dual_of(self, init_col: int):
        return -self.red[init_col]


# -- dualized path ------------------------------------------------------------


def _solve_via_dual(problem: LpProblem) -> LpSolution:
    """Solve the textbook dual and pull the primal answer from its duals."""
    f = problem.field
    minimize = problem.sense is Sense.MIN
    m = len(problem.rows)

    # dual variable i corresponds to primal row i; encode sign-restricted
    # duals as nonneg variables carrying a sign
    var_sign = []
    var_free = []
    for _, rel, _ in problem.rows:
        if rel is Rel.EQ:
            var_sign.append(1)
            var_free.append(True)
        elif (rel is Rel.GE) == minimize:
            var_sign.append(1)
            var_free.append(False)
        else:
            var_sign.append(-1)
            var_free.append(False)

    dual_obj = [
        problem.rows[i][2] * f.from_int(var_sign[i]) for i in range(m)
    ]
    dual = LpProblem(
        field=f,
        sense=Sense.MAX if minimize else Sense.MIN,
        objective=dual_obj,
        nonneg=[not fr for fr in var_free],
        name=problem.name + ".dual",
    )
    rel_for_var = (
        (Rel.LE if minimize else Rel.GE),
        Rel.EQ,
    )
    for j in range(problem.n_vars):
        coeffs = [
            problem.rows[i][0][j] * f.from_int(var_sign[i]) for i in range(m)
        ]
        rel = rel_for_var[0] if problem.nonneg[j] else rel_for_var[1]
        dual.add_row(coeffs, rel, problem.objective[j])

    dsol = _solve_direct(dual)
    if dsol.status is LpStatus.UNBOUNDED:
        return LpSolution(LpStatus.INFEASIBLE, None, None, None, dsol.iterations)
    if dsol.status is LpStatus.INFEASIBLE:
        raise LpError(
            "dual infeasible: primal unbounded or infeasible; solve directly"
        )
    y = [dsol.x[i] * f.from_int(var_sign[i]) for i in range(m)]
    x = list(dsol.duals)
    return LpSolution(LpStatus.OPTIMAL, x, y, dsol.value, dsol.iterations)


# -- column generation ---------------------------------------------------------


@dataclass(frozen=True)
class GeneratedColumn:
    """One priced-in column of an implicit equality-form master."""

    key: object
    cost: object
    coeffs: tuple


# returns improving columns, best first; None or [] certifies there are none
Pricer = Callable[[list, bool], Optional[list[GeneratedColumn]]]


@dataclass
class CgResult:
    status: LpStatus
    value: Optional[object]
    weights: dict  # column key -> optimal weight
    duals: Optional[list]
    rounds: int
    columns: list[GeneratedColumn]


def solve_with_column_generation(
    rhs: Sequence,
    pricer: Pricer,
    f: Field,
    initial_columns: Sequence[GeneratedColumn] = (),
    max_rounds: int = 100_000,
) -> CgResult:
    """Minimize total column cost over an implicit nonnegative column set.

    The master is ``min sum(cost_j x_j) : sum(x_j a_j) = rhs, x >= 0`` with
    columns produced on demand. ``pricer(duals, phase1)`` must return
    improving columns led by one maximizing ``y^T a - cost`` (``y^T a``
    during phase 1), or None/empty when no column improves; trailing
    columns are opportunistic extras that speed convergence. Intermediate
    masters skip re-verification; the final master is verified in full.
    """
    m = len(rhs)
    columns: list[GeneratedColumn] = list(initial_columns)
    keys = {c.key for c in columns}
    rounds = 0

    def build_master(with_artificials: bool) -> LpProblem:
        n = len(columns) + (m if with_artificials else 0)
        obj = [f.zero if with_artificials else c.cost for c in columns]
        if with_artificials:
            obj += [f.one] * m
        prob = LpProblem(f, Sense.MIN, obj, [True] * n, name="cg-master")
        for i in range(m):
            row = [c.coeffs[i] for c in columns]
            if with_artificials:
                art = [f.zero] * m
                art[i] = f.one if f.sign(rhs[i]) >= 0 else -f.one
                row = row + art
            prob.add_row(row, Rel.EQ, rhs[i])
        return prob

    def score_of(duals, col: GeneratedColumn, phase1: bool):
        s = sum((y * a for y, a in zip(duals, col.coeffs)), f.zero)
        return s if phase1 else s - col.cost

    def admit(duals, cands, phase1: bool) -> bool:
        """Add priced columns; False when the best one certifies optimality."""
        if not cands:
            return False
        best = cands[0]
        if f.sign(score_of(duals, best, phase1)) <= 0:
            return False
        if best.key in keys:
            raise PricerStall(f"pricer repeated column {best.key!r}")
        for col in cands:
            if col.key not in keys and f.sign(score_of(duals, col, phase1)) > 0:
                keys.add(col.key)
                columns.append(col)
        return True

    # phase 1: price columns until the artificial mass vanishes
    while True:
        master = build_master(with_artificials=True)
        sol = solve(master, check=False)
        if sol.status is not LpStatus.OPTIMAL:
            raise LpError(f"artificial master not optimal: {sol.status}")
        rounds += 1
        if f.is_zero(sol.value):
            break
        if not admit(sol.duals, pricer(sol.duals, True), True):
            return CgResult(LpStatus.INFEASIBLE, None, {}, None, rounds, columns)
        if rounds > max_rounds:
            raise LpError("column generation round limit exceeded")

    # phase 2: optimize the true objective
    while True:
        master = build_master(with_artificials=False)
        sol = solve(master, check=False)
        if sol.status is not LpStatus.OPTIMAL:
            raise LpError(f"master not optimal: {sol.status}")
        rounds += 1
        if admit(sol.duals, pricer(sol.duals, False), False):
            if rounds > max_rounds:
                raise LpError("column generation round limit exceeded")
            continue
        sol.verify(master)
        weights = {
            c.key: w for c, w in zip(columns, sol.x) if f.sign(w) != 0
        }
        return CgResult(
            LpStatus.OPTIMAL, sol.value, weights, sol.duals, rounds, columns
        )


def dump_lp(problem: LpProblem) -> str:
    """Plain-text dump, one constraint per line, exact literals."""
    f = problem.field
    names = [f"x{j}" for j in range(problem.n_vars)]

    def lin(coeffs):
        parts = []
        for c, name in zip(coeffs, names):
            if f.is_zero(c):
                continue
            parts.append(f"{f.format(c)}*{name}")
        return " + ".join(parts) if parts else "0"

    out = [f"{problem.sense.value} {lin(problem.objective)}"]
    for coeffs, rel, rhs in problem.rows:
        out.append(f"  {lin(coeffs)} {rel.value} {f.format(rhs)}")
    bounds = [
        names[j] for j, nn in enumerate(problem.nonneg) if nn
    ]
    if bounds:
        out.append("  " + ", ".join(bounds) + " >= 0")
    return "\n".join(out)
