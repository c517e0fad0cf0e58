"""Relative projection constants by three mutually checking routes.

Route A (operator LP): lambda(E, F) is the least total weight of a
nonnegative combination of operator-ball vertices of F that forms a
projection onto E; solved by full vertex enumeration or column
generation. Route B (extension LP): for pointed metric spaces X inside Y,
the least norm of a linear extension operator on slope-normed function
spaces, which equals lambda of the corresponding free spaces. Route C
(trace certificate): any matrix A with AP = PAP and unit nuclear norm
certifies Tr(AP) as a lower bound, with equality attained at an optimal A.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

from .errors import (
    BasepointMismatch,
    FieldUnsupported,
    InfeasiblePattern,
    NotInvariant,
    RankDeficient,
    TooLarge,
    ZeroNuclearNorm,
)
from .fields import Field, FieldTag
from .freespace import LipschitzBall, lipschitz_ball
from .linalg import mat_eq, mat_mul, mat_vec, trace, transpose, vec_dot, zeros
from .lp import (
    GeneratedColumn,
    LpProblem,
    LpStatus,
    Rel,
    Sense,
    solve,
    solve_with_column_generation,
)
from .metric import PointedSpace, shared_subspace_indices
from .polyspace import (
    PolyhedralSpace,
    SpaceKind,
    SubspaceBasis,
    l1_space,
    nuclear1,
    op_norm,
    operator_ball_vertices,
    operator_vertex_count,
    orthogonal_projection,
    null_basis,
    subspace_from_columns,
)

ENUMERATION_COLUMN_LIMIT = 1500


@dataclass
class ProjConstResult:
    """A projection-constant value with its verifiable witnesses."""

    value: object
    route: str
    field: Field
    operator: Optional[list] = None
    certificate: Optional[list] = None
    diagnostics: dict = dc_field(default_factory=dict)

    def to_json_dict(self) -> dict:
        f = self.field
        doc = {
            "value": f.format(self.value),
            "value_decimal": f"{f.to_float(self.value):.12f}",
            "route": self.route,
            "field": f.tag.value,
            "diagnostics": dict(self.diagnostics),
        }
        if self.operator is not None:
            doc["operator"] = [[f.format(x) for x in row] for row in self.operator]
        if self.certificate is not None:
            doc["certificate"] = [
                [f.format(x) for x in row] for row in self.certificate
            ]
        return doc


# -- Route A: operator-vertex LP -------------------------------------------------


def _projection_rows(basis: SubspaceBasis):
    """Equality system pinning 'M is a projection onto E' linearly in M.

    Rows: (M u)_r = u_r for every basis column u, and w^T M e_c = 0 for
    every null-basis vector w. Functionals are represented by the d x d
    coefficient matrix G with row(M) = Tr(M G) = sum_kc M_kc G_kc.
    """
    f = basis.ambient.field
    d = basis.ambient.dim
    rows = []
    rhs = []
    for u in basis.columns:
        for r in range(d):
            g = zeros(d, d, f)
            for k in range(d):
                g[r][k] = u[k]
            rows.append(g)
            rhs.append(u[r])
    for w in null_basis(basis):
        for c in range(d):
            g = zeros(d, d, f)
            for k in range(d):
                g[k][c] = w[k]
            rows.append(g)
            rhs.append(f.zero)
    return rows, rhs


def _functional_value(g, m):
    total = 0
    for grow, mrow in zip(g, m):
        for gr, mr in zip(grow, mrow):
            if mr:
                total = total + gr * mr
    return total


def _vertex_key(v, f: Field) -> tuple:
    return tuple(tuple(x for x in row) for row in v)


def _dual_matrix(duals, basis: SubspaceBasis, nulls):
    """Certificate candidate from master duals: sum u_i y_i^T + z_s w_s^T."""
    f = basis.ambient.field
    d = basis.ambient.dim
    a = zeros(d, d, f)
    pos = 0
    for u in basis.columns:
        y = duals[pos : pos + d]
        pos += d
        for r in range(d):
            for c in range(d):
                a[r][c] = a[r][c] + u[r] * y[c]
    for w in nulls:
        z = duals[pos : pos + d]
        pos += d
        for r in range(d):
            for c in range(d):
                a[r][c] = a[r][c] + z[r] * w[c]
    return a


def _make_pricer(space: PolyhedralSpace, basis: SubspaceBasis, nulls, rows):
    """Operator-vertex pricing in O(d^2) per call, best column first.

    The reduced improvement of vertex V is Tr(V G) - 1 with
    G = sum u_i y_i^T + sum z_s w_s^T; on the max-norm space the argmax
    puts, in each row i, a sign at the column k maximizing |G[k][i]|
    (transposed picture on the sum-norm space). Swapping a single row to
    its runner-up choice yields near-best extra columns that cut the
    number of pricing rounds.
    """
    f = space.field
    d = space.dim
    if space.kind not in (SpaceKind.LINF, SpaceKind.L1):
        raise TooLarge("column generation needs a max- or sum-norm space")
    # exact masters pay per extra column, numeric masters pay per round
    extras = d if not f.is_exact else 0

    def slot_value(g, slot: int, k: int):
        # choice k for slot i of the vertex reads G[k][i] (max norm) or,
        # transposed, G[i][k] (sum norm)
        return g[k][slot] if space.kind is SpaceKind.LINF else g[slot][k]

    def vertex_from_choices(choices):
        v = zeros(d, d, f)
        for slot, (k, s) in enumerate(choices):
            if space.kind is SpaceKind.LINF:
                v[slot][k] = f.from_int(s)
            else:
                v[k][slot] = f.from_int(s)
        return v

    def column(v):
        return GeneratedColumn(
            _vertex_key(v, f), f.one, tuple(_functional_value(row, v) for row in rows)
        )

    def pricer(duals, phase1: bool):
        g = _dual_matrix(duals, basis, nulls)
        best_choices = []
        runners = []
        for slot in range(d):
            scored = []
            for k in range(d):
                val = slot_value(g, slot, k)
                sgn = 1 if f.sign(val) >= 0 else -1
                scored.append((f.abs(val), k, sgn))
            top = max(range(d), key=lambda k: (scored[k][0], -k))
            best_choices.append((scored[top][1], scored[top][2]))
            rest = [k for k in range(d) if k != top]
            second = max(rest, key=lambda k: (scored[k][0], -k)) if rest else None
            runners.append(
                (scored[second][1], scored[second][2]) if second is not None else None
            )
        cands = [column(vertex_from_choices(best_choices))]
        for slot in range(min(extras, d)):
            if runners[slot] is None:
                continue
            variant = list(best_choices)
            variant[slot] = runners[slot]
            cands.append(column(vertex_from_choices(variant)))
        return cands

    return pricer


def lambda_subspace(
    basis: SubspaceBasis,
    space: Optional[PolyhedralSpace] = None,
    method: str = "auto",
) -> ProjConstResult:
    """Route A: relative projection constant of span(basis) in its ambient.

    ``method``: "enumerate" builds one LP column per operator-ball vertex,
    "colgen" prices vertices on demand, "auto" enumerates only when the
    vertex count is small.
    """
    space = space or basis.ambient
    f = space.field
    rows, rhs = _projection_rows(basis)
    nulls = null_basis(basis)

    if method == "auto":
        method = (
            "enumerate"
            if space.kind is SpaceKind.CUSTOM
            or operator_vertex_count(space) <= ENUMERATION_COLUMN_LIMIT
            else "colgen"
        )

    diagnostics = {"method": method, "rows": len(rows)}
    if method == "enumerate":
        verts = operator_ball_vertices(space, cap=max(ENUMERATION_COLUMN_LIMIT, 5000))
        prob = LpProblem(
            f, Sense.MIN, [f.one] * len(verts), [True] * len(verts), name="route-a"
        )
        for g, b in zip(rows, rhs):
            prob.add_row([_functional_value(g, v) for v in verts], Rel.EQ, b)
        sol = solve(prob)
        if sol.status is not LpStatus.OPTIMAL:
            raise RankDeficient(f"projection system not solvable: {sol.status}")
        weights = {
            _vertex_key(v, f): w for v, w in zip(verts, sol.x) if f.sign(w) != 0
        }
        value, duals = sol.value, sol.duals
        diagnostics["columns"] = len(verts)
    else:
        pricer = _make_pricer(space, basis, nulls, rows)
        res = solve_with_column_generation(rhs, pricer, f)
        if res.status is not LpStatus.OPTIMAL:
            raise RankDeficient(f"projection system not solvable: {res.status}")
        weights, value, duals = res.weights, res.value, res.duals
        diagnostics["columns"] = len(res.columns)
        diagnostics["rounds"] = res.rounds

    d = space.dim
    q = zeros(d, d, f)
    for key, w in weights.items():
        for r in range(d):
            for c in range(d):
                if not f.is_zero(key[r][c]):
                    q[r][c] = q[r][c] + w * key[r][c]
    _verify_projection(q, basis, nulls, value, space)

    cert = _dual_matrix(duals, basis, nulls)
    cert_ok = _verify_certificate(cert, basis, space, value)
    diagnostics["certificate_verified"] = cert_ok
    return ProjConstResult(
        value=value,
        route="operator-lp",
        field=f,
        operator=q,
        certificate=cert if cert_ok else None,
        diagnostics=diagnostics,
    )


def _verify_projection(q, basis: SubspaceBasis, nulls, value, space):
    f = space.field
    for u in basis.columns:
        qu = mat_vec(q, u)
        if any(not f.is_zero(a - b) for a, b in zip(qu, u)):
            raise AssertionError("returned operator does not fix the subspace")
    for w in nulls:
        wq = mat_vec(transpose(q), w)
        if any(not f.is_zero(x) for x in wq):
            raise AssertionError("returned operator does not map into the subspace")
    if not f.is_zero(op_norm(q, space) - value):
        raise AssertionError("operator norm does not match the LP value")


def _verify_certificate(a, basis: SubspaceBasis, space, value) -> bool:
    f = space.field
    p = orthogonal_projection(basis)
    ap = mat_mul(a, p)
    if not mat_eq(ap, mat_mul(p, ap), f):
        return False
    nu = nuclear1(a, space)
    if f.sign(nu - f.one) > 0:
        return False
    return f.is_zero(trace(ap) - value)


# -- Route B: extension-operator LP ----------------------------------------------


def lambda_lip(
    x: PointedSpace,
    y: PointedSpace,
    ball: Optional[LipschitzBall] = None,
) -> ProjConstResult:
    """Route B: least norm of a linear extension operator for X inside Y.

    Variables are the values of the extended functions at the points of Y
    outside X; for every vertex functional of the X ball, every point pair
    of Y must satisfy the slope bound with slope budget lambda.
    """
    idx = shared_subspace_indices(x.space, y.space)
    if idx[x.basepoint] != y.basepoint:
        raise BasepointMismatch("X and Y must share the basepoint")
    f = x.field
    if ball is None:
        ball = lipschitz_ball(x)

    outside = [p for p in range(y.n) if p not in set(idx)]
    nx = x.n - 1
    var_of = {
        (p, j): k * nx + j for k, p in enumerate(outside) for j in range(nx)
    }
    lam = len(outside) * nx  # objective variable index
    n_vars = lam + 1

    x_value_at = {}  # y-point -> column in the vertex coordinate tuple
    for xi, yi in enumerate(idx):
        if xi != x.basepoint:
            x_value_at[yi] = x.support.index(xi)

    prob = LpProblem(
        f,
        Sense.MIN,
        [f.zero] * lam + [f.one],
        [False] * lam + [True],
        name="route-b",
    )

    for vert in ball.vertices:

        def expr(p):
            """(constant, dense coeffs) of the extended value at point p."""
            coeffs = [f.zero] * n_vars
            if p == y.basepoint:
                return f.zero, coeffs
            if p in x_value_at:
                return vert[x_value_at[p]], coeffs
            for j in range(nx):
                coeffs[var_of[(p, j)]] = vert[j]
            return f.zero, coeffs

        for u in range(y.n):
            cu, au = expr(u)
            for v in range(u + 1, y.n):
                cv, av = expr(v)
                duv = y.d(u, v)
                for s in (1, -1):
                    row = [s * (a - b) for a, b in zip(au, av)]
                    row[lam] = -duv
                    prob.add_row(row, Rel.LE, -f.from_int(s) * (cu - cv))

    sol = solve(prob, via_dual=True)
    if sol.status is not LpStatus.OPTIMAL:
        raise AssertionError(f"extension LP not optimal: {sol.status}")
    value = sol.value

    # assemble T on the full point set of Y (rows over Y minus basepoint)
    t_rows = []
    for p in range(y.n):
        if p == y.basepoint:
            continue
        row = [f.zero] * nx
        if p in x_value_at:
            row[x_value_at[p]] = f.one
        else:
            row = [sol.x[var_of[(p, j)]] for j in range(nx)]
        t_rows.append(row)

    _verify_extension(t_rows, x, y, idx, ball, value)
    return ProjConstResult(
        value=value,
        route="extension-lp",
        field=f,
        operator=t_rows,
        certificate=None,
        diagnostics={
            "ball_vertices": len(ball.vertices),
            "lp_rows": len(prob.rows),
            "lp_vars": n_vars,
        },
    )


def _verify_extension(t_rows, x, y, idx, ball, value):
    f = x.field
    support_rows = [p for p in range(y.n) if p != y.basepoint]
    row_of = {p: r for r, p in enumerate(support_rows)}
    for vert in ball.vertices:
        g = {y.basepoint: f.zero}
        for p in support_rows:
            g[p] = vec_dot(t_rows[row_of[p]], vert)
        for xi, yi in enumerate(idx):
            expected = f.zero if xi == x.basepoint else vert[x.support.index(xi)]
            if not f.is_zero(g[yi] - expected):
                raise AssertionError("extension operator does not restrict to identity")
        for u in range(y.n):
            for v in range(u + 1, y.n):
                if f.sign(f.abs(g[u] - g[v]) - value * y.d(u, v)) > 0:
                    raise AssertionError("extension operator exceeds the optimal slope")


# -- Route C: trace-duality certificates ------------------------------------------


def certificate_value(a, basis: SubspaceBasis, space: Optional[PolyhedralSpace] = None):
    """Tr(A P) / nu1(A) for an invariant A; a certified lower bound."""
    space = space or basis.ambient
    f = space.field
    p = orthogonal_projection(basis)
    ap = mat_mul(a, p)
    if not mat_eq(ap, mat_mul(p, ap), f):
        raise NotInvariant("A does not map the subspace into itself")
    nu = nuclear1(a, space)
    if f.sign(nu) <= 0:
        raise ZeroNuclearNorm("certificate has zero nuclear norm")
    return trace(ap) / nu


@dataclass(frozen=True)
class Ae4Certificate:
    """The explicit sum-norm certificate behind the four-point lower bound."""

    field: Field
    tree_map: tuple        # 5x5 matrix M of the tree isometry
    sign_matrix: tuple     # 5x5 sign pattern S
    diagonal: tuple        # diagonal entries of D
    a: tuple               # A = D S
    subspace: SubspaceBasis
    value: object
    eigenpairs: tuple      # ((vector, eigenvalue), ...)


def ae4_lower_certificate(f: Field) -> Ae4Certificate:
    """Construct the rectangle certificate giving (5 + 4 sqrt 2)/7.

    Needs sqrt 2, so the rational field is rejected. The subspace is the
    span of the first three columns of the tree-isometry matrix; A = D S
    has unit nuclear norm and three explicit eigenpairs summing to the
    certified value.
    """
    if f.tag is FieldTag.RATIONAL:
        raise FieldUnsupported("the certificate lives in the sqrt-2 field")
    r2 = f.sqrt2()
    one, zero = f.one, f.zero
    gamma = r2 - one
    m = [
        [one, one, one, one, one],
        [one, zero, zero, zero, zero],
        [zero, gamma, gamma, zero, gamma],
        [zero, one, zero, zero, zero],
        [zero, zero, one, zero, zero],
    ]
    s_signs = [
        [1, 1, 1, 1, 1],
        [1, 1, -1, -1, -1],
        [1, -1, 1, 1, 1],
        [1, -1, 1, 1, -1],
        [1, -1, 1, -1, 1],
    ]
    s = [[f.from_int(v) for v in row] for row in s_signs]
    mu = (f.from_int(5) - f.from_int(3) * r2) / f.from_int(7)
    nu = (one - mu) / f.from_int(4)
    diag = (nu, nu, mu, nu, nu)
    a = [[diag[i] * s[i][j] for j in range(5)] for i in range(5)]

    ambient = l1_space(5, f)
    cols = [tuple(m[r][c] for r in range(5)) for c in range(3)]
    basis = subspace_from_columns(ambient, cols)
    value = certificate_value(a, basis, ambient)

    v1, v2, v3 = cols
    u1 = tuple(v2[i] + v3[i] - v1[i] for i in range(5))
    u2 = tuple(v3[i] - v2[i] for i in range(5))
    lam1 = (r2 + f.from_int(3)) / f.from_int(7)
    lam2 = (f.from_int(3) * r2 + f.from_int(2)) / f.from_int(14)
    eigenpairs = ((u1, lam1), (u2, lam2), (v1, lam2))
    return Ae4Certificate(
        field=f,
        tree_map=tuple(tuple(row) for row in m),
        sign_matrix=tuple(tuple(row) for row in s),
        diagonal=diag,
        a=tuple(tuple(row) for row in a),
        subspace=basis,
        value=value,
        eigenpairs=eigenpairs,
    )


def sign_pattern(matrix, f: Field) -> list[list]:
    return [[f.from_int(f.sign(x)) for x in row] for row in matrix]


def best_diagonal_certificate(signs, basis: SubspaceBasis, space: Optional[PolyhedralSpace] = None):
    """Best certificate of the family A = D * signs with D diagonal >= 0.

    For a fixed sign pattern the invariance condition AP = PAP and the
    sum-norm nuclear bound are linear in the diagonal, so the best member
    of the family is a small LP. Returns (A, value).
    """
    space = space or basis.ambient
    f = space.field
    if space.kind is not SpaceKind.L1:
        raise FieldUnsupported("diagonal certificates are set up for the sum norm")
    d = space.dim
    p = orthogonal_projection(basis)
    sp = mat_mul(signs, p)

    prob = LpProblem(
        f,
        Sense.MAX,
        [sp[i][i] for i in range(d)],
        [True] * d,
        name="diag-cert",
    )
    # invariance: D_r (SP)_rc - sum_i P_ri (SP)_ic D_i = 0 for all r, c
    for r in range(d):
        for c in range(d):
            row = [-(p[r][i] * sp[i][c]) for i in range(d)]
            row[r] = row[r] + sp[r][c]
            prob.add_row(row, Rel.EQ, f.zero)
    # unit nuclear norm: sum of D_r over rows with a nonzero sign
    norm_row = [
        f.one if any(not f.is_zero(x) for x in signs[r]) else f.zero
        for r in range(d)
    ]
    prob.add_row(norm_row, Rel.LE, f.one)

    sol = solve(prob)
    if sol.status is not LpStatus.OPTIMAL:
        raise InfeasiblePattern(f"no diagonal works for this pattern: {sol.status}")
    a = [[sol.x[i] * signs[i][j] for j in range(d)] for i in range(d)]
    return a, sol.value
