"""Polyhedral Banach-space linear algebra on coordinate space.

A space is described by the extreme points of its dual unit ball (and of
its own ball when available). The two workhorses are the max-norm and
sum-norm spaces, whose operator unit balls have fully explicit vertex
sets: one signed unit entry per row, respectively per column.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from math import comb
from typing import Iterator, Optional

from .errors import (
    DimensionMismatch,
    NotSquare,
    RankDeficient,
    TooLarge,
    VerticesUnavailable,
)
from .fields import Field
from .linalg import (
    identity,
    inverse,
    kernel_basis,
    mat_mul,
    mat_vec,
    rank,
    solve_linear,
    trace,
    transpose,
    vec_dot,
    zeros,
)

DEFAULT_VERTEX_CAP = 5000
DEFAULT_CUSTOM_DIM_CAP = 3


class SpaceKind(Enum):
    LINF = "linf"
    L1 = "l1"
    CUSTOM = "custom"


@dataclass(frozen=True)
class PolyhedralSpace:
    """Norm on d-dimensional coordinate space given by dual ball extremes."""

    field: Field
    dim: int
    kind: SpaceKind
    dual_extremes: tuple[tuple, ...]
    primal_extremes: Optional[tuple[tuple, ...]] = None


def linf_space(d: int, field: Field) -> PolyhedralSpace:
    """Max norm: dual extremes are signed basis functionals."""
    duals = []
    for i in range(d):
        for s in (1, -1):
            v = [field.zero] * d
            v[i] = field.from_int(s)
            duals.append(tuple(v))
    primals = tuple(
        tuple(field.from_int(s) for s in signs)
        for signs in itertools.product((1, -1), repeat=d)
    )
    return PolyhedralSpace(field, d, SpaceKind.LINF, tuple(duals), primals)


def l1_space(d: int, field: Field) -> PolyhedralSpace:
    """Sum norm: dual extremes are sign vectors, primal extremes signed basis."""
    linf = linf_space(d, field)
    return PolyhedralSpace(
        field, d, SpaceKind.L1, linf.primal_extremes, linf.dual_extremes
    )


def custom_space(
    field: Field, dual_extremes, primal_extremes=None
) -> PolyhedralSpace:
    duals = tuple(tuple(field.coerce(x) for x in v) for v in dual_extremes)
    primals = (
        tuple(tuple(field.coerce(x) for x in v) for v in primal_extremes)
        if primal_extremes is not None
        else None
    )
    d = len(duals[0])
    return PolyhedralSpace(field, d, SpaceKind.CUSTOM, duals, primals)


def norm_of_vector(v, space: PolyhedralSpace):
    """Norm via the dual description: max functional value over dual extremes."""
    f = space.field
    best = f.zero
    for func in space.dual_extremes:
        val = vec_dot(func, v)
        if f.lt(best, val):
            best = val
    return best


def op_norm(a, space: PolyhedralSpace):
    """Operator norm of a d x d matrix acting on the space."""
    d = space.dim
    if len(a) != d or any(len(row) != d for row in a):
        raise DimensionMismatch(f"operator must be {d}x{d}")
    f = space.field
    if space.kind is SpaceKind.LINF:
        return _max_scalar(f, (sum(f.abs(x) for x in row) for row in a))
    if space.kind is SpaceKind.L1:
        return _max_scalar(
            f, (sum(f.abs(row[j]) for row in a) for j in range(d))
        )
    if space.primal_extremes is None:
        raise VerticesUnavailable("custom space lacks primal extreme points")
    return _max_scalar(
        f, (norm_of_vector(mat_vec(a, x), space) for x in space.primal_extremes)
    )


def _max_scalar(f: Field, values):
    best = None
    for v in values:
        if best is None or f.lt(best, v):
            best = v
    return best if best is not None else f.zero


def nuclear1_l1(a):
    """Closed-form nuclear norm on the sum-norm space: sum of row maxima."""
    if any(len(row) != len(a) for row in a):
        raise NotSquare("nuclear norm needs a square matrix")
    total = None
    for row in a:
        m = None
        for x in row:
            v = -x if x < 0 else x
            if m is None or m < v:
                m = v
        total = m if total is None else total + m
    return total


def operator_vertex_count(space: PolyhedralSpace) -> int:
    """Number of extreme points of the operator unit ball."""
    if space.kind in (SpaceKind.LINF, SpaceKind.L1):
        return (2 * space.dim) ** space.dim
    return len(operator_ball_vertices(space))


def iter_operator_ball_vertices(space: PolyhedralSpace) -> Iterator[list[list]]:
    """Yield operator-ball extreme points in canonical order.

    Max norm: every matrix with exactly one +/-1 entry per row; sum norm:
    one +/-1 per column (the transposes). Per-row choices are ordered by
    (column, +1 before -1) and rows nest left to right.
    """
    f = space.field
    d = space.dim
    if space.kind is SpaceKind.CUSTOM:
        yield from operator_ball_vertices_bruteforce(space)
        return
    one = f.one
    choices = [(j, s) for j in range(d) for s in (1, -1)]
    for pick in itertools.product(choices, repeat=d):
        m = zeros(d, d, f)
        for i, (j, s) in enumerate(pick):
            m[i][j] = one if s > 0 else -one
        if space.kind is SpaceKind.L1:
            m = transpose(m)
        yield m


def operator_ball_vertices(
    space: PolyhedralSpace, cap: int = DEFAULT_VERTEX_CAP
) -> list[list[list]]:
    count = (
        (2 * space.dim) ** space.dim
        if space.kind is not SpaceKind.CUSTOM
        else None
    )
    if count is not None and count > cap:
        raise TooLarge(f"{count} operator vertices exceed the cap {cap}")
    return list(iter_operator_ball_vertices(space))


def operator_ball_vertices_bruteforce(
    space: PolyhedralSpace,
    dim_cap: int = DEFAULT_CUSTOM_DIM_CAP,
    work_cap: int = 5_000_000,
) -> list[list[list]]:
    """Vertex enumeration of {M : f(Mx) <= 1} by exhaustive active sets.

    The polytope lives in d^2 dimensions, so this is the oracle for small
    d, not a production path. Constraint directions are the outer products
    f x^T over dual and primal extremes, deduplicated up to sign.
    """
    f = space.field
    d = space.dim
    if d > dim_cap:
        raise TooLarge(f"brute-force enumeration capped at dimension {dim_cap}")
    if space.primal_extremes is None:
        raise VerticesUnavailable("custom space lacks primal extreme points")

    directions: list[tuple] = []
    seen = set()
    for func in space.dual_extremes:
        for x in space.primal_extremes:
            row = tuple(func[i] * x[k] for i in range(d) for k in range(d))
            canon, flipped = _canonical_sign(row, f)
            if canon not in seen:
                seen.add(canon)
                directions.append(canon)
    m = d * d
    n_dir = len(directions)
    if comb(n_dir, m) * (2 ** m) > work_cap:
        raise TooLarge(
            f"active-set enumeration needs {comb(n_dir, m)} * 2^{m} solves"
        )

    verts: list[tuple] = []
    vert_set = set()
    for subset in itertools.combinations(range(n_dir), m):
        rows = [list(directions[t]) for t in subset]
        if rank(rows, f) != m:
            continue
        for signs in itertools.product((1, -1), repeat=m):
            rhs = [f.from_int(s) for s in signs]
            sol = solve_linear(rows, rhs, f)
            if sol is None:
                continue
            feasible = True
            for direction in directions:
                val = vec_dot(direction, sol)
                if f.sign(f.abs(val) - f.one) > 0:
                    feasible = False
                    break
            if not feasible:
                continue
            key = tuple(sol)
            if key not in vert_set:
                vert_set.add(key)
                verts.append(key)
    verts.sort(key=lambda v: [f.to_float(c) for c in v])
    return [[list(v[i * d : (i + 1) * d]) for i in range(d)] for v in verts]


def _canonical_sign(row, f: Field):
    for x in row:
        s = f.sign(x)
        if s > 0:
            return row, False
        if s < 0:
            return tuple(-y for y in row), True
    return row, False


def is_operator_vertex(m, space: PolyhedralSpace) -> bool:
    """Certify extremeness: unit norm and full-rank tight constraint set."""
    f = space.field
    if not f.eq(op_norm(m, space), f.one):
        return False
    if space.primal_extremes is None:
        raise VerticesUnavailable("custom space lacks primal extreme points")
    d = space.dim
    flat = [m[i][k] for i in range(d) for k in range(d)]
    tight = []
    for func in space.dual_extremes:
        for x in space.primal_extremes:
            row = [func[i] * x[k] for i in range(d) for k in range(d)]
            if f.is_zero(vec_dot(row, flat) - f.one):
                tight.append(row)
    return rank(tight, f) == d * d


def nuclear1(a, space: PolyhedralSpace, method: str = "auto"):
    """Trace-dual norm of the operator norm: max Tr(a E) over ball vertices.

    ``auto`` uses the closed forms on the max/sum-norm spaces (equal to the
    vertex maximum, which the tests cross-check) and vertex enumeration on
    custom spaces; ``vertices`` forces the enumeration route.
    """
    d = space.dim
    if len(a) != d or any(len(row) != d for row in a):
        raise DimensionMismatch(f"matrix must be {d}x{d}")
    f = space.field
    if method == "auto" and space.kind is SpaceKind.L1:
        return nuclear1_l1(a)
    if method == "auto" and space.kind is SpaceKind.LINF:
        return nuclear1_l1(transpose(a))
    if space.kind is SpaceKind.CUSTOM and space.primal_extremes is None:
        raise VerticesUnavailable("custom space lacks primal extreme points")
    best = None
    for vert in iter_operator_ball_vertices(space):
        val = trace(mat_mul(a, vert))
        if best is None or f.lt(best, val):
            best = val
    return best


# -- subspaces and projections -------------------------------------------------


@dataclass(frozen=True)
class SubspaceBasis:
    """A subspace of a polyhedral space given by independent basis columns."""

    ambient: PolyhedralSpace
    columns: tuple[tuple, ...]  # each column is a d-vector

    def __post_init__(self):
        f = self.ambient.field
        cols = [list(c) for c in self.columns]
        if any(len(c) != self.ambient.dim for c in cols):
            raise DimensionMismatch("basis columns must match the ambient dimension")
        if rank(cols, f) != len(cols):
            raise RankDeficient("basis columns are linearly dependent")

    @property
    def dim(self) -> int:
        return len(self.columns)

    def matrix(self) -> list[list]:
        """d x n matrix whose columns span the subspace."""
        return transpose([list(c) for c in self.columns])


def subspace_from_columns(space: PolyhedralSpace, cols) -> SubspaceBasis:
    f = space.field
    return SubspaceBasis(space, tuple(tuple(f.coerce(x) for x in c) for c in cols))


def orthogonal_projection(basis: SubspaceBasis) -> list[list]:
    """P = U (U^T U)^{-1} U^T; exact, idempotent and symmetric."""
    f = basis.ambient.field
    u = basis.matrix()
    ut = transpose(u)
    gram = mat_mul(ut, u)
    gram_inv = inverse(gram, f)
    if gram_inv is None:
        raise RankDeficient("Gram matrix is singular")
    return mat_mul(u, mat_mul(gram_inv, ut))


def null_basis(basis: SubspaceBasis) -> list[list]:
    """Columns spanning the orthogonal complement (kernel of U^T)."""
    f = basis.ambient.field
    ut = transpose(basis.matrix())
    return kernel_basis(ut, f)
