"""The free Banach space over a finite pointed metric space.

Coordinates are taken with respect to the point-evaluation basis
``delta(x), x != basepoint``, so the space over an n-point metric is
(n-1)-dimensional. The dual unit ball (functions vanishing at the
basepoint with slope at most one) is a polytope; its vertices drive norm
evaluation and the isometric embedding into the max-norm space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    BasepointMismatch,
    DimensionMismatch,
    NotASubset,
    OddVertexCount,
    SamePoint,
    SinglePoint,
    TooLarge,
)
from .fields import Field, check_same_field
from .linalg import rank
from .metric import DistanceMatrix, PointedSpace, WeightedTree, shared_subspace_indices

DEFAULT_ENUMERATION_CAP = 8


@dataclass(frozen=True)
class FreeVector:
    """Coordinates of an element of the free space over ``base``."""

    base: PointedSpace
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.base.n - 1:
            raise DimensionMismatch(
                f"{len(self.coeffs)} coordinates for an {self.base.n}-point space"
            )

    @property
    def field(self) -> Field:
        return self.base.field


@dataclass(frozen=True)
class Molecule:
    """Normalized difference of two point evaluations; always norm one."""

    x: int
    y: int
    vector: FreeVector


@dataclass(frozen=True)
class LipschitzBall:
    """H-representation and enumerated vertices of the dual unit ball.

    ``hrep`` holds one entry (i, j, d(i, j)) per unordered point pair,
    meaning |f(i) - f(j)| <= d(i, j) with f(basepoint) = 0 substituted.
    Vertices are coordinate tuples over the non-basepoint points, listed
    in ascending lexicographic order; the set is symmetric under negation.
    """

    base: PointedSpace
    hrep: tuple[tuple[int, int, object], ...]
    vertices: tuple[tuple, ...]


def delta(base: PointedSpace, x: int) -> FreeVector:
    """The evaluation vector of point x (zero for the basepoint)."""
    f = base.field
    coeffs = [f.zero] * (base.n - 1)
    if x != base.basepoint:
        coeffs[base.support.index(x)] = f.one
    return FreeVector(base, tuple(coeffs))


def molecule(base: PointedSpace, x: int, y: int) -> Molecule:
    """(delta(x) - delta(y)) / d(x, y) for distinct points x, y."""
    if x == y:
        raise SamePoint("molecule endpoints must differ")
    f = base.field
    inv = f.one / base.d(x, y)
    coeffs = [f.zero] * (base.n - 1)
    support = base.support
    if x != base.basepoint:
        coeffs[support.index(x)] = inv
    if y != base.basepoint:
        coeffs[support.index(y)] = -inv
    return Molecule(x, y, FreeVector(base, tuple(coeffs)))


@lru_cache(maxsize=256)
def lipschitz_ball(base: PointedSpace, cap: int = DEFAULT_ENUMERATION_CAP) -> LipschitzBall:
    """Enumerate the extreme slope-one functions of the pointed space.

    A vertex is pinned by n-1 independent tight pair constraints, i.e. by
    a spanning tree of tight pairs with a sign per edge; every spanning
    tree and sign pattern is propagated from the basepoint and kept when
    all remaining pair constraints hold.
    """
    if base.n < 2:
        raise SinglePoint("the ball needs at least two points")
    if base.n > cap:
        raise TooLarge(f"{base.n} points exceeds the enumeration cap {cap}")
    f = base.field
    n = base.n
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    hrep = tuple((i, j, base.d(i, j)) for i, j in pairs)

    support = base.support
    col_of = {x: k for k, x in enumerate(support)}

    seen: set[tuple] = set()
    found: list[tuple] = []
    for tree_pairs in itertools.combinations(range(len(pairs)), n - 1):
        if not _is_spanning_tree([pairs[t] for t in tree_pairs], n):
            continue
        edge_list = [pairs[t] for t in tree_pairs]
        for signs in itertools.product((1, -1), repeat=n - 1):
            values = _propagate(base, edge_list, signs)
            if values is None:
                continue
            ok = True
            for (i, j, dij) in hrep:
                if f.sign(f.abs(values[i] - values[j]) - dij) > 0:
                    ok = False
                    break
            if not ok:
                continue
            vert = tuple(values[x] for x in support)
            if vert in seen:
                continue
            if not f.is_exact and _float_duplicate(vert, found, f):
                continue
            if not f.is_exact and not _float_extreme(vert, hrep, col_of, base, f):
                continue
            seen.add(vert)
            found.append(vert)
    found.sort(key=lambda v: tuple(f.to_float(c) for c in v) if not f.is_exact else v)
    return LipschitzBall(base, hrep, tuple(found))


def _is_spanning_tree(edge_list, n: int) -> bool:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in edge_list:
        ri, rj = find(i), find(j)
        if ri == rj:
            return False
        parent[ri] = rj
    return True


def _propagate(base: PointedSpace, edge_list, signs):
    """Values of f fixed by f(edge i) - f(edge j) = sign * d along a tree."""
    f = base.field
    values = {base.basepoint: f.zero}
    remaining = list(zip(edge_list, signs))
    while remaining:
        progressed = False
        rest = []
        for (i, j), s in remaining:
            if i in values and j in values:
                progressed = True
            elif i in values:
                step = base.d(i, j) if s > 0 else -base.d(i, j)
                values[j] = values[i] - step
                progressed = True
            elif j in values:
                step = base.d(i, j) if s > 0 else -base.d(i, j)
                values[i] = values[j] + step
                progressed = True
            else:
                rest.append(((i, j), s))
        remaining = rest
        if not progressed:
            return None
    return values


def _float_duplicate(vert, found, f: Field) -> bool:
    return any(
        all(abs(a - b) <= f.eps for a, b in zip(vert, other)) for other in found
    )


def _float_extreme(vert, hrep, col_of, base: PointedSpace, f: Field) -> bool:
    """Re-verify extremeness at 10*eps: tight rows must have full rank."""
    from .fields import f64_field

    tight_rows = []
    values = dict(zip(base.support, vert))
    values[base.basepoint] = 0.0
    for (i, j, dij) in hrep:
        if abs(abs(values[i] - values[j]) - dij) <= 10 * f.eps:
            row = [0.0] * (base.n - 1)
            if i != base.basepoint:
                row[col_of[i]] = 1.0
            if j != base.basepoint:
                row[col_of[j]] -= 1.0
            tight_rows.append(row)
    return rank(tight_rows, f64_field(10 * f.eps)) == base.n - 1


def free_norm(mu: FreeVector, ball: LipschitzBall | None = None):
    """Norm of a free-space element: max vertex pairing over the dual ball."""
    base = mu.base
    if base.n < 2:
        return base.field.zero
    if ball is None:
        ball = lipschitz_ball(base)
    f = base.field
    best = f.zero
    for vert in ball.vertices:
        val = sum((v * c for v, c in zip(vert, mu.coeffs)), f.zero)
        if f.lt(best, val):
            best = val
    return best


def embed_linf(base: PointedSpace, ball: LipschitzBall | None = None):
    """Isometric embedding of the free space into the max-norm space.

    Picks one representative per +/- vertex pair (the lexicographically
    larger), so the rows form S with S u -S = all vertices; returns
    (matrix, q) where the matrix is q x (n-1) and
    ``max_i |row_i . mu| = free_norm(mu)``.
    """
    if ball is None:
        ball = lipschitz_ball(base)
    f = base.field
    if len(ball.vertices) % 2 != 0:
        raise OddVertexCount(f"{len(ball.vertices)} vertices")
    chosen: list[tuple] = []
    for vert in reversed(ball.vertices):
        neg = tuple(-c for c in vert)
        if not any(_tuple_eq(neg, c, f) for c in chosen):
            chosen.append(vert)
    matrix = [list(v) for v in chosen]
    return matrix, len(chosen)


def _tuple_eq(u, v, f: Field) -> bool:
    return all(f.is_zero(a - b) for a, b in zip(u, v))


def tree_isometry(
    tree: WeightedTree,
    signs: tuple[int, ...] | None = None,
    edge_order: tuple[int, ...] | None = None,
):
    """Matrix of the exact isometry from the free space of a weighted tree
    onto the sum-norm space of its edges.

    Column for vertex x holds, per edge in ``edge_order``, the signed edge
    weight when that edge lies on the basepoint-to-x path, else zero. The
    induced map satisfies ``sum_i |(M mu)_i| = free_norm(mu)``.
    """
    f = tree.field
    n_edges = len(tree.edges)
    if edge_order is None:
        edge_order = tuple(
            sorted(range(n_edges), key=lambda e: (tree.edges[e][0], tree.edges[e][1]))
        )
    if signs is None:
        signs = (1,) * n_edges
    base_vertices = [v for v in range(tree.n) if v != tree.basepoint]
    matrix = [[f.zero] * len(base_vertices) for _ in range(n_edges)]
    for col, x in enumerate(base_vertices):
        on_path = set(tree.path_edges(tree.basepoint, x))
        for row, e in enumerate(edge_order):
            if e in on_path:
                wgt = tree.edges[e][2]
                matrix[row][col] = wgt if signs[row] > 0 else -wgt
    return matrix


def inclusion_matrix(x: PointedSpace, y: PointedSpace):
    """0/1 matrix sending the delta basis of X into that of Y.

    X's points must appear in Y with identical distances and the shared
    basepoint; the resulting (|Y|-1) x (|X|-1) map preserves the norm.
    """
    check_same_field(x.field, y.field)
    idx = shared_subspace_indices(x.space, y.space)
    if idx[x.basepoint] != y.basepoint:
        raise BasepointMismatch(
            f"X basepoint {x.space.labels[x.basepoint]!r} is not Y's basepoint"
        )
    f = x.field
    rows = [v for v in range(y.n) if v != y.basepoint]
    cols = x.support
    matrix = [[f.zero] * len(cols) for _ in rows]
    row_of = {v: r for r, v in enumerate(rows)}
    for c, xp in enumerate(cols):
        matrix[row_of[idx[xp]]][c] = f.one
    return matrix
