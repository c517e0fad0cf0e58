"""Finite metric spaces: validation, standard constructions, four-point
decomposition, the eight-point hull superspace and weighted trees."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Optional

from .errors import (
    DisconnectedTree,
    InvalidSize,
    NegativeWeight,
    NonPositiveDistance,
    NonzeroDiagonal,
    NotSymmetric,
    ParseError,
    SinglePoint,
    TriangleViolation,
)
from .fields import Field, check_same_field, field_from_name


@dataclass(frozen=True)
class DistanceMatrix:
    """A validated finite metric space.

    ``rows[i][j]`` is the distance between points i and j; entries live in
    ``field``. Instances are immutable and hashable.
    """

    field: Field
    labels: tuple[str, ...]
    rows: tuple[tuple, ...]

    @property
    def n(self) -> int:
        return len(self.labels)

    def d(self, i: int, j: int):
        return self.rows[i][j]

    def index_of(self, label: str) -> int:
        return self.labels.index(label)

    def pointed(self, basepoint: int = 0) -> "PointedSpace":
        return PointedSpace(self, basepoint)

    def scale(self, t) -> "DistanceMatrix":
        rows = tuple(tuple(x * t for x in row) for row in self.rows)
        return DistanceMatrix(self.field, self.labels, rows)

    def permute(self, perm: tuple[int, ...]) -> "DistanceMatrix":
        """Relabeled copy; point k of the result is point perm[k] of self."""
        labels = tuple(self.labels[p] for p in perm)
        rows = tuple(tuple(self.rows[p][q] for q in perm) for p in perm)
        return DistanceMatrix(self.field, labels, rows)

    def to_float(self, eps: float = 1e-9) -> "DistanceMatrix":
        from .fields import f64_field

        f = f64_field(eps)
        rows = tuple(tuple(float(x) for x in row) for row in self.rows)
        return DistanceMatrix(f, self.labels, rows)

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "field": self.field.tag.value,
            "distances": [
                [self.field.to_float(x) if not self.field.is_exact else self.field.format(x) for x in row]
                for row in self.rows
            ],
        }


@dataclass(frozen=True)
class PointedSpace:
    """A metric space with a distinguished basepoint."""

    space: DistanceMatrix
    basepoint: int = 0

    def __post_init__(self):
        if not 0 <= self.basepoint < self.space.n:
            raise InvalidSize(f"basepoint {self.basepoint} out of range")

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def field(self) -> Field:
        return self.space.field

    def d(self, i: int, j: int):
        return self.space.d(i, j)

    @property
    def support(self) -> tuple[int, ...]:
        """Indices of the non-basepoint points, in order; the delta basis."""
        return tuple(i for i in range(self.n) if i != self.basepoint)


def validate(raw, field: Field, labels=None) -> DistanceMatrix:
    """Check the metric axioms and freeze the matrix.

    Raises the error for the first violated axiom, scanning symmetry, the
    diagonal, positivity and then triangles in deterministic index order.
    """
    n = len(raw)
    for row in raw:
        if len(row) != n:
            raise ParseError("distance matrix is not square")
    rows = tuple(tuple(field.coerce(x) for x in row) for row in raw)
    for i in range(n):
        for j in range(i + 1, n):
            if not field.eq(rows[i][j], rows[j][i]):
                raise NotSymmetric(i, j)
    for i in range(n):
        if not field.is_zero(rows[i][i]):
            raise NonzeroDiagonal(i)
    for i in range(n):
        for j in range(i + 1, n):
            if field.sign(rows[i][j]) <= 0:
                raise NonPositiveDistance(i, j)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                if k == i or k == j:
                    continue
                if field.sign(rows[i][j] - rows[i][k] - rows[k][j]) > 0:
                    raise TriangleViolation(i, j, k)
    if labels is None:
        labels = tuple(f"x{i + 1}" for i in range(n))
    else:
        labels = tuple(labels)
        if len(labels) != n or len(set(labels)) != n:
            raise ParseError("labels must be distinct and match the matrix size")
    return DistanceMatrix(field, labels, rows)


def diam_sep(space: DistanceMatrix):
    """(largest, smallest) off-diagonal distance."""
    if space.n < 2:
        raise SinglePoint("diam/sep need at least two points")
    offdiag = [
        space.rows[i][j]
        for i in range(space.n)
        for j in range(i + 1, space.n)
    ]
    diam = offdiag[0]
    sep = offdiag[0]
    f = space.field
    for x in offdiag[1:]:
        if f.lt(diam, x):
            diam = x
        if f.lt(x, sep):
            sep = x
    return diam, sep


def equilateral(n: int, side, field: Field) -> DistanceMatrix:
    """All pairwise distances equal to ``side``."""
    if n < 2:
        raise InvalidSize("equilateral spaces need n >= 2")
    s = field.coerce(side)
    if field.sign(s) <= 0:
        raise InvalidSize("side length must be positive")
    rows = [[field.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                rows[i][j] = s
    return validate(rows, field)


def npod(n: int, radius, field: Field):
    """Star tree gluing n segments of length ``radius`` at a center.

    Returns (space, leaf_indices, center_index); the leaves are pairwise at
    distance 2*radius and the leaf labels match ``equilateral(n, 2*radius)``.
    """
    if n < 2:
        raise InvalidSize("pods need n >= 2 leaves")
    c = field.coerce(radius)
    if field.sign(c) <= 0:
        raise InvalidSize("leg length must be positive")
    two_c = c + c
    size = n + 1
    rows = [[field.zero] * size for _ in range(size)]
    for i in range(n):
        for j in range(n):
            if i != j:
                rows[i][j] = two_c
        rows[i][n] = c
        rows[n][i] = c
    labels = tuple(f"x{i + 1}" for i in range(n)) + ("o",)
    return validate(rows, field, labels), tuple(range(n)), n


def rectangle_linf(width, height, field: Field) -> DistanceMatrix:
    """Vertices of an axis-aligned rectangle in the plane with max metric.

    Point order: (0,0), (w,0), (w,h), (0,h).
    """
    w = field.coerce(width)
    h = field.coerce(height)
    pts = [(field.zero, field.zero), (w, field.zero), (w, h), (field.zero, h)]
    rows = [
        [
            max(field.abs(p[0] - q[0]), field.abs(p[1] - q[1]), key=field.to_float)
            if field.tag.value == "f64"
            else _exact_max(field, field.abs(p[0] - q[0]), field.abs(p[1] - q[1]))
            for q in pts
        ]
        for p in pts
    ]
    return validate(rows, field)


def _exact_max(field: Field, x, y):
    return y if field.lt(x, y) else x


# -- four-point decomposition --------------------------------------------------


@dataclass(frozen=True)
class FourPointParams:
    """Leg lengths and rectangle sides of a four-point space.

    After relabeling by ``relabeling`` (role k is original point
    ``relabeling[k]``), the six distances decompose as

        d(1,2) = a + ell + b        d(1,3) = a + ell + w + c
        d(1,4) = a + w + d          d(2,3) = b + w + c
        d(2,4) = b + ell + w + d    d(3,4) = c + ell + d

    with legs a, b, c, d >= 0 and sides ell >= w >= 0.
    """

    field: Field
    relabeling: tuple[int, int, int, int]
    legs: tuple
    ell: object
    w: object

    def distance(self, role_i: int, role_j: int):
        """Distance between roles i and j from the decomposition."""
        if role_i == role_j:
            return self.field.zero
        i, j = min(role_i, role_j), max(role_i, role_j)
        legs, ell, w = self.legs, self.ell, self.w
        rect = _rect_distance(self.field, ell, w, i, j)
        return legs[i] + rect + legs[j]


def _rect_distance(field: Field, ell, w, i: int, j: int):
    """Distance between rectangle corners i, j in the (ell, w) cycle."""
    if i == j:
        return field.zero
    pair = (min(i, j), max(i, j))
    if pair in ((0, 1), (2, 3)):
        return ell
    if pair in ((1, 2), (0, 3)):
        return w
    return ell + w


def four_point_params(space: DistanceMatrix) -> FourPointParams:
    """Decompose a valid four-point metric per the rectangle-with-legs form.

    The relabeling is the lexicographically first permutation making the
    pairing sums satisfy S1 >= S2 >= S3 (S1 pairing {13|24}, S2 {12|34},
    S3 {14|23}); the decomposition then reproduces the input exactly.
    """
    if space.n != 4:
        raise InvalidSize("four_point_params needs exactly 4 points")
    f = space.field
    d = space.d

    chosen = None
    for perm in itertools.permutations(range(4)):
        p = perm
        s1 = d(p[0], p[2]) + d(p[1], p[3])
        s2 = d(p[0], p[1]) + d(p[2], p[3])
        s3 = d(p[0], p[3]) + d(p[1], p[2])
        if f.sign(s1 - s2) >= 0 and f.sign(s2 - s3) >= 0:
            chosen = (p, s1, s2, s3)
            break
    assert chosen is not None, "a valid 4-point metric always admits the form"
    p, s1, s2, s3 = chosen

    half = f.ratio(1, 2)
    w = (s1 - s2) * half
    ell = (s1 - s3) * half
    sigma = s2 - ell - ell  # a + b + c + d

    def dd(i, j):
        return d(p[i], p[j])

    a = ((dd(0, 1) - ell) + (dd(0, 2) - ell - w) + (dd(0, 3) - w) - sigma) * half
    b = ((dd(0, 1) - ell) + (dd(1, 2) - w) + (dd(1, 3) - ell - w) - sigma) * half
    c = ((dd(0, 2) - ell - w) + (dd(1, 2) - w) + (dd(2, 3) - ell) - sigma) * half
    e = ((dd(0, 3) - w) + (dd(1, 3) - ell - w) + (dd(2, 3) - ell) - sigma) * half

    legs = tuple(_clamp_nonneg(f, v) for v in (a, b, c, e))
    ell = _clamp_nonneg(f, ell)
    w = _clamp_nonneg(f, w)
    params = FourPointParams(f, p, legs, ell, w)
    for i in range(4):
        for j in range(i + 1, 4):
            if not f.eq(params.distance(i, j), dd(i, j)):
                raise AssertionError(
                    f"four-point decomposition failed to round-trip at roles ({i},{j})"
                )
    return params


def _clamp_nonneg(field: Field, v):
    s = field.sign(v)
    if s < 0:
        raise AssertionError("negative leg in four-point decomposition")
    return field.zero if s == 0 else v


def injective_hull_superspace(space: DistanceMatrix):
    """Embed a four-point space into its at-most-eight-point hull skeleton.

    Returns (Y, x_indices): Y contains the four original points (same
    labels, same order) plus the surviving rectangle corners; coincident
    corners are merged and corners equal to an original point are dropped.
    """
    params = four_point_params(space)
    f = space.field
    role_of = {orig: role for role, orig in enumerate(params.relabeling)}

    # zero-distance groups among the 8 candidates: 4 originals + 4 corners
    # (corner role r sits at leg distance legs[r] from original role r)
    def cand_dist(u, v):
        ku, iu = u
        kv, iv = v
        if ku == "x" and kv == "x":
            return space.d(iu, iv)
        if ku == "x" and kv == "y":
            return params.legs[role_of[iu]] + _rect_distance(
                f, params.ell, params.w, role_of[iu], iv
            )
        if ku == "y" and kv == "x":
            return cand_dist(v, u)
        return _rect_distance(f, params.ell, params.w, iu, iv)

    candidates = [("x", i) for i in range(space.n)] + [("y", r) for r in range(4)]
    keep: list[tuple[str, int]] = []
    for cand in candidates:
        if cand[0] == "x":
            keep.append(cand)
            continue
        if any(f.is_zero(cand_dist(cand, other)) for other in keep):
            continue
        keep.append(cand)

    labels = []
    used = set(space.labels)
    for kind, idx in keep:
        if kind == "x":
            labels.append(space.labels[idx])
        else:
            name = f"y{idx + 1}"
            while name in used:
                name += "'"
            labels.append(name)
            used.add(name)

    rows = [[cand_dist(u, v) for v in keep] for u in keep]
    y = validate(rows, f, labels)
    return y, tuple(range(space.n))


# -- weighted trees ------------------------------------------------------------


@dataclass(frozen=True)
class WeightedTree:
    """Finite tree with strictly positive edge weights and a basepoint."""

    field: Field
    labels: tuple[str, ...]
    edges: tuple[tuple[int, int, object], ...]  # (u, v, weight), u < v
    basepoint: int = 0

    def __post_init__(self):
        n = len(self.labels)
        if len(self.edges) != n - 1:
            raise DisconnectedTree(f"{len(self.edges)} edges for {n} vertices")
        adj = {i: [] for i in range(n)}
        for u, v, wgt in self.edges:
            if self.field.sign(wgt) <= 0:
                raise NegativeWeight(f"edge ({u},{v}) has weight {wgt}")
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        stack = [0]
        while stack:
            x = stack.pop()
            for ngb in adj[x]:
                if ngb not in seen:
                    seen.add(ngb)
                    stack.append(ngb)
        if len(seen) != n:
            raise DisconnectedTree("edge list does not connect all vertices")
        if not 0 <= self.basepoint < n:
            raise InvalidSize("basepoint out of range")

    @property
    def n(self) -> int:
        return len(self.labels)

    def adjacency(self) -> dict[int, list[tuple[int, int]]]:
        """vertex -> [(neighbor, edge index)]."""
        adj: dict[int, list[tuple[int, int]]] = {i: [] for i in range(self.n)}
        for e, (u, v, _) in enumerate(self.edges):
            adj[u].append((v, e))
            adj[v].append((u, e))
        return adj

    def path_edges(self, start: int, goal: int) -> list[int]:
        """Edge indices along the unique path from start to goal."""
        adj = self.adjacency()
        prev: dict[int, tuple[int, int]] = {}
        stack = [start]
        seen = {start}
        while stack:
            x = stack.pop()
            if x == goal:
                break
            for ngb, e in adj[x]:
                if ngb not in seen:
                    seen.add(ngb)
                    prev[ngb] = (x, e)
                    stack.append(ngb)
        path = []
        cur = goal
        while cur != start:
            cur, e = prev[cur]
            path.append(e)
        path.reverse()
        return path


def tree_metric(tree: WeightedTree) -> DistanceMatrix:
    """Shortest-path metric of the weighted tree, as a distance matrix."""
    f = tree.field
    n = tree.n
    adj = tree.adjacency()
    rows = [[f.zero] * n for _ in range(n)]
    for src in range(n):
        dist = {src: f.zero}
        stack = [src]
        while stack:
            x = stack.pop()
            for ngb, e in adj[x]:
                if ngb not in dist:
                    dist[ngb] = dist[x] + tree.edges[e][2]
                    stack.append(ngb)
        for j in range(n):
            rows[src][j] = dist[j]
    return validate(rows, f, tree.labels)


def detect_tree(space: DistanceMatrix) -> Optional[WeightedTree]:
    """Weighted tree (with Steiner vertices as needed) realizing the metric.

    Builds the tree by attaching one point at a time at the location fixed
    by its Gromov products with the already-placed points, then verifies
    every pairwise distance; returns None when verification fails.
    """
    f = space.field
    n = space.n
    if n == 1:
        return WeightedTree(f, space.labels, (), 0)

    # grow a vertex/edge list; vertices 0..n-1 are the original points
    labels = list(space.labels)
    edges: list[tuple[int, int, object]] = []
    steiner = 0

    def add_edge(u, v, wgt):
        edges.append((min(u, v), max(u, v), wgt))

    def split_edge(eidx, at_dist_from_u):
        """New vertex inside edge eidx at the given distance from its u end."""
        nonlocal steiner
        u, v, wgt = edges.pop(eidx)
        steiner += 1
        m = len(labels)
        labels.append(f"s{steiner}")
        add_edge(u, m, at_dist_from_u)
        add_edge(m, v, wgt - at_dist_from_u)
        return m

    add_edge(0, 1, space.d(0, 1))
    placed = [0, 1]

    def tree_dist_and_path(a, b):
        adj: dict[int, list[tuple[int, int]]] = {}
        for e, (u, v, _) in enumerate(edges):
            adj.setdefault(u, []).append((v, e))
            adj.setdefault(v, []).append((u, e))
        prev = {a: None}
        stack = [a]
        while stack:
            x = stack.pop()
            for ngb, e in adj.get(x, []):
                if ngb not in prev:
                    prev[ngb] = (x, e)
                    stack.append(ngb)
        path = []
        cur = b
        total = f.zero
        while prev[cur] is not None:
            par, e = prev[cur]
            path.append(e)
            total = total + edges[e][2]
            cur = par
        path.reverse()
        return total, path

    for z in range(2, n):
        u = placed[0]
        # attachment distance from u along the tree equals the largest
        # Gromov product (z|v)_u over placed v
        best_g, best_v = None, None
        for v in placed[1:]:
            g = (space.d(u, z) + space.d(u, v) - space.d(v, z)) * f.ratio(1, 2)
            if best_g is None or f.lt(best_g, g):
                best_g, best_v = g, v
        h = space.d(u, z) - best_g  # new leg length
        if f.sign(h) < 0 or f.sign(best_g) < 0:
            return None
        # locate the point at distance best_g from u on the path u -> best_v
        _, path = tree_dist_and_path(u, best_v)
        walked = f.zero
        cur = u
        attach = None
        for e in path:
            eu, ev, wgt = edges[e]
            nxt = ev if eu == cur else eu
            if f.sign(best_g - (walked + wgt)) < 0:
                # lands strictly inside this edge
                off = best_g - walked
                if f.is_zero(off):
                    attach = cur
                else:
                    attach = split_edge(e, off if eu == cur else wgt - off)
                break
            walked = walked + wgt
            cur = nxt
            if f.eq(walked, best_g):
                attach = cur
                break
        if attach is None:
            if not f.eq(walked, best_g):
                return None
            attach = cur
        if f.is_zero(h):
            # z coincides with the attachment vertex; only legal on Steiner
            if attach < n:
                return None
            # swap labels so that z takes the Steiner vertex's slot
            edges[:] = [
                (min(_swap(a, attach, z), _swap(b, attach, z)),
                 max(_swap(a, attach, z), _swap(b, attach, z)), wgt)
                for (a, b, wgt) in edges
            ]
            labels[attach] = f"s{attach}"  # stale slot keeps a dummy name
        else:
            add_edge(attach, z, h)
        placed.append(z)

    # drop unused trailing Steiner slots and renumber contiguously
    used = set()
    for u, v, _ in edges:
        used.add(u)
        used.add(v)
    used.update(range(n))
    ordering = sorted(used)
    remap = {old: new for new, old in enumerate(ordering)}
    final_labels = tuple(labels[i] for i in ordering)
    final_edges = tuple(
        (min(remap[u], remap[v]), max(remap[u], remap[v]), wgt) for u, v, wgt in edges
    )
    try:
        tree = WeightedTree(f, final_labels, final_edges, 0)
    except (DisconnectedTree, NegativeWeight):
        return None
    realized = tree_metric(tree)
    for i in range(n):
        for j in range(n):
            if not f.eq(realized.d(i, j), space.d(i, j)):
                return None
    return tree


def _swap(x, a, b):
    if x == a:
        return b
    if x == b:
        return a
    return x


# -- JSON interface -------------------------------------------------------------


def load_metric_json(doc, eps: float = 1e-9) -> DistanceMatrix:
    """Distance matrix from the JSON document format.

    ``{"labels": [...], "field": "rational"|"sqrt2"|"f64",
       "distances": [[...]]}`` with scalar literals as strings in exact
    modes and numbers in f64 mode.
    """
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        field = field_from_name(doc["field"], eps)
        raw = doc["distances"]
        labels = doc.get("labels")
    except KeyError as exc:
        raise ParseError(f"metric document missing key: {exc}") from None
    parsed = [[field.parse(x) for x in row] for row in raw]
    return validate(parsed, field, labels)


def load_metric_file(path, eps: float = 1e-9) -> DistanceMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return load_metric_json(json.load(fh), eps)


def dump_metric_json(space: DistanceMatrix) -> str:
    return json.dumps(space.to_json_dict(), indent=2)


def shared_subspace_indices(x: DistanceMatrix, y: DistanceMatrix) -> list[int]:
    """Index of each X point inside Y, matching labels and distances."""
    from .errors import NotASubset

    idx = []
    for lab in x.labels:
        if lab not in y.labels:
            raise NotASubset(f"point {lab!r} of X missing from Y")
        idx.append(y.labels.index(lab))
    f = check_same_field(x.field, y.field)
    for i in range(x.n):
        for j in range(x.n):
            if not f.eq(x.d(i, j), y.d(idx[i], idx[j])):
                raise NotASubset(
                    f"distance mismatch between {x.labels[i]!r} and {x.labels[j]!r}"
                )
    return idx
