"""Conforming triangulations of the oscillatory domains and reference cells.

All generators produce boundary-fitted structured grids whose quadrilaterals
are split along the shorter diagonal.  Triangles are counterclockwise and
boundary edges carry tags from {lateral-left, lateral-right, bottom, top,
interface, gamma0}.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .combgeom import CombSpec, tooth_layout
from .errors import ConfigurationError, MeshingError, ResourceLimitError
from .geometry import ProfileSpec, count_windows, eval_G_eps

_SNAP = 1e-12

BOUNDARY_TAGS = ("lateral-left", "lateral-right", "bottom", "top", "interface", "gamma0")


@dataclass
class Mesh:
    """Triangulation with tagged boundary edges.

    nodes is (N, 2), triangles is (M, 3) with counterclockwise orientation,
    boundary_edges is a list of (node_a, node_b, tag).  Instances are
    treated as immutable once built.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: List[Tuple[int, int, str]]

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def triangle_areas(self) -> np.ndarray:
        return signed_areas(self.nodes, self.triangles)

    def boundary_nodes(self, tags: Sequence[str]) -> np.ndarray:
        wanted = set(tags)
        ids = {n for a, b, t in self.boundary_edges if t in wanted for n in (a, b)}
        return np.array(sorted(ids), dtype=int)


def signed_areas(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p0 = nodes[triangles[:, 0]]
    p1 = nodes[triangles[:, 1]]
    p2 = nodes[triangles[:, 2]]
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))


def _split_columns(xs, ycols, tag_left="lateral-left", tag_right="lateral-right",
                   tag_bottom="bottom", tag_top="top"):
    """Triangulate a boundary-fitted column grid.

    xs has nx+1 abscissae; ycols is (nx+1, ny+1) with strictly increasing
    rows of ordinates per column.  Quadrilaterals are split along the
    shorter diagonal.
    """
    nxp1, nyp1 = ycols.shape
    nx, ny = nxp1 - 1, nyp1 - 1
    nodes = np.column_stack([
        np.repeat(xs, nyp1),
        ycols.ravel(),
    ])

    def idx(i, j):
        return i * nyp1 + j

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    a = (ii * nyp1 + jj).ravel()
    b = ((ii + 1) * nyp1 + jj).ravel()
    c = ((ii + 1) * nyp1 + jj + 1).ravel()
    d = (ii * nyp1 + jj + 1).ravel()
    # shorter diagonal: compare |AC| and |BD|
    ac = (nodes[c] - nodes[a])
    bd = (nodes[d] - nodes[b])
    use_ac = (ac ** 2).sum(axis=1) <= (bd ** 2).sum(axis=1)
    tris = np.empty((2 * nx * ny, 3), dtype=int)
    tris[0::2] = np.where(use_ac[:, None], np.column_stack([a, b, c]),
                          np.column_stack([a, b, d]))
    tris[1::2] = np.where(use_ac[:, None], np.column_stack([a, c, d]),
                          np.column_stack([b, c, d]))

    boundary = []
    for i in range(nx):
        boundary.append((idx(i, 0), idx(i + 1, 0), tag_bottom))
        boundary.append((idx(i, ny), idx(i + 1, ny), tag_top))
    for j in range(ny):
        boundary.append((idx(0, j), idx(0, j + 1), tag_left))
        boundary.append((idx(nx, j), idx(nx, j + 1), tag_right))
    return nodes, tris, boundary


def mesh_type1(spec: ProfileSpec, eps: float, cells_per_period: int = 8,
               ny: int = 8, triangle_cap: int = 200000) -> Mesh:
    """Boundary-fitted structured mesh of the graph-type domain.

    The x-resolution is cells_per_period cells per oscillation period (a
    single block when the profile does not oscillate); each column carries
    ny+1 nodes distributed between -b(x) and the oscillatory top boundary.
    """
    if cells_per_period < 1 or ny < 1:
        raise ConfigurationError("cells_per_period and ny must be positive")
    if eps <= 0:
        raise ConfigurationError("eps must be positive")
    if spec.oscillating():
        periods = int(np.ceil(1.0 / (spec.l_min * eps ** spec.alpha) - 1e-9))
        periods = max(periods, 1)
    else:
        periods = 1
    nx = cells_per_period * periods
    if 2 * nx * ny > triangle_cap:
        raise ResourceLimitError(
            f"mesh_type1 would need {2 * nx * ny} triangles (cap {triangle_cap}) "
            f"at eps={eps}, alpha={spec.alpha}"
        )
    xs = np.linspace(0.0, 1.0, nx + 1)
    bottom = -spec.b(xs)
    top = eval_G_eps(spec, eps, xs)
    heights = top - bottom
    t = np.arange(ny + 1) / ny
    ycols = bottom[:, None] + t[None, :] * heights[:, None]
    nodes, tris, boundary = _split_columns(xs, ycols)
    return Mesh(nodes, tris, boundary)


def mesh_rectangle(width: float, height: float, nx: int, ny: int,
                   gamma0="none", origin=(0.0, 0.0)) -> Mesh:
    """Uniform structured triangulation of an axis-aligned rectangle.

    gamma0 selects the edge set retagged as 'gamma0': one of 'none',
    'bottom', 'top', 'left', 'right', 'all', or an iterable of sides.
    """
    if width <= 0 or height <= 0 or nx < 1 or ny < 1:
        raise ConfigurationError("rectangle dimensions and counts must be positive")
    x0, y0 = origin
    xs = x0 + np.linspace(0.0, width, nx + 1)
    yline = y0 + np.linspace(0.0, height, ny + 1)
    ycols = np.tile(yline, (nx + 1, 1))
    nodes, tris, boundary = _split_columns(
        xs, ycols, tag_left="left", tag_right="right", tag_bottom="bottom", tag_top="top")
    if gamma0 == "all":
        selected = {"left", "right", "bottom", "top"}
    elif gamma0 == "none" or gamma0 is None:
        selected = set()
    elif isinstance(gamma0, str):
        selected = {gamma0}
    else:
        selected = set(gamma0)
    unknown = selected - {"left", "right", "bottom", "top"}
    if unknown:
        raise ConfigurationError(f"unknown gamma0 side(s): {sorted(unknown)}")
    retagged = []
    rename = {"left": "lateral-left", "right": "lateral-right"}
    for a, b, tag in boundary:
        if tag in selected:
            retagged.append((a, b, "gamma0"))
        else:
            retagged.append((a, b, rename.get(tag, tag)))
    return Mesh(nodes, tris, retagged)


def _cell_lattice(spec: CombSpec, hx_ref: float, hy: float):
    """Tensor lattice covering the reference cell's rectangle union.

    Breakpoints of the rectangles are lattice lines by construction, so
    every rectangle tiles exactly onto lattice cells and unions of
    rectangles mesh conformingly.
    """
    xb = sorted({v for r in spec.cell for v in (r[0], r[1])})
    yb = sorted({v for r in spec.cell for v in (r[2], r[3])})

    def refine(breaks, step):
        grid = [breaks[0]]
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            n = max(1, int(np.ceil((hi - lo) / step - 1e-9)))
            grid.extend(lo + (hi - lo) * (k + 1) / n for k in range(n))
        return np.array(grid)

    gx = refine(xb, hx_ref)
    gy = refine(yb, hy)
    cx = 0.5 * (gx[:-1] + gx[1:])
    cy = 0.5 * (gy[:-1] + gy[1:])
    used = np.zeros((len(cx), len(cy)), dtype=bool)
    for x_lo, x_hi, y_lo, y_hi in spec.cell:
        ix = (cx > x_lo) & (cx < x_hi)
        iy = (cy > y_lo) & (cy < y_hi)
        used |= ix[:, None] & iy[None, :]
    return gx, gy, used


def _lattice_mesh(gx, gy, used):
    """Triangulate the used cells of a tensor lattice.

    Returns local nodes, triangles, and boundary edges labelled with the
    outward side ('left', 'right', 'bottom', 'top') and a flag for edges
    on the lattice's bottom line y = gy[0].
    """
    nxc, nyc = used.shape
    node_id: Dict[Tuple[int, int], int] = {}
    nodes: List[Tuple[float, float]] = []

    def nid(ix, iy):
        key = (ix, iy)
        if key not in node_id:
            node_id[key] = len(nodes)
            nodes.append((gx[ix], gy[iy]))
        return node_id[key]

    tris = []
    boundary = []  # (a, b, side)
    for ix in range(nxc):
        for iy in range(nyc):
            if not used[ix, iy]:
                continue
            a = nid(ix, iy)
            b = nid(ix + 1, iy)
            c = nid(ix + 1, iy + 1)
            d = nid(ix, iy + 1)
            # diagonals of a rectangle are equal; always split along AC
            tris.append((a, b, c))
            tris.append((a, c, d))
            if iy == 0 or not used[ix, iy - 1]:
                boundary.append((a, b, "bottom"))
            if iy == nyc - 1 or not used[ix, iy + 1]:
                boundary.append((d, c, "top"))
            if ix == 0 or not used[ix - 1, iy]:
                boundary.append((a, d, "left"))
            if ix == nxc - 1 or not used[ix + 1, iy]:
                boundary.append((b, c, "right"))
    return np.array(nodes), np.array(tris, dtype=int), boundary


def mesh_cell(spec: CombSpec, h: float) -> Mesh:
    """Mesh the reference cell itself, tagging its base trace as gamma0.

    Used to validate the mixed eigenvalue hypothesis before a comb study.
    """
    gx, gy, used = _cell_lattice(spec, h, h)
    if not used.any():
        raise MeshingError("reference cell produced no lattice cells")
    nodes, tris, boundary = _lattice_mesh(gx, gy, used)
    tagged = []
    for a, b, side in boundary:
        on_base = abs(nodes[a][1]) <= _SNAP and abs(nodes[b][1]) <= _SNAP
        tagged.append((a, b, "gamma0" if on_base else "top"))
    return Mesh(nodes, tris, tagged)


def mesh_type2(spec: CombSpec, eps: float, h: float,
               triangle_cap: int = 200000) -> Mesh:
    """Conforming mesh of the comb domain: base strip plus scaled teeth.

    The base strip's x-grid absorbs every tooth-bottom node (uniform points
    falling strictly inside a tooth footprint are dropped), so nodes on the
    shared interface {x2 = 0} coincide exactly and interface edges become
    interior.
    """
    if h <= 0:
        raise ConfigurationError("h must be positive")
    layout = tooth_layout(spec, eps)
    scale = eps ** spec.alpha
    gx, gy, used = _cell_lattice(spec, h / scale, h)
    if not used.any():
        raise MeshingError("reference cell produced no lattice cells")
    ref_nodes, ref_tris, ref_boundary = _lattice_mesh(gx, gy, used)

    cell_touches_base = abs(gy[0]) <= _SNAP
    ref_bottom_edges = {
        (a, b) for a, b, side in ref_boundary
        if side == "bottom" and abs(ref_nodes[a][1]) <= _SNAP and abs(ref_nodes[b][1]) <= _SNAP
    }

    # physical tooth meshes
    tooth_nodes = []
    tooth_tris = []
    tooth_boundary = []  # (a, b, interface_flag) with global-within-teeth ids
    offset_ids = 0
    bottom_spans = []
    for _, offset, s in layout:
        phys = np.column_stack([offset + s * ref_nodes[:, 0], ref_nodes[:, 1]])
        tooth_nodes.append(phys)
        tooth_tris.append(ref_tris + offset_ids)
        for a, b, side in ref_boundary:
            is_interface = cell_touches_base and (a, b) in ref_bottom_edges
            tooth_boundary.append((a + offset_ids, b + offset_ids, is_interface))
        for a, b in ref_bottom_edges:
            xa = offset + s * ref_nodes[a][0]
            xb = offset + s * ref_nodes[b][0]
            bottom_spans.append((min(xa, xb), max(xa, xb)))
        offset_ids += len(phys)

    # base strip x-grid: uniform points plus tooth-bottom nodes
    n_base = max(4, int(np.ceil(1.0 / h)))
    base_x = list(np.linspace(0.0, 1.0, n_base + 1))
    kept = []
    for x in base_x:
        inside = any(lo + _SNAP < x < hi - _SNAP for lo, hi in bottom_spans)
        if not inside:
            kept.append(x)
    span_points = sorted({v for lo, hi in bottom_spans for v in (lo, hi)})
    base_xs = np.array(sorted(set(kept) | set(span_points)))
    dx = np.diff(base_xs)
    if np.any(dx <= _SNAP):
        keep_mask = np.concatenate([[True], dx > _SNAP])
        base_xs = base_xs[keep_mask]

    b_max = float(np.max(spec.b(np.linspace(0.0, 1.0, 1025))))
    ny_b = max(2, int(np.ceil(b_max / h)))
    bvals = spec.b(base_xs)
    t = np.arange(ny_b + 1) / ny_b
    ycols = (-bvals)[:, None] * (1.0 - t[None, :])
    base_nodes, base_tris, base_boundary = _split_columns(
        base_xs, ycols, tag_top="interface")

    # merge node sets; interface coordinates agree exactly by construction
    all_nodes = [base_nodes] + tooth_nodes
    stacked = np.vstack(all_nodes)
    key_to_global: Dict[Tuple[float, float], int] = {}
    global_of = np.empty(len(stacked), dtype=int)
    unique_coords: List[Tuple[float, float]] = []
    for i, (x, y) in enumerate(stacked):
        key = (float(x), float(y))
        g = key_to_global.get(key)
        if g is None:
            g = len(unique_coords)
            key_to_global[key] = g
            unique_coords.append(key)
        global_of[i] = g
    nodes = np.array(unique_coords)

    shift = len(base_nodes)
    tris = [global_of[base_tris]]
    for block in tooth_tris:
        tris.append(global_of[block + shift])
    triangles = np.vstack(tris)
    if len(triangles) > triangle_cap:
        raise ResourceLimitError(
            f"mesh_type2 would need {len(triangles)} triangles (cap {triangle_cap}) "
            f"at eps={eps}, alpha={spec.alpha}"
        )

    # boundary edges: pair off coincident base-top and tooth-bottom edges
    pair_count: Dict[Tuple[int, int], int] = {}
    candidates = []
    for a, b, tag in base_boundary:
        ga, gb = int(global_of[a]), int(global_of[b])
        candidates.append((ga, gb, tag, tag == "interface"))
        if tag == "interface":
            pair_count[_norm(ga, gb)] = pair_count.get(_norm(ga, gb), 0) + 1
    for a, b, is_interface in tooth_boundary:
        ga, gb = int(global_of[a + shift]), int(global_of[b + shift])
        candidates.append((ga, gb, "top", is_interface))
        if is_interface:
            pair_count[_norm(ga, gb)] = pair_count.get(_norm(ga, gb), 0) + 1

    boundary = []
    for ga, gb, tag, matchable in candidates:
        if matchable and pair_count.get(_norm(ga, gb), 0) >= 2:
            continue  # interior interface edge
        boundary.append((ga, gb, tag))

    mesh = Mesh(nodes, triangles, boundary)
    _check_conforming(mesh)
    return mesh


def _norm(a: int, b: int) -> Tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _check_conforming(mesh: Mesh):
    counts: Dict[Tuple[int, int], int] = {}
    for tri in mesh.triangles:
        for k in range(3):
            e = _norm(int(tri[k]), int(tri[(k + 1) % 3]))
            counts[e] = counts.get(e, 0) + 1
    bad = [e for e, c in counts.items() if c > 2]
    if bad:
        raise MeshingError(f"non-conforming interface: {len(bad)} over-shared edges")
    exposed = {e for e, c in counts.items() if c == 1}
    tagged = {_norm(a, b) for a, b, _ in mesh.boundary_edges}
    if exposed != tagged:
        raise MeshingError(
            f"boundary mismatch after merge: {len(exposed ^ tagged)} edges differ"
        )


@dataclass
class MeshReport:
    """Outcome of validate_mesh; valid means no violations and healthy angles."""

    valid: bool
    orientation_violations: int
    nonconforming_edges: int
    duplicate_nodes: int
    boundary_mismatch: int
    min_angle_deg: float
    messages: List[str] = field(default_factory=list)


def validate_mesh(mesh: Mesh) -> MeshReport:
    """Structural and quality checks.

    Reports wrongly oriented triangles, edges shared by more than two
    triangles, exposed edges that are not tagged (and vice versa), node
    pairs closer than 1e-14, and the minimum triangle angle.  The mesh is
    valid when nothing is violated and the minimum angle exceeds 1 degree.
    """
    msgs = []
    areas = signed_areas(mesh.nodes, mesh.triangles)
    n_orient = int(np.sum(areas <= 0))
    if n_orient:
        msgs.append(f"{n_orient} triangles are not counterclockwise")

    counts: Dict[Tuple[int, int], int] = {}
    for tri in mesh.triangles:
        for k in range(3):
            e = _norm(int(tri[k]), int(tri[(k + 1) % 3]))
            counts[e] = counts.get(e, 0) + 1
    n_over = sum(1 for c in counts.values() if c > 2)
    if n_over:
        msgs.append(f"{n_over} edges shared by more than two triangles")
    exposed = {e for e, c in counts.items() if c == 1}
    tagged = {_norm(a, b) for a, b, _ in mesh.boundary_edges}
    mismatch = len(exposed ^ tagged)
    if mismatch:
        msgs.append(f"{mismatch} edges disagree between topology and tags")

    from scipy.spatial import cKDTree

    tree = cKDTree(mesh.nodes)
    dup_pairs = tree.query_pairs(1e-14)
    if dup_pairs:
        msgs.append(f"{len(dup_pairs)} node pairs closer than 1e-14")

    p0 = mesh.nodes[mesh.triangles[:, 0]]
    p1 = mesh.nodes[mesh.triangles[:, 1]]
    p2 = mesh.nodes[mesh.triangles[:, 2]]
    min_angle = 180.0
    if len(mesh.triangles):
        angles = []
        for a, b, c in ((p0, p1, p2), (p1, p2, p0), (p2, p0, p1)):
            u = b - a
            v = c - a
            cosang = np.sum(u * v, axis=1) / (
                np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
            angles.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
        min_angle = float(np.min(np.stack(angles)))
    if min_angle <= 1.0:
        msgs.append(f"minimum angle {min_angle:.4f} deg is below 1 deg")

    valid = (n_orient == 0 and n_over == 0 and mismatch == 0
             and not dup_pairs and min_angle > 1.0)
    return MeshReport(valid, n_orient, n_over, len(dup_pairs), mismatch,
                      min_angle, msgs)


def write_mesh(mesh: Mesh, path):
    """Write the plain-text mesh format (0-based indices, full precision)."""
    lines = [f"nodes {mesh.num_nodes}"]
    for i, (x, y) in enumerate(mesh.nodes):
        lines.append(f"{i} {x!r} {y!r}")
    lines.append(f"triangles {mesh.num_triangles}")
    for i, (a, b, c) in enumerate(mesh.triangles):
        lines.append(f"{i} {a} {b} {c}")
    lines.append(f"boundary {len(mesh.boundary_edges)}")
    for a, b, tag in mesh.boundary_edges:
        lines.append(f"{a} {b} {tag}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path) -> Mesh:
    with open(path) as fh:
        tokens = fh.read().split("\n")
    pos = 0

    def expect(keyword):
        nonlocal pos
        parts = tokens[pos].split()
        if len(parts) != 2 or parts[0] != keyword:
            raise MeshingError(f"bad mesh file near line {pos + 1}: expected '{keyword} N'")
        pos += 1
        return int(parts[1])

    n = expect("nodes")
    nodes = np.empty((n, 2))
    for _ in range(n):
        i, x, y = tokens[pos].split()
        nodes[int(i)] = (float(x), float(y))
        pos += 1
    m = expect("triangles")
    tris = np.empty((m, 3), dtype=int)
    for _ in range(m):
        i, a, b, c = tokens[pos].split()
        tris[int(i)] = (int(a), int(b), int(c))
        pos += 1
    k = expect("boundary")
    boundary = []
    for _ in range(k):
        a, b, tag = tokens[pos].split()
        boundary.append((int(a), int(b), tag))
        pos += 1
    return Mesh(nodes, tris, boundary)
