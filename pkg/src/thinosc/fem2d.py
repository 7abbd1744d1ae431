"""P1 finite elements for the anisotropic reaction-diffusion problem.

Assembles the bilinear form d1*du/dx1*dphi/dx1 + d2*du/dx2*dphi/dx2 + u*phi
with natural (Neumann) boundary conditions, solves with Jacobi-preconditioned
conjugate gradients, and provides the mixed Dirichlet-Neumann eigenvalue and
boundary-layer solvers used by the comb hypothesis check and cell oracles.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ConvergenceError, MeshingError, PreconditionError
from .geometry import ProfileSpec
from .mesh import Mesh, mesh_type1, signed_areas


@dataclass
class SparseSystem:
    """Assembled SPD system with a reference to the mesh it lives on."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    ndof: int
    mesh: Mesh


@dataclass
class Field:
    """Piecewise-linear finite-element function (one value per node)."""

    mesh: Mesh
    values: np.ndarray
    iterations: Optional[int] = None


def _p1_geometry(mesh: Mesh):
    """Areas and constant basis gradients per triangle."""
    tri = mesh.triangles
    p = mesh.nodes
    x = p[:, 0][tri]
    y = p[:, 1][tri]
    area = signed_areas(mesh.nodes, tri)
    if np.any(area <= 0):
        raise MeshingError("mesh has non-positively-oriented triangles")
    # gradient of basis i: ((y_j - y_k), (x_k - x_j)) / (2A), indices cyclic
    bx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    by = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    bx /= (2.0 * area)[:, None]
    by /= (2.0 * area)[:, None]
    return area, bx, by


def _scatter(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    mat = sp.coo_matrix((local.ravel(), (rows, cols)),
                        shape=(mesh.num_nodes, mesh.num_nodes))
    return mat.tocsr()


def stiffness_matrix(mesh: Mesh, aniso: Tuple[float, float] = (1.0, 1.0)) -> sp.csr_matrix:
    d1, d2 = aniso
    if d1 <= 0 or d2 <= 0:
        raise PreconditionError("diffusion pair must be positive")
    area, bx, by = _p1_geometry(mesh)
    local = (d1 * bx[:, :, None] * bx[:, None, :]
             + d2 * by[:, :, None] * by[:, None, :]) * area[:, None, None]
    return _scatter(mesh, local)


def mass_matrix(mesh: Mesh) -> sp.csr_matrix:
    area, _, _ = _p1_geometry(mesh)
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    local = area[:, None, None] * base[None, :, :]
    return _scatter(mesh, local)


def _evaluate(f: Callable, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    vals = f(x, y)
    out = np.asarray(vals, dtype=float)
    if out.shape != x.shape:
        out = np.broadcast_to(out, x.shape).astype(float)
    return out


def load_vector(mesh: Mesh, f: Callable) -> np.ndarray:
    """Right-hand side with the 3-point edge-midpoint rule (exact to P2)."""
    tri = mesh.triangles
    p = mesh.nodes
    area = signed_areas(mesh.nodes, tri)
    mids = [(p[tri[:, (i + 1) % 3]] + p[tri[:, (i + 2) % 3]]) / 2.0 for i in range(3)]
    fvals = [_evaluate(f, m[:, 0], m[:, 1]) for m in mids]
    rhs = np.zeros(mesh.num_nodes)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        np.add.at(rhs, tri[:, i], area / 6.0 * (fvals[j] + fvals[k]))
    return rhs


def assemble(mesh: Mesh, eps: float, f: Callable,
             aniso: Optional[Tuple[float, float]] = None) -> SparseSystem:
    """Discrete anisotropic problem; default diffusion pair (1, 1/eps^2)."""
    if aniso is None:
        aniso = (1.0, 1.0 / eps ** 2)
    matrix = stiffness_matrix(mesh, aniso) + mass_matrix(mesh)
    rhs = load_vector(mesh, f)
    return SparseSystem(matrix, rhs, mesh.num_nodes, mesh)


def pcg(matrix: sp.csr_matrix, rhs: np.ndarray, tol: float = 1e-10,
        max_iter: int = 20000, x0: Optional[np.ndarray] = None):
    """Jacobi-preconditioned conjugate gradients.

    Stops when the preconditioned residual norm drops below tol times its
    initial value; raises ConvergenceError past max_iter.
    """
    diag = matrix.diagonal()
    if np.any(diag <= 0):
        raise PreconditionError("system diagonal must be positive for Jacobi scaling")
    inv_diag = 1.0 / diag
    x = np.zeros_like(rhs) if x0 is None else x0.copy()
    r = rhs - matrix @ x
    z = inv_diag * r
    rz = float(r @ z)
    norm0 = np.sqrt(abs(rz))
    if norm0 == 0.0:
        return x, 0
    p = z.copy()
    for it in range(1, max_iter + 1):
        ap = matrix @ p
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        z = inv_diag * r
        rz_new = float(r @ z)
        if np.sqrt(abs(rz_new)) <= tol * norm0:
            return x, it
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"pcg did not reach tol={tol} in {max_iter} iterations",
        residual=float(np.sqrt(abs(rz)) / norm0), iterations=max_iter)


def solve(system: SparseSystem, tol: float = 1e-10, max_iter: int = 20000) -> Field:
    values, iters = pcg(system.matrix, system.rhs, tol, max_iter)
    return Field(system.mesh, values, iterations=iters)


def norms(u: Field, eps: float) -> Tuple[float, float, float, float]:
    """(L2 norm, L2 of d/dx1, L2 of d/dx2, (1/eps) L2 of d/dx2), all exact."""
    area, bx, by = _p1_geometry(u.mesh)
    vals = u.values[u.mesh.triangles]
    m_local = (np.ones((3, 3)) + np.eye(3)) / 12.0
    l2sq = float(np.einsum("e,ei,ij,ej->", area, vals, m_local, vals))
    g1 = np.einsum("ei,ei->e", bx, vals)
    g2 = np.einsum("ei,ei->e", by, vals)
    dx1 = float(np.sqrt(np.maximum(np.dot(area, g1 ** 2), 0.0)))
    dx2 = float(np.sqrt(np.maximum(np.dot(area, g2 ** 2), 0.0)))
    return float(np.sqrt(max(l2sq, 0.0))), dx1, dx2, dx2 / eps


def l2_distance_to_1d(u: Field, u0: Callable) -> float:
    """L2 distance between the field and a function of x1 only.

    Edge-midpoint quadrature per triangle; P1 values at edge midpoints are
    endpoint averages, so the rule is exact for the squared difference up
    to the interpolation of u0.
    """
    tri = u.mesh.triangles
    p = u.mesh.nodes
    area = signed_areas(p, tri)
    vals = u.values[tri]
    total = 0.0
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        mid = (p[tri[:, j]] + p[tri[:, k]]) / 2.0
        u_mid = 0.5 * (vals[:, j] + vals[:, k])
        ref = np.asarray(u0(np.clip(mid[:, 0], 0.0, 1.0)), dtype=float)
        total += float(np.dot(area / 3.0, (u_mid - ref) ** 2))
    return float(np.sqrt(max(total, 0.0)))


def map_to_thin(mesh: Mesh, eps: float) -> Mesh:
    """Image of an unscaled-domain mesh under (x, y) -> (x, eps*y)."""
    nodes = mesh.nodes.copy()
    nodes[:, 1] *= eps
    return Mesh(nodes, mesh.triangles.copy(), list(mesh.boundary_edges))


def solve_thin_unscaled(spec: ProfileSpec, eps: float, h_source: Callable,
                        cells_per_period: int = 8, ny: int = 8,
                        tol: float = 1e-10, max_iter: int = 20000,
                        triangle_cap: int = 200000) -> Field:
    """Isotropic solve on the thin domain (the pre-rescaling formulation).

    The mesh is the vertical eps-scaling of the standard mesh, so nodal
    values can be compared one-to-one with the rescaled anisotropic solve.
    """
    base = mesh_type1(spec, eps, cells_per_period, ny, triangle_cap)
    thin = map_to_thin(base, eps)
    system = assemble(thin, eps, h_source, aniso=(1.0, 1.0))
    return solve(system, tol, max_iter)


def _dirichlet_split(matrix: sp.csr_matrix, fixed: np.ndarray, ndof: int):
    mask = np.zeros(ndof, dtype=bool)
    mask[fixed] = True
    free = np.nonzero(~mask)[0]
    a_ff = matrix[free][:, free].tocsr()
    a_fc = matrix[free][:, fixed].tocsr()
    return free, a_ff, a_fc


def solve_dirichlet(mesh: Mesh, aniso: Tuple[float, float],
                    boundary_value: Callable, tags: Tuple[str, ...] = ("gamma0",),
                    f: Optional[Callable] = None, tol: float = 1e-12,
                    max_iter: int = 50000) -> Field:
    """Stiffness-only solve with Dirichlet data on tagged edges.

    Discretizes the boundary-layer cell problem: zero right-hand side by
    default, prescribed trace on the tagged edge set, natural conditions
    elsewhere.
    """
    fixed = mesh.boundary_nodes(tags)
    if len(fixed) == 0:
        raise PreconditionError(f"no boundary nodes tagged {tags}")
    k = stiffness_matrix(mesh, aniso)
    rhs = load_vector(mesh, f) if f is not None else np.zeros(mesh.num_nodes)
    g = np.asarray(boundary_value(mesh.nodes[fixed, 0], mesh.nodes[fixed, 1]),
                   dtype=float)
    g = np.broadcast_to(g, (len(fixed),)).astype(float)
    free, k_ff, k_fc = _dirichlet_split(k, fixed, mesh.num_nodes)
    values = np.zeros(mesh.num_nodes)
    values[fixed] = g
    reduced = rhs[free] - k_fc @ g
    sol, iters = pcg(k_ff, reduced, tol, max_iter)
    values[free] = sol
    return Field(mesh, values, iterations=iters)


def eigen_first(mesh: Mesh, aniso: Tuple[float, float] = (1.0, 1.0),
                tol: float = 1e-8, max_iter: int = 500) -> Tuple[float, Field]:
    """Smallest eigenvalue of the stiffness form with Dirichlet gamma0 nodes.

    Shift-free inverse power iteration on the constrained generalized
    problem K v = lambda M v.  An empty gamma0 set (or a mesh component
    untouched by it) means the constrained form has a zero mode, and the
    eigenvalue 0 is returned with the corresponding indicator field.
    """
    fixed = mesh.boundary_nodes(("gamma0",))
    if len(fixed) == 0:
        return 0.0, Field(mesh, np.ones(mesh.num_nodes))

    adj_rows = np.concatenate([mesh.triangles[:, i] for i in (0, 1, 2)])
    adj_cols = np.concatenate([mesh.triangles[:, i] for i in (1, 2, 0)])
    graph = sp.coo_matrix((np.ones(len(adj_rows)), (adj_rows, adj_cols)),
                          shape=(mesh.num_nodes, mesh.num_nodes))
    n_comp, labels = connected_components(graph, directed=False)
    dirichlet_components = set(labels[fixed])
    loose = [c for c in range(n_comp) if c not in dirichlet_components]
    if loose:
        indicator = np.where(labels == loose[0], 1.0, 0.0)
        return 0.0, Field(mesh, indicator)

    k = stiffness_matrix(mesh, aniso)
    m = mass_matrix(mesh)
    free, k_ff, _ = _dirichlet_split(k, fixed, mesh.num_nodes)
    m_ff = m[free][:, free].tocsr()

    v = np.ones(len(free))
    v /= np.sqrt(float(v @ (m_ff @ v)))
    lam_old = None
    for _ in range(max_iter):
        w, _ = pcg(k_ff, m_ff @ v, tol=1e-12, max_iter=100000)
        v = w / np.sqrt(float(w @ (m_ff @ w)))
        lam = float(v @ (k_ff @ v)) / float(v @ (m_ff @ v))
        if lam_old is not None and abs(lam - lam_old) <= tol * abs(lam):
            values = np.zeros(mesh.num_nodes)
            values[free] = v if v.sum() >= 0 else -v
            return lam, Field(mesh, values)
        lam_old = lam
    raise ConvergenceError("inverse power iteration stagnated",
                           residual=None, iterations=max_iter)


def export_field_csv(field: Field, path):
    lines = ["node_id,x1,x2,value"]
    for i, ((x, y), v) in enumerate(zip(field.mesh.nodes, field.values)):
        lines.append(f"{i},{x!r},{y!r},{v!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def export_system_triplets(system: SparseSystem, path):
    coo = system.matrix.tocoo()
    lines = [f"% {system.ndof} {system.ndof} {coo.nnz}"]
    for i, j, v in zip(coo.row, coo.col, coo.data):
        lines.append(f"{i} {j} {v!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
