"""Assembly of the stabilised forms for the P1-P1-P0 discretisation.

Every cell carries nine local basis functions ordered
``[ux0, ux1, ux2, uy0, uy1, uy2, p0, p1, p2]``.  For each of them we tabulate
the velocity value, the symmetric gradient, the pressure value and the
pressure gradient; all blocks are then contractions of these tables.

For P1 velocities the operator ``u - div(2 mu D(u))`` reduces to ``u`` on each
cell, so the interior residual of a basis function is ``v + grad(q)`` (trial
side) or ``v - grad(q)`` (test side).

The multiplier enters the linear subproblem on the right-hand side only:
with the multiplier frozen at ``lam``, the system reads

    Af(u, v) + (q, div u) - (p, div v) - a1 S1(u, p; v, q)
        - a2 sum_E h_E (sigma(u,p) n, sigma(v,q) n)_E
      = (F, v) - a1 sum_T h_T^2 (F, v - grad q)_T
        + <lam, v> - a2 sum_E h_E (lam, sigma(v,q) n)_E

for all ``(v, q)``, plus the pressure zero-mean coupling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .mesh import Triangulation
from .quadrature import interval_rule, triangle_rule
from .spaces import MeshMismatchError, MultiplierField, PressureField, SystemSpaces, VelocityField

# Weight exponent of h_T in the load-side residual term.  It must match the
# h_T^2 of the interior stabilisation for the method to be consistent.
LOAD_STAB_H_POWER = 2

ALPHA_MAX = 0.1


def zero_force(x, y):
    return np.zeros_like(x), np.zeros_like(x)


def rotating_force(x, y):
    """F = (-y, x)."""
    return -y, x


@dataclass
class ProblemData:
    """Physical and stabilisation parameters.

    ``kappa`` is a positive scalar, a per-facet array, or a callable
    ``kappa(midpoints, tags) -> array``.  Zero stabilisation is only accepted
    with ``allow_unstabilised=True`` (diagnostics).
    """

    mu: float = 1.0
    kappa: object = 0.3
    force: Callable = rotating_force
    alpha1: float = 1e-2
    alpha2: float = 1e-2
    allow_unstabilised: bool = False

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be > 0")
        for name in ("alpha1", "alpha2"):
            a = getattr(self, name)
            lower_ok = a >= 0 if self.allow_unstabilised else a > 0
            if not lower_ok:
                raise ValueError("{} must be > 0".format(name))
            if a > ALPHA_MAX:
                raise ValueError("{} must be <= {}".format(name, ALPHA_MAX))
        if np.isscalar(self.kappa) and not self.kappa > 0:
            raise ValueError("kappa must be > 0")

    def kappa_on(self, mesh: Triangulation) -> np.ndarray:
        k = self.kappa
        if callable(k):
            k = k(mesh.facet_midpoints, mesh.facet_tags)
        k = np.broadcast_to(np.asarray(k, dtype=float), (mesh.n_facets,)).copy()
        if not np.all(k > 0):
            raise ValueError("kappa must be > 0 on every facet")
        return k

    def force_at(self, points: np.ndarray) -> np.ndarray:
        fx, fy = self.force(points[..., 0], points[..., 1])
        shape = points.shape[:-1]
        return np.stack([np.broadcast_to(fx, shape), np.broadcast_to(fy, shape)], axis=-1)


class ElementTables:
    """Per-cell and per-facet basis tabulations shared by all assembly routines."""

    def __init__(self, mesh: Triangulation, tri_degree: int = 4, edge_degree: int = 3):
        self.mesh = mesh
        self.spaces = SystemSpaces.from_mesh(mesh)
        x = mesh.vertices[mesh.cells]  # (nc, 3, 2)
        J = np.stack([x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]], axis=2)  # columns
        self.area = 0.5 * np.abs(np.linalg.det(J))
        Jinv = np.linalg.inv(J)
        g12 = Jinv  # rows are gradients of barycentrics 1, 2
        grad_bary = np.concatenate([-g12.sum(axis=1, keepdims=True), g12], axis=1)  # (nc, 3, 2)
        self.grad_bary = grad_bary
        self.h = mesh.cell_diameters

        nc = mesh.n_cells
        # symmetric velocity gradients and divergences
        G = np.zeros((nc, 9, 2, 2))
        G[:, 0:3, 0, :] = grad_bary
        G[:, 3:6, 1, :] = grad_bary
        self.sym_grad = 0.5 * (G + G.transpose(0, 1, 3, 2))
        self.div = np.trace(G, axis1=2, axis2=3)
        self.grad_p = np.zeros((nc, 9, 2))
        self.grad_p[:, 6:9, :] = grad_bary

        self.tri = triangle_rule(tri_degree)
        L = self.tri.points  # (nq, 3)
        self.vel_ref = _velocity_values(L)  # (nq, 9, 2)
        self.p_ref = _pressure_values(L)  # (nq, 9)
        # physical quadrature points and weights (nc, nq)
        self.qpoints = np.einsum("qk,ckd->cqd", L, x)
        self.qweights = 2.0 * self.area[:, None] * self.tri.weights[None, :]

        self._facet_tables(edge_degree)

    def _facet_tables(self, edge_degree):
        mesh = self.mesh
        self.edge = interval_rule(edge_degree)
        s = self.edge.points
        owner = mesh.cells[mesh.facet_cells]  # (nb, 3)
        ia = np.argmax(owner == mesh.facets[:, :1], axis=1)
        ib = np.argmax(owner == mesh.facets[:, 1:], axis=1)
        nb = mesh.n_facets
        Lf = np.zeros((nb, len(s), 3))
        rows = np.arange(nb)
        Lf[rows, :, ia] = 1.0 - s[None, :]
        Lf[rows, :, ib] = s[None, :]
        self.facet_bary = Lf
        self.facet_vel = _velocity_values(Lf)
        self.facet_p = Lf @ _P_SELECT
        self.facet_dofs = self.spaces.cell_dofs(owner)
        self.facet_qweights = mesh.facet_lengths[:, None] * self.edge.weights[None, :]
        xa = mesh.vertices[mesh.facets[:, 0]]
        xb = mesh.vertices[mesh.facets[:, 1]]
        self.facet_qpoints = xa[:, None, :] * (1.0 - s)[None, :, None] + xb[:, None, :] * s[None, :, None]

    def facet_stress_basis(self, mu: float) -> np.ndarray:
        """sigma(phi_i) n at facet quadrature points for all nine local functions, (nb, nq, 9, 2)."""
        mesh = self.mesh
        n = mesh.facet_normals
        Dn = np.einsum("fkab,fb->fka", self.sym_grad[mesh.facet_cells], n)  # (nb, 9, 2)
        return 2.0 * mu * Dn[:, None, :, :] - self.facet_p[..., None] * n[:, None, None, :]

    @property
    def cell_dofs(self):
        return self.spaces.cell_dofs(self.mesh.cells)


_P_SELECT = np.zeros((3, 9))
_P_SELECT[[0, 1, 2], [6, 7, 8]] = 1.0


def _velocity_values(L):
    V = np.zeros(L.shape[:-1] + (9, 2))
    V[..., 0:3, 0] = L
    V[..., 3:6, 1] = L
    return V


def _pressure_values(L):
    return L @ _P_SELECT


_TABLE_CACHE: dict = {}


def tables_for(mesh: Triangulation) -> ElementTables:
    key = id(mesh)
    hit = _TABLE_CACHE.get(key)
    if hit is None or hit.mesh is not mesh:
        if len(_TABLE_CACHE) > 16:
            _TABLE_CACHE.clear()
        hit = ElementTables(mesh)
        _TABLE_CACHE[key] = hit
    return hit


def _scatter_matrix(local, dofs, size):
    n = dofs.shape[1]
    rows = np.repeat(dofs, n, axis=1).ravel()
    cols = np.tile(dofs, (1, n)).ravel()
    A = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(size, size))
    return A.tocsr()


def _scatter_vector(local, dofs, size):
    return np.bincount(dofs.ravel(), weights=local.ravel(), minlength=size)


def local_blocks(tab: ElementTables, mu: float):
    """Local matrices of the unstabilised form and the two stabilisation terms.

    Returns ``(galerkin, s1, s2)``; ``galerkin`` and ``s1`` are (nc, 9, 9),
    ``s2`` is (nb, 9, 9), indexed ``[test, trial]``.
    """
    w = tab.qweights  # (nc, nq)
    V = tab.vel_ref
    mass = np.einsum("cq,qia,qja->cij", w, V, V)
    visc = 2.0 * mu * tab.area[:, None, None] * np.einsum("ciab,cjab->cij", tab.sym_grad, tab.sym_grad)
    pint = np.einsum("cq,qi->ci", w, tab.p_ref)  # integrals of pressure basis
    div_u = np.einsum("ci,cj->cij", pint, tab.div)  # (q_i, div u_j)
    galerkin = mass + visc + div_u - div_u.transpose(0, 2, 1)

    # interior residual pairing: (v_i - grad q_i) . (u_j + grad p_j)
    test = V[None] - tab.grad_p[:, None]  # (nc, nq, 9, 2)
    trial = V[None] + tab.grad_p[:, None]
    s1 = tab.h[:, None, None] ** 2 * np.einsum("cq,cqia,cqja->cij", w, test, trial)

    S = tab.facet_stress_basis(mu)
    s2 = tab.mesh.facet_lengths[:, None, None] * np.einsum("fq,fqia,fqja->fij", tab.facet_qweights, S, S)
    return galerkin, s1, s2


@dataclass
class SaddleSystem:
    """The multiplier-frozen linear subproblem ``matrix @ x = rhs``."""

    matrix: sp.csr_matrix
    rhs: np.ndarray | None
    spaces: SystemSpaces
    mesh: Triangulation
    params: dict


def mean_vector(tab: ElementTables) -> np.ndarray:
    """Integrals of the pressure basis functions, i.e. the coefficients of (p, 1)."""
    pint = np.einsum("cq,qi->ci", tab.qweights, tab.p_ref)
    return _scatter_vector(pint, tab.cell_dofs, tab.spaces.size)


def assemble_lhs(mesh: Triangulation, spaces: SystemSpaces, data: ProblemData) -> SaddleSystem:
    """Matrix of the stabilised form with the multiplier test slot set to zero."""
    if spaces != SystemSpaces.from_mesh(mesh):
        raise MeshMismatchError("spaces do not belong to this mesh")
    tab = tables_for(mesh)
    galerkin, s1, s2 = local_blocks(tab, data.mu)
    n = spaces.size
    A = _scatter_matrix(galerkin - data.alpha1 * s1, tab.cell_dofs, n)
    A = A - data.alpha2 * _scatter_matrix(s2, tab.facet_dofs, n)
    m = mean_vector(tab)
    k = spaces.mean_constraint_index
    nz = np.flatnonzero(m)
    coupling = sp.coo_matrix(
        (np.concatenate([m[nz], m[nz]]),
         (np.concatenate([nz, np.full(len(nz), k)]), np.concatenate([np.full(len(nz), k), nz]))),
        shape=(n, n),
    )
    A = (A + coupling).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return SaddleSystem(A, None, spaces, mesh,
                        dict(mu=data.mu, alpha1=data.alpha1, alpha2=data.alpha2))


def assemble_load(mesh: Triangulation, data: ProblemData) -> np.ndarray:
    """(F, v) - alpha1 sum_T h_T^2 (F, v - grad q)_T."""
    tab = tables_for(mesh)
    F = data.force_at(tab.qpoints)  # (nc, nq, 2)
    test = tab.vel_ref[None] - data.alpha1 * tab.h[:, None, None, None] ** LOAD_STAB_H_POWER * (
        tab.vel_ref[None] - tab.grad_p[:, None])
    local = np.einsum("cq,cqa,cqia->ci", tab.qweights, F, test)
    return _scatter_vector(local, tab.cell_dofs, tab.spaces.size)


def assemble_multiplier_rhs(mesh: Triangulation, data: ProblemData, lam: MultiplierField) -> np.ndarray:
    """<lam, v> - alpha2 sum_E h_E (lam, sigma(v, q) n)_E."""
    if lam.mesh is not mesh:
        raise MeshMismatchError("multiplier field is not defined on this mesh")
    tab = tables_for(mesh)
    S = tab.facet_stress_basis(data.mu)
    test = tab.facet_vel - data.alpha2 * mesh.facet_lengths[:, None, None, None] * S
    local = np.einsum("fq,fa,fqia->fi", tab.facet_qweights, lam.values, test)
    return _scatter_vector(local, tab.facet_dofs, tab.spaces.size)


def assemble_rhs(mesh: Triangulation, spaces: SystemSpaces, data: ProblemData,
                 lam: MultiplierField, load: np.ndarray | None = None) -> np.ndarray:
    """Right-hand side of the multiplier-frozen subproblem.

    ``load`` may carry a precomputed :func:`assemble_load` vector.
    """
    if lam.values.shape[0] != mesh.n_facets:
        raise MeshMismatchError("multiplier has {} facets, mesh has {}".format(
            lam.values.shape[0], mesh.n_facets))
    if load is None:
        load = assemble_load(mesh, data)
    b = load + assemble_multiplier_rhs(mesh, data, lam)
    b[spaces.mean_constraint_index] = 0.0
    return b


def assemble_system(mesh, data, lam=None) -> SaddleSystem:
    spaces = SystemSpaces.from_mesh(mesh)
    system = assemble_lhs(mesh, spaces, data)
    if lam is None:
        lam = MultiplierField.zeros(mesh)
    system.rhs = assemble_rhs(mesh, spaces, data, lam)
    return system


# -- field-level evaluation --------------------------------------------------

def _cell_fields(tab, u: VelocityField, p: PressureField):
    c = tab.mesh.cells
    uc = u.values[c]  # (nc, 3, 2)
    pc = p.values[c]  # (nc, 3)
    L = tab.tri.points
    uq = np.einsum("qk,cka->cqa", L, uc)
    grad_u = np.einsum("cka,ckb->cab", uc, tab.grad_bary)  # du_a/dx_b
    grad_p = np.einsum("ck,ckb->cb", pc, tab.grad_bary)
    return uq, grad_u, grad_p


def facet_stress(mesh: Triangulation, u: VelocityField, p: PressureField, mu: float) -> np.ndarray:
    """sigma(u, p) n at facet quadrature points, shape (nb, nq, 2)."""
    tab = tables_for(mesh)
    fc = mesh.facet_cells
    grad_u = np.einsum("cka,ckb->cab", u.values[mesh.cells[fc]], tab.grad_bary[fc])
    D = 0.5 * (grad_u + grad_u.transpose(0, 2, 1))
    n = mesh.facet_normals
    s = tab.edge.points
    pa = p.values[mesh.facets[:, 0]]
    pb = p.values[mesh.facets[:, 1]]
    pq = pa[:, None] * (1.0 - s) + pb[:, None] * s
    return 2.0 * mu * np.einsum("fab,fb->fa", D, n)[:, None, :] - pq[..., None] * n[:, None, :]


def facet_mean_stress(mesh, u, p, mu) -> np.ndarray:
    """Facet means of sigma(u, p) n, shape (nb, 2)."""
    tab = tables_for(mesh)
    return np.einsum("q,fqa->fa", tab.edge.weights, facet_stress(mesh, u, p, mu))


def stress_normal_on_facet(u: VelocityField, p: PressureField, facet: int, mu: float = 1.0) -> np.ndarray:
    """Mean of sigma(u, p) n over boundary facet ``facet``."""
    if u.mesh is not p.mesh:
        raise MeshMismatchError("u and p live on different meshes")
    return facet_mean_stress(u.mesh, u, p, mu)[facet]


def facet_mean_trace(mesh, u: VelocityField) -> np.ndarray:
    """Facet means of the velocity trace, shape (nb, 2)."""
    return u.values[mesh.facets].mean(axis=1)


def evaluate_Bh(mesh: Triangulation, data: ProblemData, trial, test) -> float:
    """Value of the full stabilised form for ``trial = (w, r, chi)``, ``test = (v, q, eta)``.

    Evaluated term by term from the fields, independently of the assembled matrix.
    """
    w, r, chi = trial
    v, q, eta = test
    for f in (w, r, chi, v, q, eta):
        if f.mesh is not mesh:
            raise MeshMismatchError("all fields must live on the given mesh")
    tab = tables_for(mesh)
    mu = data.mu
    wq, gw, gr = _cell_fields(tab, w, r)
    vq, gv, gq = _cell_fields(tab, v, q)
    rq = tab.tri.points @ r.values[mesh.cells].T  # (nq, nc)
    qq = tab.tri.points @ q.values[mesh.cells].T
    W = tab.qweights
    Dw = 0.5 * (gw + gw.transpose(0, 2, 1))
    Dv = 0.5 * (gv + gv.transpose(0, 2, 1))
    div_w = np.trace(gw, axis1=1, axis2=2)
    div_v = np.trace(gv, axis1=1, axis2=2)

    af = np.sum(W * np.einsum("cqa,cqa->cq", wq, vq)) + np.sum(
        2.0 * mu * tab.area * np.einsum("cab,cab->c", Dw, Dv))
    coupling = np.sum(W * qq.T * div_w[:, None]) - np.sum(W * rq.T * div_v[:, None])

    Wf = tab.facet_qweights
    s = tab.edge.points
    wf = w.values[mesh.facets[:, 0]][:, None] * (1 - s)[None, :, None] + w.values[mesh.facets[:, 1]][:, None] * s[None, :, None]
    vf = v.values[mesh.facets[:, 0]][:, None] * (1 - s)[None, :, None] + v.values[mesh.facets[:, 1]][:, None] * s[None, :, None]
    duality = np.sum(Wf * np.einsum("fa,fqa->fq", chi.values, vf)) + np.sum(
        Wf * np.einsum("fa,fqa->fq", eta.values, wf))

    s1 = np.sum(tab.h[:, None] ** 2 * W * np.einsum("cqa,cqa->cq", wq + gr[:, None], vq - gq[:, None]))

    sw = facet_stress(mesh, w, r, mu)
    sv = facet_stress(mesh, v, q, mu)
    s2 = np.sum(mesh.facet_lengths[:, None] * Wf * np.einsum(
        "fqa,fqa->fq", chi.values[:, None, :] - sw, eta.values[:, None, :] - sv))

    return float(af + coupling - duality - data.alpha1 * s1 - data.alpha2 * s2)


def evaluate_Lh(mesh: Triangulation, data: ProblemData, v: VelocityField, q: PressureField) -> float:
    """(F, v) - alpha1 sum_T h_T^2 (F, v - grad q)_T from the fields."""
    tab = tables_for(mesh)
    vq, _, gq = _cell_fields(tab, v, q)
    F = data.force_at(tab.qpoints)
    W = tab.qweights
    plain = np.sum(W * np.einsum("cqa,cqa->cq", F, vq))
    stab = np.sum(tab.h[:, None] ** LOAD_STAB_H_POWER * W * np.einsum("cqa,cqa->cq", F, vq - gq[:, None]))
    return float(plain - data.alpha1 * stab)
