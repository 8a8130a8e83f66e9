"""Cone projection, facet projection and the Uzawa iteration for the slip condition."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .assembly import (ProblemData, assemble_lhs, assemble_load, assemble_rhs,
                       facet_mean_stress, facet_mean_trace)
from .linalg import Factorization, solve_direct
from .mesh import Triangulation
from .spaces import MeshMismatchError, MultiplierField, PressureField, SystemSpaces, VelocityField

logger = logging.getLogger(__name__)

# clipped tangential parts are pulled inside the cone by this many ulps
_CLIP_ULPS = 8


@dataclass
class UzawaConfig:
    rho: float = 0.4
    tol: float = 1e-5
    max_iterations: int = 20000
    alpha2: float | None = None  # cross-checked against ProblemData.alpha2 when given

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be > 0")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class UzawaResult:
    u: VelocityField
    p: PressureField
    lam: MultiplierField
    mean_multiplier: float
    iterations: int
    relative_change: float
    converged: bool
    history: list = field(default_factory=list)


def project_cone(x, n, kappa):
    """Closest point of ``{y : y.n = x.n, |y_t| <= kappa}`` to ``x``.

    Vectorised over leading dimensions of ``x`` and ``n``.  Points already in
    the set are returned unchanged; clipped points are pulled in by a few ulps
    so that recomputing ``|y_t|`` from ``y`` never exceeds ``kappa``.
    """
    x = np.asarray(x, dtype=float)
    n = np.asarray(n, dtype=float)
    xn = np.sum(x * n, axis=-1, keepdims=True)
    xt = x - xn * n
    norm_t = np.linalg.norm(xt, axis=-1, keepdims=True)
    kappa = np.asarray(kappa, dtype=float)
    if kappa.ndim and kappa.shape == norm_t.shape[:-1]:
        kappa = kappa[..., None]
    outside = norm_t > kappa
    # recomputing y_t = y - (y.n) n carries an error of a few ulps of |y|
    target = np.maximum(kappa - _CLIP_ULPS * np.finfo(float).eps * (np.abs(xn) + kappa), 0.0)
    scale = np.divide(target, norm_t, out=np.ones_like(norm_t), where=outside)
    return np.where(outside, xn * n + scale * xt, x)


def project_Mh(u: VelocityField, p: PressureField, lam: MultiplierField, alpha2: float, mu: float = 1.0) -> MultiplierField:
    """Facet means of ``u + alpha2 h_E (lam - sigma(u, p) n)``."""
    mesh = lam.mesh
    if u.mesh is not mesh or p.mesh is not mesh:
        raise MeshMismatchError("u, p and lam must share a mesh")
    s = facet_mean_stress(mesh, u, p, mu)
    h = mesh.facet_lengths[:, None]
    return MultiplierField(mesh, facet_mean_trace(mesh, u) + alpha2 * h * (lam.values - s))


def boundary_l2(mesh: Triangulation, values: np.ndarray) -> float:
    """L2(boundary) norm of a facet-constant field."""
    return float(np.sqrt(np.sum(mesh.facet_lengths * np.sum(values ** 2, axis=1))))


def uzawa_step(lam, u, p, kappa, data: ProblemData, rho: float) -> np.ndarray:
    mesh = lam.mesh
    g = project_Mh(u, p, lam, data.alpha2, data.mu).values
    return project_cone(lam.values - rho * g, mesh.facet_normals, kappa)


def fixed_point_residual(result: UzawaResult, data: ProblemData, rho: float) -> float:
    """Relative residual of ``lam = P(lam - rho Pi(u + alpha2 h (lam - sigma n)))``."""
    mesh = result.lam.mesh
    kappa = data.kappa_on(mesh)
    new = uzawa_step(result.lam, result.u, result.p, kappa, data, rho)
    r = boundary_l2(mesh, result.lam.values - new)
    scale = boundary_l2(mesh, result.lam.values)
    return r / scale if scale > 0 else r


def uzawa_solve(mesh: Triangulation, spaces: SystemSpaces | None, data: ProblemData,
                config: UzawaConfig | None = None, initial=None) -> UzawaResult:
    """Projected fixed-point (Uzawa) iteration for the discrete slip problem.

    ``initial`` is an optional ``(u, p, lam)`` triple on ``mesh``.  By default
    the multiplier starts at zero and ``(u, p)`` solve the subproblem for it;
    starting from ``u = 0`` as well would make the first update vanish and stop
    the iteration at once.  The matrix is factorised once.
    """
    config = config or UzawaConfig()
    if config.alpha2 is not None and config.alpha2 != data.alpha2:
        raise ValueError("UzawaConfig.alpha2 differs from ProblemData.alpha2")
    spaces = spaces or SystemSpaces.from_mesh(mesh)
    system = assemble_lhs(mesh, spaces, data)
    lu = Factorization(system.matrix, border=1)
    load = assemble_load(mesh, data)
    kappa = data.kappa_on(mesh)
    normals = mesh.facet_normals

    if initial is None:
        lam = MultiplierField.zeros(mesh)
        system.rhs = assemble_rhs(mesh, spaces, data, lam, load=load)
        u, p, _ = solve_direct(system, lu)
    else:
        u, p, lam = initial
        if not (u.mesh is mesh and p.mesh is mesh and lam.mesh is mesh):
            raise MeshMismatchError("initial guess must live on the given mesh")

    c = 0.0
    history = []
    change = np.inf
    converged = False
    it = 0
    for it in range(1, int(config.max_iterations) + 1):
        g = project_Mh(u, p, lam, data.alpha2, data.mu).values
        new = project_cone(lam.values - config.rho * g, normals, kappa)
        diff = boundary_l2(mesh, new - lam.values)
        size = boundary_l2(mesh, new)
        change = diff / size if size > 0 else diff
        lam = MultiplierField(mesh, new)

        system.rhs = assemble_rhs(mesh, spaces, data, lam, load=load)
        u, p, c = solve_direct(system, lu)
        history.append(change)
        if change < config.tol:
            converged = True
            break

    logger.info("uzawa: %d iterations, relative change %.3e, converged=%s", it, change, converged)
    return UzawaResult(u, p, lam, c, it, change, converged, history)
