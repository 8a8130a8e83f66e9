"""Norms, successive-mesh errors and the two slip-flow experiments."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .assembly import ProblemData, assemble_system, facet_mean_trace, tables_for
from .friction import UzawaConfig, UzawaResult, uzawa_solve
from .linalg import solve_direct
from .mesh import Triangulation, generate_halfdisk, generate_square, refine_uniform
from .spaces import (MeshMismatchError, MultiplierField, PressureField, VelocityField,
                     prolong_multiplier, prolong_pressure, prolong_velocity)

logger = logging.getLogger(__name__)


def _nodal(f):
    v = f.values
    return v if v.ndim == 2 else v[:, None]


def norm_l2(f) -> float:
    """L2(domain) norm of a P1 field."""
    tab = tables_for(f.mesh)
    vq = np.einsum("qk,cka->cqa", tab.tri.points, _nodal(f)[f.mesh.cells])
    return float(np.sqrt(np.sum(tab.qweights[..., None] * vq ** 2)))


def seminorm_h1(f) -> float:
    tab = tables_for(f.mesh)
    g = np.einsum("cka,ckb->cab", _nodal(f)[f.mesh.cells], tab.grad_bary)
    return float(np.sqrt(np.sum(tab.area[:, None, None] * g ** 2)))


def norm_h1(f) -> float:
    """Full H1 norm ``(|f|_0^2 + |grad f|_0^2)^(1/2)`` of a P1 field."""
    return math.hypot(norm_l2(f), seminorm_h1(f))


def norm_multiplier(chi: MultiplierField) -> float:
    """Mesh-dependent multiplier norm ``(sum_E h_E ||chi||_{0,E}^2)^(1/2)``.

    For facet-constant fields this is ``(sum_E h_E^2 |chi_E|^2)^(1/2)``.
    """
    h = chi.mesh.facet_lengths
    return float(np.sqrt(np.sum(h ** 2 * np.sum(chi.values ** 2, axis=1))))


def _difference(a, b):
    return type(a)(a.mesh, a.values - b.values)


def _relative(diff, ref):
    return diff / ref if ref > 0 else diff


def successive_error(coarse, fine):
    """Relative differences between solutions on consecutive nested meshes.

    ``coarse`` and ``fine`` are ``(u, p, lam)`` triples (or Uzawa results).
    The coarse solution is prolonged and the differences are normalised by
    the fine solution's norms: H1 for velocity, L2 for pressure, the
    mesh-dependent norm for the multiplier.
    """
    uc, pc, lc = _triple(coarse)
    uf, pf, lf = _triple(fine)
    if uf.mesh.parent_sizes != (uc.mesh.n_vertices, uc.mesh.n_cells, uc.mesh.n_facets):
        raise MeshMismatchError("fine solution does not live on a refinement of the coarse mesh")
    fm = uf.mesh
    du = _difference(prolong_velocity(uc, fm), uf)
    dp = _difference(prolong_pressure(pc, fm), pf)
    dl = _difference(prolong_multiplier(lc, fm), lf)
    return (_relative(norm_h1(du), norm_h1(uf)),
            _relative(norm_l2(dp), norm_l2(pf)),
            _relative(norm_multiplier(dl), norm_multiplier(lf)))


def _triple(sol):
    if isinstance(sol, UzawaResult):
        return sol.u, sol.p, sol.lam
    return sol


def pressure_mean(p: PressureField) -> float:
    tab = tables_for(p.mesh)
    pq = tab.tri.points @ p.values[p.mesh.cells].T
    return float(np.sum(tab.qweights * pq.T))


@dataclass
class ConvergenceReport:
    """Per-level diagnostics; errors on row ``k`` compare level ``k-1`` with ``k``."""

    rows: list = field(default_factory=list)
    error_columns: tuple = ("e_u", "e_p", "e_lambda")
    solutions: list = field(default_factory=list, repr=False)
    meshes: list = field(default_factory=list, repr=False)
    seed: int | None = None
    title: str = ""

    def column(self, name):
        return np.array([r.get(name, np.nan) for r in self.rows], dtype=float)

    def rates(self, name):
        """log2 ratios of consecutive defined errors."""
        e = self.column(name)
        e = e[np.isfinite(e)]
        return np.log2(e[:-1] / e[1:])

    def fitted_rate(self, name, h="h_max"):
        """Least-squares slope of log(error) against log(h) over the defined levels."""
        e = self.column(name)
        hh = self.column(h)
        ok = np.isfinite(e) & (e > 0)
        return float(np.polyfit(np.log(hh[ok]), np.log(e[ok]), 1)[0])

    def finalize(self):
        for name in self.error_columns:
            e = self.column(name)
            for k, row in enumerate(self.rows):
                row["rate_" + name] = float(np.log2(e[k - 1] / e[k])) if k >= 2 else float("nan")
        return self

    def to_csv(self, path) -> None:
        keys = list(self.rows[0].keys())
        with open(path, "w", newline="") as fh:
            fh.write("# {}\n".format(self.title or "convergence report"))
            fh.write("# columns: " + ", ".join(keys) + "\n")
            fh.write("# errors on a row compare that level with the previous one; "
                     "rate = log2(e_prev / e); seed={}\n".format(self.seed))
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(keys)
            for r in self.rows:
                w.writerow([_fmt(r[k]) for k in keys])


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "{:.17g}".format(float(v))
    return str(v)


def _level_row(level, mesh, result, seconds):
    return dict(
        level=level,
        h_min=float(mesh.cell_diameters.min()),
        h_max=float(mesh.cell_diameters.max()),
        n_vertices=mesh.n_vertices,
        n_facets=mesh.n_facets,
        n_dofs=3 * mesh.n_vertices + 1,
        iterations=result.iterations,
        converged=bool(result.converged),
        relative_change=float(result.relative_change),
        pressure_mean=pressure_mean(result.p),
    )


def solve_levels(meshes, data, config, warm_start=True):
    """Uzawa solves on a nested mesh sequence, warm-starting from the coarser level."""
    results = []
    for k, mesh in enumerate(meshes):
        t0 = time.perf_counter()
        initial = None
        if warm_start and results:
            prev = results[-1][0]
            lam0 = prolong_multiplier(prev.lam, mesh)
            initial = None if not np.any(lam0.values) else _initial_from_multiplier(mesh, data, lam0)
        res = uzawa_solve(mesh, None, data, config, initial=initial)
        logger.info("level %d: %d iterations in %.2fs", k, res.iterations, time.perf_counter() - t0)
        if not res.converged:
            logger.warning("level %d did not converge in %d iterations", k, res.iterations)
        results.append((res, time.perf_counter() - t0))
    return results


def _initial_from_multiplier(mesh, data, lam):
    system = assemble_system(mesh, data, lam)
    u, p, _ = solve_direct(system)
    return u, p, lam


def square_meshes(levels, start_divisions=4):
    meshes = [generate_square(start_divisions)]
    for _ in range(levels - 1):
        meshes.append(refine_uniform(meshes[-1]))
    return meshes


def run_square_study(levels: int = 5, data: ProblemData | None = None, config: UzawaConfig | None = None,
                     start_divisions: int = 4, warm_start: bool = True, output_dir=None) -> ConvergenceReport:
    """Convergence study on (-1, 1)^2 with successive-mesh relative errors."""
    if levels < 2:
        raise ValueError("levels must be >= 2")
    data = data or ProblemData()
    config = config or UzawaConfig()
    meshes = square_meshes(levels, start_divisions)
    solved = solve_levels(meshes, data, config, warm_start)
    report = ConvergenceReport(title="square slip-flow convergence study")
    for k, (mesh, (res, secs)) in enumerate(zip(meshes, solved)):
        row = _level_row(k, mesh, res, secs)
        if k == 0:
            row.update(e_u=float("nan"), e_p=float("nan"), e_lambda=float("nan"))
        else:
            e = successive_error(solved[k - 1][0], res)
            row.update(e_u=e[0], e_p=e[1], e_lambda=e[2])
        report.rows.append(row)
        report.solutions.append(res)
        report.meshes.append(mesh)
    report.finalize()
    if output_dir is not None:
        from .exports import export_fields, write_multiplier_traces
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.to_csv(out / "convergence.csv")
        for k, (mesh, res) in enumerate(zip(meshes, report.solutions)):
            write_multiplier_traces(out / "multiplier_level{}.csv".format(k), res, data)
        export_fields(report.solutions[-1], data, out, stem="square_finest")
    return report


HALFDISK_DATA = dict(kappa=0.1)
HALFDISK_RHO = 0.1


def arc_normal_velocity(result: UzawaResult) -> float:
    """Largest facet-mean |u . n| over the arc facets."""
    mesh = result.u.mesh
    arc = mesh.facets_with_tag("arc")
    un = np.einsum("ij,ij->i", facet_mean_trace(mesh, result.u), mesh.facet_normals)
    return float(np.abs(un[arc]).max())


@dataclass
class HalfDiskDemo:
    levels: list
    meshes: list
    solutions: list
    arc_normal_velocity: list
    max_tangential_multiplier: list


def run_halfdisk_demo(levels=(1, 2, 3), data: ProblemData | None = None, config: UzawaConfig | None = None,
                      warm_start: bool = True, output_dir=None) -> HalfDiskDemo:
    """Curved-boundary demo on the lower half of the unit disk about (0, 0.5)."""
    levels = list(range(1, levels + 1)) if isinstance(levels, int) else list(levels)
    if min(levels) < 0 or levels != sorted(levels):
        raise ValueError("levels must be nonnegative and increasing")
    data = data or ProblemData(**HALFDISK_DATA)
    config = config or UzawaConfig(rho=HALFDISK_RHO)
    meshes = [generate_halfdisk(levels[0])]
    for a, b in zip(levels[:-1], levels[1:]):
        m = meshes[-1]
        for _ in range(b - a):
            m = refine_uniform(m)
        meshes.append(m)
    nested = all(b - a == 1 for a, b in zip(levels[:-1], levels[1:]))
    solved = solve_levels(meshes, data, config, warm_start and nested)
    sols = [r for r, _ in solved]
    demo = HalfDiskDemo(
        levels=levels,
        meshes=meshes,
        solutions=sols,
        arc_normal_velocity=[arc_normal_velocity(r) for r in sols],
        max_tangential_multiplier=[float(np.linalg.norm(r.lam.tangential_part, axis=1).max()) for r in sols],
    )
    if output_dir is not None:
        from .exports import export_fields, write_multiplier_traces
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for lev, r in zip(levels, sols):
            write_multiplier_traces(out / "halfdisk_multiplier_level{}.csv".format(lev), r, data)
        export_fields(sols[-1], data, out, stem="halfdisk_finest")
    return demo


# -- manufactured solution for the multiplier-frozen subproblem ----------------

class Manufactured:
    """Smooth divergence-free velocity from the stream function sin(pi x) sin(pi y)."""

    name = "smooth"

    def __init__(self, mu=1.0):
        self.mu = mu

    def velocity(self, x, y):
        pi = np.pi
        return pi * np.sin(pi * x) * np.cos(pi * y), -pi * np.cos(pi * x) * np.sin(pi * y)

    def velocity_gradient(self, x, y):
        pi2 = np.pi ** 2
        c = pi2 * np.cos(np.pi * x) * np.cos(np.pi * y)
        s = pi2 * np.sin(np.pi * x) * np.sin(np.pi * y)
        return np.array([[c, -s], [s, -c]])

    def pressure(self, x, y):
        return np.cos(np.pi * x) * np.cos(np.pi * y)

    def pressure_gradient(self, x, y):
        pi = np.pi
        return -pi * np.sin(pi * x) * np.cos(pi * y), -pi * np.cos(pi * x) * np.sin(pi * y)

    def force(self, x, y):
        # u - mu lap u + grad p with lap u = -2 pi^2 u
        ux, uy = self.velocity(x, y)
        gx, gy = self.pressure_gradient(x, y)
        k = 1.0 + 2.0 * np.pi ** 2 * self.mu
        return k * ux + gx, k * uy + gy

    def traction(self, x, y, n):
        """sigma(u*, p*) n at points (x, y) with normals n (..., 2)."""
        G = self.velocity_gradient(x, y)  # (2, 2, ...)
        D = 0.5 * (G + np.swapaxes(G, 0, 1))
        p = self.pressure(x, y)
        tx = 2 * self.mu * (D[0, 0] * n[..., 0] + D[0, 1] * n[..., 1]) - p * n[..., 0]
        ty = 2 * self.mu * (D[1, 0] * n[..., 0] + D[1, 1] * n[..., 1]) - p * n[..., 1]
        return np.stack([tx, ty], axis=-1)


class ManufacturedLinear(Manufactured):
    """Global linear divergence-free velocity with zero pressure."""

    name = "linear"
    A = np.array([[0.3, 0.7], [-0.2, -0.3]])
    b = np.array([0.1, -0.4])

    def velocity(self, x, y):
        return (self.A[0, 0] * x + self.A[0, 1] * y + self.b[0],
                self.A[1, 0] * x + self.A[1, 1] * y + self.b[1])

    def velocity_gradient(self, x, y):
        one = np.ones_like(np.asarray(x, dtype=float))
        return np.array([[self.A[0, 0] * one, self.A[0, 1] * one], [self.A[1, 0] * one, self.A[1, 1] * one]])

    def pressure(self, x, y):
        return np.zeros_like(np.asarray(x, dtype=float))

    def pressure_gradient(self, x, y):
        z = np.zeros_like(np.asarray(x, dtype=float))
        return z, z

    def force(self, x, y):
        return self.velocity(x, y)


class ManufacturedZero(ManufacturedLinear):
    name = "zero"
    A = np.zeros((2, 2))
    b = np.zeros(2)


MANUFACTURED = {cls.name: cls for cls in (Manufactured, ManufacturedLinear, ManufacturedZero)}


def exact_multiplier(mesh: Triangulation, exact) -> MultiplierField:
    """Facet means of sigma(u*, p*) n by Gauss quadrature on each facet."""
    tab = tables_for(mesh)
    pts = tab.facet_qpoints
    n = np.broadcast_to(mesh.facet_normals[:, None, :], pts.shape)
    t = exact.traction(pts[..., 0], pts[..., 1], n)
    return MultiplierField(mesh, np.einsum("q,fqa->fa", tab.edge.weights, t))


def solve_frozen(mesh, exact, data):
    lam = exact_multiplier(mesh, exact)
    system = assemble_system(mesh, replace(data, force=exact.force), lam)
    u, p, _ = solve_direct(system)
    return u, p, lam


def _error_fields(mesh, exact, u, p):
    """Errors against the exact solution by quadrature at the element level."""
    tab = tables_for(mesh)
    X = tab.qpoints
    L = tab.tri.points
    uq = np.einsum("qk,cka->cqa", L, u.values[mesh.cells])
    pq = np.einsum("qk,ck->cq", L, p.values[mesh.cells])
    gu = np.einsum("cka,ckb->cab", u.values[mesh.cells], tab.grad_bary)
    ex = np.stack(exact.velocity(X[..., 0], X[..., 1]), axis=-1)
    gex = np.moveaxis(np.broadcast_to(exact.velocity_gradient(X[..., 0], X[..., 1]), (2, 2) + X.shape[:2]), (0, 1), (2, 3))
    pex = exact.pressure(X[..., 0], X[..., 1])
    W = tab.qweights
    eu0 = np.sum(W[..., None] * (uq - ex) ** 2)
    eu1 = np.sum(W[..., None, None] * (gu[:, None] - gex) ** 2)
    ep = np.sum(W * (pq - pex) ** 2)
    ref_u = np.sum(W[..., None] * ex ** 2) + np.sum(W[..., None, None] * gex ** 2)
    ref_p = np.sum(W * pex ** 2)
    return math.sqrt(eu0 + eu1), math.sqrt(ep), math.sqrt(ref_u), math.sqrt(ref_p)


def run_manufactured_linear_check(levels: int = 4, start_divisions: int = 4, kind: str = "smooth",
                                  data: ProblemData | None = None) -> ConvergenceReport:
    """Solve only the multiplier-frozen subproblem against a manufactured solution."""
    exact = MANUFACTURED[kind]((data or ProblemData()).mu)
    data = data or ProblemData()
    report = ConvergenceReport(error_columns=("err_u_h1", "err_p_l2"),
                               title="manufactured multiplier-frozen check ({})".format(kind))
    for k, mesh in enumerate(square_meshes(levels, start_divisions)):
        u, p, lam = solve_frozen(mesh, exact, data)
        eu, ep, ru, rp = _error_fields(mesh, exact, u, p)
        report.rows.append(dict(
            level=k, h_max=float(mesh.cell_diameters.max()), n_dofs=3 * mesh.n_vertices + 1,
            err_u_h1=eu, err_p_l2=ep,
            rel_u_h1=eu / ru if ru > 0 else eu, rel_p_l2=ep / rp if rp > 0 else ep,
        ))
        report.solutions.append((u, p, lam))
        report.meshes.append(mesh)
    for name in report.error_columns:
        e = report.column(name)
        for k, row in enumerate(report.rows):
            row["rate_" + name] = float(np.log2(e[k - 1] / e[k])) if k >= 1 and e[k] > 0 else float("nan")
    return report
