"""Brute-force reference computations, independent of the package internals.

Cells are integrated with a collapsed (Duffy) Gauss-Legendre product rule and
P1 basis functions come from inverting the 3x3 Vandermonde matrix of each
cell, so nothing here shares code with the assembly tables.
"""

import numpy as np


def duffy_points(n=6):
    """Points (s, t) and weights on the reference triangle {s, t >= 0, s + t <= 1}."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    pts, wts = [], []
    for xi, wi in zip(x, w):
        for yj, wj in zip(x, w):
            pts.append((xi, yj * (1.0 - xi)))
            wts.append(wi * wj * (1.0 - xi))
    return np.array(pts), np.array(wts)


def cell_quadrature(X, n=6):
    """Physical points and weights for the triangle with vertex rows ``X``."""
    ref, w = duffy_points(n)
    J = np.column_stack([X[1] - X[0], X[2] - X[0]])
    pts = X[0] + ref @ J.T
    return pts, w * abs(np.linalg.det(J))


def edge_quadrature(a, b, n=5):
    x, w = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (x + 1.0)
    L = np.linalg.norm(b - a)
    return a + s[:, None] * (b - a), 0.5 * w * L


def p1_coefficients(X):
    """Rows (c0, cx, cy) with phi_i(x, y) = c0 + cx x + cy y."""
    V = np.column_stack([np.ones(3), X])
    return np.linalg.inv(V).T


class P1Cell:
    """Evaluate nodal P1 fields on one cell."""

    def __init__(self, X):
        self.X = np.asarray(X, float)
        self.C = p1_coefficients(self.X)

    def phi(self, pts):
        return self.C[:, 0][None, :] + pts @ self.C[:, 1:].T  # (npts, 3)

    def grad(self):
        return self.C[:, 1:]  # (3, 2)

    def scalar(self, coef, pts):
        return self.phi(pts) @ coef

    def scalar_grad(self, coef):
        return coef @ self.grad()

    def vector(self, coef, pts):
        return self.phi(pts) @ coef  # coef (3, 2)

    def vector_grad(self, coef):
        # G[a, b] = d u_a / d x_b
        return coef.T @ self.grad()

    @property
    def diameter(self):
        X = self.X
        return max(np.linalg.norm(X[i] - X[j]) for i in range(3) for j in range(i + 1, 3))


def s1_bruteforce(mesh, u, p, v, q):
    """sum_T h_T^2 int_T (u + grad p) . (v - grad q)."""
    total = 0.0
    for cell in mesh.cells:
        c = P1Cell(mesh.vertices[cell])
        pts, w = cell_quadrature(c.X)
        a = c.vector(u[cell], pts) + c.scalar_grad(p[cell])
        b = c.vector(v[cell], pts) - c.scalar_grad(q[cell])
        total += c.diameter ** 2 * np.sum(w * np.sum(a * b, axis=1))
    return total


def stress_normal(cell_obj, ucoef, pcoef, pts, n, mu):
    G = cell_obj.vector_grad(ucoef)
    D = 0.5 * (G + G.T)
    return 2 * mu * (D @ n)[None, :] - cell_obj.scalar(pcoef, pts)[:, None] * n[None, :]


def s2_bruteforce(mesh, mu, w_, r, chi, v, q, eta):
    """sum_E h_E int_E (chi - sigma(w, r) n) . (eta - sigma(v, q) n)."""
    total = 0.0
    for k, (a, b) in enumerate(mesh.facets):
        cell = mesh.cells[mesh.facet_cells[k]]
        c = P1Cell(mesh.vertices[cell])
        xa, xb = mesh.vertices[a], mesh.vertices[b]
        t = (xb - xa) / np.linalg.norm(xb - xa)
        n = np.array([t[1], -t[0]])
        pts, wts = edge_quadrature(xa, xb)
        s_trial = chi[k][None, :] - stress_normal(c, w_[cell], r[cell], pts, n, mu)
        s_test = eta[k][None, :] - stress_normal(c, v[cell], q[cell], pts, n, mu)
        total += np.linalg.norm(xb - xa) * np.sum(wts * np.sum(s_trial * s_test, axis=1))
    return total


def boundary_pairing(mesh, chi, v):
    """sum_E int_E chi . v."""
    total = 0.0
    for k, (a, b) in enumerate(mesh.facets):
        xa, xb = mesh.vertices[a], mesh.vertices[b]
        pts, wts = edge_quadrature(xa, xb)
        s = np.linalg.norm(pts - xa, axis=1) / np.linalg.norm(xb - xa)
        vals = (1 - s)[:, None] * v[a] + s[:, None] * v[b]
        total += np.sum(wts * (vals @ chi[k]))
    return total


def load_bruteforce(mesh, force, alpha1, v, q, h_power=2):
    """(F, v) - alpha1 sum_T h_T^p (F, v - grad q)_T."""
    total = 0.0
    for cell in mesh.cells:
        c = P1Cell(mesh.vertices[cell])
        pts, w = cell_quadrature(c.X)
        fx, fy = force(pts[:, 0], pts[:, 1])
        F = np.column_stack([np.broadcast_to(fx, pts[:, 0].shape), np.broadcast_to(fy, pts[:, 0].shape)])
        vv = c.vector(v[cell], pts)
        total += np.sum(w * np.sum(F * vv, axis=1))
        total -= alpha1 * c.diameter ** h_power * np.sum(w * np.sum(F * (vv - c.scalar_grad(q[cell])), axis=1))
    return total


def galerkin_bruteforce(mesh, mu, u, p, v, q):
    """(u, v) + (2 mu D(u), D(v)) + (q, div u) - (p, div v)."""
    total = 0.0
    for cell in mesh.cells:
        c = P1Cell(mesh.vertices[cell])
        pts, w = cell_quadrature(c.X)
        Gu, Gv = c.vector_grad(u[cell]), c.vector_grad(v[cell])
        Du, Dv = 0.5 * (Gu + Gu.T), 0.5 * (Gv + Gv.T)
        area = w.sum()
        total += np.sum(w * np.sum(c.vector(u[cell], pts) * c.vector(v[cell], pts), axis=1))
        total += 2 * mu * area * np.sum(Du * Dv)
        total += np.trace(Gu) * np.sum(w * c.scalar(q[cell], pts))
        total -= np.trace(Gv) * np.sum(w * c.scalar(p[cell], pts))
    return total


def mass_and_grad_norms(mesh, u, r):
    """sum_T h_T^2 ||u||_T^2 and sum_T h_T^2 ||grad r||_T^2."""
    a = b = 0.0
    for cell in mesh.cells:
        c = P1Cell(mesh.vertices[cell])
        pts, w = cell_quadrature(c.X)
        h2 = c.diameter ** 2
        a += h2 * np.sum(w * np.sum(c.vector(u[cell], pts) ** 2, axis=1))
        b += h2 * w.sum() * np.sum(c.scalar_grad(r[cell]) ** 2)
    return a, b


def boundary_weighted(mesh, mu, w_, r, chi):
    """sum_E h_E ||sigma(w, r) n||_E^2 and sum_E h_E ||chi||_E^2."""
    zeros = np.zeros_like(chi)
    s = s2_bruteforce(mesh, mu, w_, r, zeros, w_, r, zeros)
    L = mesh.facet_lengths
    return s, float(np.sum(L * L * np.sum(chi ** 2, axis=1)))
