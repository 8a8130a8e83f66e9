"""
Cone projection and the stabilised form
=======================================

The friction condition is enforced by projecting the multiplier onto
{y : y.n fixed, |y_t| <= kappa}.  The stabilised form is coercive on the
discrete spaces, which we can see numerically by testing with (w, r, -chi).
"""

# %%
import numpy as np

from slipstokes import (MultiplierField, PressureField, ProblemData, VelocityField, evaluate_Bh,
                        generate_square, project_cone)

# %%
# Inside the cone nothing changes; outside only the tangential part is clipped.
n = np.array([0.0, 1.0])
print(project_cone([0.1, 0.2], n, 0.3))
print(project_cone([0.9, 0.5], n, 0.3))

# %%
# The projection works on arrays of facets at once.
rng = np.random.default_rng(1)
theta = rng.uniform(0, 2 * np.pi, 5)
normals = np.column_stack([np.cos(theta), np.sin(theta)])
x = rng.standard_normal((5, 2))
y = project_cone(x, normals, 0.3)
print("normal parts kept:", np.allclose(np.sum(x * normals, 1), np.sum(y * normals, 1)))
print("tangential lengths:", np.linalg.norm(y - np.sum(y * normals, 1)[:, None] * normals, axis=1))

# %%
# Testing the form with (w, r, -chi) leaves the pressure gradient and the
# multiplier with a positive sign; with small alphas the value stays positive.
mesh = generate_square(4)
data = ProblemData()
values = []
for _ in range(20):
    w = VelocityField(mesh, rng.uniform(-1, 1, (mesh.n_vertices, 2)))
    r = PressureField(mesh, rng.uniform(-1, 1, mesh.n_vertices))
    chi = MultiplierField(mesh, rng.uniform(-1, 1, (mesh.n_facets, 2)))
    values.append(evaluate_Bh(mesh, data, (w, r, chi), (w, r, MultiplierField(mesh, -chi.values))))
print("min over 20 random triples: %.3f" % min(values))
