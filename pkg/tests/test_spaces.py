import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import P1Cell, cell_quadrature
from slipstokes.mesh import generate_halfdisk, generate_square, refine_uniform
from slipstokes.spaces import (MeshMismatchError, MultiplierField, PressureField, SystemSpaces,
                               VelocityField, prolong_multiplier, prolong_pressure, prolong_velocity)


def test_system_layout():
    m = generate_square(2)
    s = SystemSpaces.from_mesh(m)
    assert s.n_velocity_dofs == 18 and s.n_pressure_dofs == 9 and s.n_multiplier_dofs == 16
    assert s.pressure_offset == 18 and s.mean_constraint_index == 27 and s.size == 28
    u = np.arange(18.0).reshape(9, 2)
    p = -np.arange(9.0)
    u2, p2, c = s.split(s.join(u, p, 3.5))
    np.testing.assert_array_equal(u2, u)
    np.testing.assert_array_equal(p2, p)
    assert c == 3.5


def test_field_shape_validation():
    m = generate_square(2)
    with pytest.raises(MeshMismatchError):
        VelocityField(m, np.zeros((8, 2)))
    with pytest.raises(MeshMismatchError):
        PressureField(m, np.zeros(10))
    with pytest.raises(MeshMismatchError):
        MultiplierField(m, np.zeros((8, 3)))


def test_prolong_constant_and_linear():
    coarse = generate_square(3)
    fine = refine_uniform(coarse)
    u = prolong_velocity(VelocityField.interpolate(coarse, lambda x, y: (2.5, -1.0)), fine)
    np.testing.assert_array_equal(u.values, np.tile([2.5, -1.0], (fine.n_vertices, 1)))
    lin = prolong_velocity(VelocityField.interpolate(coarse, lambda x, y: (x, y)), fine)
    np.testing.assert_allclose(lin.values, fine.vertices, atol=1e-15)
    p = prolong_pressure(PressureField.interpolate(coarse, lambda x, y: 0 * x + 7.0), fine)
    np.testing.assert_array_equal(p.values, 7.0)


def _fine_vs_coarse_integrals(coarse, fine, cv, fv):
    """Per-cell L2 and H1-seminorm squared of a P1 field on two meshes, by brute force."""
    out = []
    for mesh, vals in ((coarse, cv), (fine, fv)):
        l2 = h1 = 0.0
        for cell in mesh.cells:
            c = P1Cell(mesh.vertices[cell])
            pts, w = cell_quadrature(c.X)
            l2 += np.sum(w * c.scalar(vals[cell], pts) ** 2)
            h1 += w.sum() * np.sum(c.scalar_grad(vals[cell]) ** 2)
        out.append((l2, h1))
    return out


def test_prolong_nesting_oracle(rng):
    coarse = generate_square(3)
    fine = refine_uniform(coarse)
    cv = rng.standard_normal(coarse.n_vertices)
    fv = prolong_pressure(PressureField(coarse, cv), fine).values
    (l2c, h1c), (l2f, h1f) = _fine_vs_coarse_integrals(coarse, fine, cv, fv)
    assert abs(l2c - l2f) < 1e-12 * max(1, l2c)
    assert abs(h1c - h1f) < 1e-12 * max(1, h1c)
    # the difference itself vanishes: evaluate both fields at fine quadrature points
    err_l2 = err_h1 = 0.0
    for fcell in fine.cells:
        f = P1Cell(fine.vertices[fcell])
        parent = _locate(coarse, f.X.mean(axis=0))
        c = P1Cell(coarse.vertices[coarse.cells[parent]])
        pts, w = cell_quadrature(f.X)
        d = f.scalar(fv[fcell], pts) - c.scalar(cv[coarse.cells[parent]], pts)
        err_l2 += np.sum(w * d ** 2)
        err_h1 += w.sum() * np.sum((f.scalar_grad(fv[fcell]) - c.scalar_grad(cv[coarse.cells[parent]])) ** 2)
    assert np.sqrt(err_l2 + err_h1) < 1e-12


def _locate(mesh, x):
    for k, cell in enumerate(mesh.cells):
        lam = np.linalg.solve(np.vstack([np.ones(3), mesh.vertices[cell].T]), np.r_[1.0, x])
        if np.all(lam > -1e-12):
            return k
    raise AssertionError("point outside mesh")


def test_prolong_preserves_zero_mean(rng):
    from slipstokes.study import pressure_mean
    coarse = generate_square(4)
    fine = refine_uniform(coarse)
    p = PressureField(coarse, rng.standard_normal(coarse.n_vertices))
    p = PressureField(coarse, p.values - pressure_mean(p) / 4.0)
    assert abs(pressure_mean(p)) < 1e-13
    assert abs(pressure_mean(prolong_pressure(p, fine))) < 1e-12


def test_prolong_restriction_identity(rng):
    coarse = generate_square(2)
    fine = refine_uniform(coarse)
    v = rng.standard_normal((coarse.n_vertices, 2))
    pv = prolong_velocity(VelocityField(coarse, v), fine).values
    inherited = fine.parent_vertex_map[:, 0] == fine.parent_vertex_map[:, 1]
    np.testing.assert_array_equal(pv[inherited], v[fine.parent_vertex_map[inherited, 0]])


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-10, 10), b=st.floats(-10, 10), seed=st.integers(0, 2**31 - 1))
def test_prolongation_is_linear(a, b, seed):
    r = np.random.default_rng(seed)
    coarse = generate_square(2)
    fine = refine_uniform(coarse)
    f, g = r.standard_normal((2, coarse.n_vertices, 2))
    lhs = prolong_velocity(VelocityField(coarse, a * f + b * g), fine).values
    rhs = a * prolong_velocity(VelocityField(coarse, f), fine).values + b * prolong_velocity(VelocityField(coarse, g), fine).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + abs(a) + abs(b)) * 10)


def test_prolong_multiplier(rng):
    coarse = generate_square(3)
    fine = refine_uniform(coarse)
    vals = rng.standard_normal((coarse.n_facets, 2))
    mf = prolong_multiplier(MultiplierField(coarse, vals), fine)
    for k in range(fine.n_facets):
        np.testing.assert_array_equal(mf.values[k], vals[fine.parent_facet_map[k]])
    # boundary L2 norm with lengths is preserved because children halve their parent
    norm = lambda m, v: np.sum(m.facet_lengths * np.sum(v ** 2, axis=1))  # noqa: E731
    assert abs(norm(coarse, vals) - norm(fine, mf.values)) < 1e-12 * norm(coarse, vals)
    # cone condition survives on straight sides
    kappa = 0.3
    t = vals - np.einsum("ij,ij->i", vals, coarse.facet_normals)[:, None] * coarse.facet_normals
    clipped = vals - t + t * np.minimum(1, kappa / np.linalg.norm(t, axis=1))[:, None]
    mf = prolong_multiplier(MultiplierField(coarse, clipped), fine)
    assert np.all(np.linalg.norm(mf.tangential_part, axis=1) <= kappa + 1e-15)


def test_prolong_rejects_unrelated_meshes():
    coarse = generate_square(2)
    with pytest.raises(MeshMismatchError):
        prolong_velocity(VelocityField.zeros(coarse), generate_square(4))
    with pytest.raises(MeshMismatchError):
        prolong_pressure(PressureField.zeros(generate_square(3)), refine_uniform(coarse))
    with pytest.raises(MeshMismatchError):
        prolong_multiplier(MultiplierField.zeros(generate_halfdisk(0)), refine_uniform(coarse))
