import numpy as np
import pytest

from slipstokes.mesh import (HALFDISK_CENTER, boundary_normals_check, cell_edges, generate_halfdisk,
                             generate_square, read_mesh_text, refine_uniform, with_normals,
                             write_mesh_text)


@pytest.mark.parametrize("n, nv, nc, nb", [(1, 4, 2, 4), (2, 9, 8, 8), (4, 25, 32, 16)])
def test_square_counts(n, nv, nc, nb):
    m = generate_square(n)
    assert (m.n_vertices, m.n_cells, m.n_facets) == (nv, nc, nb)
    assert m.level == 0
    assert len(m.parent_vertex_map) == 0 and len(m.parent_facet_map) == 0


def test_square_perimeter_and_area():
    m = generate_square(4)
    assert m.facet_lengths.sum() == 8.0
    assert m.cell_areas().sum() == pytest.approx(4.0, abs=1e-14)
    assert np.all(m.cell_areas() > 0)


def test_square_tags_cover_all_sides():
    m = generate_square(3)
    for name, normal in [("left", (-1, 0)), ("right", (1, 0)), ("bottom", (0, -1)), ("top", (0, 1))]:
        idx = m.facets_with_tag(name)
        assert len(idx) == 3
        np.testing.assert_allclose(m.facet_normals[idx], np.tile(normal, (3, 1)), atol=1e-15)


def test_facet_geometry_invariants():
    for m in (generate_square(3), generate_halfdisk(2)):
        np.testing.assert_allclose(np.linalg.norm(m.facet_normals, axis=1), 1.0, atol=1e-15)
        d = m.vertices[m.facets[:, 1]] - m.vertices[m.facets[:, 0]]
        np.testing.assert_allclose(np.einsum("ij,ij->i", d, m.facet_normals), 0.0, atol=1e-15)
        np.testing.assert_allclose(np.linalg.norm(d, axis=1), m.facet_lengths, rtol=1e-15)
        assert boundary_normals_check(m)


def test_edge_multiplicity_census():
    m = refine_uniform(generate_halfdisk(1))
    e = np.sort(cell_edges(m.cells).reshape(-1, 2), axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    assert set(counts) <= {1, 2}
    boundary = {tuple(r) for r in uniq[counts == 1]}
    facets = {tuple(sorted(f)) for f in m.facets.tolist()}
    assert boundary == facets
    # each facet's owner cell contains it
    for (a, b), c in zip(m.facets, m.facet_cells):
        assert {a, b} <= set(m.cells[c])


def test_refine_square_two_cells():
    coarse = generate_square(1)
    fine = refine_uniform(coarse)
    assert fine.n_cells == 8 and fine.level == 1
    np.testing.assert_allclose(np.sort(fine.cell_diameters), np.sort(np.repeat(coarse.cell_diameters, 4) / 2), rtol=1e-15)
    assert boundary_normals_check(fine)


def test_refine_parent_maps():
    coarse = generate_square(3)
    fine = refine_uniform(coarse)
    assert fine.n_cells == 4 * coarse.n_cells
    assert fine.n_facets == 2 * coarse.n_facets
    pv = fine.parent_vertex_map
    assert len(pv) == fine.n_vertices
    # inherited vertices keep their index and position
    np.testing.assert_array_equal(pv[:coarse.n_vertices, 0], np.arange(coarse.n_vertices))
    # midpoint vertices are exact means of their parents
    mid = pv[:, 0] != pv[:, 1]
    np.testing.assert_array_equal(fine.vertices[mid], 0.5 * (coarse.vertices[pv[mid, 0]] + coarse.vertices[pv[mid, 1]]))
    for k, parent in enumerate(fine.parent_facet_map):
        assert set(fine.facets[k]) & set(coarse.facets[parent])
        np.testing.assert_array_equal(fine.facet_normals[k], coarse.facet_normals[parent])
        assert fine.facet_tags[k] == coarse.facet_tags[parent]


def test_halfdisk_coarse():
    m = generate_halfdisk(0)
    assert (m.n_vertices, m.n_cells) == (6, 4)
    assert boundary_normals_check(m)
    assert set(m.tag_names) == {"arc", "diameter"}


@pytest.mark.parametrize("levels", [0, 1, 2, 3])
def test_halfdisk_arc_on_circle(levels):
    m = generate_halfdisk(levels)
    ends = np.unique(m.facets[m.facets_with_tag("arc")])
    r = np.linalg.norm(m.vertices[ends] - HALFDISK_CENTER, axis=1)
    np.testing.assert_allclose(r, 1.0, atol=1e-12)
    assert np.all(m.vertices[:, 1] <= 0.5 + 1e-15)
    assert boundary_normals_check(m)


def test_halfdisk_arc_length_and_area():
    m = generate_halfdisk(3)
    assert abs(m.facet_lengths[m.facets_with_tag("arc")].sum() - np.pi) < 0.02 * np.pi
    deficits = [np.pi / 2 - generate_halfdisk(k).cell_areas().sum() for k in range(4)]
    assert all(d > 0 for d in deficits)
    assert all(a > b for a, b in zip(deficits, deficits[1:]))


def test_normals_check_detects_flip():
    m = generate_square(2)
    n = m.facet_normals.copy()
    n[3] *= -1
    assert not boundary_normals_check(with_normals(m, n))


def test_mesh_is_immutable():
    m = generate_square(2)
    with pytest.raises(ValueError):
        m.vertices[0, 0] = 5.0


def test_mesh_text_round_trip(tmp_path):
    m = refine_uniform(generate_halfdisk(1))
    path = tmp_path / "mesh.txt"
    write_mesh_text(m, path)
    first = path.read_text().splitlines()[0].split()
    assert list(map(int, first)) == [m.n_vertices, m.n_cells, m.n_facets]
    back = read_mesh_text(path)
    np.testing.assert_array_equal(back.vertices, m.vertices)
    np.testing.assert_array_equal(back.cells, m.cells)
    np.testing.assert_array_equal(back.facets, m.facets)
    np.testing.assert_array_equal(back.facet_tags, m.facet_tags)
