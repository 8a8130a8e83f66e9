"""Field and boundary-table output.

All numbers are written with 17 significant digits so files round-trip
doubles exactly and repeated runs are byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .assembly import facet_mean_trace

FMT = "{:.17g}"

BOUNDARY_COLUMNS = ("facet", "x_mid", "y_mid", "tag", "kappa", "lambda_n", "abs_lambda_t",
                    "sign_lambda_t", "u_n", "u_t")


def write_vtk(path, mesh, point_vectors=None, point_scalars=None, title="slipstokes fields") -> None:
    """Legacy ASCII VTK unstructured grid of triangles with point data."""
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             "POINTS {} double".format(mesh.n_vertices)]
    lines += ["{} {} 0".format(FMT.format(x), FMT.format(y)) for x, y in mesh.vertices.tolist()]
    lines.append("CELLS {} {}".format(mesh.n_cells, 4 * mesh.n_cells))
    lines += ["3 {} {} {}".format(*c) for c in mesh.cells.tolist()]
    lines.append("CELL_TYPES {}".format(mesh.n_cells))
    lines += ["5"] * mesh.n_cells
    if point_vectors or point_scalars:
        lines.append("POINT_DATA {}".format(mesh.n_vertices))
    for name, vals in (point_vectors or {}).items():
        lines.append("VECTORS {} double".format(name))
        lines += ["{} {} 0".format(FMT.format(a), FMT.format(b)) for a, b in np.asarray(vals).tolist()]
    for name, vals in (point_scalars or {}).items():
        lines += ["SCALARS {} double 1".format(name), "LOOKUP_TABLE default"]
        lines += [FMT.format(v) for v in np.asarray(vals).tolist()]
    _write(path, "\n".join(lines) + "\n")


def boundary_table(result, data) -> list:
    """One row per boundary facet with multiplier and velocity components."""
    mesh = result.lam.mesh
    n = mesh.facet_normals
    t = mesh.facet_tangents
    lam = result.lam.values
    lam_n = np.einsum("ij,ij->i", lam, n)
    lam_t = lam - lam_n[:, None] * n
    ut = facet_mean_trace(mesh, result.u)
    mid = mesh.facet_midpoints
    kappa = data.kappa_on(mesh)
    rows = []
    for k in range(mesh.n_facets):
        rows.append((k, mid[k, 0], mid[k, 1], int(mesh.facet_tags[k]), kappa[k], lam_n[k],
                     float(np.hypot(*lam_t[k])), int(np.sign(lam_t[k] @ t[k])),
                     float(ut[k] @ n[k]), float(ut[k] @ t[k])))
    return rows


def write_boundary_csv(path, result, data) -> None:
    tags = {v: k for k, v in result.lam.mesh.tag_names.items()}
    lines = ["# boundary facets; tangent t is counter-clockwise; tags: " +
             ", ".join("{}={}".format(v, tags[v]) for v in sorted(tags)),
             ",".join(BOUNDARY_COLUMNS)]
    for row in boundary_table(result, data):
        lines.append(",".join(str(v) if isinstance(v, int) else FMT.format(v) for v in row))
    _write(path, "\n".join(lines) + "\n")


write_multiplier_traces = write_boundary_csv


def export_fields(result, data, directory, stem="solution"):
    """Write ``<stem>.vtk`` and ``<stem>_boundary.csv``; returns both paths."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    mesh = result.u.mesh
    u = result.u.values
    vtk = out / (stem + ".vtk")
    write_vtk(vtk, mesh,
              point_vectors={"velocity": u},
              point_scalars={"pressure": result.p.values, "speed": np.hypot(u[:, 0], u[:, 1])})
    csv = out / (stem + "_boundary.csv")
    write_boundary_csv(csv, result, data)
    return vtk, csv


def _write(path, text):
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError("cannot write {}: {}".format(path, exc.strerror or exc)) from exc


def read_boundary_csv(path) -> np.ndarray:
    """Structured array of a boundary table written by :func:`write_boundary_csv`."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return np.genfromtxt(lines, delimiter=",", names=True, dtype=None, encoding=None)
