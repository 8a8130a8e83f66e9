"""
Meshes, refinement and nested spaces
====================================

Build the two domains, refine them, and check that coarse P1/P0 fields embed
exactly into the refined spaces.
"""

# %%
import numpy as np

from slipstokes import (MultiplierField, PressureField, generate_halfdisk, generate_square,
                        norm_l2, prolong_multiplier, prolong_pressure, refine_uniform)
from slipstokes.mesh import HALFDISK_CENTER, boundary_normals_check

# %%
# The square (-1, 1)^2 with 4 divisions per side: all diagonals run the same way.
square = generate_square(4)
print(square, "perimeter", square.facet_lengths.sum(), "area", square.cell_areas().sum())

# %%
# Red refinement splits every triangle into four and every boundary facet in two.
fine = refine_uniform(square)
print(fine, "normals ok:", boundary_normals_check(fine))

# %%
# On the half-disk the new arc vertices are pushed back onto the circle.
for level in range(4):
    m = generate_halfdisk(level)
    arc = m.facets_with_tag("arc")
    r = np.linalg.norm(m.vertices[np.unique(m.facets[arc])] - HALFDISK_CENTER, axis=1)
    print("level", level, "arc length %.5f" % m.facet_lengths[arc].sum(),
          "area %.5f" % m.cell_areas().sum(), "max |r - 1| %.1e" % abs(r - 1).max())

# %%
# Prolongation copies inherited vertices and averages at edge midpoints, so
# the L2 norm of a P1 field does not change.
rng = np.random.default_rng(0)
p = PressureField(square, rng.standard_normal(square.n_vertices))
print("L2 coarse %.15f  fine %.15f" % (norm_l2(p), norm_l2(prolong_pressure(p, fine))))

# %%
# P0 multipliers are inherited by both children.
lam = MultiplierField(square, rng.standard_normal((square.n_facets, 2)))
child = prolong_multiplier(lam, fine)
print(np.array_equal(child.values[::2], lam.values), np.array_equal(child.values[1::2], lam.values))
