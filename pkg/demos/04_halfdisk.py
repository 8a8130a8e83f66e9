"""
Curved boundary: the lower half-disk
====================================

Same load on {x^2 + (y - 0.5)^2 < 1, y < 0.5} with kappa = rho = 0.1.  The arc
is approximated by straight facets whose vertices sit on the circle, so the
normal velocity on the arc only vanishes in the limit of refinement.
"""

# %%
from slipstokes import ProblemData, UzawaConfig, run_halfdisk_demo

demo = run_halfdisk_demo((1, 2, 3), ProblemData(kappa=0.1), UzawaConfig(rho=0.1, tol=1e-5),
                         output_dir="demo_output/halfdisk")
for lev, sol, un, lt in zip(demo.levels, demo.solutions, demo.arc_normal_velocity, demo.max_tangential_multiplier):
    print("level {}: {} iterations, max arc |u.n| = {:.2e}, max |lambda_t| = {:.4f}".format(
        lev, sol.iterations, un, lt))
