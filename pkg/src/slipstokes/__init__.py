"""Stabilised P1-P1-P0 finite elements for Stokes flow with Tresca slip.

The lowest-order mixed method couples velocity, pressure and a per-facet
boundary traction multiplier.  The slip condition is handled by a projected
fixed-point (Uzawa) iteration around a multiplier-frozen linear subproblem.
"""

from .assembly import (ProblemData, SaddleSystem, assemble_lhs, assemble_rhs, assemble_system,
                       evaluate_Bh, evaluate_Lh, rotating_force, stress_normal_on_facet, zero_force)
from .friction import (UzawaConfig, UzawaResult, fixed_point_residual, project_cone, project_Mh,
                       uzawa_solve)
from .linalg import SingularMatrixError, solve_direct
from .mesh import (Triangulation, boundary_normals_check, generate_halfdisk, generate_square,
                   read_mesh_text, refine_uniform, write_mesh_text)
from .spaces import (MeshMismatchError, MultiplierField, PressureField, SystemSpaces, VelocityField,
                     prolong_multiplier, prolong_pressure, prolong_velocity)
from .study import (ConvergenceReport, norm_h1, norm_l2, norm_multiplier, run_halfdisk_demo,
                    run_manufactured_linear_check, run_square_study, successive_error)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
