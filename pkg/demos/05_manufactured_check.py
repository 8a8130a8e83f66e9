"""
Manufactured solution for the frozen-multiplier subproblem
==========================================================

With the multiplier fixed at the exact traction sigma(u*, p*) n, one linear
solve should reproduce a smooth (u*, p*) at first order in H1 / L2, and a
globally linear velocity exactly.
"""

# %%
import numpy as np

from slipstokes import run_manufactured_linear_check

smooth = run_manufactured_linear_check(4, 4, kind="smooth")
for name in smooth.error_columns:
    print(name, np.round(smooth.column(name), 5), "pairwise rates", np.round(smooth.rates(name), 3),
          "fitted %.3f" % smooth.fitted_rate(name))

# %%
linear = run_manufactured_linear_check(3, 4, kind="linear")
print("linear patch test, max errors:", linear.column("err_u_h1").max(), linear.column("err_p_l2").max())
