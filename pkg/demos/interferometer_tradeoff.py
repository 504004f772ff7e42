"""Walk the which-way interferometer from perfect path detection to none.

Prints, for each beam-splitter angle, the error of the path measurement,
the three disturbance values for the conjugate phase observable, and the
slack left in each error/disturbance inequality.

    python3 demos/interferometer_tradeoff.py
"""
import numpy as np

from uncertsdp import check_theorem1, check_theorem2, conjugate_basis, mz_apparatus
from uncertsdp.measures import eta, eta_hat, nu

z, x = conjugate_basis(2)

print(f"{'theta':>7} {'error':>8} {'nu':>8} {'eta':>8} {'eta_hat':>8}   slack (4 relations)")
for theta in np.linspace(0, np.pi / 2, 7):
    e = mz_apparatus(theta)
    reports = check_theorem1(e, x, z) + check_theorem2(e, x, z)
    err = reports[0].components["epsilon_X"]
    dist = [f(e, z).value for f in (nu, eta, eta_hat)]
    slack = "  ".join(f"{r.slack:7.4f}" for r in reports)
    print(f"{theta:7.4f} {err:8.5f} " + " ".join(f"{v:8.5f}" for v in dist) + f"   {slack}")

# At theta = 0 the path is read perfectly and the phase is fully randomized:
# the first relation holds with equality there.
