"""Lower bounds for joint position/momentum precision.

``c = 2 sigma_Q sigma_P`` compares the precision pair with the Heisenberg
limit. Below c = 1 the measurement bound is positive; the preparation bound
stays positive for every c and the two merge as c goes to 0.

    python3 demos/position_momentum.py
"""
import numpy as np

from uncertsdp.bounds import GaussianParams, gaussian_bound, optimal_sigma_f

print(f"{'c':>9} {'measurement':>12} {'preparation':>12} {'sigma_f':>10}")
for c in np.logspace(-4, 1, 11):
    sf = optimal_sigma_f(GaussianParams.from_c(c)) if c < 1 else float("nan")
    print(f"{c:9.2e} {gaussian_bound(c):12.6f} {gaussian_bound(c, 'preparation'):12.6f} {sf:10.4g}")
