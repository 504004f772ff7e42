"""Two qutrit measurements that an entangled probe tells apart better.

Without a reference system the best bias is sqrt(5)/3; feeding half of an
entangled pair lifts it to sqrt(3)/2. The second number comes with an input
state that certifies it.

    python3 demos/entangled_advantage.py
"""
import numpy as np

from uncertsdp.channels import ideal_measurement
from uncertsdp.gallery import appendix_a_bases
from uncertsdp.measures import diamond_distance, unentangled_distinguishability

b, t = appendix_a_bases()
m1, m2 = ideal_measurement(b), ideal_measurement(t)

plain = unentangled_distinguishability(m1, m2)
r = diamond_distance(m1, m2)
print(f"product inputs : {plain:.12f}  (sqrt(5)/3 = {np.sqrt(5) / 3:.12f})")
print(f"entangled input: {r.value:.12f}  (sqrt(3)/2 = {np.sqrt(3) / 2:.12f}), upper {r.upper:.12f}")
rho = r.optimizer["input_state"]
print("reduced input state found by the solver:")
print(np.round(rho.real, 4))
