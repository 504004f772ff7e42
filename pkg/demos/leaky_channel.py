"""A channel that passes X information well on average but leaks Z to its environment.

The square-root measurement guesses X inputs with probability (d+sqrt2-2)^2/d^2,
yet the complementary channel still separates two Z inputs perfectly, so
average-case calibration says nothing about leakage.

    python3 demos/leaky_channel.py
"""
from uncertsdp.gallery import counterexample, counterexample_guess_formula

for d in (2, 4, 8, 16):
    print(f"d={d:2d}: guess probability {counterexample_guess_formula(d):.6f}, "
          f"1 - guess = {1 - counterexample_guess_formula(d):.2e}")

rep = counterexample(4)
for c in rep.checks:
    print(f"  {c.name:26s} {c.computed:.9f} {c.relation} {c.expected:.9f}  {'ok' if c.ok else 'FAILED'}")
