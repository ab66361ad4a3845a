"""Two formal routes to the same charge shift, and why they disagree.

Route one: the field integrates to zero and V A V^dagger = A, so the shift
Delta vanishes term by term.  Route two: moving V past the projector first
leaves (i/2pi) int A V^dagger V' dx, which is -I/2pi and not zero.
"""
import numpy as np

from anomalylab import lattice, profiles

pair = profiles.reference_pair()
x = np.linspace(-8, 8, 2001)
s = profiles.eval_profile(pair, x)

print("reference pair: A = -2x exp(-x^2), C = exp(-x^2)")
print(f"  int A dx                 = {profiles.field_integral(pair):+.2e}")
print(f"  max |V A V^+ - A|        = {np.max(np.abs(s.V * s.A * np.conj(s.V) - s.A)):.2e}")

# a finite mode set has no anomaly: the undamped traces cancel exactly
for M in (32, 64, 128):
    d = lattice.unregularized_delta(lattice.build_lattice(40, M), pair)
    print(f"  M={M:4d} undamped finite-mode Delta = {d.real:+.1e}")

anomalous = profiles.schwinger_combination(pair) / (2 * np.pi)
I = profiles.schwinger_integral(pair)
print(f"  (i/2pi) int A V^+ V' dx  = {anomalous.real:+.7f}{anomalous.imag:+.0e}j")
print(f"  -I/2pi, I = sqrt(pi/2)   = {-I / (2 * np.pi):+.7f}")
