"""How far finite regulators sit from the eps -> 0 closed forms.

The closed forms keep only the first term of an expansion of V(y) about
y = x.  The exact damped traces differ from them by a term linear in the
regulators, about 1.7 eps relative on the diagonal eps1 = eps2 = eps.
"""
from anomalylab import functionals, oracles, profiles

pair = profiles.reference_pair()

print("Delta' on the diagonal")
for e in (0.04, 0.02, 0.01, 0.005, 0.0025):
    v = functionals.evaluate(pair, "DeltaPrime", e, e, "fourier").value
    o = oracles.oracle_value(pair, "DeltaPrime")
    print(f"  eps={e:<7g} value {v.real:+.7f}  closed form {o.real:+.7f}  rel gap {abs(v - o) / abs(o):.2e}")

print("F1a - F2a at eps1 = 0.01, eps2 = c eps1")
for c in (0.1, 0.5, 1.0, 2.0, 10.0):
    v = functionals.evaluate(pair, "SplitDifference", 0.01, 0.01 * c, "fourier").value
    o = oracles.oracle_value(pair, "SplitDifference", 0.01, 0.01 * c)
    gap = abs(v - o) / abs(o) if o != 0 else abs(v)
    print(f"  c={c:<5g} value {v.real:+.7f}  closed form {o.real:+.7f}  gap {gap:.2e}")
