"""
Two 2x2 changes of variables and a determinant inequality
=========================================================

Each lemma is checked by two independent quadratures: one in the flat
matrix coordinates, one after reducing to eigenvalues.
"""
import math

from dginibre.susy.lemmas import (det_m_inequality_check, jacobian_polar_check,
                                  jacobian_square_check)

for fn in ("exp", "exp2", "zero"):
    r = jacobian_square_check(fn)
    print("A = B^2 lemma, f=%-4s  lhs=%.10f rhs=%.10f rel=%.1e" % (fn, r["lhs"], r["rhs"], r["rel_err"]))

r = jacobian_polar_check()
print("W = L U lemma: lhs = pi^4 = %.6f, rhs = %.6f" % (r["lhs"], r["rhs"]))
print("  prefactor that would close the gap: %.6f = %.3f pi^3" % (r["constant_needed"], r["constant_needed"] / math.pi**3))

r = det_m_inequality_check(samples=20000, interior=1000)
print("det inequality: %d violations in %d samples, worst margin %.1e"
      % (r["violations"] + r["interior_violations"], r["samples"] + r["interior_samples"], r["worst_margin"]))
