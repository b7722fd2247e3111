"""
Grassmann integrals by exact bookkeeping
========================================

A small exact engine for anticommuting variables: Gaussian integrals give
determinants, mixed Gaussians give superdeterminants, and the
Hubbard-Stratonovich identities hold coefficient by coefficient.
"""
import numpy as np

from dginibre.susy import GrassmannAlgebra, berezin_integrate, g_exp
from dginibre.susy import identities as ids

alg = GrassmannAlgebra(["psi1", "psi2"])
p1, p2 = alg.gens("psi1", "psi2")
print("psi1 psi2 =", p1 * p2, "  psi2 psi1 =", p2 * p1)
print("int psi1 psi2 dpsi2 dpsi1 =", berezin_integrate(p1 * p2, ["psi2", "psi1"]))

# Gaussian Grassmann integral = det A
A = [[1, 2], [3, 4]]
print("Grassmann Gaussian of [[1,2],[3,4]]:", ids.gaussian_grassmann(A))

# Sdet of [[2, chi], [eta, 3]] from the mixed Gaussian integral
case = ids.super_gaussian_case(1, seed=0)
res = ids.super_gaussian_check(**case)
print("super-Gaussian integral:", res["lhs"])
print("Sdet F:                 ", res["rhs"])

# exp(Str log F) = Sdet F and Sdet(F1 F2) = Sdet F1 Sdet F2
r = ids.sdet_properties_check(*ids.sdet_case(seed=1))
print("multiplicativity %.1e  exp-Str-log %.1e" % (r["multiplicativity"], r["exp_str_log"]))

# Hubbard-Stratonovich with 2x2 Grassmann matrices: the pairing of the
# differentials decides the overall sign
for pairing in ("conjugate", "written"):
    print("HS p=2, %-9s pairing:" % pairing, ids.hs_grassmann_check(2, pairing)["relation"])

x = 0.4 * p1 * p2
print("exp(0.4 psi1 psi2) =", g_exp(x))
