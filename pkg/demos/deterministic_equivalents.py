"""
Deterministic equivalents of a deformation
==========================================

Everything the local limit needs from A0 is a handful of scalars built
from the singular values of A0 - z.  Here we compute them for three
deformations and check the closed forms that exist.
"""
import numpy as np

from dginibre.detequiv import (check_assumptions, deterministic_equivalents, f_profile,
                               shifted_spectrum)
from dginibre.ensemble import DeformationSpec, realize_deformation

# Two atoms at +-a: u*^2 and rho both equal 1 - a^2
for a in (0.2, 0.5, 0.8):
    p = deterministic_equivalents(realize_deformation(DeformationSpec.two_atom(a, 64)), 0)
    print("two atoms a=%.1f  u*^2=%.12f  rho=%.12f  (1-a^2=%.2f)" % (a, p.u_star**2, p.rho, 1 - a * a))

# A scalar shift moves the disk but keeps rho = 1
p = deterministic_equivalents(realize_deformation(DeformationSpec.scalar_shift(0.5, 8)), 0)
print("scalar shift 0.5: rho=%.12f, h_A=%s" % (p.rho, p.hA))

# A Jordan block is far from normal; there is no closed form, only numbers
A0 = realize_deformation(DeformationSpec.jordan(0, 256))
z0 = -0.5 - 0.5j
p = deterministic_equivalents(A0, z0)
print("Jordan block at z0=%s: u*=%.6f rho=%.6f c2=%.6f" % (z0, p.u_star, p.rho, p.c2))

# The saddle function peaks at u*
spec = shifted_spectrum(A0, z0)
u = p.u_star * np.array([0.5, 0.9, 1.0, 1.1, 2.0])
for ui, (f, f1, f2) in zip(u, f_profile(spec, u)):
    print("  u=%.4f  f=%+.6f  f'=%+.2e  f''=%+.4f" % (ui, f, f1, f2))

# Finite-n witnesses for the assumptions
rep = check_assumptions(A0, z0, eps=0.1, d1=0.01, M=10)
print("(A1) %.3f < 10: %s   (A3) %.3f > 1.01: %s" % (rep.a1_value, rep.a1_ok, rep.a3_value, rep.a3_ok))
