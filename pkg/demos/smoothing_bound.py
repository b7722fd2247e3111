"""
Smoothing the log-determinant
=============================

Replacing log det Y by log det(Y + (eps/n)^2) changes products of two
log-determinants.  The stated difference picks up first-order terms; the
mixed second difference is the part that scales like eps1 * eps2.
"""
from dginibre.ensemble import DeformationSpec
from dginibre.spectra import smoothing_ladder

lad = smoothing_ladder(DeformationSpec.zero(64), 0, 0, [0.8, 0.4, 0.2, 0.1], trials=500,
                       seed=0, batches=10)
for e, b, m in zip(lad["eps"], lad["bound_ratio"], lad["mixed_ratio"]):
    print("eps=%.2f  delta/eps^2=%8.1f  mixed/eps^2=%.3f" % (e, b, m))
print("trend of delta/eps^2: %.1f +- %.1f per halving" % (lad["slope"], lad["slope_se"]))
print("trend of mixed/eps^2: %.2f +- %.2f per halving" % (lad["mixed_slope"], lad["mixed_slope_se"]))
