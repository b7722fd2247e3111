"""
Where is the bulk?
==================

The support of the limiting spectrum is the set where the mean of
1/lambda^2 over the singular values of A0 - z is at least one.  A grid scan
plus marching squares draws its boundary, and the bulk-point picker finds a
safe point inside it.
"""
import numpy as np

from dginibre.detequiv import pick_bulk_point, support_boundary_scan
from dginibre.ensemble import DeformationSpec, realize_deformation
from dginibre.outputs import svg_line_plot

# A0 = 0: the unit circle
scan = support_boundary_scan(np.zeros((4, 4)), resolution=200)
print("A0=0: %d contour, max | |z|-1 | = %.2e (grid step %.2e)"
      % (len(scan.contours), np.max(np.abs(np.abs(scan.points) - 1)), scan.grid_step))

# Two well separated atoms give two ovals
A0 = realize_deformation(DeformationSpec.two_atom(1.2, 2))
scan = support_boundary_scan(A0, xlim=(-2.5, 2.5), ylim=(-1.25, 1.25), resolution=(201, 101))
for c in scan.contours:
    print("two atoms: oval around %.3f, width %.3f" % (np.mean(c).real, np.ptp(c.real)))
svg_line_plot("two_atom_support.svg", scan.contours[0].real,
              [(scan.contours[0].imag, "left oval")], title="TwoAtom(1.2) support",
              xlabel="Re z", ylabel="Im z")

# For a Jordan block the picker trades distance to the edge for the (A3) margin
A0 = realize_deformation(DeformationSpec.jordan(0, 64))
scan = support_boundary_scan(A0, resolution=41)
z0, margin = pick_bulk_point(A0, scan, margin=0.1)
print("Jordan(0), n=64: picked z0=%s with (A3) margin %.3f" % (z0, margin))
