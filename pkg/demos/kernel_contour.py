"""
The kernel and its contour
==========================

As x runs over the slit [0, x2] between the branch points, the two y-roots of
the kernel are complex conjugates and trace a closed curve L.  Points on L
have modulus fixed by their preimage, which is what makes the boundary
condition tractable.
"""

import numpy as np

from coupledtandem.kernel import branch_points, contour_L, y_roots
from coupledtandem.model import REFERENCE_PARAMS

params = REFERENCE_PARAMS.with_(p=0.5)

br = branch_points(params)
print(f"branch points x1 = {br.x1}, x2 = {br.x2:.12f}")
print("Delta stays negative on the slit:", bool(np.all(br.delta(np.linspace(0, br.x2, 500)[1:-1]) < 0)))

# on the unit circle exactly one y-root lies inside the disk
xs = np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8)
print("inner root moduli:", np.round([abs(y_roots(x, params)[0]) for x in xs], 4))

L = contour_L(params, n=256)
print(f"L is centred at {L.center:.6f}; radius ranges over [{L.rho.min():.4f}, {L.rho.max():.4f}]")
err = np.abs(np.abs(L.points) ** 2 - L.modulus_factor * L.x_of_point).max()
print(f"|y|^2 = x (1-p) nu2 / (p nu1) holds to {err:.1e}")

# the shape depends on which station gets the bigger share
for p in (0.2, 0.5, 0.8):
    Lp = contour_L(params.with_(p=p), n=128)
    print(f"p={p}: rightmost point {Lp.points.real.max():.4f}, height {Lp.points.imag.max():.4f}")
