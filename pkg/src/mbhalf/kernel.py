"""Limiting hard-edge correlation kernels, by two independent routes.

The integral route works for every theta > 0:

    B^(a,th)(x,y) = th y^a int_0^1 J_{(a+1)/th, 1/th}(u x)
                                   J_{a+1, th}((u y)^th) u^a du,

with J_{a,b} the Wright-Bessel function.  It is regular on the diagonal,
handles a in (-1,0) through the integrable u^a factor (tanh-sinh
quadrature), and at th=1 collapses to the classical Bessel hard-edge
kernel (a Lommel-integral identity used as an independent test oracle).

Two normalizations of the limit kernel are in circulation, differing by
the choice of microscopic scale: the 'plain' one is B above (scale n^3
at th=1/2), while the scaling theorem for V(x)=x uses the scale
(c_V n)^3 with c_V = 2^{-2/3}, whose limit is

    K^(a,1/2)(x,y) = c_V^{-3} B^(a,1/2)(x / c_V^3, y / c_V^3)
                   = 4 B^(a,1/2)(4x, 4y).

The matrix route below produces K directly (verified to 1e-32), so at
th = 1/2 the integral route defaults to the same normalization; pass
normalization='plain' for the bare integral (the default for any other
theta, including the th=1 Bessel reduction).

The matrix route is specific to th = 1/2:

    K^(a,1/2)(x,y) = (-1, 1, 0) Phi_+^{-1}(y) Phi_+(x) (1, 1, 0)^T
                     / (2 pi i (x - y)),

with Phi_+ the boundary value of the first-quadrant branch on the
positive axis and Phi^{-1} taken from the adjoint-frame identity (no
numerical inversion).  The value is real; the imaginary residue is a
consistency diagnostic.
"""

from __future__ import annotations

from mpmath import mp, mpf, mpc

from .mpcore import _resolve_dps, quad_ts
from .specfun import wright_bessel
from .meijer import SectorPoint
from .rhframe import phi_matrix, phi_inverse

#: relative diagonal gap below which the matrix route refuses to divide
DIAG_GUARD = 1e-6


def kernel_integral(alpha, x, y, theta=None, dps=None, normalization=None):
    """Hard-edge kernel via the Wright-Bessel integral (any theta > 0).

    ``normalization``: 'theorem' rescales by the (c_V n)-convention factor
    (theta = 1/2 only), 'plain' evaluates the bare integral; None picks
    'theorem' at theta = 1/2 and 'plain' otherwise.
    """
    d = _resolve_dps(dps)
    with mp.workdps(d + 10):
        a = mpf(alpha)
        th = mpf("0.5") if theta is None else mpf(theta)
        xx, yy = mpf(x), mpf(y)
        if a <= -1 or xx <= 0 or yy <= 0 or th <= 0:
            raise ValueError("need alpha > -1, theta > 0 and x, y > 0")
        if normalization is None:
            normalization = "theorem" if th == mpf("0.5") else "plain"
        if normalization == "theorem":
            if th != mpf("0.5"):
                raise ValueError(
                    "the 'theorem' normalization is defined for theta = 1/2")
            xx, yy = 4 * xx, 4 * yy
            front = mpf(4)
        elif normalization == "plain":
            front = mpf(1)
        else:
            raise ValueError(f"unknown normalization {normalization!r}")
        a1, b1 = (a + 1) / th, 1 / th
        a2, b2 = a + 1, th

        def integrand(u):
            return (wright_bessel(a1, b1, u * xx, dps=d)
                    * wright_bessel(a2, b2, (u * yy) ** th, dps=d)
                    * u ** a)

        val = quad_ts(integrand, 0, 1, dps=d)
        return front * th * yy ** a * val


def kernel_meijer(alpha, x, y, dps=None, route="auto", return_complex=False):
    """Hard-edge kernel (theta = 1/2) via the boundary frame on R+."""
    d = _resolve_dps(dps)
    with mp.workdps(d + 10):
        xx, yy = mpf(x), mpf(y)
        if xx <= 0 or yy <= 0:
            raise ValueError("matrix route needs x, y > 0")
        if abs(xx - yy) < DIAG_GUARD * max(xx, yy):
            raise ValueError(
                "x and y too close for the 1/(x-y) route; "
                "use kernel_diag_limit")
        px = SectorPoint(xx, mpf(0))
        py = SectorPoint(yy, mpf(0))
        xmat = phi_matrix(alpha, px, dps=d, side="+", route=route)
        yinv = phi_inverse(alpha, py, dps=d, side="+", route=route)
        # (-1, 1, 0) yinv xmat (1, 1, 0)^T without forming the product
        left = [yinv[1][k] - yinv[0][k] for k in range(3)]
        right = [xmat[k][0] + xmat[k][1] for k in range(3)]
        bilinear = sum(l * r for l, r in zip(left, right))
        val = bilinear / (2 * mp.pi * mpc(0, 1) * (xx - yy))
        if return_complex:
            return val
        return val.real


def kernel_imag_residual(alpha, x, y, dps=None):
    """|Im K| / |K| from the matrix route (should sit at roundoff)."""
    v = kernel_meijer(alpha, x, y, dps=dps, return_complex=True)
    return abs(v.imag) / (abs(v) or mpf(1))


def kernel_diag_limit(alpha, x, dps=None):
    """K^(a,1/2)(x,x): the integral route is regular on the diagonal."""
    return kernel_integral(alpha, x, x, theta=mpf("0.5"), dps=dps)
