"""3x3 model frames built from the Meijer-G scalars.

Phi(z) carries rows (f, theta f, theta^2 f) of three scalar solutions of
the order-3 hypergeometric ODE; Psi(z) carries rows (theta^2 g, theta g, g)
of the adjoint solutions.  Both are piecewise analytic on the four open
quadrants, with explicit jump matrices across the rays
arg z in {0, pi/2, -pi/2, pi}.

Column layouts per quadrant (signs included), derived from the analytic
continuations of the scalars:

    Phi:  Q1 (0 < arg < pi/2):    (phi1,  phi2, phi3)
          Q2 (pi/2 < arg < pi):   (phi4,  phi2, phi3)
          Q4 (-pi/2 < arg < 0):   (phi2, -phi1, phi3)
          Q3 (-pi < arg < -pi/2): (phi4, -phi1, phi3)

    Psi:  Q1: (psi1,  psi2, psi3)     Q2: (psi1, psi4, psi3)
          Q4: (psi2, -psi1, psi3)     Q3: (psi2, psi4, psi3)

On a ray the caller must say which side is meant (``side='+'`` or
``'-'``); the + side of each ray is the one reached counterclockwise
(above R+, left of iR+, right of iR-, below R- at total angle -pi).

Global identities wired through here:

* det Phi(z) = 8 pi^3 i z^{-2 beta},  beta = alpha + 1/4;
* Phi(z)^{-1} = -(1/4 pi^2) Psi(z)^T C  with the constant unipotent-ish
  matrix C below, equivalently Phi Psi^T is z-independent;
* the large-z expansion T Phi = (2 pi/sqrt 3) z^{-2 beta/3}(I + O(1/z)) L D
  and its adjoint counterpart, which :func:`expansion_residual` probes.
"""

from __future__ import annotations

from mpmath import mp, mpf, mpc

from .mpcore import (_resolve_dps, gamma, mat_mul, mat_transpose, det3, inv3,
                     norm_max, identity3)
from .meijer import SectorPoint, phi_scalars, psi_scalars

RAYS = ("pos", "ipos", "ineg", "neg")

_RAY_EPS = 1e-9

# quadrant -> list of (scalar index 1..4, sign) per column
_PHI_LAYOUT = {
    1: ((1, 1), (2, 1), (3, 1)),
    2: ((4, 1), (2, 1), (3, 1)),
    4: ((2, 1), (1, -1), (3, 1)),
    3: ((4, 1), (1, -1), (3, 1)),
}
_PSI_LAYOUT = {
    1: ((1, 1), (2, 1), (3, 1)),
    2: ((1, 1), (4, 1), (3, 1)),
    4: ((2, 1), (1, -1), (3, 1)),
    3: ((2, 1), (4, 1), (3, 1)),
}


def _classify(point, side):
    """Map a sector point to (quadrant, evaluation point).

    Arguments within _RAY_EPS of a ray need an explicit side; the
    negative axis accepts total angle +pi or -pi and re-centers it so the
    + side evaluates at -pi and the - side at +pi.
    """
    th = float(point.argument)
    if not -3.15 < th < 3.15:
        raise ValueError(
            f"frame matrices live on -pi <= arg z <= pi, got {th}")
    half_pi = 1.5707963267948966
    pi_ = 3.141592653589793

    def on(x, target):
        return abs(x - target) < _RAY_EPS

    if on(th, 0.0):
        ray = "pos"
    elif on(th, half_pi):
        ray = "ipos"
    elif on(th, -half_pi):
        ray = "ineg"
    elif on(abs(th), pi_):
        ray = "neg"
    else:
        quad = 1 if 0 < th < half_pi else \
            2 if half_pi < th < pi_ else \
            4 if -half_pi < th < 0 else 3
        return quad, point

    if side not in ("+", "-"):
        raise ValueError(
            f"argument {th} lies on ray {ray!r}: pass side='+' or side='-'")
    if ray == "pos":
        return (1 if side == "+" else 4), point
    if ray == "ipos":
        return (2 if side == "+" else 1), point
    if ray == "ineg":
        return (4 if side == "+" else 3), point
    # negative axis: + side at total angle -pi, - side at +pi
    if side == "+":
        return 3, (point if th < 0 else point.rotated(-2 * mp.pi))
    return 2, (point if th > 0 else point.rotated(2 * mp.pi))


def _assemble(scalars, layout, row_order):
    triples = {1: scalars.f1, 2: scalars.f2, 3: scalars.f3, 4: scalars.f4}
    cols = [tuple(sign * x for x in triples[idx]) for idx, sign in layout]
    return [[cols[j][i] for j in range(3)] for i in row_order]


def phi_matrix(alpha, point, dps=None, side=None, route="auto"):
    """Phi_alpha at a sector point; rows (f, theta f, theta^2 f)."""
    d = _resolve_dps(dps)
    quad, ev = _classify(point, side)
    sc = phi_scalars(alpha, ev, dps=d, route=route)
    return _assemble(sc, _PHI_LAYOUT[quad], (0, 1, 2))


def psi_matrix(alpha, point, dps=None, side=None, route="auto"):
    """Psi_alpha at a sector point; rows (theta^2 g, theta g, g)."""
    d = _resolve_dps(dps)
    quad, ev = _classify(point, side)
    sc = psi_scalars(alpha, ev, dps=d, route=route)
    return _assemble(sc, _PSI_LAYOUT[quad], (2, 1, 0))


# ----------------------------------------------------------------------
# jump matrices
# ----------------------------------------------------------------------

def phi_jump(ray, alpha, dps=None):
    d = _resolve_dps(dps)
    with mp.workdps(d + 5):
        one, zero = mpc(1), mpc(0)
        if ray == "pos":
            return [[zero, one, zero], [-one, zero, zero], [zero, zero, one]]
        if ray in ("ipos", "ineg"):
            return [[one, zero, zero], [one, one, zero], [zero, zero, one]]
        if ray == "neg":
            c = mpc(0, 1) * mp.exp(mpc(0, 2) * mp.pi * mpf(alpha))
            return [[one, zero, zero], [zero, zero, c], [zero, -c, zero]]
    raise ValueError(f"unknown ray {ray!r}")


def psi_jump(ray, alpha, dps=None):
    d = _resolve_dps(dps)
    with mp.workdps(d + 5):
        one, zero = mpc(1), mpc(0)
        if ray == "pos":
            return [[zero, one, zero], [-one, zero, zero], [zero, zero, one]]
        if ray in ("ipos", "ineg"):
            return [[one, -one, zero], [zero, one, zero], [zero, zero, one]]
        if ray == "neg":
            c = mpc(0, 1) * mp.exp(mpc(0, -2) * mp.pi * mpf(alpha))
            return [[one, zero, zero], [zero, zero, -c], [zero, c, zero]]
    raise ValueError(f"unknown ray {ray!r}")


_RAY_ANGLE = {"pos": 0.0, "ipos": 0.5, "ineg": -0.5, "neg": 1.0}


def jump_residual(alpha, ray, modulus, dps=None, frame="phi", route="auto"):
    """Relative residual of F_+ = F_- J on the given ray at |z| = modulus."""
    d = _resolve_dps(dps)
    build = phi_matrix if frame == "phi" else psi_matrix
    jump = phi_jump if frame == "phi" else psi_jump
    with mp.workdps(d + 10):
        th = mpf(_RAY_ANGLE[ray]) * mp.pi
        pt = SectorPoint(mpf(modulus), th)
        fp = build(alpha, pt, dps=d, side="+", route=route)
        fm = build(alpha, pt, dps=d, side="-", route=route)
        J = jump(ray, alpha, dps=d)
        resid = norm_max([[fp[i][j] - x for j, x in enumerate(row)]
                          for i, row in enumerate(mat_mul(fm, J))])
        return resid / (norm_max(fp) or mpf(1))


# ----------------------------------------------------------------------
# determinant and inverse identities
# ----------------------------------------------------------------------

def det_phi_predicted(alpha, point, dps=None):
    """Exact determinant 8 pi^3 i z^{-2 beta} on the principal domain.

    The constant is forced by the large-z factorization: the scalar
    prefactor contributes (2 pi/sqrt3)^3, the spectral frame contributes
    det V = -3 sqrt3 i, the left normalizer det T = -1, and the
    exponential diagonal is unimodular with product 1; Liouville then
    makes the identity exact.  (The z^{2 beta}-compensated determinant is
    continuous across all four rays: the only jump with non-unit
    determinant, -e^{4 pi i alpha} on the negative axis, matches the
    branch jump of z^{-2 beta} there.)
    """
    d = _resolve_dps(dps)
    with mp.workdps(d + 10):
        beta = mpf(alpha) + mpf("0.25")
        return 8 * mp.pi ** 3 * mpc(0, 1) * point.power(-2 * beta, dps=d)


def c_matrix(alpha, dps=None):
    d = _resolve_dps(dps)
    with mp.workdps(d + 5):
        a = mpf(alpha)
        return [[mpf(1), mpf(0), mpf(0)],
                [-2 * a - mpf("0.5"), mpf(-1), mpf(0)],
                [a * (a + mpf("0.5")), 2 * a + mpf("0.5"), mpf(1)]]


def phi_inverse(alpha, point, dps=None, side=None, route="auto"):
    """Phi^{-1} from the adjoint frame: -(1/4 pi^2) Psi^T C."""
    d = _resolve_dps(dps)
    with mp.workdps(d + 10):
        psi = psi_matrix(alpha, point, dps=d, side=side, route=route)
        prod = mat_mul(mat_transpose(psi), c_matrix(alpha, dps=d))
        s = -1 / (4 * mp.pi ** 2)
        return [[s * x for x in row] for row in prod]


def phi_psi_product(alpha, point, dps=None, side=None, route="auto"):
    """Phi Psi^T; z-independent, equal to -4 pi^2 C^{-1}."""
    d = _resolve_dps(dps)
    with mp.workdps(d + 10):
        phi = phi_matrix(alpha, point, dps=d, side=side, route=route)
        psi = psi_matrix(alpha, point, dps=d, side=side, route=route)
        return mat_mul(phi, mat_transpose(psi))


# ----------------------------------------------------------------------
# large-z data: T factors, spectral L frames, exponential diagonals
# ----------------------------------------------------------------------

def _gamma_exponents(alpha, dps):
    with mp.workdps(dps + 5):
        a = mpf(alpha)
        g = 2 * a / 3 + mpf(1) / 2
        m1 = a ** 2 / 3 + a / 6 - mpf(1) / 36
        m2 = (a ** 4 / 18 + a ** 3 / 54 - 17 * a ** 2 / 216 - a / 54
              + mpf(25) / 2592)
        gt = -2 * a / 3 + mpf(1) / 6
        mt1 = a ** 2 / 3 + a / 6 - mpf(1) / 36
        mt2 = (a ** 4 / 18 + 5 * a ** 3 / 54 - 5 * a ** 2 / 216 - 5 * a / 108
               + mpf(1) / 2592)
        return g, m1, m2, gt, mt1, mt2


def t_matrix(alpha, dps=None):
    """Constant left factor normalizing Phi at infinity."""
    d = _resolve_dps(dps)
    with mp.workdps(d + 5):
        g, m1, m2, _, _, _ = _gamma_exponents(alpha, d)
        t1 = -g - m1
        t2 = g * (g - mpf(1) / 3) + m1 * (m1 + g - mpf(2) / 3) - m2
        t3 = 2 * g - mpf(1) / 3 + m1
        return [[mpf(1), mpf(0), mpf(0)],
                [t1, mpf(-1), mpf(0)],
                [t2, t3, mpf(1)]]


def t_tilde_matrix(alpha, dps=None):
    """Constant left factor normalizing Psi at infinity."""
    d = _resolve_dps(dps)
    with mp.workdps(d + 5):
        _, _, _, gt, mt1, mt2 = _gamma_exponents(alpha, d)
        tt1 = gt + mt1
        tt2 = gt * (gt - mpf(1) / 3) + mt1 * (mt1 + gt - mpf(2) / 3) - mt2
        tt3 = 2 * gt - mpf(1) / 3 + mt1
        return [[mpf(1), tt3, tt2],
                [mpf(0), mpf(1), tt1],
                [mpf(0), mpf(0), mpf(1)]]


def l_matrix(alpha, point, dps=None, frame="phi"):
    """Spectral frame L (or the adjoint Lt) at a sector point off R-."""
    d = _resolve_dps(dps)
    with mp.workdps(d + 10):
        beta = mpf(alpha) + mpf("0.25")
        w = mp.exp(mpc(0, 2) * mp.pi / 3)
        w2 = w * w
        upper = float(point.argument) >= 0
        zr3 = point.power(mpf(1) / 3, dps=d)
        ph = mp.exp(mpc(0, 2) * mp.pi * beta / 3)
        if frame == "phi":
            if upper:
                V = [[w2, w, 1], [1, 1, 1], [w, w2, 1]]
                P = (ph, 1 / ph, mpc(1))
            else:
                V = [[w, -w2, 1], [1, -1, 1], [w2, -w, 1]]
                P = (1 / ph, ph, mpc(1))
            dg = (1 / zr3, mpc(1), zr3)
        else:
            if upper:
                V = [[w, w2, 1], [1, 1, 1], [w2, w, 1]]
                P = (1 / ph, ph, mpc(1))
            else:
                V = [[w2, -w, 1], [1, -1, 1], [w, -w2, 1]]
                P = (ph, 1 / ph, mpc(1))
            dg = (zr3, mpc(1), 1 / zr3)
        return [[dg[i] * V[i][j] * P[j] for j in range(3)] for i in range(3)]


def exp_diag(point, dps=None, frame="phi"):
    """Diagonal exponential factor of the large-z model."""
    d = _resolve_dps(dps)
    with mp.workdps(d + 10):
        w = mp.exp(mpc(0, 2) * mp.pi / 3)
        w2 = w * w
        zr3 = point.power(mpf(1) / 3, dps=d)
        upper = float(point.argument) >= 0
        trio = (w, w2, mpc(1)) if upper else (w2, w, mpc(1))
        sgn = -3 if frame == "phi" else 3
        return [mp.exp(sgn * t * zr3) for t in trio]


def expansion_residual(alpha, x, dps=None, frame="phi", route="auto"):
    """sup-norm distance of the normalized frame from I at real x > 0.

    For frame='phi' this is
        || T Phi(x) D^{-1} L^{-1} (sqrt3 / 2 pi) x^{2 beta/3} - I ||,
    evaluated on the + side of the positive axis; expected O(1/x).
    The adjoint frame uses Tt Psi, scale -(sqrt3/2 pi) x^{-2 beta/3}.
    """
    d = _resolve_dps(dps)
    extra = int(2.4 * float(x) ** (1.0 / 3.0)) + 20
    wp = d + extra
    with mp.workdps(wp):
        pt = SectorPoint(mpf(x), mpf(0))
        beta = mpf(alpha) + mpf("0.25")
        if frame == "phi":
            M = phi_matrix(alpha, pt, dps=d, side="+", route=route)
            T = t_matrix(alpha, dps=wp)
            scale = (2 * mp.pi / mp.sqrt(3)) * pt.power(-2 * beta / 3, dps=wp)
        else:
            M = psi_matrix(alpha, pt, dps=d, side="+", route=route)
            T = t_tilde_matrix(alpha, dps=wp)
            scale = -(2 * mp.pi / mp.sqrt(3)) * pt.power(2 * beta / 3, dps=wp)
        L = l_matrix(alpha, pt, dps=wp, frame=frame)
        D = exp_diag(pt, dps=wp, frame=frame)
        tm = mat_mul(T, M)
        tm = [[tm[i][j] / D[j] for j in range(3)] for i in range(3)]
        R = mat_mul(tm, inv3(L))
        R = [[R[i][j] / scale - (1 if i == j else 0) for j in range(3)]
             for i in range(3)]
        return norm_max(R)
