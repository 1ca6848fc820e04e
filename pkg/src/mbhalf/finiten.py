"""Finite-n biorthogonal ensembles for the square-root pairing.

Everything here is exact-moment linear algebra: with weight
w(x) = x^alpha exp(-n V(x)) on [0, oo), the monic polynomials p_j and the
dual polynomials q_j (polynomials in y = x^(1/2)) satisfy

    integral p_j(x) q_k(x^(1/2)) w(x) dx = delta_jk,

and every integral in the construction reduces to a lookup in a table of
half-integer moments m(s) = integral x^(s+alpha) exp(-n V(x)) dx.  The
correlation kernel, its Christoffel-Darboux form through a 3x3 matrix
boundary-value problem, and the hard-edge scaling experiment sit on top.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Union

from mpmath import mp, mpf, mpc

from .mpcore import (
    SingularMatrixError,
    gamma,
    inv3,
    ldu_decompose,
    quad_gl,
    quad_ts,
    unit_lower_inverse,
    unit_upper_inverse,
)
from .kernel import kernel_meijer


class DomainExtensionError(ValueError):
    """No finite quadrature box captured the moment tail."""


def _twice(s):
    """Validate a half-integer exponent and return 2s as an int."""
    two = mpf(2) * mpf(s)
    if two != mp.floor(two):
        raise ValueError("exponent %r is not a half-integer" % (s,))
    return int(two)


@dataclass
class MomentTable:
    """Half-integer moments of x^alpha exp(-n V(x)) on [0, oo).

    values maps the doubled exponent 2s (an int >= 0) to the moment
    integral x^(s+alpha) exp(-n V(x)) dx; value() takes s itself.
    """

    alpha: mpf
    n: int
    V: Union[str, Callable]
    values: Dict[int, mpf]

    def value(self, s):
        key = _twice(s)
        if key not in self.values:
            raise KeyError(
                "moment s=%s not tabulated (have 2s <= %d)" % (s, self.smax2))
        return self.values[key]

    @property
    def smax2(self):
        return max(self.values) if self.values else -1


def _tail_box(alpha, n, V, smax, d):
    """Right endpoint X with integrand below 10^-(d+10) at X, by doubling."""
    bound = mpf(10) ** (-(d + 10))
    X = mpf(4)
    for _ in range(60):
        size = X ** (mpf(smax) + alpha) * mp.exp(-n * V(X))
        if size < bound:
            return X
        X *= 2
    raise DomainExtensionError(
        "moment integrand not below 10^-%d by X=%s; V grows too slowly"
        % (d + 10, mp.nstr(X, 5)))


def moments(alpha, n, V="laguerre", smax=8, dps=None):
    """Moment table for w(x) = x^alpha exp(-n V(x)), s = 0, 1/2, ..., smax.

    V is the tag "laguerre" (V(x) = x, closed form Gamma(s+alpha+1) /
    n^(s+alpha+1)) or a callable, in which case each moment is integrated
    with tanh-sinh on [0, 1] (absorbs the x^alpha endpoint) plus composite
    Gauss-Legendre panels out to a tail-checked box.
    """
    d = dps if dps is not None else mp.dps
    alpha = mpf(alpha)
    if alpha <= -1:
        raise ValueError("alpha must exceed -1 for integrable moments")
    k2max = _twice(smax)
    vals = {}
    with mp.workdps(d + 10):
        if V == "laguerre":
            for k2 in range(k2max + 1):
                s = mpf(k2) / 2
                vals[k2] = gamma(s + alpha + 1) / mpf(n) ** (s + alpha + 1)
        else:
            X = _tail_box(alpha, n, V, mpf(k2max) / 2, d)
            # panel width tied to the exp(-nV) decay scale
            width = min(mpf(8) / n, X - 1)
            panels = int(mp.ceil((X - 1) / width))
            for k2 in range(k2max + 1):
                s = mpf(k2) / 2

                def f(t, s=s):
                    return t ** (s + alpha) * mp.exp(-n * V(t))

                total = quad_ts(f, 0, 1, dps=d)
                a = mpf(1)
                for _ in range(panels):
                    b = min(a + width, X)
                    total += quad_gl(f, a, b, order=64, dps=d)
                    a = b
                vals[k2] = total
        for k2, v in vals.items():
            if not (mp.isfinite(v) and v > 0):
                raise ValueError("moment 2s=%d came out nonpositive: %s"
                                 % (k2, mp.nstr(v, 8)))
        vals = {k: +v for k, v in vals.items()}
    return MomentTable(alpha=alpha, n=n, V=V, values=vals)


@dataclass
class BiorthoSystem:
    """Triangular data of a biorthogonal family built from a MomentTable.

    p_coeffs[j] are the ascending coefficients of the monic degree-j
    polynomial p_j(x); q_coeffs[k] those of q_k as a polynomial in
    y = x^(1/2).  gram is the moment matrix G[j][k] = m(j + k/2) the pair
    diagonalizes.
    """

    nmax: int
    p_coeffs: List[List[mpf]]
    q_coeffs: List[List[mpf]]
    gram: List[List[mpf]]
    precision_digits: int
    table: MomentTable

    def __post_init__(self):
        for j in range(self.nmax):
            if self.p_coeffs[j][j] != 1:
                raise ValueError("p_%d is not monic" % j)
            if any(self.p_coeffs[j][i] != 0 for i in range(j + 1, self.nmax)):
                raise ValueError("p_%d has coefficients above its degree" % j)
            if any(self.q_coeffs[j][i] != 0 for i in range(j + 1, self.nmax)):
                raise ValueError("q_%d has coefficients above its degree" % j)


def biortho_build(mt: MomentTable, nmax: int) -> BiorthoSystem:
    """Build p_0..p_{nmax-1}, q_0..q_{nmax-1} by LDU of the moment matrix.

    Works at max(64, 10*nmax) digits: the moment matrix is Hankel-like and
    exponentially ill-conditioned, and the schedule keeps the failure mode a
    detectable pivot error rather than silent noise.  p-coefficients come
    from inverting the L factor (monic rows), q-coefficients from inverting
    D*U.
    """
    prec = max(64, 10 * nmax)
    need = 3 * (nmax - 1)
    if mt.smax2 < need:
        raise ValueError("moment table covers 2s <= %d but the build needs "
                         "2s <= %d" % (mt.smax2, need))
    with mp.workdps(prec):
        G = [[mt.value(mpf(2 * j + k) / 2) for k in range(nmax)]
             for j in range(nmax)]
        try:
            L, D, U = ldu_decompose(G, dps=prec)
        except SingularMatrixError as exc:
            raise SingularMatrixError(
                "biorthogonal construction failed at degree %d (increase "
                "working precision)" % (exc.minor - 1), minor=exc.minor)
        P = unit_lower_inverse(L)
        Uinv = unit_upper_inverse(U)
        Q = [[Uinv[l][k] / D[k] for l in range(nmax)] for k in range(nmax)]
        bs = BiorthoSystem(nmax=nmax, p_coeffs=P, q_coeffs=Q, gram=G,
                           precision_digits=prec, table=mt)
        resid = biortho_residual(bs)
        if resid > mpf(10) ** (-(prec // 3)):
            raise SingularMatrixError(
                "biorthogonality residual %s exceeds 10^-%d; precision "
                "schedule insufficient" % (mp.nstr(resid, 5), prec // 3))
    return bs


def biortho_residual(bs: BiorthoSystem):
    """max_jk |integral p_j q_k w - delta_jk|, by moment recombination."""
    n = bs.nmax
    with mp.workdps(bs.precision_digits):
        worst = mpf(0)
        for j in range(n):
            # row of p_j against the moment matrix: integral p_j x^(k/2) w
            row = [mp.fsum(bs.p_coeffs[j][i] * bs.gram[i][k]
                           for i in range(j + 1)) for k in range(n)]
            for k in range(n):
                val = mp.fsum(row[l] * bs.q_coeffs[k][l] for l in range(k + 1))
                worst = max(worst, abs(val - (1 if j == k else 0)))
        return +worst


def _half_moment(bs, coeffs, k):
    """integral P(x) x^(k/2) w(x) dx for a coefficient list P."""
    return mp.fsum(c * bs.table.value(mpf(2 * i + k) / 2)
                   for i, c in enumerate(coeffs) if c != 0)


def multiple_orthogonality_check(bs: BiorthoSystem):
    """Max residual of the split orthogonality conditions.

    For each degree d, p_d must kill x^k against both weights
    w_1 = w and w_2 = x^(1/2) w, for k = 0..floor((d-i)/2); these are the
    degree-d conditions re-indexed by parity of the half-power, so the
    residual is pure rounding noise for a correctly built system.
    """
    worst = mpf(0)
    with mp.workdps(bs.precision_digits):
        for d in range(1, bs.nmax):
            row = bs.p_coeffs[d][:d + 1]
            for i in (1, 2):
                top = (d - i) // 2
                for k in range(top + 1):
                    # x^k w_i = x^(k + (i-1)/2) w
                    val = _half_moment(bs, row, 2 * k + (i - 1))
                    worst = max(worst, abs(val))
        return +worst


def _poly_eval(coeffs, x):
    acc = mpf(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _weight(mt: MomentTable, y):
    """w(y) = y^alpha exp(-n V(y))."""
    Vfun = (lambda t: t) if mt.V == "laguerre" else mt.V
    return y ** mt.alpha * mp.exp(-mt.n * Vfun(y))


def finite_kernel(bs: BiorthoSystem, x, y):
    """K_n(x, y) = w(y) * sum_{j<n} p_j(x) q_j(y^(1/2)),  n = bs.nmax.

    Not symmetric in (x, y): the second slot goes through the dual family.
    Evaluated by Horner at the system's working precision (the coefficients
    cancel heavily for x, y inside the bulk).
    """
    with mp.workdps(bs.precision_digits):
        x = mpf(x)
        rt = mp.sqrt(mpf(y))
        total = mp.fsum(
            _poly_eval(bs.p_coeffs[j][:j + 1], x)
            * _poly_eval(bs.q_coeffs[j][:j + 1], rt)
            for j in range(bs.nmax))
        val = _weight(bs.table, mpf(y)) * total
        return +val


def hard_edge_convergence(alpha, x, y, ns, ref_dps=30):
    """Scaled-kernel convergence table for V(x) = x.

    For each n in ns the kernel K_n is built from the Laguerre closed-form
    moments and compared, after the substitution u -> u/(cV n)^3 with
    cV = 2^(-2/3) (so (cV n)^3 = n^3/4 exactly), against the limiting
    kernel at (x, y).  Returns a list of (n, relative error) pairs.
    """
    ref = kernel_meijer(alpha, x, y, dps=ref_dps)
    if ref == 0:
        raise ValueError("limiting kernel vanishes at (%s, %s); relative "
                         "error undefined" % (x, y))
    rows = []
    for n in ns:
        mt = moments(alpha, n, "laguerre", smax=mpf(3 * max(n - 1, 1)) / 2,
                     dps=max(64, 10 * n))
        bs = biortho_build(mt, n)
        with mp.workdps(max(64, 10 * n)):
            scale = mpf(n) ** 3 / 4
            kn = finite_kernel(bs, mpf(x) / scale, mpf(y) / scale) / scale
        err = abs(kn - ref) / abs(ref)
        rows.append((n, +err))
    return rows


# ----------------------------------------------------------------------
# Christoffel-Darboux form through the 3x3 boundary-value matrix
# ----------------------------------------------------------------------

def _edge_rows(bs_big, n):
    """Second and third row-1 polynomials of the degree-n matrix problem.

    Row 2 must produce a Cauchy transform of exact growth z^(-ceil(n/2)) in
    column 2 and strictly faster decay in column 3; row 3 the mirror image.
    Expanding the transforms in 1/z turns that into moment conditions which
    p_{n-1} and p_{n-2} already satisfy except for one leftover each, fixing
    the combinations below.  The parity swap follows the ceil/floor split.
    """
    P = bs_big.p_coeffs
    pn1, pn2 = P[n - 1][:n], P[n - 2][:n - 1]
    m_n1_p1 = _half_moment(bs_big, pn1, n - 1)
    m_n1_p2 = _half_moment(bs_big, pn2, n - 1)
    m_n2_p2 = _half_moment(bs_big, pn2, n - 2)
    two_pi_i = 2j * mp.pi
    B = -two_pi_i / m_n2_p2
    A = -B * m_n1_p2 / m_n1_p1
    C = -two_pi_i / m_n1_p1
    combo = [A * c for c in pn1]
    for i, c in enumerate(pn2):
        combo[i] += B * c
    single = [C * c for c in pn1]
    if n % 2 == 0:
        return combo, single
    return single, combo


def _cauchy_box(bs, n, polys, dps):
    """Right endpoint T for the Cauchy-transform integrals."""
    bound = mpf(10) ** (-(dps + 8))
    T = mpf(8) / bs.table.n + 4
    for _ in range(60):
        size = max(mp.fsum(abs(c) * T ** i for i, c in enumerate(p))
                   for p in polys)
        if size * (1 + mp.sqrt(T)) * abs(_weight(bs.table, T)) < bound:
            return T
        T *= 2
    raise DomainExtensionError("Cauchy-transform tail does not decay")


def _cauchy(fun, fx, xr, z, T, dps):
    """(1/2pi i) integral_0^T fun(t)/(t-z) dt, with the value fun(xr)
    subtracted so the integrand stays bounded near t = Re z = xr; the
    subtracted part integrates to a two-log closed form."""
    def g(t):
        return (fun(t) - fx) / (t - z)

    val = quad_ts(g, 0, xr, dps=dps) + quad_ts(g, xr, T, dps=dps)
    val += fx * (mp.log(T - z) - mp.log(-z))
    return val / (2j * mp.pi)


def _y_plus(bs_big, n, x, T, delta, dps):
    """Boundary value Y_+(x) of the 3x3 matrix at x > 0.

    Columns 2 and 3 are Cauchy transforms; the boundary value is the
    average over +-i delta plus half the jump density, per the upper-side
    convention.  The average approaches the principal value with a bias
    linear in delta (-pi delta f'(x) on the raw integral), so a second
    average at delta/2 and one Richardson step remove it.
    """
    rows1 = [bs_big.p_coeffs[n][:n + 1], *_edge_rows(bs_big, n)]
    wx = _weight(bs_big.table, x)
    Y = [[mpc(0)] * 3 for _ in range(3)]
    for j in range(3):
        pj = _poly_eval(rows1[j], x)
        Y[j][0] = pj
        for col, extra in ((1, lambda t: 1), (2, mp.sqrt)):
            def fun(t, row=rows1[j], e=extra):
                return _poly_eval(row, t) * e(t) * _weight(bs_big.table, t)

            fx = pj * extra(x) * wx

            def avg(d):
                return (_cauchy(fun, fx, x, mpc(x, d), T, dps)
                        + _cauchy(fun, fx, x, mpc(x, -d), T, dps)) / 2

            a1, a2 = avg(delta), avg(delta / 2)
            Y[j][col] = 2 * a2 - a1 + fx / 2
    return Y


def cd_formula_check(bs: BiorthoSystem, x, y, delta=1e-6, dps=30):
    """Relative defect of the Christoffel-Darboux matrix form of the kernel.

    Assembles Y_+(x), Y_+(y) for the degree-n boundary-value problem
    (n = bs.nmax) from p_n, p_{n-1}, p_{n-2} and numerical Cauchy
    transforms, forms

        (0, w(y), y^(1/2) w(y)) . Y_+(y)^(-1) . Y_+(x) . e_1 / (2 pi i (x-y))

    and returns |that - finite_kernel(bs, x, y)| / |finite_kernel|.  The
    identity is exact; the residual measures the +-i delta boundary
    approximation (extrapolated once in delta) and quadrature, so it grows
    with delta.
    """
    n = bs.nmax
    if not 2 <= n <= 8:
        raise ValueError("matrix cross-check supported for 2 <= n <= 8")
    x, y = mpf(x), mpf(y)
    if x <= 0 or y <= 0 or x == y:
        raise ValueError("need x, y > 0 and x != y")
    bs_big = biortho_build(bs.table, n + 1)
    with mp.workdps(dps + 10):
        rows1 = [bs_big.p_coeffs[n][:n + 1], *_edge_rows(bs_big, n)]
        T = _cauchy_box(bs, n, rows1, dps)
        Yx = _y_plus(bs_big, n, x, T, mpf(delta), dps)
        Yy = _y_plus(bs_big, n, y, T, mpf(delta), dps)
        wy = _weight(bs.table, y)
        left = [mpc(0), wy, mp.sqrt(y) * wy]
        Yy_inv = inv3(Yy)
        right = [Yx[i][0] for i in range(3)]
        mid = [mp.fsum(Yy_inv[i][j] * right[j] for j in range(3))
               for i in range(3)]
        val = mp.fsum(left[i] * mid[i] for i in range(3))
        val /= 2j * mp.pi * (x - y)
        ref = finite_kernel(bs, x, y)
        return +(abs(val - ref) / abs(ref))


def y_growth_residual(bs: BiorthoSystem, z, dps=30):
    """|Y_22(z) * z^ceil(n/2) - 1| at a point far from [0, oo).

    Checks the prescribed large-z growth of the second matrix row; the
    residual is O(1/z) with an O(1) constant, so values well below 1 at
    |z| = 10^3 confirm the normalization of the row-2 polynomial.
    """
    n = bs.nmax
    if n < 2:
        raise ValueError("growth check needs at least two polynomials")
    z = mpc(z)
    if mp.im(z) == 0 and mp.re(z) >= 0:
        raise ValueError("z must avoid [0, oo)")
    bs_big = biortho_build(bs.table, n + 1)
    with mp.workdps(dps + 10):
        row2 = _edge_rows(bs_big, n)[0]
        T = _cauchy_box(bs, n, [row2], dps)

        def fun(t):
            return _poly_eval(row2, t) * _weight(bs_big.table, t) / (t - z)

        y22 = quad_ts(fun, 0, T, dps=dps) / (2j * mp.pi)
        return +abs(y22 * z ** mp.ceil(mpf(n) / 2) - 1)
