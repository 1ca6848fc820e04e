"""Series engines: 0F2 with theta weights, Wright Bessel, Frobenius bases."""

import numpy as np
import pytest
from mpmath import mp, mpc, mpf

from mbhalf.specfun import (
    ResonantParameterError,
    check_nonresonant,
    frobenius_adjoint,
    frobenius_forward,
    hyper0f2,
    hyper0f2_theta,
    resonance_distance,
    wright_bessel,
)

TOL = mpf("1e-45")


def test_hyper0f2_matches_mpmath():
    cases = [
        (mpf("1.3"), mpf("1.8"), mpf("0.5")),
        (mpf("0.7"), mpf("1.5"), mpf("-2.0")),
        (mpf("2.2"), mpf("0.4"), mpc(1, 1)),
        (mpf("1.1"), mpf("2.5"), mpf("30")),
    ]
    with mp.workdps(60):
        for b1, b2, z in cases:
            ours = hyper0f2(b1, b2, z, dps=50)
            ref = mp.hyper([], [b1, b2], z)
            assert abs(ours - ref) / abs(ref) < TOL, (b1, b2, z)


def test_hyper0f2_large_negative_argument_cancellation():
    # naive summation at z = -300 loses ~ 2.4 * 300^{1/3} digits; the guard
    # has to absorb that
    with mp.workdps(60):
        ours = hyper0f2(mpf("1.5"), mpf("2.0"), mpf(-300), dps=50)
        ref = mp.hyper([], [mpf("1.5"), mpf("2.0")], mpf(-300))
        assert abs(ours - ref) / abs(ref) < mpf("1e-40")


def test_hyper0f2_rejects_nonpositive_lower_parameter():
    for b in (0, -1, -3.0):
        with pytest.raises(ValueError):
            hyper0f2(b, 1.5, 0.3, dps=30)


def test_theta_weights_match_log_derivative():
    # S1, S2 are the term-wise theta sums for z^c F(z); check them against
    # 5-point central differences in u = log z
    a, c = mpf("0.3"), mpf("-0.3")
    b1, b2 = 1 - a, mpf("1.5")
    z = mpf("0.8")
    h = mpf("1e-6")
    with mp.workdps(60):

        def func(k, m):
            zz = z * mp.exp(k * h)
            s = hyper0f2_theta(b1, b2, -zz, c=c, dps=50)[m]
            return mp.power(zz, c) * s

        for m in (0, 1):
            num = (-func(2, m) + 8 * func(1, m) - 8 * func(-1, m)
                   + func(-2, m)) / (12 * h)
            sym = func(0, m + 1)
            assert abs(num - sym) / abs(sym) < mpf("1e-20"), m


def _wright_series_oracle(a, b, x, terms=200):
    # direct definition with mpmath's own rgamma
    total = mpf(0)
    sign = 1
    xp = mpf(1)
    fact = mpf(1)
    for j in range(terms):
        total += sign * xp / fact * mp.rgamma(a + b * j)
        sign = -sign
        xp *= x
        fact *= j + 1
    return total


def test_wright_bessel_matches_series_oracle():
    with mp.workdps(60):
        for a, b, x in ((mpf(1), mpf(1), mpf("2.5")),
                        (mpf("1.3"), mpf("0.5"), mpf("4.0")),
                        (mpf("0.7"), mpf("2.0"), mpf("1.1")),
                        (mpf("1.0"), mpf("0.37"), mpf("3.0"))):
            ours = wright_bessel(a, b, x, dps=50)
            ref = _wright_series_oracle(a, b, x)
            assert abs(ours - ref) / abs(ref) < TOL, (a, b, x)


def test_wright_bessel_classical_reduction():
    # J_{1,1}(x) = sum (-x)^j / (j!)^2 = J_0(2 sqrt(x))
    with mp.workdps(60):
        for x in (mpf("0.5"), mpf(2), mpf(9)):
            ours = wright_bessel(1, 1, x, dps=50)
            ref = mp.besselj(0, 2 * mp.sqrt(x))
            assert abs(ours - ref) / abs(ref) < TOL, x


def test_wright_bessel_fast_and_generic_paths_agree():
    # b = 1/2 takes the two-stream recurrence; b = 0.5 + 1e-13 falls through
    # to per-term rgamma, and the two must agree to the step perturbation
    with mp.workdps(40):
        v_fast = wright_bessel(mpf("1.2"), mpf("0.5"), mpf(3), dps=30)
        v_slow = wright_bessel(mpf("1.2"), mpf("0.5") + mpf("1e-25"), mpf(3), dps=30)
        assert abs(v_fast - v_slow) / abs(v_fast) < mpf("1e-22")


def test_resonance_distance_and_guard():
    assert resonance_distance(0.3) == pytest.approx(0.4)
    assert resonance_distance(-0.4) == pytest.approx(0.2)
    for bad in (0, 0.5, 1, -0.5, 2.0000000001):
        with pytest.raises(ResonantParameterError):
            check_nonresonant(bad)
    check_nonresonant(0.3)  # no raise
    with pytest.raises(ResonantParameterError):
        frobenius_forward(1.0, 0.5, dps=30)
    with pytest.raises(ResonantParameterError):
        frobenius_adjoint(-0.5, 0.5, dps=30)


def _theta3_residual(alpha, z, sols_fn, sign):
    """Residual of theta(theta -+ a)(theta -+ a - 1/2) f = +-z f per basis
    element, with theta^3 f from a 5-point stencil over theta^2 f."""
    a = mpf(alpha)
    h = mpf("1e-6")

    def triples(k):
        return sols_fn(alpha, z * mp.exp(k * h))

    t0 = triples(0)
    tp1, tp2, tm1, tm2 = triples(1), triples(2), triples(-1), triples(-2)
    resids = []
    for i in range(3):
        f, tf, t2f = t0[i]
        t3f = (-tp2[i][2] + 8 * tp1[i][2] - 8 * tm1[i][2] + tm2[i][2]) / (12 * h)
        lhs = t3f + sign * (2 * a + mpf("0.5")) * t2f + a * (a + mpf("0.5")) * tf
        rhs = -sign * z * f
        resids.append(abs(lhs - rhs) / max(abs(rhs), mpf(1)))
    return resids


def test_frobenius_forward_satisfies_ode():
    with mp.workdps(60):
        resids = _theta3_residual(
            mpf("0.3"), mpf("0.8"),
            lambda a, zz: frobenius_forward(a, zz, dps=50, with_theta=True),
            sign=+1)
        for r in resids:
            assert r < mpf("1e-19"), resids


def test_frobenius_adjoint_satisfies_ode():
    with mp.workdps(60):
        resids = _theta3_residual(
            mpf("-0.4"), mpf("1.3"),
            lambda a, zz: frobenius_adjoint(a, zz, dps=50, with_theta=True),
            sign=-1)
        for r in resids:
            assert r < mpf("1e-19"), resids


def test_frobenius_indices_at_origin():
    # solution j behaves like z^{index_j} (1 + O(z)) as z -> 0
    a = mpf("0.3")
    z = mpf("1e-10")
    with mp.workdps(60):
        fwd = frobenius_forward(a, z, dps=40)
        for val, idx in zip(fwd, (mpf(0), -a, -a - mpf("0.5"))):
            lead = val * mp.power(z, -idx)
            assert abs(lead - 1) < mpf("1e-9"), idx
        adj = frobenius_adjoint(a, z, dps=40)
        for val, idx in zip(adj, (mpf(0), a, a + mpf("0.5"))):
            lead = val * mp.power(z, -idx)
            assert abs(lead - 1) < mpf("1e-9"), idx


def test_frobenius_bases_wronskian_structure():
    # the three forward solutions are independent: the matrix of
    # (f, theta f, theta^2 f) columns has determinant bounded away from 0
    rng = np.random.default_rng(31)
    with mp.workdps(50):
        for _ in range(4):
            a = mpf(float(rng.uniform(-0.45, 1.2)))
            if resonance_distance(a) < 0.05:
                continue
            z = mpf(float(rng.uniform(0.2, 2.0)))
            tr = frobenius_forward(a, z, dps=40, with_theta=True)
            det = (
                tr[0][0] * (tr[1][1] * tr[2][2] - tr[1][2] * tr[2][1])
                - tr[1][0] * (tr[0][1] * tr[2][2] - tr[0][2] * tr[2][1])
                + tr[2][0] * (tr[0][1] * tr[1][2] - tr[0][2] * tr[1][1]))
            assert abs(det) > mpf("1e-8"), (a, z)
