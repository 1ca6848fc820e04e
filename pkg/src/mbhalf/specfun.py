"""Entire hypergeometric building blocks.

Provides the generalized hypergeometric series 0F2 (plus term-wise
theta-derivatives, theta = z d/dz), Wright's generalized Bessel function,
and the Frobenius solution triples of the two third-order model equations

    theta (theta + a)(theta + a + 1/2) phi + z phi = 0     (forward)
    theta (theta - a)(theta - a - 1/2) psi - z psi = 0     (adjoint)

that govern the hard-edge model problem at theta-parameter 1/2.

All series are entire, but their terms oscillate in sign and can grow by
exp(O(|z|^{1/3})) before decaying, so evaluation runs at a cancellation-
guarded working precision and the stopping rule requires 30 consecutive
negligible terms.
"""

from __future__ import annotations

import math

from mpmath import mp, mpf, mpc

from .mpcore import _resolve_dps, gamma, rgamma

RESONANCE_TOL = 1e-6

#: consecutive sub-threshold terms required before a series is declared done
STOP_RUN = 30

_MAX_TERMS = 20000


class ResonantParameterError(ValueError):
    """2*alpha is (numerically) an integer; the Frobenius bases degenerate."""


def resonance_distance(alpha):
    """Distance of 2*alpha from the integers (as a float)."""
    two = 2.0 * float(alpha)
    return abs(two - round(two))


def check_nonresonant(alpha):
    if resonance_distance(alpha) < RESONANCE_TOL:
        raise ResonantParameterError(
            f"2*alpha = {2 * float(alpha)} is within {RESONANCE_TOL} of an "
            "integer; use the contour-integral route instead")


def _series_guard(radius, growth_power):
    """Extra digits to absorb cancellation in an entire series.

    ``growth_power`` is the exponent p such that the largest term scales
    like exp(c * radius^p); for 0F2, p = 1/3 and c <= 3, and the value can
    be as small as exp(-3 radius^{1/3}), so ~2.2 r^{1/3} digits vanish.
    """
    r = float(radius)
    if r <= 1:
        return 12
    return int(2.4 * r ** growth_power) + 12


def _check_lower_param(b):
    bf = float(b)
    if abs(bf - round(bf)) < 1e-9 and round(bf) <= 0:
        raise ValueError(f"lower 0F2 parameter {bf} is a nonpositive integer")


def hyper0f2_theta(b1, b2, z, c=0, dps=None):
    """(S0, S1, S2) with S_m = sum_k (c+k)^m z^k / ((b1)_k (b2)_k k!).

    S0 is 0F2(-; b1, b2; z); S1 and S2 are the term-wise theta and theta^2
    sums for a solution z^c * 0F2(...), so that theta^m [z^c F] =
    z^c * S_m.  Raising ``c`` costs nothing extra: the weights multiply
    term by term.

    Retries once at raised precision if the observed term growth exceeded
    the cancellation guard.
    """
    d = _resolve_dps(dps)
    guard = _series_guard(abs(z), 1.0 / 3.0)
    _check_lower_param(b1)
    _check_lower_param(b2)
    for attempt in range(2):
        wp = d + guard
        with mp.workdps(wp):
            zz = mpc(z)
            bb1, bb2, cc = mpf(b1), mpf(b2), mpf(c)
            term = mpc(1)
            s0 = mpc(1)
            s1 = cc * 1
            s2 = cc * cc
            maxmag = mpf(1)
            stop_eps = mpf(10) ** (-(d + 5))
            run = 0
            k = 0
            while k < _MAX_TERMS:
                term = term * zz / ((bb1 + k) * (bb2 + k) * (k + 1))
                k += 1
                w = cc + k
                s0 += term
                s1 += w * term
                s2 += w * w * term
                t = abs(term)
                if t > maxmag:
                    maxmag = t
                if t <= stop_eps * (abs(s0) or mpf(1)):
                    run += 1
                    if run >= STOP_RUN:
                        break
                else:
                    run = 0
            lost = 0.0
            if abs(s0) > 0:
                lost = float(mp.log10(maxmag / abs(s0)))
            if lost > guard - 8 and attempt == 0:
                guard = int(lost) + 15
                continue
            return +s0, +s1, +s2
    raise RuntimeError("unreachable")


def hyper0f2(b1, b2, z, dps=None):
    """0F2(-; b1, b2; z); entire in z."""
    return hyper0f2_theta(b1, b2, z, dps=dps)[0]


def wright_bessel(a, b, x, dps=None):
    """Wright's generalized Bessel J_{a,b}(x) = sum_j (-x)^j / (j! Gamma(a+bj)).

    For a > 0 with 2b a positive integer (the cases 1/theta = 2, theta = 1/2
    and the classical b = 1) the reciprocal-gamma factors are advanced by
    integer-step product recurrences, two interleaved streams for
    half-integer b.  Otherwise each term pays one reciprocal gamma, with
    poles contributing 0.
    """
    d = _resolve_dps(dps)
    bf = float(b)
    guard = _series_guard(abs(x), 1.0 / (1.0 + max(bf, 0.1)))
    wp = d + guard
    with mp.workdps(wp):
        xx = mpc(x) if isinstance(x, (complex, mpc)) else mpf(x)
        aa, bb = mpf(a), mpf(b)
        stop_eps = mpf(10) ** (-(d + 5))
        twob = 2.0 * bf
        fast = (float(a) > 0 and abs(twob - round(twob)) < 1e-12
                and round(twob) >= 1)
        total = mpc(0) if isinstance(xx, mpc) else mpf(0)
        maxmag = mpf(0)
        if fast:
            p = int(round(twob))  # gamma argument advances by p per 2 terms
            # streams over even/odd j; each stream's gamma argument steps by p
            for start, arg0 in ((0, aa), (1, aa + bb)):
                rg = rgamma(arg0, dps=wp)
                # term_j = (-x)^j / j! * rg, j = start, start+2, ...
                j = start
                numer = (-xx) ** start
                factorial = mpf(math.factorial(start))
                run = 0
                while j < _MAX_TERMS:
                    term = numer / factorial * rg
                    total += term
                    t = abs(term)
                    if t > maxmag:
                        maxmag = t
                    if t <= stop_eps * (abs(total) or mpf(1)):
                        run += 1
                        if run >= STOP_RUN:
                            break
                    else:
                        run = 0
                    # advance j by 2 within the stream
                    numer *= xx * xx
                    factorial *= (j + 1) * (j + 2)
                    base = arg0 + bb * (j - start)
                    prod = mpf(1)
                    for i in range(p):
                        prod *= base + i
                    rg = rg / prod
                    j += 2
        else:
            run = 0
            numer = mpf(1) if not isinstance(xx, mpc) else mpc(1)
            factorial = mpf(1)
            for j in range(_MAX_TERMS):
                term = numer / factorial * rgamma(aa + bb * j, dps=wp)
                total += term
                t = abs(term)
                if t > maxmag:
                    maxmag = t
                if t <= stop_eps * (abs(total) or mpf(1)):
                    run += 1
                    if run >= STOP_RUN:
                        break
                else:
                    run = 0
                numer *= -xx
                factorial *= j + 1
        return +total


def _triple_with_prefactor(z, c, inner, dps):
    """z^c * (S0, S1, S2) with the power on the principal branch."""
    with mp.workdps(dps):
        pref = mp.exp(mpf(c) * mp.log(mpc(z)))
        return tuple(+(pref * s) for s in inner)


def frobenius_forward(alpha, z, dps=None, with_theta=False):
    """Frobenius basis of theta(theta+a)(theta+a+1/2) phi = -z phi.

    Indices at 0 are 0, -a, -a-1/2:

        0F2(-; 1+a, 3/2+a; -z)
        z^{-a}     0F2(-; 1-a, 3/2; -z)
        z^{-a-1/2} 0F2(-; 1/2-a, 1/2; -z)

    Principal branches.  With ``with_theta`` each entry is the triple
    (f, theta f, theta^2 f).
    """
    check_nonresonant(alpha)
    d = _resolve_dps(dps)
    a = mpf(alpha)
    wp = d + 10
    sols = []
    for (b1, b2, c) in (
        (1 + a, mpf("1.5") + a, mpf(0)),
        (1 - a, mpf("1.5"), -a),
        (mpf("0.5") - a, mpf("0.5"), -a - mpf("0.5")),
    ):
        inner = hyper0f2_theta(b1, b2, -mpc(z), c=c, dps=d)
        sols.append(_triple_with_prefactor(z, c, inner, wp))
    if with_theta:
        return sols
    return [s[0] for s in sols]


def frobenius_adjoint(alpha, z, dps=None, with_theta=False):
    """Frobenius basis of theta(theta-a)(theta-a-1/2) psi = z psi.

    Indices at 0 are 0, a, a+1/2.  The indicial recursion
    c_m (c+m)(c+m-a)(c+m-a-1/2) = c_{m-1} forces

        0F2(-; 1-a, 1/2-a; z)
        z^a       0F2(-; 1+a, 1/2; z)
        z^{a+1/2} 0F2(-; 3/2+a, 3/2; z)

    (equivalently: the forward basis under a -> -a-1/2, z -> -z).
    """
    check_nonresonant(alpha)
    d = _resolve_dps(dps)
    a = mpf(alpha)
    wp = d + 10
    sols = []
    for (b1, b2, c) in (
        (1 - a, mpf("0.5") - a, mpf(0)),
        (1 + a, mpf("0.5"), a),
        (mpf("1.5") + a, mpf("1.5"), a + mpf("0.5")),
    ):
        inner = hyper0f2_theta(b1, b2, mpc(z), c=c, dps=d)
        sols.append(_triple_with_prefactor(z, c, inner, wp))
    if with_theta:
        return sols
    return [s[0] for s in sols]
