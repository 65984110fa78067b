"""Scalar special functions: erfc, J0, log-gamma and the principal Lambert W.

Each routine pairs a convergent expansion with an asymptotic or
continued-fraction form and switches at a fixed point; everything is built
on binary64 arithmetic from :mod:`math`.
"""

import math

from .errors import ConvergenceError, DomainError

__all__ = ["erfc", "bessel_j0", "log_gamma", "stirling_remainder", "lambert_w0"]

_SQRT_PI = math.sqrt(math.pi)
_INV_E = math.exp(-1.0)

# switch points
_ERFC_CF_FROM = 2.0
_J0_HANKEL_FROM = 25.0
_LGAMMA_STIRLING_FROM = 15.0


def _check_real(x, name="x"):
    x = float(x)
    if math.isnan(x):
        raise DomainError(f"{name} is NaN")
    return x


def erfc(x):
    """Complementary error function ``(2/sqrt(pi)) * int_x^inf exp(-u^2) du``."""
    x = _check_real(x)
    if x < 0.0:
        return 2.0 - erfc(-x)
    if x == math.inf:
        return 0.0
    if x < _ERFC_CF_FROM:
        return 1.0 - _erf_series(x)
    return _erfc_continued_fraction(x)


def _erf_series(x):
    # erf(x) = 2/sqrt(pi) exp(-x^2) sum_k 2^k x^(2k+1) / (2k+1)!!  (all terms positive)
    x2 = x * x
    term = x
    total = x
    k = 0
    while term > 1e-17 * total:
        k += 1
        term *= 2.0 * x2 / (2 * k + 1)
        total += term
    return 2.0 / _SQRT_PI * math.exp(-x2) * total


def _erfc_continued_fraction(x):
    # erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), modified Lentz
    tiny = 1e-300
    f = x
    c = x
    d = 0.0
    for k in range(1, 5000):
        a = 0.5 * k
        d = x + a * d
        d = tiny if d == 0.0 else d
        c = x + a / c
        c = tiny if c == 0.0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return math.exp(-x * x) / (_SQRT_PI * f)
    raise ConvergenceError("erfc continued fraction did not converge", partial=f)


def bessel_j0(x):
    """Bessel function of the first kind of order zero."""
    x = abs(_check_real(x))
    if x == math.inf:
        return 0.0
    if x < 1e-8:
        return 1.0 - 0.25 * x * x
    if x < _J0_HANKEL_FROM:
        return _j0_miller(x)
    return _j0_hankel(x)


def _j0_miller(x):
    # Backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalised by
    # J_0 + 2 sum_k J_{2k} = 1.
    start = 2 * (int(x + 20.0 + 4.0 * math.sqrt(10.0 * x)) // 2)
    j_next = 0.0
    j_cur = 1e-300
    norm = 0.0
    for k in range(start, 0, -1):
        j_prev = 2.0 * k / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
    norm += j_cur
    return j_cur / norm


def _j0_hankel(x):
    # J0 = sqrt(2/(pi x)) (P cos(x - pi/4) - Q sin(x - pi/4))
    p = 1.0
    q = 0.0
    term = 1.0
    k = 0
    while True:
        k += 1
        new = term * -((2 * k - 1) ** 2) / (8.0 * k * x)
        if abs(new) > abs(term) or abs(new) < 1e-17:
            break
        term = new
        if k % 2:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += term if (k // 2) % 2 == 0 else -term
    s, c = math.sin(x), math.cos(x)
    cos_w = (c + s) / math.sqrt(2.0)
    sin_w = (s - c) / math.sqrt(2.0)
    return math.sqrt(2.0 / (math.pi * x)) * (p * cos_w - q * sin_w)


_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    x = _check_real(x)
    if x <= 0.0:
        raise DomainError(f"log_gamma needs x > 0, got {x}")
    if x == 1.0 or x == 2.0:
        return 0.0
    # Gamma(x) = Gamma(x + k) / (x (x+1) ... (x+k-1)); one log of the product
    product = 1.0
    while x < _LGAMMA_STIRLING_FROM:
        product *= x
        x += 1.0
    return (x - 0.5) * math.log(x) - x + 0.5 * math.log(2.0 * math.pi) + _stirling_series(x) - math.log(product)


def _stirling_series(x):
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv
    for coeff in _STIRLING:
        series += coeff * power
        power *= inv2
    return series


def stirling_remainder(x):
    """``log_gamma(x) - [(x - 1/2) log x - x + log(2 pi)/2]`` without cancellation.

    Useful when ``x`` is so large that subtracting the leading terms from
    ``log_gamma`` would lose most of the digits.
    """
    x = _check_real(x)
    if x <= 0.0:
        raise DomainError(f"stirling_remainder needs x > 0, got {x}")
    if x >= _LGAMMA_STIRLING_FROM:
        return _stirling_series(x)
    return log_gamma(x) - ((x - 0.5) * math.log(x) - x + 0.5 * math.log(2.0 * math.pi))


def lambert_w0(z, max_iter=50):
    """Principal branch of Lambert W: the ``w >= -1`` solving ``w*exp(w) = z``.

    Halley iteration from a branch-point series (near ``-1/e``), ``log1p`` (moderate
    ``z``) or the two-term asymptotic ``log z - log log z`` (large ``z``).
    """
    z = _check_real(z, "z")
    branch = -_INV_E
    if z < branch:
        # tolerate the rounding of -1/e itself
        if z > branch - 4e-17:
            return -1.0
        raise DomainError(f"lambert_w0 needs z >= -1/e, got {z}")
    if z == 0.0:
        return 0.0
    if z == math.inf:
        return math.inf
    if z == branch:
        return -1.0

    if z < -0.25:
        p = math.sqrt(max(0.0, 2.0 * (math.e * z + 1.0)))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    elif z < 3.0:
        w = math.log1p(z)
    else:
        l1 = math.log(z)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1

    scale = max(1.0, abs(z))
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0.0 or abs(f) <= 2e-16 * scale:
            return w
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w_new = w - step
        if w_new < -1.0:
            w_new = -1.0 + 0.5 * (w + 1.0)
        if abs(w_new - w) <= 1e-15 * max(1.0, abs(w_new)):
            return w_new
        w = w_new
    raise ConvergenceError(f"Halley iteration for W({z}) did not converge", partial=w)
