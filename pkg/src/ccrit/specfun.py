r"""Real special functions used throughout the package.

Gamma comes from :func:`math.gamma`, the modified Bessel function of the
second kind from :func:`scipy.special.kv` (with exact closed forms at
half-integer order), and the Riemann zeta function is evaluated here by
Euler-Maclaurin summation with the pole at :math:`s = 1` split off, plus the
functional equation for :math:`s < 0`.

All functions are real-valued and raise a :class:`~ccrit.errors.CcritError`
subclass instead of returning NaN outside their domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import CcritDomainError, PoleError

EULER_GAMMA = 0.5772156649015329

# Bernoulli numbers B_2, B_4, ..., B_28 divided by (2k)!.
_BERNOULLI_OVER_FACTORIAL = tuple(
    float(b) / math.factorial(2 * k)
    for k, b in enumerate(special.bernoulli(28)[2::2], start=1)
)
_EM_CUTOFF = 16
_BESSEL_MAX_ORDER = 60.0


@dataclass(frozen=True)
class SeriesValue:
    """A truncated sum together with an absolute truncation-error bound."""

    value: float
    error_bound: float
    terms_used: int

    def __post_init__(self):
        if not (math.isfinite(self.error_bound) and self.error_bound >= 0.0):
            raise ValueError(f"error_bound must be finite and >= 0, got {self.error_bound}")
        if self.terms_used < 0:
            raise ValueError("terms_used must be nonnegative")

    def __float__(self):
        return float(self.value)

    def as_dict(self):
        return {"value": self.value, "error_bound": self.error_bound,
                "terms_used": self.terms_used}


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule shared by every infinite sum.

    A sum stops once its error bound is below ``max(abs_tol, rel_tol*|value|)``.
    ``max_index`` caps the largest index reached along any summation axis;
    hitting it first raises :class:`~ccrit.errors.BudgetError`.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-15
    max_index: int = 100_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if int(self.max_index) != self.max_index or self.max_index < 2:
            raise ValueError(f"max_index must be an integer >= 2, got {self.max_index}")

    def target(self, scale):
        """Absolute tolerance for a sum whose magnitude is about ``scale``."""
        return max(self.abs_tol, self.rel_tol * abs(scale))


def _is_nonpositive_integer(x):
    return x <= 0 and x == math.floor(x)


def gamma(x):
    """Gamma function for real ``x`` that is not a pole."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError("Gamma", x)
    return math.gamma(x)


def rgamma(x):
    """Reciprocal Gamma function; exactly zero at the poles of Gamma."""
    x = float(x)
    if _is_nonpositive_integer(x):
        return 0.0
    return 1.0 / math.gamma(x)


def digamma(x):
    if _is_nonpositive_integer(float(x)):
        raise PoleError("digamma", x)
    return float(special.psi(x))


def euler_gamma():
    return EULER_GAMMA


def _zeta_finite_part(s):
    """zeta(s) - 1/(s - 1) by Euler-Maclaurin with cutoff N; valid for s > -1."""
    n = _EM_CUTOFF
    terms = [k ** -s for k in range(1, n)]
    log_n = math.log(n)
    x = (1.0 - s) * log_n
    # (N^(1-s) - 1)/(s - 1), continuous through s = 1
    terms.append(-log_n * (math.expm1(x) / x if x != 0.0 else 1.0))
    n_pow = n ** -s
    terms.append(0.5 * n_pow)
    rising = s  # (s)_(2k-1)
    power = n_pow / n  # N^(-s-2k+1) at k = 1
    for k, coeff in enumerate(_BERNOULLI_OVER_FACTORIAL, start=1):
        terms.append(coeff * rising * power)
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= n * n
    return math.fsum(terms)


def zeta_minus_pole(s):
    r"""Return :math:`\zeta(s) - 1/(s-1)` for :math:`|s - 1| < 1/2`.

    The pole is removed analytically, so the function is smooth through
    ``s = 1`` where it equals the Euler-Mascheroni constant.
    """
    s = float(s)
    if not abs(s - 1.0) < 0.5:
        raise CcritDomainError(f"zeta_minus_pole requires |s - 1| < 1/2, got s = {s}")
    return _zeta_finite_part(s)


def riemann_zeta(s):
    """Riemann zeta function on the real line, s != 1."""
    s = float(s)
    if s == 1.0:
        raise PoleError("zeta", s)
    if s >= 0.0:
        if s > 60.0:
            return 1.0 + 2.0 ** -s + 3.0 ** -s
        return _zeta_finite_part(s) + 1.0 / (s - 1.0)
    # functional equation: zeta(s) = Gamma((1-s)/2)/Gamma(s/2) pi^(s-1/2) zeta(1-s)
    return (math.gamma(0.5 * (1.0 - s)) * rgamma(0.5 * s)
            * math.pi ** (s - 0.5) * riemann_zeta(1.0 - s))


def _half_integer_k(n, z):
    """K_{n+1/2}(z) from the terminating closed form."""
    coeffs = [math.factorial(n + k) / (math.factorial(k) * math.factorial(n - k))
              for k in range(n + 1)]
    t = 0.5 / z
    poly = np.zeros_like(z)
    for c in reversed(coeffs):
        poly = poly * t + c
    return np.sqrt(0.5 * math.pi / z) * np.exp(-z) * poly


def bessel_k(nu, z):
    r"""Modified Bessel function of the second kind :math:`K_\nu(z)`.

    Parameters
    ----------
    nu : float
        Real order with ``|nu| <= 60``; :math:`K_{-\nu} = K_\nu` is used.
    z : float or array_like
        Positive argument(s).

    Returns
    -------
    float or ndarray
        Values of :math:`K_\nu(z)`. Beyond ``z ~ 700`` the result underflows
        to 0, which is below any absolute tolerance the callers use.

    Raises
    ------
    CcritDomainError
        For ``z <= 0``, ``|nu| > 60`` or a result that overflows.
    """
    nu = abs(float(nu))
    if nu < 1e-8:
        # K is even in nu, so this costs O(nu^2); kv misbehaves at denormal orders
        nu = 0.0
    if nu > _BESSEL_MAX_ORDER:
        raise CcritDomainError(f"bessel_k order |nu| <= {_BESSEL_MAX_ORDER:g} required, got {nu}")
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=float)
    if z.size and not np.all(z > 0.0):
        raise CcritDomainError("bessel_k requires z > 0")
    twice = 2.0 * nu
    if twice == math.floor(twice) and twice % 2 == 1:
        out = _half_integer_k(int(nu - 0.5), z)
    else:
        out = special.kv(nu, z)
    if z.size and not np.all(np.isfinite(out)):
        raise CcritDomainError(f"bessel_k({nu}, z) overflows for the smallest z = {z.min()}")
    return float(out) if scalar else out
