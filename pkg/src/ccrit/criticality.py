r"""Size-dependent critical temperatures of films, wires and grains.

In three dimensions the critical temperature of a sample with linear size
``L`` follows the linear law

.. math:: T_c(L) = T_0 - C_d \frac{\lambda}{\alpha L}

with ``d`` the number of confined directions.  The constants are

.. math::
    C_1 = \frac{6\gamma}{\pi},\qquad
    C_2 = \frac{9\gamma}{\pi} + \frac{12}{\pi}\sum K_0(2\pi n_1 n_2),

    C_3 = 1 + \frac{9\gamma}{\pi} + \frac{12}{\pi}\sum\frac{e^{-2\pi n_1n_2}}{n_1}
          + \frac{48}{\pi}\sum K_0(2\pi n_1n_2)
          + \frac{48}{\pi}\sum K_0\big(2\pi n_1\sqrt{n_2^2+n_3^2}\big),

all sums over positive integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CcritDomainError
from .lattice_sums import w_d
from .specfun import (
    EULER_GAMMA, SeriesValue, TruncationPolicy, bessel_k, digamma, gamma, riemann_zeta,
    zeta_minus_pole,
)

# Published reference values, reported side by side with the computed ones.
PUBLISHED_C1 = 1.1024
PUBLISHED_C2 = 1.6571
PUBLISHED_C3 = 2.6757
PUBLISHED_C3_ALT = 2.7657

_SQRT_PI = math.sqrt(math.pi)
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GLParams:
    """Ginzburg-Landau material parameters, with ``m0^2 = alpha (T - t0)``."""

    alpha: float
    coupling: float
    t0: float

    def __post_init__(self):
        for name in ("alpha", "coupling", "t0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise CcritDomainError(f"{name} must be finite and > 0, got {v}")


_KIND_LENGTHS = {"film": 1, "wire": 2, "grain": 3}


@dataclass(frozen=True)
class Geometry:
    """A film (one length), wire (two) or grain (three)."""

    kind: str
    lengths: tuple

    def __post_init__(self):
        if self.kind not in _KIND_LENGTHS:
            raise CcritDomainError(f"kind must be film, wire or grain, got {self.kind!r}")
        lengths = tuple(float(x) for x in self.lengths)
        object.__setattr__(self, "lengths", lengths)
        if len(lengths) != _KIND_LENGTHS[self.kind]:
            raise CcritDomainError(
                f"{self.kind} takes {_KIND_LENGTHS[self.kind]} lengths, got {len(lengths)}")
        if not all(math.isfinite(x) and x > 0.0 for x in lengths):
            raise CcritDomainError(f"lengths must be finite and > 0, got {lengths}")

    @property
    def is_regular(self):
        """True for the film, the square wire and the cube."""
        return len(set(self.lengths)) == 1


@dataclass(frozen=True)
class CriticalResult:
    """Critical temperature with the constant used and the minimal size.

    ``tc`` may be negative, meaning no transition at that size.
    """

    tc: float
    c_constant: float
    min_size: float
    transition_exists: bool

    def as_dict(self):
        return {"tc": self.tc, "c_constant": self.c_constant, "min_size": self.min_size,
                "transition_exists": self.transition_exists}


# --------------------------------------------------------------------------
# constants


def hyperbolic_sum(func, target=1e-15):
    r"""Sum of ``func(n1, n2)`` over positive integers, enumerated by ``k = n1 n2``.

    ``func`` must be vectorised and bounded by :math:`\frac12 k^{-1/2} e^{-2\pi k}`
    times ``k`` (true for both summands used here).  Stops at the first
    ``k`` whose tail bound :math:`\sum_{j>k} \frac12 j^{1/2} e^{-2\pi j}` is
    below ``target``.
    """
    partials = []
    k = 0
    while True:
        k += 1
        n1 = np.array([n for n in range(1, k + 1) if k % n == 0], dtype=float)
        partials.append(float(np.sum(func(n1, k / n1))))
        j = k + 1
        tail = 0.5 * math.sqrt(j) * math.exp(-_TWO_PI * j) / (1.0 - math.sqrt(2.0) * math.exp(-_TWO_PI))
        if tail <= target:
            return SeriesValue(math.fsum(partials), tail, k)


def k0_hyperbolic_sum(t=TruncationPolicy()):
    """Sum of K_0(2 pi n1 n2) over n1, n2 >= 1."""
    return hyperbolic_sum(lambda a, b: bessel_k(0, _TWO_PI * a * b), t.abs_tol)


def exp_over_n_sum(t=TruncationPolicy()):
    """Sum of exp(-2 pi n1 n2) / n1 over n1, n2 >= 1."""
    return hyperbolic_sum(lambda a, b: np.exp(-_TWO_PI * a * b) / a, t.abs_tol)


def k0_cubic_sum(t=TruncationPolicy()):
    """Sum of K_0(2 pi n1 sqrt(n2^2 + n3^2)); one third of W_3(0; 1, 1, 1)."""
    w = w_d(0.0, (1.0, 1.0, 1.0), t)
    return SeriesValue(w.value / 3.0, w.error_bound / 3.0, w.terms_used)


def c1_constant():
    """C_1 = 6 gamma / pi."""
    return 6.0 * EULER_GAMMA / math.pi


def c2_constant(t=TruncationPolicy()):
    """C_2 = 9 gamma / pi + (12 / pi) sum K_0(2 pi n1 n2)."""
    k = k0_hyperbolic_sum(t)
    value = math.fsum([9.0 * EULER_GAMMA / math.pi, 12.0 / math.pi * k.value])
    return SeriesValue(value, 12.0 / math.pi * k.error_bound, k.terms_used)


def c3_parts(t=TruncationPolicy()):
    """The five addends of C_3 as a name -> SeriesValue mapping."""
    e = exp_over_n_sum(t)
    k2 = k0_hyperbolic_sum(t)
    k3 = k0_cubic_sum(t)

    def scaled(c, s):
        return SeriesValue(c * s.value, c * s.error_bound, s.terms_used)

    return {
        "one": SeriesValue(1.0, 0.0, 1),
        "gamma": SeriesValue(9.0 * EULER_GAMMA / math.pi, 0.0, 1),
        "exp_sum": scaled(12.0 / math.pi, e),
        "k0_pair": scaled(48.0 / math.pi, k2),
        "k0_triple": scaled(48.0 / math.pi, k3),
    }


def c3_constant(t=TruncationPolicy()):
    """C_3 from its four-part lattice expression."""
    parts = c3_parts(t).values()
    return SeriesValue(math.fsum(p.value for p in parts), sum(p.error_bound for p in parts),
                       sum(p.terms_used for p in parts))


# --------------------------------------------------------------------------
# critical temperatures


def _linear_law(g, c, linear_size, exponent):
    min_linear = c * g.coupling / (g.alpha * g.t0)
    tc = g.t0 - c * g.coupling / (g.alpha * linear_size)
    return CriticalResult(tc, c, min_linear ** exponent, linear_size > min_linear)


def _positive(name, x):
    x = float(x)
    if not (math.isfinite(x) and x > 0.0):
        raise CcritDomainError(f"{name} must be finite and > 0, got {x}")
    return x


def tc_film(g, L):
    """T_c = T0 - C1 lambda / (alpha L); minimal thickness C1 lambda / (alpha T0)."""
    return _linear_law(g, c1_constant(), _positive("L", L), 1)


def tc_wire_square(g, area, t=TruncationPolicy()):
    """T_c = T0 - C2 lambda / (alpha sqrt(A)); minimal area (C2 lambda / alpha T0)^2."""
    side = math.sqrt(_positive("area", area))
    return _linear_law(g, c2_constant(t).value, side, 2)


def tc_grain_cubic(g, volume, t=TruncationPolicy()):
    """T_c = T0 - C3 lambda / (alpha V^(1/3)); minimal volume (C3 lambda / alpha T0)^3."""
    side = _positive("volume", volume) ** (1.0 / 3.0)
    return _linear_law(g, c3_constant(t).value, side, 3)


def wire_shift(L1, L2, t=TruncationPolicy()):
    """(9 gamma / 2 pi)(1/L1 + 1/L2) + (6 / pi) W_2(0; L1, L2)."""
    L1, L2 = _positive("L1", L1), _positive("L2", L2)
    w = w_d(0.0, (L1, L2), t)
    return math.fsum([4.5 * EULER_GAMMA / math.pi * (1.0 / L1 + 1.0 / L2),
                      6.0 / math.pi * w.value])


def tc_wire_general(g, L1, L2, t=TruncationPolicy()):
    """Rectangular-wire T_c.  Only the square case is a validated physical law.

    ``c_constant`` is the effective C with ``tc = t0 - C lambda / (alpha sqrt(L1 L2))``
    and ``min_size`` is the minimal area at fixed aspect ratio.
    """
    L1, L2 = _positive("L1", L1), _positive("L2", L2)
    if L1 == L2:
        return tc_wire_square(g, L1 * L1, t)
    shift = wire_shift(L1, L2, t)
    side = math.sqrt(L1 * L2)
    return _linear_law(g, shift * side, side, 2)


def tc_for(g, geometry, t=TruncationPolicy()):
    """Dispatch on a :class:`Geometry`; wires and grains must be regular."""
    if geometry.kind == "film":
        return tc_film(g, geometry.lengths[0])
    if not geometry.is_regular:
        if geometry.kind == "wire":
            return tc_wire_general(g, *geometry.lengths, t=t)
        raise CcritDomainError("only the cubic grain has a closed-form T_c")
    if geometry.kind == "wire":
        return tc_wire_square(g, geometry.lengths[0] ** 2, t)
    return tc_grain_cubic(g, geometry.lengths[0] ** 3, t)


# --------------------------------------------------------------------------
# pole cancellation in the wire bracket


def _bracket_frozen(L1, L2, D, t):
    """Wire bracket at D with pole-separated zeta and Gamma and regular factors at D = 3."""
    eps = D - 3.0
    s = 1.0 / L1 + 1.0 / L2
    # Gamma((D-2)/2) zeta(D-2) -> sqrt(pi) (1/eps + finite part)
    first = s * _SQRT_PI * (1.0 / eps + zeta_minus_pole(D - 2.0))
    # sqrt(pi) Gamma((D-3)/2) zeta(D-3) -> sqrt(pi) (2/eps + psi(1)) zeta(0)
    second = s * _SQRT_PI * (2.0 / eps + digamma(1.0)) * riemann_zeta(0.0)
    w = w_d(0.5 * eps, (L1, L2), t)
    return math.fsum([first, second, 2.0 * _SQRT_PI * w.value])


def _bracket_exact(L1, L2, D, t):
    """Wire bracket at D with every factor kept at its exact D-dependent value."""
    first = (L1 ** (2.0 - D) + L2 ** (2.0 - D)) * gamma(0.5 * (D - 2.0)) * riemann_zeta(D - 2.0)
    second = (_SQRT_PI * (1.0 / (L1 * L2 ** (D - 3.0)) + 1.0 / (L1 ** (D - 3.0) * L2))
              * gamma(0.5 * (D - 3.0)) * riemann_zeta(D - 3.0))
    w = w_d(0.5 * (D - 3.0), (L1, L2), t)
    return math.fsum([first, second, 2.0 * _SQRT_PI * w.value])


def _check_eps(eps):
    eps = float(eps)
    if not 0.0 < eps <= 1e-2:
        raise CcritDomainError(f"eps must lie in (0, 1e-2], got {eps}")
    return eps


def bracket_pole_cancellation(L1, L2, eps, t=TruncationPolicy()):
    r"""Two-sided average of the wire bracket at ``D = 3 +- eps``.

    The bracket is

    .. math::
        S\,\Gamma(\tfrac{D-2}{2})\zeta(D-2)
        + \sqrt\pi S\,\Gamma(\tfrac{D-3}{2})\zeta(D-3)
        + 2\sqrt\pi W_2(\tfrac{D-3}{2}; L_1, L_2),\qquad S = \tfrac1{L_1}+\tfrac1{L_2},

    with :math:`\zeta(D-2) = 1/(D-3) + [\zeta(D-2) - 1/(D-3)]` and
    :math:`\Gamma(\frac{D-3}{2}) \approx 2/(D-3) + \psi(1)`; the remaining
    factors take their ``D = 3`` values.  The two simple poles cancel and
    the average tends to :math:`\tfrac32\gamma\sqrt\pi S + 2\sqrt\pi W_2(0)`.
    """
    eps = _check_eps(eps)
    L1, L2 = _positive("L1", L1), _positive("L2", L2)
    return 0.5 * (_bracket_frozen(L1, L2, 3.0 + eps, t) + _bracket_frozen(L1, L2, 3.0 - eps, t))


def bracket_residual(L1, L2, eps, t=TruncationPolicy()):
    """Half the gap between the bracket values at D = 3 + eps and D = 3 - eps."""
    eps = _check_eps(eps)
    return 0.5 * abs(_bracket_frozen(L1, L2, 3.0 + eps, t) - _bracket_frozen(L1, L2, 3.0 - eps, t))


@dataclass(frozen=True)
class BracketLimit:
    """Richardson-extrapolated bracket with its extrapolation residual."""

    value: float
    residual: float
    eps: tuple


def bracket_limit(L1, L2, eps=(1e-2, 1e-3), t=TruncationPolicy(), exact=False):
    """Extrapolate the two-sided bracket average to eps -> 0.

    The average is even in eps, so ``avg(eps) = B0 + a eps^2`` and two
    values fix ``B0``.  With ``exact=True`` every factor keeps its exact
    D dependence, which adds a finite logarithmic term when L1 != L2.
    """
    e1, e2 = (_check_eps(e) for e in eps)
    f = _bracket_exact if exact else _bracket_frozen

    def avg(e):
        return 0.5 * (f(L1, L2, 3.0 + e, t) + f(L1, L2, 3.0 - e, t))

    a1, a2 = avg(e1), avg(e2)
    r = (e1 / e2) ** 2
    value = (r * a2 - a1) / (r - 1.0)
    return BracketLimit(value, abs(value - a2), (e1, e2))


def wire_bracket_limit(L1, L2, t=TruncationPolicy()):
    """Closed-form D -> 3 bracket: (3 gamma / 2) sqrt(pi) S + 2 sqrt(pi) W_2(0; L1, L2)."""
    w = w_d(0.0, (L1, L2), t)
    return math.fsum([1.5 * EULER_GAMMA * _SQRT_PI * (1.0 / L1 + 1.0 / L2),
                      2.0 * _SQRT_PI * w.value])
