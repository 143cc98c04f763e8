r"""One-loop effective potential and the boundary-dependent gap equation.

Natural units with the mass scale set to one.  For ``d`` compactified
lengths in ``D`` dimensions the disordered-phase mass obeys

.. math::
    m^2 = m_0^2 + \frac{24\lambda}{(2\pi)^{D/2}} \sum_{J} 2^{|J|-1}
          \sum_{n_J \ge 1} \Big(\frac{m}{r_J}\Big)^{D/2-1} K_{D/2-1}(m r_J),
    \qquad r_J = |n_J \odot L_J|,

where ``J`` runs over the nonempty subsets of the compactified directions.
The ``L``-independent bulk parcel proportional to :math:`m^{D-2}` is
subtracted for every ``D``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from scipy import optimize

from .errors import CcritDomainError, NonconvergenceError, NoSolutionError, PoleError
from .lattice_sums import _subsets, orthant_bessel_sum
from .specfun import SeriesValue, TruncationPolicy, bessel_k, gamma


@dataclass(frozen=True)
class GapProblem:
    """Inputs of the gap equation.

    Attributes
    ----------
    D : float
        Space dimension (continuation parameter).
    d : int
        Number of compactified directions, 1 to 3.
    lengths : tuple of float
        The ``d`` compactification lengths.
    m0_sq : float
        Bare squared mass, e.g. ``alpha * (T - T0)``; any sign.
    coupling : float
        Renormalized quartic coupling ``lambda``; zero gives the free theory.
    s_max : int
        Order cap of the effective-potential series.
    """

    D: float = 3.0
    d: int = 1
    lengths: tuple = (1.0,)
    m0_sq: float = 0.0
    coupling: float = 0.1
    s_max: int = 8

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        object.__setattr__(self, "lengths", lengths)
        if self.d not in (1, 2, 3):
            raise CcritDomainError(f"d must be 1, 2 or 3, got {self.d}")
        if len(lengths) != self.d:
            raise CcritDomainError(f"expected {self.d} lengths, got {len(lengths)}")
        if not all(math.isfinite(x) and x > 0.0 for x in lengths):
            raise CcritDomainError(f"lengths must be finite and > 0, got {lengths}")
        if not self.D >= self.d:
            raise CcritDomainError(f"need D >= d, got D={self.D}, d={self.d}")
        if not (math.isfinite(self.coupling) and self.coupling >= 0.0):
            raise CcritDomainError(f"coupling must be >= 0, got {self.coupling}")
        if not math.isfinite(self.m0_sq):
            raise CcritDomainError("m0_sq must be finite")
        if int(self.s_max) != self.s_max or self.s_max < 1:
            raise CcritDomainError(f"s_max must be a positive integer, got {self.s_max}")


@dataclass(frozen=True)
class GapSolution:
    """Self-consistent squared mass with the gap-equation defect at that mass."""

    m_sq: float
    residual: float
    iterations: int
    correction: SeriesValue = field(default=None, compare=False)

    def as_dict(self):
        return {"m_sq": self.m_sq, "residual": self.residual, "iterations": self.iterations}


def _compactified_bracket(order, p, m, target, t):
    r"""Sum over subsets J of :math:`2^{|J|-1}\sum (m/r)^{q} K_{q}(m r)`."""
    parts, err, count = [], 0.0, 0
    subsets = list(_subsets(p.d))
    for subset in subsets:
        scales = tuple(p.lengths[i] for i in subset)
        weight = 2.0 ** (len(subset) - 1)
        pref = weight * m ** order
        s = orthant_bessel_sum(-order, m, scales, target / (len(subsets) * pref), t)
        parts.append(pref * s.value)
        err += pref * s.error_bound
        count += s.terms_used
    return SeriesValue(math.fsum(parts), err, count)


def _leading_term(order, p, m):
    """Smallest-radius summand of the single-direction sums; a lower bound of the bracket."""
    r = min(p.lengths)
    return (m / r) ** order * bessel_k(order, m * r)


def mass_correction_sum(p, m, t=TruncationPolicy()):
    r"""Bessel hierarchy of the gap equation at mass ``m``.

    Returns the square bracket only, without the :math:`24\lambda/(2\pi)^{D/2}`
    prefactor and without the bulk :math:`m^{D-2}` parcel.

    Examples
    --------
    >>> round(mass_correction_sum(GapProblem(D=3, d=1, lengths=(1.0,)), 1.0).value, 6)
    0.574864
    """
    m = float(m)
    if not m > 0.0:
        raise CcritDomainError(f"m must be > 0, got {m}")
    order = 0.5 * p.D - 1.0
    return _compactified_bracket(order, p, m, t.target(_leading_term(order, p, m)), t)


def gap_prefactor(D, coupling):
    """The factor 24 lambda / (2 pi)^(D/2) multiplying the Bessel hierarchy."""
    return 24.0 * coupling / (2.0 * math.pi) ** (0.5 * D)


def gap_defect(p, m, t=TruncationPolicy(), target=None):
    """m^2 - m0^2 - prefactor * correction(m); strictly increasing in m."""
    kappa = gap_prefactor(p.D, p.coupling)
    if kappa == 0.0:
        return m * m - p.m0_sq
    order = 0.5 * p.D - 1.0
    if target is None:
        target = t.target(_leading_term(order, p, m))
    s = _compactified_bracket(order, p, m, target, t)
    return m * m - p.m0_sq - kappa * s.value


def closed_form_gap_defect_d1_D3(m, L, m0_sq, coupling):
    """Gap defect for a film in three dimensions, from the K_{1/2} closed form."""
    return m * m - m0_sq + 6.0 * coupling / (math.pi * L) * math.log1p(-math.exp(-m * L))


def solve_gap(p, t=TruncationPolicy(), solver_tol=1e-12):
    """Solve the disordered-phase gap equation for m^2 >= 0.

    The defect is increasing in ``m``, so a sign-changing bracket is grown
    geometrically and then refined with Brent's method.

    Raises
    ------
    NoSolutionError
        If the defect is still nonnegative at the smallest mass probed, i.e.
        the system is in the ordered phase.
    NonconvergenceError
        If the final residual exceeds ``solver_tol``.
    """
    if not solver_tol > 0.0:
        raise CcritDomainError("solver_tol must be > 0")
    kappa = gap_prefactor(p.D, p.coupling)
    if kappa == 0.0:
        if p.m0_sq < 0.0:
            raise NoSolutionError("free theory with m0_sq < 0 has no disordered phase", p.m0_sq)
        return GapSolution(p.m0_sq, 0.0, 0)
    # inner sums are resolved well below the requested defect tolerance
    target = max(0.01 * solver_tol / kappa, 1e-18)

    def defect(m):
        return gap_defect(p, m, t, target)

    hi = max(1.0, 2.0 * math.sqrt(abs(p.m0_sq)))
    while defect(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e8:
            raise NonconvergenceError("could not bracket the gap root from above")
    lo = min(hi, 1.0)
    # below this mass the Bessel sums would exceed the index budget
    m_floor = 40.0 / (min(p.lengths) * t.max_index)
    f_lo = defect(lo)
    while f_lo >= 0.0:
        if lo < m_floor:
            raise NoSolutionError(
                f"gap defect is {f_lo:.6g} >= 0 at m = {lo:.3g}: no disordered-phase root",
                f_lo)
        hi, lo = lo, 0.5 * lo
        f_lo = defect(lo)
    root, info = optimize.brentq(defect, lo, hi, xtol=1e-300, rtol=1e-15,
                                 maxiter=200, full_output=True)
    residual = defect(root)
    if not abs(residual) <= solver_tol:
        raise NonconvergenceError(
            f"gap residual {residual:.3g} exceeds solver_tol {solver_tol:.3g}")
    order = 0.5 * p.D - 1.0
    corr = _compactified_bracket(order, p, root, target, t)
    return GapSolution(root * root, residual, info.iterations, corr)


def h_coefficient(D, s):
    """h(D, s) = (-1)^(s+1) / (2^(D/2+s-1) pi^(D/2) s Gamma(s))."""
    sign = 1.0 if s % 2 == 1 else -1.0
    return sign / (2.0 ** (0.5 * D + s - 1) * math.pi ** (0.5 * D) * s * math.gamma(s))


def u1_bracket(p, m, s, t=TruncationPolicy(), include_bulk=True):
    r"""Square bracket of the order-``s`` effective-potential term.

    .. math::
        2^{s-D/2-2}\Gamma(s-D/2)m^{D-2s}
        + \sum_J 2^{|J|-1}\sum\Big(\frac{m}{r_J}\Big)^{D/2-s}K_{D/2-s}(m r_J)
    """
    order = 0.5 * p.D - s
    bulk = 0.0
    if include_bulk:
        arg = s - 0.5 * p.D
        if arg <= 0 and arg == math.floor(arg):
            raise PoleError(f"Gamma(s - D/2) at s={s}", arg)
        bulk = 2.0 ** (s - 0.5 * p.D - 2.0) * gamma(arg) * m ** (p.D - 2.0 * s)
    scale = max(abs(bulk), _leading_term(order, p, m))
    comp = _compactified_bracket(order, p, m, t.target(scale), t)
    return SeriesValue(math.fsum([bulk, comp.value]), comp.error_bound, comp.terms_used + 1)


def u1_partial_sums(phi0_sq, p, m, t=TruncationPolicy()):
    """Partial sums of the effective-potential series for s = 1..s_max."""
    x = 12.0 * p.coupling / (4.0 * math.pi ** 2) * float(phi0_sq)
    total, out = 0.0, []
    for s in range(1, p.s_max + 1):
        total += x ** s * h_coefficient(p.D, s) * u1_bracket(p, m, s, t).value
        out.append(total)
    return out


def u1_effective_potential(phi0_sq, p, m, t=TruncationPolicy()):
    r"""One-loop effective potential truncated at order ``p.s_max``.

    Sums :math:`[12 g\phi_0^2]^s h(D,s)` times :func:`u1_bracket` for
    ``s = 1..s_max`` with :math:`g = \lambda/4\pi^2`.  The error bound adds
    the inner-sum tails to the magnitude of the first omitted term, which
    bounds the remainder when the terms alternate and shrink.  Growing terms
    trigger a ``RuntimeWarning``: the series is asymptotic and is not resummed.
    """
    phi0_sq = float(phi0_sq)
    if phi0_sq < 0.0:
        raise CcritDomainError("phi0_sq must be >= 0")
    m = float(m)
    if not m > 0.0:
        raise CcritDomainError(f"m must be > 0, got {m}")
    if phi0_sq == 0.0:
        return SeriesValue(0.0, 0.0, 1)
    x = 12.0 * p.coupling / (4.0 * math.pi ** 2) * phi0_sq
    terms, err, count = [], 0.0, 0
    for s in range(1, p.s_max + 2):
        b = u1_bracket(p, m, s, t)
        c = x ** s * h_coefficient(p.D, s)
        if s <= p.s_max:
            terms.append(c * b.value)
            err += abs(c) * b.error_bound
            count += b.terms_used
        else:
            omitted = abs(c * b.value)
    if len(terms) >= 2 and abs(terms[-1]) > abs(terms[-2]):
        warnings.warn("effective-potential terms grow with s; the truncated series is unreliable",
                      RuntimeWarning, stacklevel=2)
    return SeriesValue(math.fsum(terms), err + omitted, count)
