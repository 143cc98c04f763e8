r"""Lattice sums: direct and Bessel-accelerated evaluations.

Every multiple sum here runs over the positive orthant :math:`m_i \ge 1` of a
small lattice (dimension 1 to 3) whose points are weighted by scales
:math:`s_i`, with the anisotropic radius :math:`r = |m \odot s|`.  Two
summand families occur:

* power laws :math:`(r^2 + c^2)^{-\nu}` (direct sums, algebraic decay), and
* Bessel terms :math:`r^q K_q(a r)` (accelerated sums, exponential decay).

Both are radially decreasing, so the omitted tail beyond a cutoff radius is
bounded by integrals over unit lattice cells.  Points are enumerated one
first-index slice at a time; each slice is reduced with numpy's pairwise sum
and the slice partials with :func:`math.fsum`, so results do not depend on
thread count or platform reduction order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import BudgetError, CcritDomainError, NonconvergenceError, PoleError
from .specfun import SeriesValue, TruncationPolicy, bessel_k, gamma, rgamma, riemann_zeta

# Refuse to evaluate within this distance (in units of D) of a pole.
POLE_GUARD = 1e-6
# Hard cap on the number of lattice points a single direct sum may visit.
MAX_POINTS = 400_000_000

_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class LatticeQuery:
    """Exponent, lattice scales and mass parameter of an ``A_d`` sum.

    ``lengths`` holds the ``b_i`` coefficients of the quadratic form.
    """

    nu: float
    lengths: tuple
    mass_param: float = 0.0

    def __post_init__(self):
        lengths = tuple(float(b) for b in self.lengths)
        object.__setattr__(self, "lengths", lengths)
        if not 1 <= len(lengths) <= 3:
            raise CcritDomainError(f"lattice dimension must be 1..3, got {len(lengths)}")
        if not all(math.isfinite(b) and b > 0.0 for b in lengths):
            raise CcritDomainError(f"lengths must be finite and > 0, got {lengths}")
        if not (math.isfinite(self.mass_param) and self.mass_param >= 0.0):
            raise CcritDomainError(f"mass_param must be >= 0, got {self.mass_param}")

    @property
    def d(self):
        return len(self.lengths)


@dataclass(frozen=True)
class EpsteinTerm:
    """Contribution of the lattice points whose nonzero indices form one subset."""

    subset_size: int
    contribution: SeriesValue


# --------------------------------------------------------------------------
# enumeration and tail-bound machinery


def _orthant_volume_factor(j):
    """Surface measure of the unit sphere in R^j restricted to the positive orthant."""
    return math.pi ** (0.5 * j) / (2.0 ** (j - 1) * math.gamma(0.5 * j))


def _orthant_r2_slices(scales, radius):
    """Yield arrays of r^2 for all m >= 1 with |m * scales| <= radius.

    One array per value of the first index, in increasing order of that index.
    """
    s = np.asarray(scales, dtype=float)
    r2max = radius * radius
    n_first = int(radius // s[0])
    if len(s) == 1:
        m = np.arange(1, n_first + 1, dtype=float)
        yield (s[0] * m) ** 2
        return
    for m1 in range(1, n_first + 1):
        rem2 = r2max - (s[0] * m1) ** 2
        base = (s[0] * m1) ** 2
        if rem2 < float(np.sum(s[1:] ** 2)):
            continue
        rem = math.sqrt(rem2)
        axes = [(s[i] * np.arange(1, int(rem // s[i]) + 1, dtype=float)) ** 2
                for i in range(1, len(s))]
        if len(axes) == 1:
            r2 = base + axes[0]
        else:
            r2 = base + np.add.outer(axes[0], axes[1]).ravel()
        r2 = r2[r2 <= r2max]
        if r2.size:
            yield r2


def _exp_envelope_integral(power, rate, x0):
    """Upper bound of int_{x0}^inf x^power exp(-rate (x - x0)) dx."""
    if power <= 0.0:
        return x0 ** power / rate
    slack = rate - power / x0
    if slack <= 0.0:
        return math.inf
    return x0 ** power / slack


def _k_envelope(order, x):
    """K_{max(|order|, 1/2)}(x): dominates K_order(y) e^{y - x} for all y >= x."""
    return float(special.kv(max(abs(order), 0.5), x))


def _smallest_radius(bound, start, target):
    """Smallest radius (to ~1e-3 relative) with bound(radius) <= target."""
    hi = max(start, 1e-300)
    while not bound(hi) <= target:
        hi *= 1.5
        if hi > 1e12:
            raise BudgetError("tail bound cannot reach the requested tolerance")
    lo = hi / 1.5
    if lo < start:
        return hi
    for _ in range(12):
        mid = 0.5 * (lo + hi)
        if bound(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def _check_budget(radius, scales, policy):
    reach = radius / min(scales)
    if reach > policy.max_index:
        raise BudgetError(
            f"summation index would reach {reach:.0f} > max_index={policy.max_index}")
    j = len(scales)
    points = _orthant_volume_factor(j) * radius ** j / (j * math.prod(scales))
    if points > MAX_POINTS:
        raise BudgetError(f"about {points:.2g} lattice points needed; cap is {MAX_POINTS:.0e}")


def orthant_bessel_sum(order, rate, scales, target, policy):
    r"""Sum :math:`r^q K_q(a r)` over :math:`m \in \mathbb{Z}_{+}^{j}`.

    Here ``r = |m * scales|``, ``q = order`` and ``a = rate``.  Returns a
    :class:`SeriesValue` whose ``error_bound`` bounds the omitted tail: the
    summand is radially decreasing, so the tail is at most the integral of
    the summand over the orthant region beyond ``cutoff - |scales|``, and
    that integral is bounded with :math:`K_q(y) \le K_{q^*}(x) e^{-(y-x)}`,
    :math:`q^* = \max(|q|, 1/2)`, valid for :math:`y \ge x`.
    """
    scales = tuple(float(s) for s in scales)
    j = len(scales)
    diag = math.sqrt(sum(s * s for s in scales))
    factor = _orthant_volume_factor(j) / math.prod(scales)
    power = j - 1 + order

    def tail(radius):
        r0 = radius - diag
        if r0 <= 0.0:
            return math.inf
        return factor * _k_envelope(order, rate * r0) * _exp_envelope_integral(power, rate, r0)

    start = diag * (1.0 + 1e-9) + (max(power, 0.0) + 1.0) / rate
    radius = _smallest_radius(tail, start, target)
    _check_budget(radius, scales, policy)
    partials = []
    count = 0
    for r2 in _orthant_r2_slices(scales, radius):
        r = np.sqrt(r2)
        partials.append(float(np.sum(r ** order * bessel_k(order, rate * r))))
        count += r.size
    return SeriesValue(math.fsum(partials), tail(radius), count)


def _radial_tail_integral(m, radius, nu, c2, sub_scales):
    r"""Integral of :math:`(r^2+c^2)^{-\nu}` over the m-dim orthant region r > radius."""
    if m == 0:
        return 0.0
    factor = _orthant_volume_factor(m) / math.prod(sub_scales)
    a = nu - 0.5 * m
    if c2 == 0.0:
        return factor * radius ** (-2.0 * a) / (2.0 * a)
    x = c2 / (radius * radius + c2)
    incomplete = special.betainc(a, 0.5 * m, x) * special.beta(a, 0.5 * m)
    return factor * 0.5 * c2 ** (-a) * incomplete


def _power_tail_bracket(nu, scales, c2, radius):
    """(lower, estimate, upper) for the orthant power sum over r > radius."""
    k = len(scales)
    diag = math.sqrt(sum(s * s for s in scales))
    upper = _radial_tail_integral(k, radius - diag, nu, c2, scales)
    outer = radius + diag
    lower = _radial_tail_integral(k, outer, nu, c2, scales)
    if k > 1:
        for i, s in enumerate(scales):
            rest = scales[:i] + scales[i + 1:]
            lower -= _radial_tail_integral(k - 1, math.sqrt(outer * outer - s * s), nu, c2, rest)
    lower = max(lower, 0.0)
    # Euler-Maclaurin for a summand even in every index: the continuum
    # integral minus one half of each boundary face, recursively.
    estimate = 0.0
    for zeroed in range(k):
        weight = (-0.5) ** zeroed
        for kept in itertools.combinations(range(k), k - zeroed):
            estimate += weight * _radial_tail_integral(
                len(kept), radius, nu, c2, tuple(scales[i] for i in kept))
    estimate = min(max(estimate, lower), upper)
    return lower, estimate, upper


_EM_REMAINDER = 2.0 * 1.2020569031595942 / (2.0 * math.pi) ** 3  # 2 zeta(3)/(2 pi)^3


def _power_sum_1d(nu, s, c2, target, policy):
    """Sum of f(n) = (s^2 n^2 + c^2)^-nu for n >= 1 with an Euler-Maclaurin tail.

    Beyond n = N the tail is int_N^inf f - f(N)/2 - f'(N)/12, and the
    remainder is at most 2 zeta(3)/(2 pi)^3 |f''(N)| because f''' keeps one
    sign once s N >= 3 c.
    """
    def f(x):
        return (s * s * x * x + c2) ** -nu

    def f1(x):
        u = s * s * x * x + c2
        return -2.0 * nu * s * s * x * u ** (-nu - 1.0)

    def f2(x):
        u = s * s * x * x + c2
        return (-2.0 * nu * s * s * u ** (-nu - 1.0)
                + 4.0 * nu * (nu + 1.0) * s ** 4 * x * x * u ** (-nu - 2.0))

    def remainder(n):
        return _EM_REMAINDER * abs(f2(n))

    n_min = max(1.0, 3.0 * math.sqrt(c2) / s)
    n_cut = math.ceil(_smallest_radius(remainder, n_min, target))
    if n_cut > policy.max_index:
        raise BudgetError(f"summation index would reach {n_cut} > max_index={policy.max_index}")
    n = np.arange(1, n_cut + 1, dtype=float)
    head = float(np.sum(f(n)))
    tail = _radial_tail_integral(1, s * n_cut, nu, c2, (s,)) - 0.5 * f(n_cut) - f1(n_cut) / 12.0
    return SeriesValue(math.fsum([head, tail]), remainder(n_cut), n_cut)


def orthant_power_sum(nu, scales, c2, target, policy):
    r"""Sum :math:`(r^2 + c^2)^{-\nu}` over the positive orthant.

    Points with ``r <= cutoff`` are summed exactly; the remainder is replaced
    by its face-corrected continuum estimate.  The error bound is the width
    of a rigorous integral-comparison bracket of the remainder, so it is
    conservative by roughly one power of the cutoff.
    """
    scales = tuple(float(s) for s in scales)
    k = len(scales)
    if not nu > 0.5 * k:
        raise NonconvergenceError(
            f"direct sum diverges: need nu > d/2 = {0.5 * k:g}, got nu = {nu:g}")
    if k == 1:
        return _power_sum_1d(nu, scales[0], c2, target, policy)
    diag = math.sqrt(sum(s * s for s in scales))

    def width(radius):
        if radius <= diag:
            return math.inf
        lower, _, upper = _power_tail_bracket(nu, scales, c2, radius)
        return upper - lower

    radius = _smallest_radius(width, 2.0 * diag, target)
    _check_budget(radius, scales, policy)
    partials = []
    count = 0
    for r2 in _orthant_r2_slices(scales, radius):
        partials.append(float(np.sum((r2 + c2) ** -nu)))
        count += r2.size
    lower, estimate, upper = _power_tail_bracket(nu, scales, c2, radius)
    partials.append(estimate)
    return SeriesValue(math.fsum(partials), max(upper - estimate, estimate - lower), count)


def _subsets(d):
    for size in range(1, d + 1):
        yield from itertools.combinations(range(d), size)


def _is_pole(x, guard):
    """True when x lies within ``guard`` of a nonpositive integer."""
    return x < guard and abs(x - round(x)) < guard


# --------------------------------------------------------------------------
# A_d sums


def a_d_decomposition(q, t=TruncationPolicy()):
    """Subset-by-subset direct evaluation of ``A_d``; subset_size 0 is the c^(-2 nu) term."""
    if not q.mass_param > 0.0:
        raise CcritDomainError("A_d needs mass_param > 0; use the Epstein functions for c = 0")
    nu, c2 = float(q.nu), q.mass_param ** 2
    if not nu > 0.5 * q.d:
        raise NonconvergenceError(
            f"direct A_d sum diverges: need nu > d/2 = {0.5 * q.d:g}, got nu = {nu:g}")
    lead = c2 ** -nu
    n_sub = 2 ** q.d - 1
    terms = [EpsteinTerm(0, SeriesValue(lead, 0.0, 1))]
    for subset in _subsets(q.d):
        weight = 2.0 ** len(subset)
        scales = tuple(q.lengths[i] for i in subset)
        part = orthant_power_sum(nu, scales, c2, t.target(lead) / (weight * n_sub), t)
        terms.append(EpsteinTerm(len(subset), SeriesValue(
            weight * part.value, weight * part.error_bound, part.terms_used)))
    return terms


def a_d_direct(q, t=TruncationPolicy()):
    r"""Direct evaluation of :math:`A_d^{c^2}(\nu; b_1, \dots, b_d)`.

    The full lattice sum is split by the set of nonzero indices, each subset
    of size j contributing :math:`2^j` times an orthant sum.
    """
    terms = a_d_decomposition(q, t)
    return SeriesValue(math.fsum(p.contribution.value for p in terms),
                       sum(p.contribution.error_bound for p in terms),
                       sum(p.contribution.terms_used for p in terms))


def a_d_bessel(q, t=TruncationPolicy()):
    r"""Bessel representation of :math:`A_d^{c^2}(\nu; b)`.

    .. math::
        A_d = \frac{\pi^{d/2}}{b_1\cdots b_d\,\Gamma(\nu)}\Big[\Gamma(\mu) c^{-2\mu}
              + 2\sum_{J}2^{|J|}\sum_{m_J\ge 1}\Big(\frac{\pi r}{c}\Big)^{\mu}
              K_{\mu}(2\pi c r)\Big],\qquad \mu = \nu - d/2,\ r = |m_J/b_J|.

    Valid for every real ``nu``; at the poles of ``Gamma(nu)`` the result is
    the zeta-regularised value.
    """
    if not q.mass_param > 0.0:
        raise CcritDomainError("A_d needs mass_param > 0; use the Epstein functions for c = 0")
    nu, c, d = float(q.nu), float(q.mass_param), q.d
    mu = nu - 0.5 * d
    inv_gamma_nu = rgamma(nu)
    if _is_pole(mu, 1e-12):
        if not _is_pole(nu, 1e-12):
            raise PoleError("Gamma(nu - d/2)", mu)
        # both Gamma factors are singular; their ratio is finite
        m_, k_ = -round(mu), -round(nu)
        ratio = (-1.0) ** (m_ - k_) * math.factorial(k_) / math.factorial(m_)
        lead = ratio * c ** (-2.0 * mu)
    else:
        lead = gamma(mu) * inv_gamma_nu * c ** (-2.0 * mu)
    pref = math.pi ** (0.5 * d) / math.prod(q.lengths)
    if inv_gamma_nu == 0.0:
        return SeriesValue(pref * lead, 0.0, 1)
    n_sub = 2 ** d - 1
    coeff = 2.0 * (math.pi / c) ** mu * inv_gamma_nu
    target = t.target(lead) if lead != 0.0 else t.abs_tol
    parts, err, count = [lead], 0.0, 1
    for subset in _subsets(d):
        w = coeff * 2.0 ** len(subset)
        scales = tuple(1.0 / q.lengths[i] for i in subset)
        s = orthant_bessel_sum(mu, 2.0 * math.pi * c, scales, target / (abs(w) * n_sub), t)
        parts.append(w * s.value)
        err += abs(w) * s.error_bound
        count += s.terms_used
    return SeriesValue(pref * math.fsum(parts), abs(pref) * err, count)


# --------------------------------------------------------------------------
# Epstein-Hurwitz


def epstein_hurwitz_direct(nu, p, t=TruncationPolicy()):
    r""":math:`\sum_{n\ge1}(n^2+p^2)^{-\nu}` by direct summation (``nu > 1/2``)."""
    nu, p = float(nu), float(p)
    if not p > 0.0:
        raise CcritDomainError(f"p must be > 0, got {p}")
    if not nu > 0.5:
        raise NonconvergenceError(f"Epstein-Hurwitz sum diverges for nu = {nu:g} <= 1/2")
    scale = (1.0 + p * p) ** -nu
    return orthant_power_sum(nu, (1.0,), p * p, t.target(scale), t)


def epstein_hurwitz_continued(nu, p, t=TruncationPolicy()):
    r"""Bessel continuation of :math:`\sum_{n\ge1}(n^2+p^2)^{-\nu}` to all real ``nu``.

    .. math::
        -\tfrac12 p^{-2\nu} + \frac{\sqrt\pi}{2p^{2\nu-1}\Gamma(\nu)}
        \Big[\Gamma(\nu-\tfrac12) + 4\sum_{n\ge1}(\pi p n)^{\nu-1/2}
        K_{\nu-1/2}(2\pi p n)\Big]
    """
    nu, p = float(nu), float(p)
    if not p > 0.0:
        raise CcritDomainError(f"p must be > 0, got {p}")
    mu = nu - 0.5
    if _is_pole(mu, 1e-12):
        raise PoleError("Gamma(nu - 1/2)", mu)
    head = -0.5 * p ** (-2.0 * nu)
    inv_gamma_nu = rgamma(nu)
    if inv_gamma_nu == 0.0:
        return SeriesValue(head, 0.0, 1)
    pref = _SQRT_PI * inv_gamma_nu / (2.0 * p ** (2.0 * nu - 1.0))
    lead = gamma(mu)
    coeff = 4.0 * (math.pi * p) ** mu
    rate = 2.0 * math.pi * p
    # head and lead cancel heavily at small p, so size the target on a rough result
    rough = orthant_bessel_sum(mu, rate, (1.0,), 1e-6 * abs(head) / abs(pref * coeff), t)
    scale = math.fsum([head, pref * lead, pref * coeff * rough.value])
    target = t.target(scale) / abs(pref * coeff)
    s = orthant_bessel_sum(mu, rate, (1.0,), target, t)
    value = math.fsum([head, pref * lead, pref * coeff * s.value])
    return SeriesValue(value, abs(pref * coeff) * s.error_bound, s.terms_used + 1)


# --------------------------------------------------------------------------
# multidimensional Epstein functions


def _check_lengths(lengths, dims):
    lengths = tuple(float(x) for x in lengths)
    if len(lengths) not in dims:
        raise CcritDomainError(f"expected {sorted(dims)} lengths, got {len(lengths)}")
    if not all(math.isfinite(x) and x > 0.0 for x in lengths):
        raise CcritDomainError(f"lengths must be finite and > 0, got {lengths}")
    return lengths


def epstein_d_direct(nu, lengths, t=TruncationPolicy()):
    r"""Direct orthant sum :math:`\sum_{n\ge1}(L_1^2n_1^2+\cdots+L_d^2n_d^2)^{-\nu}`."""
    lengths = _check_lengths(lengths, {1, 2, 3})
    nu = float(nu)
    if not nu > 0.5 * len(lengths):
        raise NonconvergenceError(
            f"direct Epstein sum diverges: need nu > d/2 = {0.5 * len(lengths):g}, got nu = {nu:g}")
    scale = sum(x * x for x in lengths) ** -nu
    return orthant_power_sum(nu, lengths, 0.0, t.target(scale), t)


def _w_single(eta, lengths, which, target, t):
    r"""One index of :math:`W_d`: :math:`n_i` summed innermost.

    .. math::
        \frac{1}{L_i}\sum_{n\ge1}\Big(\frac{\pi n_i}{L_i\rho}\Big)^{\eta}
        K_\eta\Big(\frac{2\pi n_i\rho}{L_i}\Big),\qquad
        \rho = |n_{\hat\imath} \odot L_{\hat\imath}|
    """
    li = lengths[which]
    others = lengths[:which] + lengths[which + 1:]
    j = len(others)
    diag = math.sqrt(sum(x * x for x in others))
    factor = _orthant_volume_factor(j) / math.prod(others)
    rate = 2.0 * math.pi / li  # argument per unit (n_i * rho)
    eta_pos = max(eta, 0.0)

    def outer_tail(radius):
        r0 = radius - diag
        if r0 <= 0.0:
            return math.inf
        a0 = rate * r0
        if a0 <= eta_pos:
            return math.inf
        g_env = (math.pi / li) ** eta * _k_envelope(eta, a0) * (1.0 + 1.0 / (a0 - eta_pos)) / li
        return factor * g_env * _exp_envelope_integral(j - 1 - eta, rate, r0)

    start = diag * (1.0 + 1e-9) + (eta_pos + 1.0) / rate
    radius = _smallest_radius(outer_tail, start, 0.5 * target)
    _check_budget(radius, others, t)
    rho = np.sqrt(np.concatenate(list(_orthant_r2_slices(others, radius))))
    n_outer = rho.size
    rho_min = diag

    def inner_tail(n_cut):
        a = rate * rho_min
        if a * n_cut <= eta_pos:
            return math.inf
        per = ((math.pi / (li * rho_min)) ** eta * _k_envelope(eta, a * n_cut)
               * _exp_envelope_integral(eta, a, n_cut) / li)
        return n_outer * per

    n_cut = max(1, math.ceil(_smallest_radius(inner_tail, 1.0, 0.5 * target)))
    if n_cut > t.max_index:
        raise BudgetError(f"W_d inner index would reach {n_cut} > max_index={t.max_index}")
    n = np.arange(1, n_cut + 1, dtype=float)
    partials = []
    for r in rho:
        partials.append(float(np.sum((math.pi * n / (li * r)) ** eta * bessel_k(eta, rate * r * n))))
    value = math.fsum(partials) / li
    return SeriesValue(value, outer_tail(radius) + inner_tail(n_cut), n_outer * n_cut)


def w_d(eta, lengths, t=TruncationPolicy()):
    r""":math:`W_d(\eta; L_1,\dots,L_d)` for d = 2 or 3.

    Exponentially convergent; every summand is positive.
    """
    lengths = _check_lengths(lengths, {2, 3})
    eta = float(eta)
    lead = []
    for i, li in enumerate(lengths):
        rho = math.sqrt(sum(x * x for k, x in enumerate(lengths) if k != i))
        lead.append((math.pi / (li * rho)) ** eta * float(bessel_k(eta, 2.0 * math.pi * rho / li)) / li)
    return _w_total(eta, lengths, t.target(sum(lead)), t)


def _w_total(eta, lengths, target, t):
    parts = [_w_single(eta, lengths, i, target / len(lengths), t) for i in range(len(lengths))]
    return SeriesValue(math.fsum(p.value for p in parts),
                       sum(p.error_bound for p in parts),
                       sum(p.terms_used for p in parts))


def _zeta_checked(x, label):
    if abs(x - 1.0) < POLE_GUARD:
        raise PoleError(label, x)
    return riemann_zeta(x)


def _gamma_checked(x, label):
    # a distance eps in the Gamma((D-3)/2) argument is 2*eps in D
    if _is_pole(x, 0.5 * POLE_GUARD):
        raise PoleError(label, x)
    return gamma(x)


class _OrderedEpstein:
    """Single-ordering continuation of E_d with the W pieces memoised."""

    def __init__(self, t, target):
        self.t = t
        self.target = target
        self.w_cache = {}
        self.err = 0.0
        self.terms = 0

    def w_piece(self, eta, lengths, which):
        key = (eta, lengths, which)
        if key not in self.w_cache:
            sv = _w_single(eta, lengths, which, self.target, self.t)
            self.w_cache[key] = sv
            self.err += sv.error_bound
            self.terms += sv.terms_used
        return self.w_cache[key].value

    def __call__(self, nu, lengths):
        """lengths are in summation order; the last index is summed first."""
        if len(lengths) == 1:
            return lengths[0] ** (-2.0 * nu) * _zeta_checked(2.0 * nu, "zeta(2 nu)")
        last, rest = lengths[-1], lengths[:-1]
        inv_g = rgamma(nu)
        value = -0.5 * self(nu, rest)
        if inv_g != 0.0:
            g_half = _gamma_checked(nu - 0.5, "Gamma(nu - 1/2)")
            value += _SQRT_PI * g_half * inv_g / (2.0 * last) * self(nu - 0.5, rest)
            value += 2.0 * _SQRT_PI * inv_g * self.w_piece(nu - 0.5, lengths, len(lengths) - 1)
        return value


def epstein_single_ordering(nu, lengths, t=TruncationPolicy()):
    """E_d continued along one fixed summation order (diagnostic only).

    ``lengths`` are taken in the given order and the last index is summed
    first with the Epstein-Hurwitz continuation, recursively.
    """
    lengths = _check_lengths(lengths, {1, 2, 3})
    evaluator = _OrderedEpstein(t, t.abs_tol)
    value = evaluator(float(nu), lengths)
    return SeriesValue(value, evaluator.err, max(evaluator.terms, 1))


def epstein_d_recurrence(nu, lengths, t=TruncationPolicy()):
    r"""Symmetrised Epstein function :math:`E_d(\nu; L)`, d = 2 or 3.

    Every one of the d! summation orders is continued separately (innermost
    sum by the Epstein-Hurwitz formula, recursively) and the results are
    averaged.  Lengths are sorted first, so permuting them cannot change a
    single bit of the output.
    """
    lengths = tuple(sorted(_check_lengths(lengths, {2, 3})))
    nu = float(nu)
    if rgamma(nu) != 0.0:
        _gamma_checked(nu - 0.5, "Gamma(nu - 1/2)")
    # scale for the relative tolerance: the zeta pieces
    scale = sum(abs(x ** (-2.0 * nu)) for x in lengths)
    evaluator = _OrderedEpstein(t, t.target(scale) / (2 * len(lengths)))
    values = [evaluator(nu, order) for order in itertools.permutations(lengths)]
    return SeriesValue(math.fsum(values) / len(values), evaluator.err, max(evaluator.terms, 1))


def _guard_d(D, poles, label):
    for pole in poles:
        if abs(D - pole) < POLE_GUARD:
            raise PoleError(
                label, D,
                f"{label} is singular at D = {pole:g} (got D = {D!r}); the D -> 3 limit "
                "must go through the pole-cancelling routines in ccrit.criticality")


def e2_continued(D, L1, L2, t=TruncationPolicy()):
    r"""Three-term continuation of :math:`E_2((D-2)/2; L_1, L_2)`.

    .. math::
        -\tfrac14(L_1^{2-D}+L_2^{2-D})\zeta(D-2)
        + \frac{\sqrt\pi\,\Gamma(\frac{D-3}{2})}{4\Gamma(\frac{D-2}{2})}
          \Big(\frac{1}{L_1L_2^{D-3}}+\frac{1}{L_1^{D-3}L_2}\Big)\zeta(D-3)
        + \frac{\sqrt\pi}{\Gamma(\frac{D-2}{2})}W_2\big(\tfrac{D-3}{2}; L_1, L_2\big)
    """
    D = float(D)
    L1, L2 = _check_lengths((L1, L2), {2})
    _guard_d(D, (3.0, 4.0), "E_2((D-2)/2)")
    inv_g = rgamma(0.5 * (D - 2.0))
    first = -0.25 * (L1 ** (2.0 - D) + L2 ** (2.0 - D)) * _zeta_checked(D - 2.0, "zeta(D-2)")
    if inv_g == 0.0:
        return SeriesValue(first, 0.0, 1)
    g = _gamma_checked(0.5 * (D - 3.0), "Gamma((D-3)/2)")
    second = (_SQRT_PI * g * inv_g / 4.0 * (1.0 / (L1 * L2 ** (D - 3.0)) + 1.0 / (L1 ** (D - 3.0) * L2))
              * _zeta_checked(D - 3.0, "zeta(D-3)"))
    coeff = _SQRT_PI * inv_g
    scale = max(abs(first), abs(second))
    w = _w_total(0.5 * (D - 3.0), (L1, L2), t.target(scale) / abs(coeff), t)
    return SeriesValue(math.fsum([first, second, coeff * w.value]),
                       abs(coeff) * w.error_bound, w.terms_used + 2)


def _levi_civita(i, j, k):
    return ((i - j) * (j - k) * (k - i)) // 2


def e3_continued(D, lengths, t=TruncationPolicy()):
    r"""Continuation of :math:`E_3((D-2)/2; L_1, L_2, L_3)` from the symmetrised recurrence.

    .. math::
        -\tfrac16\sum_{i<j}E_2(\nu; L_i, L_j)
        + \frac{\sqrt\pi\,\Gamma(\frac{D-3}{2})}{6\Gamma(\frac{D-2}{2})}
          \sum_{ijk}\frac{1+\varepsilon_{ijk}}{2}\frac{1}{L_i}
          E_2\big(\tfrac{D-3}{2}; L_j, L_k\big)
        + \frac{2\sqrt\pi}{3\Gamma(\frac{D-2}{2})}W_3\big(\tfrac{D-3}{2}; L\big)

    with :math:`\nu = (D-2)/2` and the ``ijk`` sum over distinct indices.
    The two-dimensional pieces come from :func:`e2_continued`.
    """
    D = float(D)
    lengths = tuple(sorted(_check_lengths(lengths, {3})))
    _guard_d(D, (3.0, 4.0, 5.0), "E_3((D-2)/2)")
    parts, err, count = [], 0.0, 0
    for i, j in itertools.combinations(range(3), 2):
        e2 = e2_continued(D, lengths[i], lengths[j], t)
        parts.append(-e2.value / 6.0)
        err += e2.error_bound / 6.0
        count += e2.terms_used
    inv_g = rgamma(0.5 * (D - 2.0))
    if inv_g != 0.0:
        g = _gamma_checked(0.5 * (D - 3.0), "Gamma((D-3)/2)")
        coeff = _SQRT_PI * g * inv_g / 6.0
        for i, j, k in itertools.permutations(range(3)):
            weight = 0.5 * (1 + _levi_civita(i, j, k))
            if weight == 0.0:
                continue
            e2 = e2_continued(D - 1.0, lengths[j], lengths[k], t)
            parts.append(coeff * weight * e2.value / lengths[i])
            err += abs(coeff * weight) * e2.error_bound / lengths[i]
            count += e2.terms_used
        w = w_d(0.5 * (D - 3.0), lengths, t)
        w_coeff = 2.0 * _SQRT_PI * inv_g / 3.0
        parts.append(w_coeff * w.value)
        err += abs(w_coeff) * w.error_bound
        count += w.terms_used
    return SeriesValue(math.fsum(parts), err, count)
