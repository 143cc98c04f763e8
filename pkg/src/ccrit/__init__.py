"""Critical temperatures of confined Ginzburg-Landau systems and the lattice sums behind them."""

from .criticality import (
    CriticalResult, Geometry, GLParams, bracket_pole_cancellation, c1_constant, c2_constant,
    c3_constant, tc_film, tc_grain_cubic, tc_wire_general, tc_wire_square,
)
from .errors import (
    BudgetError, CcritDomainError, CcritError, NonconvergenceError, NoSolutionError, PoleError,
)
from .gap import (
    GapProblem, GapSolution, closed_form_gap_defect_d1_D3, mass_correction_sum, solve_gap,
    u1_effective_potential,
)
from .lattice_sums import (
    EpsteinTerm, LatticeQuery, a_d_bessel, a_d_direct, e2_continued, e3_continued,
    epstein_d_direct, epstein_d_recurrence, epstein_hurwitz_continued, epstein_hurwitz_direct, w_d,
)
from .specfun import (
    SeriesValue, TruncationPolicy, bessel_k, euler_gamma, gamma, riemann_zeta, zeta_minus_pole,
)

__version__ = "0.1.0"
