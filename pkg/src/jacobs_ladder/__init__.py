"""Jacob's-ladder verification lab: phi_1 from the Hardy-Littlewood integral,
extremal cells of several generators, and the weighted mean-value pipeline."""

from .cells import ExtremalCell
from .errors import (
    AdmissibilityError,
    BracketError,
    ConvergenceError,
    DeformationError,
    DomainError,
    IsolationError,
    LadderLabError,
    MeanValueError,
    QuadratureError,
    TableError,
)
from .generators import (
    DeformationSpec,
    Generator,
    make_bessel_generator,
    make_cn_generator,
    make_deformed_generator,
    make_hardy_z_generator,
    make_sn_generator,
    validate_cell,
)
from .ladder import (
    LadderConfig,
    LadderTable,
    build_ladder_table,
    check_ladder_asymptotics,
    load_table,
    phi1,
    phi1_inverse,
    phi1_prime,
)
from .numerics import adaptive_integrate, find_root_bracketed, fixed_point
from .special_funcs import bessel_j, bessel_zeros, complete_elliptic_K, jacobi_sncndn
from .theorem_lab import (
    dirac_concentration,
    exact_moment_identity,
    functional_F,
    hat_cell,
    locate_t_H,
    omega_estimate,
    solve_exponent,
    verify_cell,
    weighted_unit_integral,
)
from .zeta_core import (
    HLIntegral,
    build_zero_table,
    find_z_extrema,
    find_z_zeros,
    hardy_z,
    hardy_z_prime,
    hl_integral,
    ingest_zeros,
    riemann_siegel_theta,
    zeta_mod_sq,
)

__version__ = "0.1.0"
