"""Degenerate-elliptic solution families of the cubic NLSE
i Psi_z + Psi_tt + a Psi |Psi|^2 = 0 with Psi = (f + i d) exp(i phi)."""
from .elliptic import Mode, WpSpec, invert_quartic, wp, wp_prime, wp_reciprocal
from .errors import (
    DegenerateLeadingCoefficient,
    DenominatorVanishing,
    InvalidParams,
    NegativeC3,
    NegativeRadicand,
    NlseFamError,
    OutOfFamily,
    PoleProximity,
    SignViolation,
)
from .family import (
    FamilyClass,
    Kind,
    SolutionBundle,
    build_bundle,
    build_f,
    build_f0,
    build_h,
    build_phi,
    build_psi,
    classify,
    f_extremes,
    k_values,
)
from .quartic import Params, QuarticPoly, invariants, r1_coeffs, r2_coeffs, roots
from .scan import ScanRecord, ScanSpace, scan, scan_c2star
from .verify import (
    GridSpec,
    ResidualReport,
    f_ode_residual,
    h_ode_residual,
    invariant_drift,
    nlse_residual,
    t_residual,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateLeadingCoefficient",
    "DenominatorVanishing",
    "FamilyClass",
    "GridSpec",
    "InvalidParams",
    "Kind",
    "Mode",
    "NegativeC3",
    "NegativeRadicand",
    "NlseFamError",
    "OutOfFamily",
    "Params",
    "PoleProximity",
    "QuarticPoly",
    "ResidualReport",
    "ScanRecord",
    "ScanSpace",
    "SignViolation",
    "SolutionBundle",
    "WpSpec",
    "build_bundle",
    "build_f",
    "build_f0",
    "build_h",
    "build_phi",
    "build_psi",
    "classify",
    "f_extremes",
    "f_ode_residual",
    "h_ode_residual",
    "invariant_drift",
    "invariants",
    "invert_quartic",
    "k_values",
    "nlse_residual",
    "r1_coeffs",
    "r2_coeffs",
    "roots",
    "scan",
    "scan_c2star",
    "t_residual",
    "wp",
    "wp_prime",
    "wp_reciprocal",
]
