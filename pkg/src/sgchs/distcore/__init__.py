"""Densities, characteristic functions and coefficient algebra for the
GCHS / CLH / SGCHS and GCN / SGCN families."""

from .coeffs import (
    BVector,
    CoeffForm,
    CoeffTable,
    b_coeffs,
    coefficient_table,
    delta_coeffs,
    sgchs_pdf,
    theta_coeffs,
)
from .gaussian import gcn_cf, gcn_pdf, hermite_p4j, normal_pdf, sgcn_pdf
from .hs import (
    clh_pdf,
    gchs_cf,
    gchs_pdf,
    hs_cdf,
    hs_pdf,
    hs_quantile,
    hs_sf,
    p4_hs,
    sum_hs_pdf,
)
from .numeric import CDFTable, neumaier_sum, truncation_radius
from .sampling import margin_table, sample
from .specs import Family, MarginSpec, SumSpec, check_beta, unimodality_bound
from .sums import density, independent_sum_pdf, margin_pdf, mixed_sum_pdf, numeric_moment, radius

__all__ = [
    "BVector", "CDFTable", "CoeffForm", "CoeffTable", "Family", "MarginSpec", "SumSpec",
    "b_coeffs", "check_beta", "clh_pdf", "coefficient_table", "delta_coeffs", "density",
    "gchs_cf", "gchs_pdf", "gcn_cf", "gcn_pdf", "hermite_p4j", "hs_cdf", "hs_pdf",
    "hs_quantile", "hs_sf", "independent_sum_pdf", "margin_pdf", "margin_table",
    "mixed_sum_pdf", "neumaier_sum", "normal_pdf", "numeric_moment", "p4_hs", "radius",
    "sample", "sgchs_pdf", "sgcn_pdf", "sum_hs_pdf", "theta_coeffs", "truncation_radius",
    "unimodality_bound",
]
