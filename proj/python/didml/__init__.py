"""Semiparametric difference-in-differences estimation of the ATET.

Thin Python layer over the C++ core: cross-fitted estimation under seven
assumption settings (cs1..cs5 for repeated cross sections, pa1/pa2 for
two-period panels), synthetic data generation, Monte Carlo efficiency
bounds, closed-form variance gaps between settings, and common-trend
placebo tests.
"""

from ._core import (
    DidError,
    efficiency_bound,
    estimate_cross_section,
    estimate_panel,
    generate,
    placebo,
    variance_gap,
)

__all__ = [
    "DidError",
    "efficiency_bound",
    "estimate_cross_section",
    "estimate_panel",
    "generate",
    "placebo",
    "variance_gap",
]
