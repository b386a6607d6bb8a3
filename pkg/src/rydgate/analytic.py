"""Closed-form results from the second-order expansion of the 1/r^6 phase.

These expressions are the fast path for well-separated clouds and serve as
the cross-check oracle for the grid-based numerics.  They are only trusted
when the clouds are far apart compared to their widths; the config validator
warns otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GateConfig, PhysicsError


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Coefficients of the expanded interaction phase.

    ``phase0`` is the center-to-center phase c6 t / d^6.  ``k_D`` is the
    momentum displacement from the linear term, ``S_par`` / ``S_perp`` the
    dimensionless strengths of the quadratic terms, and ``e_par`` / ``e_perp``
    the eccentricities of the momentum-space level-set ellipses,
    e^2 = 4 S^2 / (1 + 4 S^2).
    """

    phase0: float
    k_D: float
    S_par: float
    S_perp: float
    e_par: float
    e_perp: float


def vdw_phase_rate(r: np.ndarray, c6: float) -> float:
    """Phase accumulation rate c6 / |r|^6 for a pair at relative position r."""
    mag = float(np.linalg.norm(np.asarray(r, dtype=float)))
    if mag == 0:
        raise PhysicsError("vdw_phase_rate: |r| = 0 is singular")
    return c6 / mag**6


def vdw_expansion(delta_x0_mag: float, X1: np.ndarray, X2: np.ndarray) -> float:
    """Second-order expansion of 1/|x1 - x2|^6 around the center separation.

    ``X1`` and ``X2`` are the atom offsets from their cloud centers, given in
    the separation frame (first component parallel to the separation).  Both
    transverse axes contribute to the perpendicular quadratic term.
    """
    if not delta_x0_mag > 0:
        raise PhysicsError("vdw_expansion: delta_x0_mag must be > 0")
    d = float(delta_x0_mag)
    rel = np.asarray(X1, dtype=float) - np.asarray(X2, dtype=float)
    dpar = rel[0]
    dperp2 = rel[1] ** 2 + rel[2] ** 2
    return 1.0 / d**6 - 6.0 * dpar / d**7 + 21.0 * dpar**2 / d**8 - 3.0 * dperp2 / d**8


def _ecc_from_S(S: float) -> float:
    return math.sqrt(4.0 * S * S / (1.0 + 4.0 * S * S))


def expansion_coefficients(config: GateConfig) -> ExpansionCoefficients:
    """Evaluate the expansion coefficients for one configuration.

    With unequal profile widths the effective squared width is the mean of
    the two squared widths, which keeps w_eff^2 equal to twice the pair's
    relative-coordinate variance per axis; for equal widths this reduces to
    the single-width formulas.
    """
    d = config.separation_mag
    ct = config.c6 * config.t_int
    w_par2 = 0.5 * (config.profile1.w_par**2 + config.profile2.w_par**2)
    w_perp2 = 0.5 * (config.profile1.w_perp**2 + config.profile2.w_perp**2)
    S_par = 21.0 * w_par2 * ct / d**8
    S_perp = 3.0 * w_perp2 * ct / d**8
    return ExpansionCoefficients(
        phase0=ct / d**6,
        k_D=6.0 * ct / d**7,
        S_par=S_par,
        S_perp=S_perp,
        e_par=_ecc_from_S(S_par),
        e_perp=_ecc_from_S(S_perp),
    )


def analytic_momentum_density(
    K1: np.ndarray,
    K2: np.ndarray,
    axis: str,
    coeffs: ExpansionCoefficients,
    w: float,
) -> np.ndarray:
    """Unnormalized second-order momentum density on one 2D slice.

    The exponent is the decaying-Gaussian reading of the expansion result:
    -(w^2 / (2 (1 + 4 S^2))) [(K1 - kD)^2 + (K2 + kD)^2 + 2 S^2 (K1 + K2)^2],
    with kD = 0 on the perpendicular axis.
    """
    if axis == "par":
        S, kd = coeffs.S_par, coeffs.k_D
    elif axis == "perp":
        S, kd = coeffs.S_perp, 0.0
    else:
        raise ValueError(f"unknown axis {axis!r}")
    K1 = np.asarray(K1, dtype=float)
    K2 = np.asarray(K2, dtype=float)
    quad = (K1 - kd) ** 2 + (K2 + kd) ** 2 + 2.0 * S * S * (K1 + K2) ** 2
    return np.exp(-(w * w) / (2.0 * (1.0 + 4.0 * S * S)) * quad)
