"""Retrieval-efficiency model: thermal-motion dephasing and Rydberg lifetimes.

The conditional fidelity is insensitive to loss that is uniform across the
four rails, so loss is tracked separately as a per-photon (and pair)
retrieval efficiency.  Non-uniform loss can be balanced away by adding
controlled loss to the stronger rails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import KB_J_PER_K, GateConfig, PhysicsError, time_for_pi


def thermal_speed(temperature: float, atomic_mass: float) -> float:
    """One-dimensional thermal speed sqrt(kB T / m) in um/us.

    ``temperature`` in uK, ``atomic_mass`` in kg.  1 m/s equals 1 um/us, so
    no further conversion is needed.
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if not atomic_mass > 0:
        raise ValueError("atomic_mass must be > 0")
    return math.sqrt(KB_J_PER_K * temperature * 1e-6 / atomic_mass)


def thermal_efficiency(t: float, lambda_exc: float, w: float, v: float) -> float:
    """Spin-wave retrieval efficiency after atoms move for a time ``t``.

    eta = (1 + (t/xi)^2)^-2 * exp(-(t/tau)^2 / (1 + (t/xi)^2)) with
    tau = Lambda / (2 pi v) the dephasing time from the excitation wavelength
    and xi = w / v the cloud-traversal time.  Frozen atoms (v = 0) give 1.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if not (lambda_exc > 0 and w > 0):
        raise ValueError("lambda_exc and w must be > 0")
    if v < 0:
        raise ValueError("v must be >= 0")
    if v == 0 or t == 0:
        return 1.0
    tau = lambda_exc / (2.0 * math.pi * v)
    xi = w / v
    broadening = 1.0 + (t / xi) ** 2
    return math.exp(-((t / tau) ** 2) / broadening) / broadening**2


def lifetime_efficiency(t: float, tau1: float, tau2: float) -> float:
    """Joint survival of both Rydberg excitations over the interaction window."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if not (tau1 > 0 and tau2 > 0):
        raise ValueError("lifetimes must be > 0")
    return math.exp(-t / tau1 - t / tau2)


@dataclass(frozen=True)
class EfficiencyBreakdown:
    """Per-photon and pair retrieval efficiencies for one configuration."""

    photon1: float
    photon2: float
    pair: float
    t_pi: float


def pair_efficiency(config: GateConfig, axis: str = "par") -> EfficiencyBreakdown:
    """Retrieval efficiency at the pi-phase interaction time for the config.

    Each photon pays its own thermal-dephasing and lifetime factor plus the
    external per-rail multiplier; the pair value is the product of the two,
    because the gate needs both photons back.  ``axis`` selects which width
    enters the traversal time scale (the parallel width by default, as the
    smallest one dominates).
    """
    t = time_for_pi(config.separation_mag, config.c6)
    v = thermal_speed(config.loss.temperature, config.loss.atomic_mass)
    lam = config.loss.lambda_exc
    ext = config.loss.external_loss
    etas = []
    for profile in (config.profile1, config.profile2):
        eta_th = thermal_efficiency(t, lam, profile.width(axis), v)
        eta_life = math.exp(-t / profile.rydberg_lifetime)
        etas.append(eta_th * eta_life * ext)
    return EfficiencyBreakdown(
        photon1=etas[0], photon2=etas[1], pair=etas[0] * etas[1], t_pi=t
    )


def uniform_loss_balancer(rail_efficiencies) -> np.ndarray:
    """Added-loss multipliers that equalize the four rail efficiencies.

    Returns m_i = min_j(eta_j) / eta_i so that eta_i * m_i is identical
    across rails; all multipliers are <= 1.
    """
    etas = np.asarray(rail_efficiencies, dtype=float)
    if etas.shape != (4,):
        raise ValueError("expected exactly four rail efficiencies")
    if np.any(etas <= 0) or np.any(etas > 1):
        raise PhysicsError("rail efficiencies must lie in (0, 1]")
    return etas.min() / etas
