"""SINR, achievable rate, minimum rate and Jain's index from effective coefficients.

Every function taking ``zeta`` broadcasts over leading axes: a ``(P, K)``
array of power vectors yields ``(P, K)`` SINRs and ``(P,)`` fitness values.
"""

from dataclasses import dataclass

import numpy as np


def as_power_vector(zeta, K=None, zeta_max=None):
    """Validate a power-control vector (nonnegative, optionally capped)."""
    zeta = np.asarray(zeta, dtype=float)
    if K is not None and zeta.shape[-1] != K:
        raise ValueError(f"power vector has length {zeta.shape[-1]}, expected {K}")
    if np.any(zeta < 0):
        raise ValueError("power coefficients must be nonnegative")
    if zeta_max is not None and np.any(zeta > zeta_max):
        raise ValueError(f"power coefficients must not exceed {zeta_max}")
    return zeta


def sinr(coeffs, zeta):
    """Per-UE SINR ``|c_kk|^2 z_k / (sum_{l!=k} |c_kl|^2 z_l + noise_k)``.

    A UE with zero received signal has SINR 0, even when the denominator
    also vanishes.
    """
    zeta = np.asarray(zeta, dtype=float)
    signal = coeffs.signal_power() * zeta
    interference = zeta @ coeffs.cross_power().T
    denom = interference + coeffs.noise_var
    out = np.zeros(np.broadcast(signal, denom).shape)
    np.divide(signal, denom, out=out, where=signal > 0)
    return out


def instantaneous_sinr(coeffs, zeta, k):
    if not 0 <= k < coeffs.K:
        raise IndexError(f"UE index {k} out of range for K={coeffs.K}")
    return sinr(coeffs, zeta)[..., k]


def achievable_rates(coeffs, zeta):
    return np.log2(1.0 + sinr(coeffs, zeta))


def min_rate_fitness(coeffs, zeta):
    """Smallest per-UE rate in bits/s/Hz; the max-min objective."""
    return achievable_rates(coeffs, zeta).min(axis=-1)


def jain_index(rates):
    """Jain's fairness index ``(sum R)^2 / (K sum R^2)`` over the last axis.

    An all-zero rate vector is treated as perfectly fair (index 1).
    """
    rates = np.asarray(rates, dtype=float)
    K = rates.shape[-1]
    num = rates.sum(axis=-1) ** 2
    den = K * (rates ** 2).sum(axis=-1)
    out = np.ones(np.shape(num))
    np.divide(num, den, out=out, where=den > 0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RateReport:
    per_ue_rate: np.ndarray
    per_ue_sinr: np.ndarray
    min_rate: float
    jain: float


def rate_report(coeffs, zeta):
    zeta = as_power_vector(zeta, coeffs.K)
    s = sinr(coeffs, zeta)
    r = np.log2(1.0 + s)
    return RateReport(per_ue_rate=r, per_ue_sinr=s, min_rate=float(r.min()), jain=jain_index(r))
