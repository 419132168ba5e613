"""Centralized MMSE combining and RZF precoding reduced to K x K coefficients."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve


class NumericalFailure(ArithmeticError):
    """The regularized Gram matrix could not be factorized."""


@dataclass(frozen=True)
class EffectiveCoefficients:
    """Effective channel coefficients after combining or precoding.

    Attributes
    ----------
    direction : {'uplink', 'downlink'}
    coeff : ndarray, shape (K, K)
        ``coeff[k, l]`` is the gain from UE ``l``'s stream into UE ``k``'s
        output (``f_kl`` uplink, ``g_kl`` downlink).
    noise_var : ndarray, shape (K,)
        Effective noise variance seen by each UE's stream.
    interference_power : ndarray, shape (K, K), optional
        Replaces ``|coeff|**2`` in the interference sum when set (used for
        ensemble-averaged interference).
    """

    direction: str
    coeff: np.ndarray
    noise_var: np.ndarray
    interference_power: np.ndarray = None

    @property
    def K(self):
        return self.coeff.shape[0]

    def signal_power(self):
        return np.abs(np.diagonal(self.coeff)) ** 2

    def cross_power(self):
        """Off-diagonal interference powers, zero on the diagonal."""
        p = np.abs(self.coeff) ** 2 if self.interference_power is None else self.interference_power.copy()
        np.fill_diagonal(p, 0.0)
        return p


def _regularized_solve(G, B):
    """Solve ``G X = B`` for Hermitian positive definite ``G``."""
    try:
        c = cho_factor(G, lower=True, check_finite=True)
    except (LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"Cholesky factorization failed: {exc}") from exc
    return cho_solve(c, B, check_finite=False)


def _check(H, N0):
    H = np.asarray(H)
    if H.ndim != 2:
        raise ValueError(f"H must be a 2-D (M*N, K) matrix, got shape {H.shape}")
    if not N0 > 0:
        raise ValueError("noise power must be positive")
    return H.astype(complex, copy=False)


def mmse_effective_coeffs(H, N0):
    """Uplink coefficients for the combiner ``V = (H H^H + N0 I)^-1 H``.

    Returns ``f_kl = h_k^H (H H^H + N0 I)^-1 h_l`` and the per-stream noise
    variance ``N0 * ||(H H^H + N0 I)^-1 h_k||^2``.
    """
    H = _check(H, N0)
    G = H @ H.conj().T + N0 * np.eye(H.shape[0])
    X = _regularized_solve(G, H)
    F = H.conj().T @ X
    # quadratic forms of a PSD matrix; discard roundoff imaginary parts
    F[np.diag_indices_from(F)] = F.diagonal().real
    noise = N0 * np.sum(np.abs(X) ** 2, axis=0)
    return EffectiveCoefficients("uplink", F, noise)


def rzf_effective_coeffs(H, N0):
    """Downlink coefficients for the precoder ``A = (H* H^T + N0 I)^-1 H*``.

    ``g_kl = h_k^T (H* H^T + N0 I)^-1 h_l*``; receiver noise is ``N0``.
    """
    H = _check(H, N0)
    Hc = H.conj()
    G = Hc @ H.T + N0 * np.eye(H.shape[0])
    A = _regularized_solve(G, Hc)
    Gk = H.T @ A
    Gk[np.diag_indices_from(Gk)] = Gk.diagonal().real
    noise = np.full(H.shape[1], float(N0))
    return EffectiveCoefficients("downlink", Gk, noise)


def effective_coeffs(H, N0, direction):
    if direction == "uplink":
        return mmse_effective_coeffs(H, N0)
    if direction == "downlink":
        return rzf_effective_coeffs(H, N0)
    raise ValueError(f"unknown direction {direction!r}")
