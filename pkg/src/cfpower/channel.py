"""Probabilistic LoS/NLoS channel model.

Each AP-UE link carries a blockage-dependent LoS term plus Rayleigh-faded
NLoS scattering::

    h_mk = delta_mk * hbar_mk + sqrt(beta_mk) * hdot_mk

with ``delta_mk ~ Bernoulli(P_mk)`` following the ITU blockage model.
All distances are in meters; ``mu`` is blockages per square meter.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import erf

from cfpower.geometry import _check_index

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ChannelParams:
    """Physical constants of the channel model.

    ``antenna_spacing=None`` means half a wavelength. ``noise_power=None``
    means "derive from the deployment", see :func:`default_noise_power`.
    ``pathloss_distance`` selects whether the NLoS power law uses the 3-D
    link distance (default) or the planar distance; both are clamped at 1.
    """

    eta: float = 3.0
    alpha: float = 0.5
    mu: float = 300e-6
    gamma: float = 20.0
    carrier_frequency: float = 3.5e9
    d0: float = 1.0
    N: int = 4
    antenna_spacing: float = None
    gain_ap: float = 1.0
    gain_ue: float = 1.0
    noise_power: float = None
    pathloss_distance: str = "3d"

    def __post_init__(self):
        checks = {
            "eta": self.eta > 0,
            "alpha": 0 <= self.alpha <= 1,
            "mu": self.mu >= 0,
            "gamma": self.gamma > 0,
            "carrier_frequency": self.carrier_frequency > 0,
            "d0": self.d0 > 0,
            "N": int(self.N) == self.N and self.N >= 1,
            "antenna_spacing": self.antenna_spacing is None or self.antenna_spacing > 0,
            "gain_ap": self.gain_ap > 0,
            "gain_ue": self.gain_ue > 0,
            "noise_power": self.noise_power is None or self.noise_power > 0,
            "pathloss_distance": self.pathloss_distance in ("3d", "2d"),
        }
        bad = [name for name, ok in checks.items() if not ok]
        if bad:
            raise ValueError(f"invalid channel parameter(s): {', '.join(bad)}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def spacing(self):
        if self.antenna_spacing is None:
            return self.wavelength / 2
        return self.antenna_spacing

    def with_(self, **changes):
        return replace(self, **changes)


def omega(params, ap_height, ue_height):
    """Height-averaged probability that a blockage is shorter than the ray."""
    gap = ap_height - ue_height
    if not gap > 0:
        raise ValueError("ap_height must exceed ue_height")
    s = params.gamma * math.sqrt(2.0)
    return (
        math.sqrt(math.pi / 2)
        * (params.gamma / gap)
        * (erf(ap_height / s) - erf(ue_height / s))
    )


def los_probability(d, params, ap_height=10.0, ue_height=1.5):
    """LoS probability ``(1 - omega) ** sqrt(alpha * mu * d)`` at planar distance ``d``.

    Accepts scalars or arrays of distances.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be nonnegative")
    w = omega(params, ap_height, ue_height)
    p = (1.0 - w) ** np.sqrt(params.alpha * params.mu * d)
    return p if p.ndim else float(p)


def array_response(theta, params):
    """ULA steering vector(s) ``exp(i 2 pi n (d/lambda) sin theta)``, n = 0..N-1.

    ``theta`` may be an array; the antenna axis is appended last.
    """
    theta = np.asarray(theta, dtype=float)
    n = np.arange(params.N)
    phase = 2 * np.pi * (params.spacing / params.wavelength) * np.sin(theta)[..., None] * n
    return np.exp(1j * phase)


def los_gain_matrix(layout, params):
    """LoS gain vectors for every link, shape (M, K, N)."""
    x = layout.link_distances_3d()
    amp = (
        math.sqrt(params.gain_ap * params.gain_ue)
        * layout.ue_height * layout.ap_height / (4 * np.pi * x)
    )
    scalar = amp * np.exp(2j * np.pi * x / params.wavelength)
    return array_response(layout.azimuths(), params) * scalar[..., None]


def los_gain(m, k, layout, params):
    _check_index(layout, m, k)
    return los_gain_matrix(layout, params)[m, k]


def nlos_pathloss(x, params):
    """Clamped power law ``min(1, (x/d0) ** -eta)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("distance must be positive")
    beta = np.minimum(1.0, (x / params.d0) ** (-params.eta))
    return beta if beta.ndim else float(beta)


def _pathloss_matrix(layout, params):
    if params.pathloss_distance == "3d":
        return nlos_pathloss(layout.link_distances_3d(), params)
    d = layout.horizontal_distances()
    # zero planar distance is inside the clamp region
    return nlos_pathloss(np.maximum(d, np.finfo(float).tiny), params)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the (M*N) x K channel matrix with its components kept.

    Row block ``m*N:(m+1)*N`` of ``H`` belongs to AP ``m``.
    """

    H: np.ndarray
    delta: np.ndarray
    beta: np.ndarray
    los_gain: np.ndarray
    fading: np.ndarray
    layout: object = field(repr=False)

    def __post_init__(self):
        M, K, N = self.los_gain.shape
        if self.H.shape != (M * N, K):
            raise ValueError(f"H has shape {self.H.shape}, expected {(M * N, K)}")
        if not np.all((self.delta == 0) | (self.delta == 1)):
            raise ValueError("delta must be binary")
        if not np.all((self.beta > 0) & (self.beta <= 1)):
            raise ValueError("beta must lie in (0, 1]")
        if not np.allclose(self.assemble(), self.H, rtol=1e-12, atol=0):
            raise ValueError("H does not match its LoS/NLoS decomposition")

    @property
    def M(self):
        return self.los_gain.shape[0]

    @property
    def K(self):
        return self.los_gain.shape[1]

    @property
    def N(self):
        return self.los_gain.shape[2]

    def assemble(self):
        h = (
            self.delta[..., None] * self.los_gain
            + np.sqrt(self.beta)[..., None] * self.fading
        )
        return stack_links(h)

    def link(self, m, k):
        return self.H[m * self.N:(m + 1) * self.N, k]


def stack_links(h):
    """(M, K, N) per-link vectors -> (M*N, K) channel matrix."""
    M, K, N = h.shape
    return h.transpose(0, 2, 1).reshape(M * N, K)


def sample_channel(layout, params, rng=None, blockage_rng=None):
    """Draw blockage states and fading for every link of ``layout``.

    ``blockage_rng`` lets callers keep the LoS/NLoS states on a separate
    stream from the small-scale fading; by default both come from ``rng``.
    """
    rng = np.random.default_rng(rng)
    blockage_rng = rng if blockage_rng is None else np.random.default_rng(blockage_rng)
    M, K, N = layout.M, layout.K, params.N

    p_los = los_probability(layout.horizontal_distances(), params,
                            layout.ap_height, layout.ue_height)
    delta = (blockage_rng.random((M, K)) < p_los).astype(float)
    fading = (rng.standard_normal((M, K, N)) + 1j * rng.standard_normal((M, K, N))) / np.sqrt(2)
    beta = _pathloss_matrix(layout, params)
    hbar = los_gain_matrix(layout, params)

    H = stack_links(delta[..., None] * hbar + np.sqrt(beta)[..., None] * fading)
    return ChannelRealization(H=H, delta=delta, beta=beta, los_gain=hbar,
                              fading=fading, layout=layout)


def median_link_distance(area_side, ap_height=10.0, ue_height=1.5, samples=200_000):
    """Median 3-D AP-UE distance under uniform deployment (fixed-seed estimate)."""
    rng = np.random.default_rng(0)
    a = rng.uniform(0, area_side, size=(samples, 2))
    b = rng.uniform(0, area_side, size=(samples, 2))
    d = np.hypot(*(a - b).T)
    return float(np.median(np.hypot(d, ap_height - ue_height)))


def default_noise_power(params, area_side, ap_height=10.0, ue_height=1.5):
    """Noise power giving 0 dB NLoS receive SNR at the median link distance.

    Transmit power is normalized to 1, so this is just the NLoS gain there.
    """
    return nlos_pathloss(median_link_distance(area_side, ap_height, ue_height), params)


NOISE_REFERENCES = ("los-array", "nlos-link")


def reference_noise_power(params, M, area_side, ap_height=10.0, ue_height=1.5,
                          reference="los-array"):
    """Noise power in normalized units (unit maximum transmit power).

    ``"los-array"``: 0 dB aggregate SNR over all ``M*N`` AP antennas for a
    UE with unblocked LoS at the median link distance.
    ``"nlos-link"``: 0 dB per-antenna NLoS SNR at the median link distance.
    """
    if reference == "nlos-link":
        return default_noise_power(params, area_side, ap_height, ue_height)
    if reference != "los-array":
        raise ValueError(f"unknown noise reference {reference!r}")
    x = median_link_distance(area_side, ap_height, ue_height)
    amp = math.sqrt(params.gain_ap * params.gain_ue) * ue_height * ap_height / (4 * math.pi * x)
    return M * params.N * amp ** 2
