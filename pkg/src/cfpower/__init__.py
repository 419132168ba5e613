"""Power control for cell-free massive MIMO under probabilistic LoS/NLoS channels."""

from cfpower.geometry import NetworkLayout, generate_layout
from cfpower.channel import ChannelParams, ChannelRealization, sample_channel
from cfpower.beamforming import (
    EffectiveCoefficients,
    NumericalFailure,
    mmse_effective_coeffs,
    rzf_effective_coeffs,
)
from cfpower.rates import RateReport, jain_index, min_rate_fitness, rate_report
from cfpower.powerctl import (
    BudgetExceeded,
    SwarmConfig,
    channel_inversion,
    max_min_brute_force,
    psa_maximize,
)

__version__ = "0.1.0"
