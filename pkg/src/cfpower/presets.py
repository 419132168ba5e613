"""Preset experiments at desk scale and at full ("paper" tier) scale.

Presets are partial configuration sections (same layout as a config file),
so they merge with the usual precedence rules in :mod:`cfpower.config`.
"""

TIERS = ("desk", "paper")

_DESK_SWARM = {"particles": 20, "iterations": 500}
_PAPER_SWARM = {"particles": 50, "iterations": 10_000}


def _cdf_preset(direction, strategies, K_desk, K_paper, carrier=3.5e9, title=""):
    exp = {"directions": [direction], "strategies": list(strategies)}
    return {
        "direction": direction,
        "title": title,
        "desk": {
            "network": {"M": 32, "N": 4, "K": K_desk},
            "channel": {"carrier_frequency": carrier},
            "psa": dict(_DESK_SWARM),
            "experiment": {**exp, "realizations": 200, "levels": 100},
        },
        "paper": {
            "network": {"M": 256, "N": 4, "K": K_paper},
            "channel": {"carrier_frequency": carrier},
            "psa": dict(_PAPER_SWARM),
            "experiment": {**exp, "realizations": 10_000, "levels": 100},
        },
    }


def _sweep_preset(direction, strategies, title=""):
    exp = {"directions": [direction], "strategies": list(strategies)}
    return {
        "direction": direction,
        "title": title,
        "desk": {
            "network": {"M": 8, "N": 16, "K": 8, "total_antennas": 128},
            "psa": dict(_DESK_SWARM),
            "experiment": {**exp, "realizations": 100, "sweep_M": [8, 16, 32, 64]},
        },
        "paper": {
            "network": {"M": 16, "N": 64, "K": 64, "total_antennas": 1024},
            "psa": dict(_PAPER_SWARM),
            "experiment": {**exp, "realizations": 10_000, "sweep_M": [16, 32, 64, 128, 256]},
        },
    }


PRESETS = {
    "sweep-fullpower-uplink": _sweep_preset("uplink", ["none", "inversion"],
                          "Jain index vs AP count, channel inversion vs full power"),
    "sweep-fullpower-downlink": _sweep_preset("downlink", ["none", "inversion"],
                          "Jain index vs AP count, channel inversion vs full power"),
    "two-ue-maxmin-uplink": _cdf_preset("uplink", ["inversion", "maxmin"], 2, 2, carrier=2e9,
                        title="two-UE min-SINR CDF, channel inversion vs max-min"),
    "two-ue-maxmin-downlink": _cdf_preset("downlink", ["inversion", "maxmin"], 2, 2, carrier=2e9,
                        title="two-UE min-SINR CDF, channel inversion vs max-min"),
    "two-ue-uplink": _cdf_preset("uplink", ["inversion", "maxmin", "psa"], 2, 2,
                        title="two-UE min-SINR CDF, all three strategies"),
    "two-ue-downlink": _cdf_preset("downlink", ["inversion", "maxmin", "psa"], 2, 2,
                        title="two-UE min-SINR CDF, all three strategies"),
    "many-ue-uplink": _cdf_preset("uplink", ["inversion", "psa"], 8, 64,
                        title="many-UE min-SINR CDF, PSA vs channel inversion"),
    "many-ue-downlink": _cdf_preset("downlink", ["inversion", "psa"], 8, 64,
                        title="many-UE min-SINR CDF, PSA vs channel inversion"),
    "sweep-psa-uplink": _sweep_preset("uplink", ["inversion", "psa"],
                           "Jain index vs AP count, PSA vs channel inversion"),
    "sweep-psa-downlink": _sweep_preset("downlink", ["inversion", "psa"],
                           "Jain index vs AP count, PSA vs channel inversion"),
}

def get_preset(name, tier):
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    if tier not in TIERS:
        raise KeyError(f"unknown tier {tier!r}; choose from {', '.join(TIERS)}")
    return PRESETS[name][tier]


def describe_presets():
    lines = []
    for name, p in PRESETS.items():
        lines.append(f"{name:<25} {p['direction']:<9} {p['title']}")
    return "\n".join(lines)
