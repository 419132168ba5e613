"""Sectioned configuration: INI files, presets, overrides -> ExperimentConfig.

Sections mirror :class:`~cfpower.simharness.ExperimentConfig`::

    [network]     M, K, N, total_antennas, area_side, ap_height, ue_height
    [channel]     ChannelParams fields (except N), noise_reference
    [psa]         SwarmConfig fields
    [experiment]  realizations, directions, strategies, rates_mode, levels,
                  max_evaluations, seed, layout_policy, blockage_policy,
                  threads, sweep_M

Values are Python literals (``3.5e9``, ``["uplink"]``, ``None``); anything
that does not parse as a literal is taken as a bare string.
"""

import ast
import configparser
import copy
import json
from dataclasses import fields
from pathlib import Path

from cfpower.channel import ChannelParams
from cfpower.powerctl import SwarmConfig
from cfpower.simharness import ExperimentConfig

SECTIONS = {
    "network": ("M", "K", "N", "total_antennas", "area_side", "ap_height", "ue_height"),
    "channel": tuple(f.name for f in fields(ChannelParams) if f.name != "N") + ("noise_reference",),
    "psa": tuple(f.name for f in fields(SwarmConfig)),
    "experiment": ("realizations", "directions", "strategies", "rates_mode", "levels",
                   "max_evaluations", "seed", "layout_policy", "blockage_policy",
                   "threads", "sweep_M"),
}


class ConfigError(ValueError):
    """Bad configuration; the message names the offending key or file."""


def _literal(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text.strip()


def _check_key(section, key):
    if section not in SECTIONS:
        raise ConfigError(f"unknown section [{section}]")
    if key not in SECTIONS[section]:
        raise ConfigError(f"unknown key '{key}' in section [{section}]")


def read_config_file(path):
    """Load an INI file, or the ``config`` block of a metadata/JSON file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        sections = data.get("config", data)
        for sec, values in sections.items():
            for key in values:
                _check_key(sec, key)
        return copy.deepcopy(sections)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    out = {}
    for sec in parser.sections():
        for key, raw in parser[sec].items():
            _check_key(sec, key)
            out.setdefault(sec, {})[key] = _literal(raw)
    return out


def parse_override(text):
    """``section.key=value`` or ``key=value`` (key must be unambiguous)."""
    if "=" not in text:
        raise ConfigError(f"override '{text}' is not of the form key=value")
    name, raw = text.split("=", 1)
    name = name.strip()
    if "." in name:
        section, key = name.split(".", 1)
    else:
        owners = [s for s, keys in SECTIONS.items() if name in keys]
        if len(owners) != 1:
            raise ConfigError(f"unknown or ambiguous override key '{name}'")
        section, key = owners[0], name
    _check_key(section, key)
    return section, key, _literal(raw)


def merge(*layers):
    out = {}
    for layer in layers:
        for sec, values in (layer or {}).items():
            out.setdefault(sec, {}).update(copy.deepcopy(values))
    return out


def build(sections):
    """Sections dict -> (ExperimentConfig, sweep M values or None)."""
    sections = copy.deepcopy(sections)
    for sec, values in sections.items():
        for key in values:
            _check_key(sec, key)
    d = dict(sections.get("network", {}))
    channel = dict(sections.get("channel", {}))
    if "noise_reference" in channel:
        d["noise_reference"] = channel.pop("noise_reference")
    exp = dict(sections.get("experiment", {}))
    sweep = exp.pop("sweep_M", None)
    d.update(exp)
    d["channel"] = channel
    d["swarm"] = dict(sections.get("psa", {}))
    try:
        return ExperimentConfig.from_dict(d), (list(sweep) if sweep else None)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def to_sections(config, sweep_M=None):
    """Inverse of :func:`build`; what gets echoed into run metadata."""
    d = config.to_dict()
    channel = d.pop("channel")
    channel["noise_reference"] = d.pop("noise_reference")
    swarm = d.pop("swarm")
    network = {k: d.pop(k) for k in SECTIONS["network"]}
    experiment = dict(d)
    if sweep_M:
        experiment["sweep_M"] = list(sweep_M)
    return {"network": network, "channel": channel, "psa": swarm, "experiment": experiment}
