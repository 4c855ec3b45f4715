"""Built-in scenario files reproducing the sphere-release experiments.

fig4: single sphere, two center releases, constant permeability (one file
per gamma level). fig5: same sphere with a permeability schedule toggling
between 0 and 0.1. fig6: two spheres coupled through a pi/4 cap with diode
channels.
"""

import json
import math
import os

_SPHERE = {"R0": 1.0, "D": 1e-2, "Q": 240, "T": 0.01}
_RELEASES_SMALL = [
    {"t_start": 0.25, "t0": 0.1, "r0": 0.1, "amount_scale": 1.0},
    {"t_start": 3.0, "t0": 0.1, "r0": 0.1, "amount_scale": 1.0},
]
_OBSERVE_FIG4 = [
    {"r": 0.4, "phi": math.pi / 3, "theta": math.pi / 4},
    {"r": 0.9, "phi": math.pi / 3, "theta": math.pi / 4},
]
_ORACLE = {"dt": 1e-4, "n_particles": 200_000, "seed": 20260827,
           "kernel_radius": 0.09, "record_interval": 0.05}


def fig4(gamma):
    return {
        "sphere": dict(_SPHERE),
        "releases": [dict(r) for r in _RELEASES_SMALL],
        "permeability": {"mode": "constant", "gamma": gamma},
        "region": {"kind": "full"},
        "observe": [dict(o) for o in _OBSERVE_FIG4],
        "horizon": 30.0,
        "oracle": dict(_ORACLE),
        "output": {"normalized": True},
    }


def fig5():
    return {
        "sphere": dict(_SPHERE),
        "releases": [dict(r) for r in _RELEASES_SMALL],
        "permeability": {"mode": "schedule", "schedule": [
            {"t_from": 0.0, "gamma": 0.0},
            {"t_from": 5.0, "gamma": 0.1},
            {"t_from": 10.0, "gamma": 0.0},
            {"t_from": 15.0, "gamma": 0.1},
            {"t_from": 20.0, "gamma": 0.0},
        ]},
        "region": {"kind": "full"},
        "observe": [{"r": 0.9, "phi": math.pi / 3, "theta": math.pi / 4}],
        "horizon": 25.0,
        "oracle": dict(_ORACLE),
        "output": {"normalized": True},
    }


def fig6():
    return {
        "sphere": dict(_SPHERE),
        "releases": [
            {"t_start": 0.25, "t0": 0.4, "r0": 0.4, "amount_scale": 1.0},
            {"t_start": 3.0, "t0": 0.4, "r0": 0.4, "amount_scale": 1.0},
        ],
        "network": {"enabled": True, "gamma_s1": 0.1, "gamma_s2": 1.0,
                    "theta0": math.pi / 4},
        "observe": [
            {"r": 1.0, "phi": math.pi / 2, "theta": 0.0},
            {"r": 0.1, "phi": math.pi / 2, "theta": 0.0},
        ],
        "horizon": 700.0,  # ~5x the dominant coupling time constant (138 s)
        "oracle": dict(_ORACLE),
        "output": {"normalized": True},
    }


def write_preset(name, out_dir="."):
    """Write the scenario file(s) for one preset; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if name == "fig4":
        for g in (0.0, 1e-2, 1e-1):
            p = os.path.join(out_dir, f"fig4_gamma_{g:g}.json")
            with open(p, "w") as fh:
                json.dump(fig4(g), fh, indent=2)
            paths.append(p)
    elif name == "fig5":
        p = os.path.join(out_dir, "fig5.json")
        with open(p, "w") as fh:
            json.dump(fig5(), fh, indent=2)
        paths.append(p)
    elif name == "fig6":
        p = os.path.join(out_dir, "fig6.json")
        with open(p, "w") as fh:
            json.dump(fig6(), fh, indent=2)
        paths.append(p)
    else:
        raise ValueError(f"unknown preset {name!r} (expected fig4, fig5, or fig6)")
    return paths
