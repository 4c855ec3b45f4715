"""Raised-cosine particle releases and their projection onto the mode basis.

A release is the product of a temporal raised cosine of duration t0 (total
temporal weight t0/2) and a spatial raised cosine of radius r0 centered at
the origin. Centered sources are spherically symmetric, so they excite only
the (n, m) = (0, 0) modes; all other modal entries are exactly zero.
"""

import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .specfun import spherical_bessel_j

#: analytic volume integral of the spatial profile, divided by r0^3:
#: int_V (1 + cos(pi r/r0))/2 dV = 2 pi r0^3 (1/3 - 2/pi^2)
SPATIAL_MASS_COEFF = 2 * np.pi * (1.0 / 3.0 - 2.0 / np.pi ** 2)


@dataclass(frozen=True)
class ReleaseEvent:
    """One release window: raised cosine in time, raised cosine in radius."""

    t_start: float
    t0: float
    r0: float
    amount_scale: float = 1.0

    def __post_init__(self):
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")
        if self.amount_scale < 0:
            raise ValueError("amount_scale must be >= 0")

    @property
    def mass(self):
        """Total injected amount: amount_scale * (t0/2) * spatial volume integral."""
        return self.amount_scale * 0.5 * self.t0 * SPATIAL_MASS_COEFF * self.r0 ** 3


def temporal_profile(t, ev):
    """(1 - cos(2 pi (t - t_start)/t0))/2 inside the window, 0 outside."""
    tau = t - ev.t_start
    if tau < 0 or tau > ev.t0:
        return 0.0
    return 0.5 * (1.0 - np.cos(2 * np.pi * tau / ev.t0))


def spatial_profile(r, ev):
    """(1 + cos(pi r/r0))/2 for r <= r0, 0 beyond."""
    r = np.asarray(r, dtype=float)
    out = np.where(r <= ev.r0, 0.5 * (1.0 + np.cos(np.pi * r / ev.r0)), 0.0)
    return out if out.ndim else float(out)


def project_source(ms, ev):
    """Modal projection of the spatial profile: one complex entry per mode.

    Entry mu is sqrt(4 pi) * int_0^r0 j_0(k_mu r) f_x(r) r^2 dr * amount_scale
    for (n, m) = (0, 0) modes; exactly 0 for every other mode (a centered
    radial profile is orthogonal to all non-constant harmonics).
    """
    if ev.r0 > ms.R0:
        raise ValueError("release radius exceeds the sphere radius")
    vec = _radial_projection(ms, ev.r0).copy()
    vec *= ev.amount_scale
    return vec


_proj_cache = {}
_proj_lock = threading.Lock()


def _radial_projection(ms, r0):
    key = (id(ms), float(r0))
    hit = _proj_cache.get(key)
    if hit is not None:
        return hit
    vec = np.zeros(len(ms), dtype=complex)
    root4pi = np.sqrt(4 * np.pi)
    for mo in ms:
        if mo.n != 0 or mo.m != 0:
            continue
        # panels no wider than half a period of j_0(k r) so large-k modes
        # are never aliased by the quadrature
        n_osc = max(1, int(np.ceil(mo.k * r0 / np.pi)))
        pts = (np.arange(1, n_osc) * r0 / n_osc).tolist() or None
        val, _ = quad(
            lambda r: spherical_bessel_j(0, mo.k * r)
            * 0.5 * (1.0 + np.cos(np.pi * r / r0)) * r ** 2,
            0.0, r0, epsabs=1e-16, epsrel=1e-12, limit=200 + 20 * n_osc,
            points=pts,
        )
        vec[mo.mu] = root4pi * val
    with _proj_lock:
        _proj_cache.setdefault(key, vec)
    return _proj_cache[key]


@dataclass
class SourceSchedule:
    """Releases sorted by start time; overlapping windows superpose."""

    events: tuple

    def __init__(self, events):
        self.events = tuple(sorted(events, key=lambda ev: ev.t_start))

    @property
    def total_mass(self):
        return sum(ev.mass for ev in self.events)

    @property
    def t_end(self):
        """Time after which every release window has closed."""
        return max((ev.t_start + ev.t0 for ev in self.events), default=0.0)


def source_vector_at(sched, ms, t):
    """Per-step modal input: sum over events of f_t(t) * projection."""
    vec = np.zeros(len(ms), dtype=complex)
    for ev in sched.events:
        w = temporal_profile(t, ev)
        if w > 0.0:
            vec += w * project_source(ms, ev)
    return vec
