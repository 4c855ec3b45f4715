"""Brownian-dynamics Monte Carlo cross-check for the spectral engine.

Particles take isotropic Gaussian steps of per-axis standard deviation
sqrt(2 D dt). A boundary hit on a permeable region is passed with
probability p_cross = gamma * sqrt(pi dt / D) (the first-order mapping from
an impedance coefficient to a per-collision crossing probability), otherwise
the step is reflected specularly about the tangent plane at the straight-line
crossing point. In the two-sphere network, a particle leaving sphere 1
through the cap enters sphere 2 just inside the same local (theta, phi)
with probability gamma_s2, and can never come back (diode channels).

Each particle owns a counter-based random stream derived from
(seed, particle_index, chunk_index), so results do not depend on how the
time axis is chunked across calls or threads.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .engine import NetworkScenario, Scenario

# particle status codes
PENDING, IN_S1, IN_S2, GONE = 0, 1, 2, 3

_U = np.uint64
_INC = _U(0x9E3779B97F4A7C15)
_M1 = _U(0xBF58476D1CE4E5B9)
_M2 = _U(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = _U(30), _U(27), _U(31), _U(11)
_INV53 = 1.0 / float(1 << 53)


@dataclass
class OracleConfig:
    """Monte Carlo parameters.

    kernel_radius = None means 0.08 * R0. dt must resolve the sphere:
    sqrt(2 D dt) <= R0 / 20 is enforced at run time.
    """

    dt: float = 1e-4
    n_particles: int = 200_000
    seed: int = 20260827
    kernel_radius: float | None = None
    record_interval: float = 0.05


@njit(cache=True, inline="always")
def _mix(a, b):
    z = (a + _INC) ^ (b * _M1)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _next(s):
    s = s + _INC
    z = s
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    z = z ^ (z >> _S31)
    return s, float(z >> _S11) * _INV53


@njit(cache=True, fastmath=True)
def _advance_chunk(pos, status, release_step, k0, k1, sig, R0,
                   p_cross_s1, cos_theta0, is_network, gamma_s2, seed, chunk_id):
    """Advance all particles from step k0 to k1 (exclusive). Mutates arrays."""
    n = pos.shape[0]
    R2 = R0 * R0
    eps_in = R0 * (1.0 - 1e-12)
    for i in range(n):
        st = status[i]
        if st == GONE or release_step[i] >= k1:
            continue
        rs = _mix(_U(seed), _U(i) * _U(0x9E3779B9) + _U(chunk_id))
        start = k0 if release_step[i] < k0 else release_step[i]
        if st == PENDING:
            st = IN_S1
        x = pos[i, 0]
        y = pos[i, 1]
        z = pos[i, 2]
        have_spare = False
        spare = 0.0
        for _k in range(start, k1):
            # three unit normals via Box-Muller, one spare kept across steps
            if have_spare:
                g0 = spare
                rs, u1 = _next(rs)
                rs, u2 = _next(rs)
                rad = math.sqrt(-2.0 * math.log(1.0 - u1))
                ang = 2.0 * math.pi * u2
                g1 = rad * math.cos(ang)
                g2 = rad * math.sin(ang)
                have_spare = False
            else:
                rs, u1 = _next(rs)
                rs, u2 = _next(rs)
                rad = math.sqrt(-2.0 * math.log(1.0 - u1))
                ang = 2.0 * math.pi * u2
                g0 = rad * math.cos(ang)
                g1 = rad * math.sin(ang)
                rs, u1 = _next(rs)
                rs, u2 = _next(rs)
                rad = math.sqrt(-2.0 * math.log(1.0 - u1))
                ang = 2.0 * math.pi * u2
                g2 = rad * math.cos(ang)
                spare = rad * math.sin(ang)
                have_spare = True
            dx = sig * g0
            dy = sig * g1
            dz = sig * g2
            nx = x + dx
            ny = y + dy
            nz = z + dz
            if nx * nx + ny * ny + nz * nz <= R2:
                x, y, z = nx, ny, nz
                continue
            # boundary interaction(s); straight-line crossing approximation
            gone = False
            for _hit in range(8):
                a = dx * dx + dy * dy + dz * dz
                b = 2.0 * (x * dx + y * dy + z * dz)
                c = x * x + y * y + z * z - R2
                disc = b * b - 4.0 * a * c
                if disc < 0.0 or a == 0.0:
                    frac = 1.0
                else:
                    frac = (-b + math.sqrt(disc)) / (2.0 * a)
                    if frac < 0.0:
                        frac = 0.0
                    elif frac > 1.0:
                        frac = 1.0
                cx = x + frac * dx
                cy = y + frac * dy
                cz = z + frac * dz
                # membrane only on sphere 1; cap is the region theta <= theta0
                permeable = False
                if st == IN_S1 and p_cross_s1 > 0.0:
                    if cos_theta0 <= -1.0 or cz >= R0 * cos_theta0:
                        permeable = True
                if permeable:
                    rs, u = _next(rs)
                    if u < p_cross_s1:
                        if is_network:
                            rs, u2x = _next(rs)
                            if u2x < gamma_s2:
                                st = IN_S2
                                scale = eps_in / R0
                                x, y, z = cx * scale, cy * scale, cz * scale
                            else:
                                st = GONE
                                gone = True
                        else:
                            st = GONE
                            gone = True
                        break
                # specular reflection of the remaining displacement
                rx = dx * (1.0 - frac)
                ry = dy * (1.0 - frac)
                rz = dz * (1.0 - frac)
                nrm = math.sqrt(cx * cx + cy * cy + cz * cz)
                ux, uy, uz = cx / nrm, cy / nrm, cz / nrm
                dot = rx * ux + ry * uy + rz * uz
                rx -= 2.0 * dot * ux
                ry -= 2.0 * dot * uy
                rz -= 2.0 * dot * uz
                x, y, z = cx, cy, cz
                dx, dy, dz = rx, ry, rz
                nx = x + dx
                ny = y + dy
                nz = z + dz
                if nx * nx + ny * ny + nz * nz <= R2:
                    x, y, z = nx, ny, nz
                    break
            else:
                # pathological multi-hit step: clamp just inside
                nrm = math.sqrt(x * x + y * y + z * z)
                if nrm > eps_in:
                    x, y, z = x / nrm * eps_in, y / nrm * eps_in, z / nrm * eps_in
            if gone:
                break
        pos[i, 0] = x
        pos[i, 1] = y
        pos[i, 2] = z
        status[i] = st


def crossing_probability(gamma, dt, D):
    """First-order membrane crossing probability gamma * sqrt(pi dt / D)."""
    p = gamma * math.sqrt(math.pi * dt / D)
    if p > 1.0:
        warnings.warn(
            f"crossing probability {p:.3g} clamped to 1; decrease dt",
            RuntimeWarning,
        )
        p = 1.0
    return min(p, 1.0)


def inject(sched, cfg, rng=None):
    """Sample release times and positions for every particle.

    Times follow the raised-cosine window of each event (events weighted by
    their injected mass), positions follow the density f_x(r) r^2 with
    isotropic angles; both by rejection sampling.
    """
    rng = rng or np.random.default_rng(cfg.seed)
    n = cfg.n_particles
    weights = np.array([ev.mass for ev in sched.events])
    weights = weights / weights.sum()
    which = rng.choice(len(sched.events), size=n, p=weights)
    t_rel = np.empty(n)
    radius = np.empty(n)
    for ei, ev in enumerate(sched.events):
        idx = np.flatnonzero(which == ei)
        t_rel[idx] = ev.t_start + _rejection(
            rng, len(idx), lambda u: 0.5 * (1.0 - np.cos(2 * np.pi * u)), 1.0
        ) * ev.t0
        radius[idx] = _rejection(
            rng, len(idx),
            lambda u: 0.5 * (1.0 + np.cos(np.pi * u)) * u ** 2,
            _fx_r2_max(),
        ) * ev.r0
    # isotropic direction
    cos_t = rng.uniform(-1.0, 1.0, size=n)
    phi = rng.uniform(0.0, 2 * np.pi, size=n)
    sin_t = np.sqrt(1.0 - cos_t ** 2)
    pos = np.column_stack([
        radius * sin_t * np.cos(phi),
        radius * sin_t * np.sin(phi),
        radius * cos_t,
    ])
    return t_rel, pos


def _fx_r2_max():
    u = np.linspace(0.0, 1.0, 4001)
    return float(np.max(0.5 * (1.0 + np.cos(np.pi * u)) * u ** 2)) * 1.0000001


def _rejection(rng, n, density_unit, dmax):
    """Sample n values on [0, 1] with unnormalized density density_unit."""
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = max(2 * (n - filled), 64)
        u = rng.uniform(0.0, 1.0, size=m)
        v = rng.uniform(0.0, dmax, size=m)
        acc = u[v < density_unit(u)]
        take = min(len(acc), n - filled)
        out[filled:filled + take] = acc[:take]
        filled += take
    return out


def kernel_volume(d, kr, R0):
    """Effective estimation volume: ball of radius kr at distance d from the
    center, clipped to the sphere of radius R0."""
    if d + kr <= R0:
        return 4.0 / 3.0 * np.pi * kr ** 3
    if d - kr >= R0:
        return 0.0
    # sphere-sphere intersection (point inside, ball straddling the surface)
    R, r = R0, kr
    return (np.pi * (R + r - d) ** 2
            * (d ** 2 + 2 * d * r - 3 * r ** 2 + 2 * d * R + 6 * r * R - 3 * R ** 2)
            / (12 * d))


def estimate_concentration(pos, mask, points_xyz, kernel_radius, weight, R0):
    """Kernel-ball concentration estimate at each point: count * weight / V_eff."""
    out = np.zeros(len(points_xyz))
    if np.any(mask):
        act = pos[mask]
        for j, pc in enumerate(points_xyz):
            d2 = np.sum((act - pc[None, :]) ** 2, axis=1)
            cnt = int(np.count_nonzero(d2 <= kernel_radius ** 2))
            vol = kernel_volume(float(np.linalg.norm(pc)), kernel_radius, R0)
            out[j] = cnt * weight / vol
    return out


@dataclass
class OracleResult:
    """Concentration estimates and mass traces on the recording grid."""

    times: np.ndarray
    conc: np.ndarray         # (n_rec, n_points) sphere 1 (or the only sphere)
    mass: np.ndarray
    conc_s2: np.ndarray | None = None
    mass_s2: np.ndarray | None = None
    counts: np.ndarray | None = None      # raw kernel counts, sphere 1
    counts_s2: np.ndarray | None = None
    weight: float = 0.0


def _point_xyz(points):
    out = np.empty((len(points), 3))
    for i, pt in enumerate(points):
        out[i] = (pt.r * np.sin(pt.theta) * np.cos(pt.phi),
                  pt.r * np.sin(pt.theta) * np.sin(pt.phi),
                  pt.r * np.cos(pt.theta))
    return out


def run_oracle(sc, cfg: OracleConfig) -> OracleResult:
    """Run the particle simulation for a Scenario or NetworkScenario."""
    network = isinstance(sc, NetworkScenario)
    sphere = sc.sphere_s1 if network else sc.sphere
    ms = sphere.mode_set
    R0, D = ms.R0, ms.D
    dt = cfg.dt
    if math.sqrt(2 * D * dt) > R0 / 20:
        raise ValueError("dt too large: sqrt(2 D dt) must be <= R0/20")
    kr = cfg.kernel_radius if cfg.kernel_radius is not None else 0.08 * R0
    if kr > R0 / 5 + 1e-12:
        raise ValueError("kernel_radius must be <= R0/5")

    t_rel, pos = inject(sc.schedule, cfg)
    release_step = np.ceil(t_rel / dt).astype(np.int64)
    status = np.full(cfg.n_particles, PENDING, dtype=np.int8)
    M_total = sc.schedule.total_mass
    weight = M_total / cfg.n_particles
    sig = math.sqrt(2 * D * dt)

    if network:
        region = sphere.feedback.region
        cos_theta0 = math.cos(region.theta0)
        gamma_s2 = sc.connection.gamma_s2
        gamma_of = sphere.gamma.value
    else:
        fb = sphere.feedback
        if fb is not None and fb.region.kind == "cap":
            cos_theta0 = math.cos(fb.region.theta0)
        else:
            cos_theta0 = -2.0  # whole surface permeable
        gamma_s2 = 0.0
        gamma_of = sphere.gamma.value

    n_steps = int(round(sc.horizon / dt))
    rec_every = max(1, int(round(cfg.record_interval / dt)))
    rec_steps = list(range(0, n_steps + 1, rec_every))
    if rec_steps[-1] != n_steps:
        rec_steps.append(n_steps)
    # also break chunks at permeability switch times
    switch_steps = sorted({int(round(t / dt)) for t, _ in sphere.gamma.pieces})
    boundaries = sorted(set(rec_steps) | {s for s in switch_steps if 0 < s < n_steps})

    pts = _point_xyz(sc.observe)
    n_rec = len(rec_steps)
    conc1 = np.zeros((n_rec, len(pts)))
    counts1 = np.zeros((n_rec, len(pts)))
    mass1 = np.zeros(n_rec)
    conc2 = np.zeros((n_rec, len(pts))) if network else None
    counts2 = np.zeros((n_rec, len(pts))) if network else None
    mass2 = np.zeros(n_rec) if network else None

    rec_index = {s: i for i, s in enumerate(rec_steps)}

    def record(step_no):
        i = rec_index.get(step_no)
        if i is None:
            return
        m1 = status == IN_S1
        mass1[i] = int(np.count_nonzero(m1)) * weight
        conc1[i] = estimate_concentration(pos, m1, pts, kr, weight, R0)
        counts1[i] = conc1[i] * np.array([kernel_volume(float(np.linalg.norm(p)), kr, R0)
                                          for p in pts]) / weight
        if network:
            m2 = status == IN_S2
            mass2[i] = int(np.count_nonzero(m2)) * weight
            conc2[i] = estimate_concentration(pos, m2, pts, kr, weight, R0)
            counts2[i] = conc2[i] * np.array([kernel_volume(float(np.linalg.norm(p)), kr, R0)
                                              for p in pts]) / weight

    record(0)
    k = 0
    for chunk_id, k_next in enumerate(b for b in boundaries if b > 0):
        gamma = gamma_of(k * dt)
        p_cross = crossing_probability(gamma, dt, D)
        _advance_chunk(pos, status, release_step, k, k_next, sig, R0,
                       p_cross, cos_theta0, network, gamma_s2,
                       cfg.seed, chunk_id)
        k = k_next
        record(k)

    times = np.array(rec_steps) * dt
    return OracleResult(times=times, conc=conc1, mass=mass1,
                        conc_s2=conc2, mass_s2=mass2,
                        counts=counts1, counts_s2=counts2, weight=weight)
