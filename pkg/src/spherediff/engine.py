"""Discrete-time state-space simulation of diffusion in one or two spheres.

The continuous dynamics decouple per mode except for the boundary feedback,
so the impulse-invariant step matrix exp((diag(s) - gamma*M) T) is built
block-by-block: per (n, m) for a full-sphere membrane, per m for a cap.
Full Q x Q exponentials are never formed. One exponential is cached per
distinct gamma value, which makes time-variant permeability schedules with
few levels cheap.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .boundary import ConnectionMatrix, FeedbackMatrix, coupling_blocks
from .modes import ModeSet, eval_K1, eval_K_flux
from .sources import SourceSchedule, source_vector_at
from .specfun import bessel_prime_roots, spherical_bessel_j

ROOT_4PI = math.sqrt(4 * math.pi)


@dataclass(frozen=True)
class GammaSchedule:
    """Piecewise-constant permeability gamma(t); constant is a single piece."""

    pieces: tuple  # ((t_from, gamma), ...) sorted by t_from, first at t <= 0

    @classmethod
    def constant(cls, gamma):
        return cls(pieces=((0.0, float(gamma)),))

    def value(self, t):
        g = self.pieces[0][1]
        for t_from, gamma in self.pieces:
            if t >= t_from - 1e-12:
                g = gamma
            else:
                break
        return g

    @property
    def levels(self):
        return sorted({g for _, g in self.pieces})


@dataclass
class SphereModel:
    """One sphere: mode set, optional boundary feedback, permeability, step T."""

    mode_set: ModeSet
    T: float
    feedback: FeedbackMatrix | None = None
    gamma: GammaSchedule = field(default_factory=lambda: GammaSchedule.constant(0.0))

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("sample interval T must be positive")
        if isinstance(self.gamma, (int, float)):
            self.gamma = GammaSchedule.constant(self.gamma)


@dataclass(frozen=True)
class ObservationPoint:
    r: float
    phi: float
    theta: float


@dataclass
class Scenario:
    """Full experiment description for a single-sphere run."""

    sphere: SphereModel
    schedule: SourceSchedule
    observe: tuple
    horizon: float

    def __post_init__(self):
        for pt in self.observe:
            if pt.r > self.sphere.mode_set.R0 * (1 + 1e-12):
                raise ValueError(f"observation point r={pt.r} outside the sphere")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")


@dataclass
class NetworkScenario:
    """Two identical spheres coupled through a cap with diode channels."""

    sphere_s1: SphereModel
    sphere_s2: SphereModel
    connection: ConnectionMatrix
    schedule: SourceSchedule
    observe: tuple
    horizon: float


class BlockStepOperator:
    """exp(G T) applied block-wise, G = diag(s) - gamma * M restricted to blocks."""

    def __init__(self, ms, fb, gamma, T):
        s = ms.eigenvalues
        if fb is None or gamma == 0.0:
            self.diag = np.exp(s * T)
            self.blocks = []
        else:
            self.diag = None
            self.blocks = []
            for idx in coupling_blocks(ms, fb.region):
                G = np.diag(s[idx]) - gamma * fb.entries[np.ix_(idx, idx)]
                B = expm(G * T)
                if not np.all(np.isfinite(B)):
                    raise ArithmeticError(
                        f"non-finite step matrix in boundary block of size {len(idx)}"
                    )
                self.blocks.append((idx, B))

    def apply(self, y):
        if self.diag is not None:
            return self.diag * y
        out = np.empty_like(y)
        for idx, B in self.blocks:
            out[idx] = B @ y[idx]
        return out


def discretize(ms, fb, gamma, T):
    """Impulse-invariant step operator for one gamma value."""
    if T <= 0:
        raise ValueError("T must be positive")
    return BlockStepOperator(ms, fb, gamma, T)


def step(y, A_d, f_bar, phi_bar_ext, T):
    """One state update: y[k+1] = A_d y[k] + T f[k+1] + T phi_ext[k+1]."""
    return A_d.apply(y) + T * f_bar + T * phi_bar_ext


def mass_weights(ms):
    """Row vector w with total mass = Re(w . state).

    Only (n, m) = (0, 0) modes contribute: w_mu = sqrt(4 pi)/N_mu times the
    radial integral of j_0(k_mu r) r^2 over the sphere. That integral has
    the closed form R0^2 j_1(k R0)/k for k > 0, and k is a zero of j_1 for
    every positive reflective root, so in exact arithmetic only the constant
    mode carries mass; the closed form is still evaluated (instead of being
    zeroed) so a wrong root would show up.
    """
    w = np.zeros(len(ms))
    for mo in ms:
        if mo.n != 0 or mo.m != 0:
            continue
        if mo.k == 0.0:
            radint = ms.R0 ** 3 / 3.0
        else:
            radint = ms.R0 ** 2 * spherical_bessel_j(1, mo.k * ms.R0) / mo.k
        w[mo.mu] = ROOT_4PI * radint / mo.N
    return w


def total_mass(ms, state):
    """Amount of substance in the sphere for a given modal state."""
    return float(np.real(np.dot(mass_weights(ms), state)))


def observation_weights(ms, points):
    """Reconstruction matrices: rows give p, i_r, i_theta, i_phi at each point."""
    Q = len(ms)
    Wp = np.zeros((len(points), Q), dtype=complex)
    Wr = np.zeros_like(Wp)
    Wt = np.zeros_like(Wp)
    Wf = np.zeros_like(Wp)
    for i, pt in enumerate(points):
        for mo in ms:
            Wp[i, mo.mu] = eval_K1(mo, pt.r, pt.theta, pt.phi, R0=ms.R0) / mo.N
            ir, it, ip = eval_K_flux(mo, pt.r, pt.theta, pt.phi, ms.D)
            Wr[i, mo.mu] = ir / mo.N
            Wt[i, mo.mu] = it / mo.N
            Wf[i, mo.mu] = ip / mo.N
    return Wp, Wr, Wt, Wf


@dataclass
class SimulationResult:
    """Time series at the observation points plus the total-mass trace."""

    times: np.ndarray
    p: np.ndarray        # (n_times, n_points), complex
    i_r: np.ndarray
    i_theta: np.ndarray
    i_phi: np.ndarray
    mass: np.ndarray

    @property
    def p_real(self):
        return np.real(self.p)


def simulate(sc: Scenario) -> SimulationResult:
    """Advance the single-sphere closed- or open-loop system over the horizon."""
    sp = sc.sphere
    ms = sp.mode_set
    T = sp.T
    n_steps = int(round(sc.horizon / T))
    Wp, Wr, Wt, Wf = observation_weights(ms, sc.observe)
    wm = mass_weights(ms)

    y = np.zeros(len(ms), dtype=complex)
    times = np.arange(n_steps + 1) * T
    p = np.zeros((n_steps + 1, len(sc.observe)), dtype=complex)
    i_r = np.zeros_like(p)
    i_t = np.zeros_like(p)
    i_f = np.zeros_like(p)
    mass = np.zeros(n_steps + 1)

    cache = {}
    zero = np.zeros(len(ms), dtype=complex)
    for k in range(n_steps):
        g = sp.gamma.value(times[k])
        A_d = cache.get(g)
        if A_d is None:
            A_d = cache[g] = discretize(ms, sp.feedback, g, T)
        f_bar = source_vector_at(sc.schedule, ms, times[k + 1])
        y = step(y, A_d, f_bar, zero, T)
        p[k + 1] = Wp @ y
        i_r[k + 1] = Wr @ y
        i_t[k + 1] = Wt @ y
        i_f[k + 1] = Wf @ y
        mass[k + 1] = np.real(wm @ y)
    return SimulationResult(times=times, p=p, i_r=i_r, i_theta=i_t, i_phi=i_f,
                            mass=mass)


def simulate_network(sc: NetworkScenario):
    """Advance two coupled spheres; returns (result_s1, result_s2).

    The sphere-2 boundary input uses sphere-1's state from before sphere-1's
    own update (an explicit one-step lag that vanishes as T -> 0). Sources
    are attached to sphere 1; sphere 2 is reflective apart from the influx.
    """
    s1, s2 = sc.sphere_s1, sc.sphere_s2
    if s1.T != s2.T:
        raise ValueError("both spheres must share the sample interval")
    ms1, ms2 = s1.mode_set, s2.mode_set
    T = s1.T
    n_steps = int(round(sc.horizon / T))
    W1 = observation_weights(ms1, sc.observe)
    W2 = observation_weights(ms2, sc.observe)
    wm1, wm2 = mass_weights(ms1), mass_weights(ms2)
    Tc = sc.connection.entries

    times = np.arange(n_steps + 1) * T
    shape = (n_steps + 1, len(sc.observe))
    out1 = SimulationResult(times, np.zeros(shape, complex), np.zeros(shape, complex),
                            np.zeros(shape, complex), np.zeros(shape, complex),
                            np.zeros(n_steps + 1))
    out2 = SimulationResult(times, np.zeros(shape, complex), np.zeros(shape, complex),
                            np.zeros(shape, complex), np.zeros(shape, complex),
                            np.zeros(n_steps + 1))

    y1 = np.zeros(len(ms1), dtype=complex)
    y2 = np.zeros(len(ms2), dtype=complex)
    zero1 = np.zeros_like(y1)
    cache1, cache2 = {}, {}
    for k in range(n_steps):
        g1 = s1.gamma.value(times[k])
        A1 = cache1.get(g1)
        if A1 is None:
            A1 = cache1[g1] = discretize(ms1, s1.feedback, g1, T)
        g2 = s2.gamma.value(times[k])
        A2 = cache2.get(g2)
        if A2 is None:
            A2 = cache2[g2] = discretize(ms2, s2.feedback, g2, T)

        phi2 = Tc @ y1  # pre-update sphere-1 state
        f_bar = source_vector_at(sc.schedule, ms1, times[k + 1])
        y1 = step(y1, A1, f_bar, zero1, T)
        y2 = step(y2, A2, np.zeros_like(y2), phi2, T)

        for out, W, y, wm in ((out1, W1, y1, wm1), (out2, W2, y2, wm2)):
            out.p[k + 1] = W[0] @ y
            out.i_r[k + 1] = W[1] @ y
            out.i_theta[k + 1] = W[2] @ y
            out.i_phi[k + 1] = W[3] @ y
            out.mass[k + 1] = np.real(wm @ y)
    return out1, out2


def ball_average_weights(ms, points, a):
    """Reconstruction rows for the mean concentration over balls of radius a.

    By the Helmholtz mean-value property, the average of an eigenfunction
    with wavenumber k over a ball centered at x0 equals
    3 j_1(k a)/(k a) times its value at x0 (1 for k = 0). The balls must lie
    inside the sphere. Used to compare against kernel-ball particle counts
    without kernel-smoothing bias.
    """
    for pt in points:
        if pt.r + a > ms.R0 * (1 + 1e-9):
            raise ValueError("averaging ball must lie inside the sphere")
    W = np.zeros((len(points), len(ms)), dtype=complex)
    for i, pt in enumerate(points):
        for mo in ms:
            ka = mo.k * a
            fac = 1.0 if ka == 0.0 else 3.0 * spherical_bessel_j(1, ka) / ka
            W[i, mo.mu] = fac * eval_K1(mo, pt.r, pt.theta, pt.phi, R0=ms.R0) / mo.N
    return W


def closed_loop_eigenvalues(ms, fb, gamma):
    """Eigenvalues of diag(s) - gamma*M, computed per coupling block."""
    s = ms.eigenvalues
    if fb is None or gamma == 0.0:
        return np.sort(s)[::-1]
    eigs = []
    for idx in coupling_blocks(ms, fb.region):
        G = np.diag(s[idx]) - gamma * fb.entries[np.ix_(idx, idx)]
        eigs.extend(np.linalg.eigvals(G))
    eigs = np.array(eigs)
    return eigs[np.argsort(-eigs.real)]


def dominant_decay_rate(ms, fb, gamma):
    """|real part| of the slowest-decaying closed-loop eigenvalue."""
    lam = closed_loop_eigenvalues(ms, fb, gamma)
    return float(-lam[0].real)


def radial_block_generator(R0, D, gamma, n_radial):
    """Closed-loop generator of the (n, m) = (0, 0) block with n_radial modes.

    Built directly from the first n_radial reflective roots of order 0 (the
    k = 0 constant mode included), independent of any Q truncation. Used to
    study convergence of the dominant eigenvalue toward the exact
    impedance-boundary (Robin) value.
    """
    from .modes import normalization

    ks = bessel_prime_roots(0, n_radial, R0).roots
    N = np.array([normalization(0, k, R0, cross_check=False) for k in ks])
    jR = spherical_bessel_j(0, ks * R0)
    M = (R0 ** 2 * jR)[:, None] * (jR / N)[None, :]
    return np.diag(-D * ks ** 2) - gamma * M
