"""Truncated eigensystem of the diffusion operator on a reflective sphere.

Each mode is labeled (n, nu, m): spherical-harmonic order n, radial root
counter nu, and degree m. Its eigenfunction is j_n(k r) Y_n^m(theta, phi)
with k the nu-th root of the reflective boundary condition, its eigenvalue
is s = -D k^2, and its normalization N is the radial integral of
j_n(k r)^2 r^2 (the angular part is 1 by harmonic orthonormality).
"""

from dataclasses import dataclass, field

import numpy as np

from .specfun import (
    bessel_prime_roots,
    spherical_bessel_j,
    spherical_bessel_j_prime,
    spherical_harmonic,
    spherical_harmonic_dtheta,
)

#: relative tolerance of the closed-form-vs-quadrature normalization cross-check
_NORM_CHECK_RTOL = 1e-9


@dataclass(frozen=True)
class ModeIndex:
    """One eigenmode of the sphere."""

    mu: int
    n: int
    nu: int
    m: int
    k: float
    s: float
    N: float


@dataclass(frozen=True)
class ModeSet:
    """The truncated ordered family of eigenmodes for one sphere.

    Modes are sorted by |s| ascending (ties by (n, m)); multiplets are never
    split, so len(modes) can slightly exceed the requested Q.
    """

    R0: float
    D: float
    Q: int
    modes: tuple = field(repr=False)

    def __len__(self):
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    @property
    def wavenumbers(self):
        return np.array([mo.k for mo in self.modes])

    @property
    def eigenvalues(self):
        return np.array([mo.s for mo in self.modes])

    @property
    def norms(self):
        return np.array([mo.N for mo in self.modes])


def normalization(n, k, R0, cross_check=True):
    """Radial normalization N = int_0^R0 j_n(k r)^2 r^2 dr.

    Closed form for a reflective-condition root k (N = R0^3/3 for k = 0,
    else (R0^3/2) j_n(kR0)^2 (1 - n(n+1)/(kR0)^2)), cross-checked against
    numerical quadrature to guard against a wrong root.
    """
    if k == 0.0:
        N = R0 ** 3 / 3.0
    else:
        x = k * R0
        N = 0.5 * R0 ** 3 * spherical_bessel_j(n, x) ** 2 * (1.0 - n * (n + 1) / x ** 2)
    if N <= 0:
        raise ArithmeticError(f"non-positive normalization for mode n={n}, k={k}")
    if cross_check:
        Nq = _oscillatory_radial_quad(
            lambda r: spherical_bessel_j(n, k * r) ** 2 * r ** 2, k, R0)
        if abs(N - Nq) > _NORM_CHECK_RTOL * abs(N):
            raise ArithmeticError(
                f"normalization closed form disagrees with quadrature for "
                f"n={n}, k={k}: {N} vs {Nq} (wrong root?)"
            )
    return N


def _oscillatory_radial_quad(f, k, upper, nodes_per_period=24):
    """Integrate a vectorizable radial integrand oscillating at wavenumber k.

    Composite Gauss-Legendre with panels no wider than half a period, so the
    rule stays spectrally accurate however large k is (adaptive quadrature
    can silently alias such integrands).
    """
    n_panels = max(1, int(np.ceil(k * upper / np.pi)))
    edges = np.linspace(0.0, upper, n_panels + 1)
    x, w = np.polynomial.legendre.leggauss(nodes_per_period // 2)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    r = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return float(np.dot(wt, f(r)))


def enumerate_modes(R0, D, Q, n_max=None):
    """Build the ModeSet of the Q smallest-|s| modes (complete multiplets).

    The (n, nu) grid is explored far enough that no excluded mode has a
    smaller |s| than the largest included one. If the cut falls inside a
    2n+1-fold multiplet, the whole multiplet is kept.

    ``n_max`` restricts the harmonic order. A centered (purely radial)
    source excites only n = 0 states, and neither a full-sphere membrane
    nor a time-varying gamma couples harmonic orders, so such states stay
    exactly zero for all time. For those scenarios ``n_max=0`` is an exact
    model reduction that spends the whole mode budget on radial resolution.
    """
    if R0 <= 0 or D <= 0 or Q < 1:
        raise ValueError("require R0 > 0, D > 0, Q >= 1")
    if n_max is not None and n_max < 0:
        raise ValueError("require n_max >= 0")
    x_cut = 2.0 + 2.5 * Q ** (1.0 / 3.0)  # initial guess for max k*R0, grown below
    if n_max == 0:
        x_cut = max(x_cut, np.pi * (Q + 1))  # roots of j_0' are ~pi apart
    while True:
        groups = _root_groups(R0, x_cut, n_max)
        if sum(2 * n + 1 for n, _, _ in groups) >= Q:
            break
        x_cut *= 1.4

    groups.sort(key=lambda g: (g[2], g[0]))  # by k then n
    chosen = []
    count = 0
    for n, nu, k in groups:
        if count >= Q:
            break
        chosen.append((n, nu, k))
        count += 2 * n + 1

    modes = []
    for n, nu, k in chosen:
        N = normalization(n, k, R0)
        s = -D * k * k
        for m in range(-n, n + 1):
            modes.append((abs(s), n, m, nu, k, s, N))
    modes.sort(key=lambda t: (t[0], t[1], t[2]))
    out = tuple(
        ModeIndex(mu=i, n=n, nu=nu, m=m, k=k, s=s, N=N)
        for i, (_, n, m, nu, k, s, N) in enumerate(modes)
    )
    return ModeSet(R0=float(R0), D=float(D), Q=Q, modes=out)


def _root_groups(R0, x_cut, n_max=None):
    """All (n, nu, k) with k*R0 <= x_cut for the reflective condition."""
    groups = []
    n = 0
    while n_max is None or n <= n_max:
        # generous count: roots of j_n' are ~pi apart beyond the first
        max_count = int(x_cut / np.pi) + 3
        rl = bessel_prime_roots(n, max_count, R0)
        ks = [k for k in rl.roots if k * R0 <= x_cut]
        if n == 0:
            groups.extend((0, nu, k) for nu, k in enumerate(ks))
        else:
            if not ks or ks[0] * R0 > x_cut:
                break  # first root of every higher order is larger still
            groups.extend((n, nu + 1, k) for nu, k in enumerate(ks))
        n += 1
    return groups


def eval_K1(mode, r, theta, phi, R0=None):
    """Concentration row of the primal eigenfunction: j_n(k r) Y_n^m(theta, phi)."""
    if R0 is not None and np.any(np.asarray(r) > R0 * (1 + 1e-12)):
        raise ValueError("evaluation point outside the sphere")
    return spherical_bessel_j(mode.n, mode.k * np.asarray(r, dtype=float)) * \
        spherical_harmonic(mode.n, mode.m, theta, phi)


def eval_K4_adjoint(mode, r, theta, phi, R0=None):
    """Fourth adjoint eigenfunction entry: j_n(k r) conj(Y_n^m)(theta, phi).

    This is the kernel of the forward transform and of the boundary-value
    integral; it equals conj(eval_K1) because the radial factor is real.
    """
    return np.conj(eval_K1(mode, r, theta, phi, R0=R0))


def eval_K_flux(mode, r, theta, phi, D):
    """Flux rows (radial, theta, phi) of the primal eigenfunction.

    These are the components of -D grad of eval_K1. Limits at r = 0 and at
    the poles are taken analytically, so no 1/r or 1/sin(theta) blows up.
    """
    n, m, k = mode.n, mode.m, mode.k
    Y = spherical_harmonic(n, m, theta, phi)
    dY = spherical_harmonic_dtheta(n, m, theta, phi)
    i_r = -D * k * spherical_bessel_j_prime(n, k * r) * Y
    # j_n(k r)/r -> k/3 for n = 1, 0 otherwise, as r -> 0
    if r == 0.0:
        j_over_r = k / 3.0 if n == 1 else 0.0
    else:
        j_over_r = spherical_bessel_j(n, k * r) / r
    i_theta = -D * j_over_r * dY
    if m == 0:
        i_phi = 0.0 * Y
    else:
        st = np.sin(theta)
        if abs(st) < 1e-12:
            # Y_n^m ~ sin^|m|; the ratio Y/sin(theta) stays finite only for |m| = 1
            if abs(m) == 1:
                ct = np.cos(theta)
                y_over_sin = dY / ct
            else:
                y_over_sin = 0.0
        else:
            y_over_sin = Y / st
        i_phi = -D * j_over_r * 1j * m * y_over_sin
    return i_r, i_theta, i_phi
