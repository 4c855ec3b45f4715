"""Feedback and connection matrices for (semi-)permeable sphere boundaries.

The feedback matrix realizes the boundary condition "outward radial flux =
gamma * concentration" on the full sphere surface or on a polar cap
theta in [0, theta0]; the permeability gamma itself is applied by the engine
(one cached matrix serves every gamma value). The connection matrix couples
two identical spheres through a cap: it maps the first sphere's modal state
to the boundary-input vector of the second sphere and carries the
gamma_s1 * gamma_s2 prefactor.
"""

from dataclasses import dataclass, field

import numpy as np

from .specfun import harmonic_theta_part, spherical_bessel_j

#: Gauss-Legendre refinement target for the cap theta-integrals
_CAP_QUAD_ATOL = 1e-10
_CAP_ORDER_START = 64
_CAP_ORDER_MAX = 2048


@dataclass(frozen=True)
class BoundaryRegion:
    """Full sphere surface or a polar cap of half-angle theta0."""

    kind: str  # "full" | "cap"
    theta0: float | None = None

    def __post_init__(self):
        if self.kind not in ("full", "cap"):
            raise ValueError(f"unknown boundary region kind {self.kind!r}")
        if self.kind == "cap":
            if self.theta0 is None or not (0.0 < self.theta0 <= np.pi):
                raise ValueError("cap requires 0 < theta0 <= pi")


FULL_SPHERE = BoundaryRegion("full")


@dataclass(frozen=True)
class FeedbackMatrix:
    """Q x Q real boundary-coupling matrix, without the gamma factor.

    The closed-loop generator is diag(s) - gamma * entries. Entries vanish
    unless m = m_hat (and additionally n = n_hat on the full sphere).
    """

    entries: np.ndarray = field(repr=False)
    region: BoundaryRegion
    mode_key: tuple  # (R0, D, len) identifying the ModeSet it was built for


@dataclass(frozen=True)
class ConnectionMatrix:
    """Q x Q real map from sphere-1 state to sphere-2 boundary input.

    Includes the gamma_s1 * gamma_s2 * R0^2 prefactor with the sign of a
    physical influx: applied to a nonnegative concentration state it adds
    mass to the receiving sphere.
    """

    entries: np.ndarray = field(repr=False)
    theta0: float
    gamma_s1: float
    gamma_s2: float
    mode_key: tuple


def coupling_blocks(ms, region):
    """Index groups within which the boundary matrix couples modes.

    Full sphere: modes sharing (n, m). Cap: modes sharing m. Returns a list
    of integer index arrays covering all modes.
    """
    groups = {}
    for mo in ms:
        key = (mo.n, mo.m) if region.kind == "full" else mo.m
        groups.setdefault(key, []).append(mo.mu)
    return [np.array(idx) for idx in groups.values()]


def build_feedback_matrix(ms, region):
    """Boundary coupling matrix for one sphere over the given region.

    Full sphere: harmonic orthonormality collapses the surface integral to
    R0^2 j_n(k R0) j_n(k_hat R0) / N_hat on each (n, m) block. Cap: the phi
    integral enforces m = m_hat analytically and the theta integral is done
    by Gauss-Legendre quadrature, refined until entrywise convergence.
    """
    M = _surface_coupling(ms, region)
    return FeedbackMatrix(entries=M, region=region,
                          mode_key=(ms.R0, ms.D, len(ms)))


def build_connection_matrix(ms_s1, ms_s2, theta0, gamma_s1, gamma_s2):
    """Cap coupling matrix sending sphere-1 modal state to sphere-2 input."""
    if (ms_s1.R0, ms_s1.D, len(ms_s1)) != (ms_s2.R0, ms_s2.D, len(ms_s2)):
        raise ValueError("connected spheres must share (R0, D, Q)")
    M = _surface_coupling(ms_s1, BoundaryRegion("cap", theta0))
    return ConnectionMatrix(entries=gamma_s1 * gamma_s2 * M, theta0=theta0,
                            gamma_s1=gamma_s1, gamma_s2=gamma_s2,
                            mode_key=(ms_s1.R0, ms_s1.D, len(ms_s1)))


def _surface_coupling(ms, region):
    """Common kernel: R0^2 j_n(kR0) j_nh(khR0)/N_h times the angular overlap."""
    R0 = ms.R0
    Q = len(ms)
    jR = np.array([spherical_bessel_j(mo.n, mo.k * R0) for mo in ms])
    row_fac = R0 ** 2 * jR                      # b(mu) = R0^2 j_n(k R0)
    col_fac = jR / ms.norms                     # j_nh(kh R0) / N_hat
    M = np.zeros((Q, Q))
    if region.kind == "full":
        for mu, mo in enumerate(ms):
            for muh, moh in enumerate(ms):
                if mo.n == moh.n and mo.m == moh.m:
                    M[mu, muh] = row_fac[mu] * col_fac[muh]
        return M
    overlap = _cap_overlaps(ms, region.theta0)
    for mu, mo in enumerate(ms):
        for muh, moh in enumerate(ms):
            if mo.m == moh.m:
                M[mu, muh] = row_fac[mu] * col_fac[muh] * overlap[(mo.n, moh.n, mo.m)]
    return M


def _cap_overlaps(ms, theta0):
    """int_0^theta0 Ybar_n^m Ybar_nh^m sin(theta) dtheta for all needed (n, nh, m)."""
    pairs = sorted({(mo.n, mo.m) for mo in ms})
    by_m = {}
    for n, m in pairs:
        by_m.setdefault(m, []).append(n)

    order = _CAP_ORDER_START
    prev = None
    while order <= _CAP_ORDER_MAX:
        x, w = np.polynomial.legendre.leggauss(order)
        theta = 0.5 * theta0 * (x + 1.0)
        wt = 0.5 * theta0 * w * np.sin(theta)
        vals = {pm: harmonic_theta_part(pm[0], pm[1], theta) for pm in pairs}
        out = {}
        for m, ns in by_m.items():
            for n in ns:
                for nh in ns:
                    out[(n, nh, m)] = float(np.dot(wt, vals[(n, m)] * vals[(nh, m)]))
        if prev is not None:
            err = max(abs(out[k] - prev[k]) for k in out)
            if err <= _CAP_QUAD_ATOL:
                return out
        prev = out
        order *= 2
    return prev
