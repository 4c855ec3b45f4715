"""Spherical Bessel functions, Neumann-condition roots, and spherical harmonics.

Everything here is a pure real/complex-valued function of its arguments and
safe to call concurrently. Harmonics are orthonormal with the Condon-Shortley
phase (the convention used by ``scipy.special.sph_harm_y``).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.optimize import brentq

#: absolute tolerance on k*R0 for boundary-condition roots
ROOT_TOL = 1e-12

#: how far the root scan is allowed to go (in units of k*R0) before giving up
MAX_SCAN_X = 10_000.0


class RootBracketingError(RuntimeError):
    """Raised when the root scan exhausts its interval without finding enough roots."""


def spherical_bessel_j(n, x):
    """Spherical Bessel function of the first kind j_n(x).

    Accepts scalars or arrays; x must be >= 0 and n an integer >= 0.
    j_0(0) = 1 and j_n(0) = 0 for n >= 1 (series limit, no division by zero).
    """
    if n < 0:
        raise ValueError(f"order must be >= 0, got n={n}")
    if np.any(np.asarray(x) < 0):
        raise ValueError("argument must be >= 0")
    return special.spherical_jn(n, x)


def spherical_bessel_j_prime(n, x):
    """First derivative d/dx j_n(x), with the x -> 0 limit handled.

    j_0'(0) = 0, j_1'(0) = 1/3, j_n'(0) = 0 for n >= 2.
    """
    if n < 0:
        raise ValueError(f"order must be >= 0, got n={n}")
    if np.any(np.asarray(x) < 0):
        raise ValueError("argument must be >= 0")
    return special.spherical_jn(n, x, derivative=True)


@dataclass(frozen=True)
class RootList:
    """The first wavenumbers k with d/dr j_n(k r) = 0 at r = R0, ascending.

    For n = 0 the list starts with k = 0 (the constant mode). For n >= 1 the
    zero wavenumber would give the identically-zero eigenfunction and is
    excluded, so all entries are > 0.
    """

    n: int
    R0: float
    roots: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.asarray(self.roots, dtype=float)
        if np.any(np.diff(r) <= 0):
            raise ValueError("roots must be strictly ascending")
        if self.n == 0:
            if r[0] != 0.0:
                raise ValueError("n = 0 root list must start with k = 0")
        elif r.size and r[0] <= 0:
            raise ValueError("n >= 1 roots must be positive")


def bessel_prime_roots(n, count, R0):
    """First `count` roots of the reflective boundary condition for order n.

    Solves d/dr j_n(k r)|_{r=R0} = 0, i.e. j_n'(x) = 0 with x = k*R0.
    Scans in steps of pi/4 and refines each bracket by Brent's method to
    an absolute tolerance of 1e-12 on x.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if R0 <= 0:
        raise ValueError("R0 must be positive")
    roots_x = []
    if n == 0:
        roots_x.append(0.0)
    h = np.pi / 4
    # j_n' > 0 just right of 0 for every n (j_n rises from its first zero/limit)
    x_lo = 1e-8 if n == 0 else max(1e-8, 0.5 * n)
    f_lo = spherical_bessel_j_prime(n, x_lo)
    x = x_lo
    while len(roots_x) < count:
        x_next = x + h
        if x_next > MAX_SCAN_X:
            raise RootBracketingError(
                f"could not bracket root {len(roots_x) + 1} of j_{n}' while "
                f"scanning x in ({x_lo:g}, {MAX_SCAN_X:g})"
            )
        f_next = spherical_bessel_j_prime(n, x_next)
        if f_lo == 0.0:
            roots_x.append(x)
        elif np.sign(f_lo) != np.sign(f_next) and f_next != 0.0:
            roots_x.append(
                brentq(lambda t: spherical_bessel_j_prime(n, t), x, x_next, xtol=ROOT_TOL)
            )
        x, f_lo = x_next, f_next
    return RootList(n=n, R0=float(R0), roots=np.array(roots_x[:count]) / R0)


def spherical_harmonic(n, m, theta, phi):
    """Orthonormal complex spherical harmonic Y_n^m(theta, phi).

    theta is the polar angle in [0, pi], phi the azimuth. Condon-Shortley
    phase; the n = m = 0 harmonic is 1/sqrt(4 pi).
    """
    if abs(m) > n:
        raise ValueError(f"|m| <= n required, got n={n}, m={m}")
    return special.sph_harm_y(n, m, theta, phi)


def spherical_harmonic_dtheta(n, m, theta, phi):
    """Polar-angle derivative dY_n^m/dtheta, finite at the poles.

    Uses the ladder identity
        dY/dtheta = 1/2 [ sqrt((n-m)(n+m+1)) Y_n^{m+1} e^{-i phi}
                        - sqrt((n+m)(n-m+1)) Y_n^{m-1} e^{+i phi} ],
    which contains no 1/sin(theta) and is therefore pole-safe.
    """
    if abs(m) > n:
        raise ValueError(f"|m| <= n required, got n={n}, m={m}")
    up = 0.0
    dn = 0.0
    if m + 1 <= n:
        up = np.sqrt((n - m) * (n + m + 1)) * special.sph_harm_y(
            n, m + 1, theta, phi
        ) * np.exp(-1j * phi)
    if -(n) <= m - 1:
        dn = np.sqrt((n + m) * (n - m + 1)) * special.sph_harm_y(
            n, m - 1, theta, phi
        ) * np.exp(1j * phi)
    return 0.5 * (up - dn)


def harmonic_theta_part(n, m, theta):
    """Real theta-part of Y_n^m with the azimuthal factor exp(i m phi)/sqrt(2 pi) removed.

    Normalized so that the integral of its square against sin(theta) over
    [0, pi] is 1; includes the Condon-Shortley sign.
    """
    return np.sqrt(2 * np.pi) * np.real(special.sph_harm_y(n, m, theta, 0.0))
