import numpy as np
import pytest

from spherediff.modes import (
    ModeIndex,
    enumerate_modes,
    eval_K1,
    eval_K4_adjoint,
    eval_K_flux,
    normalization,
)

K1 = 4.4934094579  # first positive reflective root for n = 0, R0 = 1
N1 = 0.023595224613  # radial norm of that mode, frozen from quadrature


def test_single_mode_is_constant_mode():
    ms = enumerate_modes(1.0, 0.01, 1)
    mo = ms[0]
    assert (mo.n, mo.nu, mo.m) == (0, 0, 0)
    assert mo.k == 0.0 and mo.s == 0.0
    assert mo.N == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_second_mode_starts_n1_multiplet():
    ms = enumerate_modes(1.0, 0.01, 2)
    assert ms[1].n == 1 and ms[1].nu == 1
    assert ms[1].k == pytest.approx(2.0815759778, abs=1e-9)
    assert ms[1].s == pytest.approx(-0.01 * 2.0815759778 ** 2, rel=1e-9)
    # the n = 1 multiplet is kept whole, so the count exceeds the request
    assert len(ms) == 4
    assert sorted(mo.m for mo in ms.modes[1:]) == [-1, 0, 1]


def test_enumeration_order_and_completeness():
    ms = enumerate_modes(1.0, 0.01, 240)
    assert len(ms) >= 240
    s = np.abs(ms.eigenvalues)
    assert np.all(np.diff(s) >= -1e-12)  # |s| nondecreasing
    # multiplets complete: each (n, nu) appears 2n+1 times
    from collections import Counter
    cnt = Counter((mo.n, mo.nu) for mo in ms)
    for (n, _), c in cnt.items():
        assert c == 2 * n + 1
    # eigenvalue relation holds exactly
    for mo in ms:
        assert mo.s == -ms.D * mo.k * mo.k


def test_n_max_zero_is_purely_radial():
    ms = enumerate_modes(1.0, 0.01, 40, n_max=0)
    assert len(ms) == 40
    assert all(mo.n == 0 and mo.m == 0 for mo in ms)
    assert ms[0].k == 0.0
    assert np.all(np.diff(ms.wavenumbers) > 0)


def test_normalization_frozen_value():
    assert normalization(0, K1, 1.0) == pytest.approx(N1, rel=1e-9)


def test_normalization_scales_with_radius():
    # N is a volume-like quantity: same x = k R0 scales as R0^3
    n0 = normalization(0, K1, 1.0)
    n2 = normalization(0, K1 / 2.0, 2.0)
    assert n2 == pytest.approx(8.0 * n0, rel=1e-9)


def test_normalization_rejects_non_root():
    # the closed form only holds at reflective roots; the quadrature
    # cross-check catches a wrong wavenumber
    with pytest.raises(ArithmeticError):
        normalization(0, 4.2, 1.0)


def test_eval_K4_is_conjugate_of_K1(ms_small):
    for mo in ms_small.modes[:10]:
        v1 = eval_K1(mo, 0.6, 0.8, 1.2)
        v4 = eval_K4_adjoint(mo, 0.6, 0.8, 1.2)
        assert v4 == pytest.approx(np.conj(v1), abs=1e-14)


def test_constant_mode_eigenfunction_value(ms_small):
    mo = ms_small[0]
    assert eval_K1(mo, 0.3, 1.0, 2.0) == pytest.approx(1 / np.sqrt(4 * np.pi))


def test_eval_K1_rejects_outside_point(ms_small):
    with pytest.raises(ValueError):
        eval_K1(ms_small[0], 1.5, 0.0, 0.0, R0=1.0)


def _volume_quad(f, R0, n_r=80, n_t=40, n_p=40):
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * R0 * (xr + 1.0)
    wr = 0.5 * R0 * wr
    xt, wt = np.polynomial.legendre.leggauss(n_t)
    theta = np.arccos(xt)
    phis = np.linspace(0.0, 2 * np.pi, n_p, endpoint=False)
    dphi = 2 * np.pi / n_p
    acc = 0.0
    for i, t in enumerate(theta):
        for p in phis:
            acc += np.sum(wr * f(r, t, p) * r ** 2) * wt[i] * dphi
    return acc


def test_bi_orthogonality(ms_small):
    # int_V conj(K1(mu)) K1(mu') dV = N delta: same-n different-nu pair and
    # a different-(n, m) pair
    modes = {(mo.n, mo.nu, mo.m): mo for mo in ms_small}
    a = modes[(0, 1, 0)]
    b = modes[(0, 0, 0)]
    c = modes[(1, 1, 0)]
    ab = _volume_quad(lambda r, t, p: np.real(
        np.conj(eval_K4_adjoint(a, r, t, p)) * eval_K1(b, r, t, p)), 1.0)
    assert abs(ab) < 1e-8
    ac = _volume_quad(lambda r, t, p: np.real(
        np.conj(eval_K4_adjoint(a, r, t, p)) * eval_K1(c, r, t, p)), 1.0)
    assert abs(ac) < 1e-8
    aa = _volume_quad(lambda r, t, p: np.real(
        np.conj(eval_K4_adjoint(a, r, t, p)) * eval_K1(a, r, t, p)), 1.0)
    assert aa == pytest.approx(a.N, rel=1e-7)


def test_flux_radial_component_vanishes_at_wall(ms_small):
    # reflective eigenmodes carry no radial flux through r = R0
    for mo in ms_small.modes[:12]:
        i_r, _, _ = eval_K_flux(mo, 1.0, 0.9, 0.4, D=0.01)
        assert abs(i_r) < 1e-10


def test_flux_finite_at_center_and_poles(ms_small):
    for mo in ms_small.modes[:12]:
        for (r, t) in ((0.0, 0.7), (0.5, 0.0), (0.5, np.pi)):
            vals = eval_K_flux(mo, r, t, 0.3, D=0.01)
            assert all(np.all(np.isfinite(np.atleast_1d(v))) for v in vals)


def test_flux_matches_finite_difference(ms_small):
    h = 1e-6
    D = 0.01
    mo = next(mo for mo in ms_small if (mo.n, mo.m) == (2, 1))
    r, t, p = 0.55, 0.9, 1.3
    i_r, i_t, i_p = eval_K_flux(mo, r, t, p, D=D)
    fd_r = (eval_K1(mo, r + h, t, p) - eval_K1(mo, r - h, t, p)) / (2 * h)
    fd_t = (eval_K1(mo, r, t + h, p) - eval_K1(mo, r, t - h, p)) / (2 * h) / r
    fd_p = (eval_K1(mo, r, t, p + h) - eval_K1(mo, r, t, p - h)) / (2 * h) \
        / (r * np.sin(t))
    assert i_r == pytest.approx(-D * fd_r, abs=1e-7)
    assert i_t == pytest.approx(-D * fd_t, abs=1e-7)
    assert i_p == pytest.approx(-D * fd_p, abs=1e-7)
