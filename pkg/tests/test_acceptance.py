"""End-to-end acceptance checks, one test per shipped guarantee.

These run the actual presets through the public entry points and compare
against independently derived references (closed-form Robin decay rate,
analytic injected mass, the Brownian-dynamics oracle).  Module-level unit
tests live next to each module; this file only asserts the user-facing
contract.

Note: ``test_monotone_decay_after_transient`` is known to fail.  The
boundary leak at gamma <= 0.1 is slow enough that the concentration at the
observation points is still rising well past t = 3.1 s (the interior peak
arrives at ~5.3 s at r = 0.4 and ~12-18 s at r = 0.9).  The check is kept
in its literal form rather than loosened; the physically meaningful decay
properties are covered by the deadline and ordering tests below it.
"""

import time

import numpy as np
import pytest

from spherediff.boundary import (
    FULL_SPHERE,
    BoundaryRegion,
    build_feedback_matrix,
    coupling_blocks,
)
from spherediff.cli import compare_curves
from spherediff.engine import (
    discretize,
    dominant_decay_rate,
    observation_weights,
    radial_block_generator,
    simulate,
    simulate_network,
    step,
)
from spherediff.modes import enumerate_modes
from spherediff.presets import fig4, fig5, fig6
from spherediff.scenario import load_scenario
from spherediff.sources import source_vector_at

# Decay rate s = -D*kappa^2 of the slowest mode of the continuous Robin
# problem  -D j0'(kappa R0) kappa = gamma j0(kappa R0)  at
# D = 0.01, gamma = 0.1, R0 = 1; root found by bisection to 1e-12
# independently of the library (see test_engine.py).
ROBIN_S = -0.0804459990

VOLUME = 4.0 / 3.0 * np.pi  # R0 = 1 sphere


def _fig4_run(gamma, horizon=None, T=None):
    doc = fig4(gamma)
    if horizon is not None:
        doc["horizon"] = horizon
    if T is not None:
        doc["sphere"]["T"] = T
    loaded = load_scenario(doc)
    return loaded.scenario, simulate(loaded.scenario)


@pytest.fixture(scope="module")
def fig4_decay_runs():
    """fig4 at both leaky gamma values, long enough to see the 5% crossing."""
    return {g: _fig4_run(g, horizon=250.0) for g in (0.01, 0.1)}


# -- 1. reflective conservation and saturation ------------------------------

def test_reflective_mass_conservation_and_saturation():
    t_start = time.perf_counter()
    sc, res = _fig4_run(0.0, horizon=50.0)
    elapsed = time.perf_counter() - t_start

    injected = sum(ev.mass for ev in sc.schedule.events)
    assert res.mass[-1] == pytest.approx(injected, rel=1e-6)

    saturation = injected / VOLUME
    for j in range(res.p.shape[1]):
        assert res.p_real[-1, j] == pytest.approx(saturation, rel=1e-3)

    assert elapsed < 30.0


# -- 2. permeable decay ------------------------------------------------------

def test_monotone_decay_after_transient(fig4_decay_runs):
    # Known red: see the module docstring.  The observation points keep
    # rising until the release has diffused outward (~5-18 s), so strict
    # monotone decay from 3.1 s does not hold for this geometry.
    for gamma, (sc, res) in fig4_decay_runs.items():
        tail = res.p_real[(res.times >= 3.1) & (res.times <= 30.0)]
        for j in range(tail.shape[1]):
            diffs = np.diff(tail[:, j])
            assert np.all(diffs <= 0.0), (
                f"gamma={gamma} point {j}: still rising after 3.1 s "
                f"(max increase {diffs.max():.3e})"
            )


def test_decay_below_5pct_by_eigenvalue_implied_time(fig4_decay_runs):
    # The deadline is derived from the simulation's own closed-loop
    # spectrum: project the state (taken once the sources are quiet) onto
    # the dominant eigenvector and propagate only that component forward.
    t_ref = 3.2
    for gamma, (sc, res) in fig4_decay_runs.items():
        sp = sc.sphere
        ms = sp.mode_set
        G = np.diag(ms.eigenvalues) - gamma * sp.feedback.entries
        w_eig, V = np.linalg.eig(G)
        dom = int(np.argmax(w_eig.real))
        lam = w_eig[dom].real
        assert lam < 0

        # rebuild the modal state at t_ref with the same recursion the
        # engine uses
        T = sp.T
        A_d = discretize(ms, sp.feedback, gamma, T)
        y = np.zeros(len(ms), dtype=complex)
        zero = np.zeros_like(y)
        n_ref = int(round(t_ref / T))
        for k in range(n_ref):
            f_bar = source_vector_at(sc.schedule, ms, (k + 1) * T)
            y = step(y, A_d, f_bar, zero, T)
        coeffs = np.linalg.solve(V, y)

        Wp, _, _, _ = observation_weights(ms, sc.observe)
        for j in range(len(sc.observe)):
            curve = res.p_real[:, j]
            peak = curve.max()
            amp = abs((Wp[j] @ V[:, dom]) * coeffs[dom])
            t_implied = t_ref + np.log(amp / (0.05 * peak)) / abs(lam)

            below = np.nonzero(curve < 0.05 * peak)[0]
            crossings = below[res.times[below] > res.times[np.argmax(curve)]]
            assert crossings.size > 0, (
                f"gamma={gamma} point {j}: never fell below 5% of peak "
                f"within the horizon"
            )
            t5 = res.times[crossings[0]]
            # 5% slack absorbs the subdominant components still present at
            # the crossing; measured t5 matches t_implied to the sampling
            # step in practice
            assert t5 <= 1.05 * t_implied


def test_higher_gamma_decays_strictly_faster(fig4_decay_runs):
    _, res_slow = fig4_decay_runs[0.01]
    _, res_fast = fig4_decay_runs[0.1]
    sel = res_slow.times > 4.0
    assert np.all(res_fast.p_real[sel] < res_slow.p_real[sel])


# -- 3. closed-loop spectrum vs the Robin oracle -----------------------------

def test_dominant_eigenvalue_vs_robin_root():
    errs = []
    for n_radial in (40, 80):
        G = radial_block_generator(1.0, 0.01, 0.1, n_radial)
        lam = np.linalg.eigvals(G)
        dom = lam[np.argmax(lam.real)].real
        errs.append(abs(dom - ROBIN_S) / abs(ROBIN_S))
    assert errs[0] <= 0.05
    assert errs[1] < errs[0]


# -- 4. engine vs particle oracle --------------------------------------------

@pytest.mark.parametrize("gamma", [0.0, 0.1])
def test_engine_matches_particle_oracle(gamma):
    # Full-fidelity cross-validation at the preset oracle defaults
    # (2e5 particles, dt = 1e-4).  This is by far the slowest test in the
    # suite (tens of minutes on one core).
    loaded = load_scenario(fig4(gamma))
    ok, max_frac, t_eng, t_orc = compare_curves(
        loaded.scenario, loaded.oracle, tol=0.05
    )
    print(
        f"gamma={gamma}: max deviation {np.max(max_frac):.4f} of peak, "
        f"engine {t_eng:.1f} s, oracle {t_orc:.1f} s "
        f"(ratio {t_orc / t_eng:.0f}x)"
    )
    assert ok
    # the two solvers should not be in the same performance class
    assert t_orc > 10.0 * t_eng


# -- 5. time-varying permeability --------------------------------------------

def test_toggled_gamma_mass_invariants():
    loaded = load_scenario(fig5())
    sc = loaded.scenario
    res = simulate(sc)
    last_source_end = max(ev.t_start + ev.t0 for ev in sc.schedule.events)

    pieces = sc.sphere.gamma.pieces
    edges = [t for t, _ in pieces] + [sc.horizon]
    for (t0, g), t1 in zip(pieces, edges[1:]):
        lo = max(t0, last_source_end)
        sel = (res.times >= lo) & (res.times <= t1)
        if np.count_nonzero(sel) < 2:
            continue
        m = res.mass[sel]
        if g == 0.0:
            drift = np.abs(m - m[0]).max() / m[0]
            steps = np.count_nonzero(sel)
            assert drift <= 1e-9 * max(1.0, steps / 1000.0)
        else:
            assert np.all(np.diff(m) < 0.0)


# -- 6. two-sphere network ---------------------------------------------------

def test_network_transfer_and_saturation():
    doc = fig6()
    loaded = load_scenario(doc)
    ns = loaded.scenario

    # horizon = 5x the dominant coupling time constant, computed from the
    # closed-loop spectrum of sphere 1's cap boundary
    rate = dominant_decay_rate(
        ns.sphere_s1.mode_set, ns.sphere_s1.feedback, 0.1
    )
    tau = 1.0 / abs(rate)
    doc["horizon"] = 5.0 * tau
    ns = load_scenario(doc).scenario

    r1, r2 = simulate_network(ns)
    injected = sum(ev.mass for ev in ns.schedule.events)
    last_source_end = max(ev.t_start + ev.t0 for ev in ns.schedule.events)

    combined = r1.mass + r2.mass
    tail = combined[r1.times >= last_source_end]
    assert np.abs(tail - injected).max() <= 5e-3 * injected

    saturation = injected / VOLUME
    for j in range(r2.p.shape[1]):
        assert r2.p_real[-1, j] == pytest.approx(saturation, rel=1e-2)


def test_network_zero_gate_isolates_s2():
    doc = fig6()
    doc["network"]["gamma_s1"] = 0.0
    ns = load_scenario(doc).scenario
    r1, r2 = simulate_network(ns)
    assert np.all(r2.mass == 0.0)
    assert np.all(r2.p == 0.0)


# -- 7. structural properties ------------------------------------------------

def test_structural_properties():
    ms = enumerate_modes(1.0, 0.01, 30)

    # full-sphere feedback couples modes only through the boundary trace of
    # each (n, m) pair: every coupling block is rank one
    fb = build_feedback_matrix(ms, FULL_SPHERE)
    for idx in coupling_blocks(ms, FULL_SPHERE):
        blk = fb.entries[np.ix_(idx, idx)]
        sv = np.linalg.svd(blk, compute_uv=False)
        if len(sv) > 1:
            assert sv[1] / sv[0] < 1e-12

    # a cap that covers the whole sphere is the full-sphere membrane
    cap = build_feedback_matrix(ms, BoundaryRegion("cap", np.pi))
    assert np.max(np.abs(cap.entries - fb.entries)) < 1e-8

    # a centered release is purely radial: with a mixed mode set the state
    # entries of every n > 0 mode stay exactly zero through the closed-loop
    # recursion
    doc = fig4(0.1)
    doc["sphere"]["Q"] = 30
    sc = load_scenario(doc).scenario
    # force the mixed enumeration the loader would use for cap geometries
    object.__setattr__(sc.sphere, "mode_set", ms)
    object.__setattr__(
        sc.sphere, "feedback", build_feedback_matrix(ms, FULL_SPHERE)
    )
    T = sc.sphere.T
    A_d = discretize(ms, sc.sphere.feedback, 0.1, T)
    y = np.zeros(len(ms), dtype=complex)
    zero = np.zeros_like(y)
    for k in range(500):
        f_bar = source_vector_at(sc.schedule, ms, (k + 1) * T)
        y = step(y, A_d, f_bar, zero, T)
    for mo in ms.modes:
        if mo.n > 0:
            assert y[mo.mu] == 0.0

    # reconstructed concentrations are real
    Wp, _, _, _ = observation_weights(ms, sc.observe)
    p = Wp @ y
    assert np.max(np.abs(p.imag)) <= 1e-10 * np.max(np.abs(p.real))


# -- 8. discretization convergence -------------------------------------------

@pytest.mark.parametrize("gamma", [0.0, 0.01, 0.1])
def test_step_halving_changes_curves_below_half_percent(gamma):
    _, coarse = _fig4_run(gamma, T=0.01)
    _, fine = _fig4_run(gamma, T=0.005)
    for j in range(coarse.p.shape[1]):
        a = coarse.p_real[:, j]
        b = fine.p_real[::2, j]
        assert np.abs(a - b).max() < 5e-3 * a.max()
