"""Command line front end.

Commands:
  simulate   run the spectral engine on a scenario file, emit CSV
  oracle     run the Brownian-dynamics particle simulation, emit CSV
  compare    run both and check agreement (exit nonzero above --tol)
  spectrum   dump the mode table and open/closed-loop eigenvalues as CSV
  presets    write the built-in scenario files (fig4 | fig5 | fig6)

Exit codes: 0 success, 1 compare failure, 2 scenario/schema error,
3 numerical failure.
"""

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import presets as presets_mod
from .engine import (
    NetworkScenario,
    ball_average_weights,
    closed_loop_eigenvalues,
    simulate,
    simulate_network,
)
from .particlesim import kernel_volume, run_oracle
from .scenario import ScenarioError, load_scenario
from .sources import SPATIAL_MASS_COEFF  # noqa: F401  (re-exported for scripts)

EXIT_OK = 0
EXIT_COMPARE = 1
EXIT_SCHEMA = 2
EXIT_NUMERIC = 3


def main(argv=None):
    p = argparse.ArgumentParser(prog="spherediff", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("scenario", help="scenario JSON file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--normalized", action="store_true",
                        help="divide concentrations by M_total/V")
        sp.add_argument("--dump-matrices", action="store_true",
                        help="also write feedback/connection matrices as CSV")
        sp.add_argument("--threads", type=int, default=None,
                        help="numba thread cap (advisory)")

    add_common(sub.add_parser("simulate", help="run the spectral engine"))
    add_common(sub.add_parser("oracle", help="run the particle simulation"))
    cp = sub.add_parser("compare", help="run engine and oracle, check agreement")
    add_common(cp)
    cp.add_argument("--tol", type=float, default=0.05,
                    help="allowed deviation as a fraction of the peak")
    add_common(sub.add_parser("spectrum", help="dump modes and eigenvalues"))
    pp = sub.add_parser("presets", help="write built-in scenario files")
    pp.add_argument("name", choices=["fig4", "fig5", "fig6"])
    pp.add_argument("--out", default=".", help="output directory")

    args = p.parse_args(argv)

    if args.command == "presets":
        for path in presets_mod.write_preset(args.name, args.out):
            print(path)
        return EXIT_OK

    if args.threads:
        try:
            import numba
            numba.set_num_threads(args.threads)
        except Exception:
            pass

    try:
        loaded = load_scenario(args.scenario)
    except (ScenarioError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return EXIT_SCHEMA

    out_dir = args.out or loaded.out_path or "."
    os.makedirs(out_dir, exist_ok=True)
    normalized = args.normalized or loaded.normalized

    try:
        if args.command == "simulate":
            return _cmd_simulate(loaded, out_dir, normalized, args.dump_matrices)
        if args.command == "oracle":
            return _cmd_oracle(loaded, out_dir, normalized)
        if args.command == "compare":
            return _cmd_compare(loaded, out_dir, args.tol)
        if args.command == "spectrum":
            return _cmd_spectrum(loaded, out_dir)
    except ScenarioError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    raise AssertionError("unreachable")


def _norm_factor(loaded, normalized):
    sc = loaded.scenario
    ms = sc.sphere_s1.mode_set if isinstance(sc, NetworkScenario) else sc.sphere.mode_set
    V = 4.0 / 3.0 * math.pi * ms.R0 ** 3
    return (sc.schedule.total_mass / V) if normalized else 1.0


def _cmd_simulate(loaded, out_dir, normalized, dump_matrices):
    sc = loaded.scenario
    scale = _norm_factor(loaded, normalized)
    path = os.path.join(out_dir, "engine.csv")
    if isinstance(sc, NetworkScenario):
        r1, r2 = simulate_network(sc)
        _write_engine_csv(path, sc, [(1, r1), (2, r2)], scale)
    else:
        res = simulate(sc)
        _write_engine_csv(path, sc, [(None, res)], scale)
    if dump_matrices:
        _dump_matrices(sc, out_dir)
    print(path)
    return EXIT_OK


def _cmd_oracle(loaded, out_dir, normalized):
    sc = loaded.scenario
    scale = _norm_factor(loaded, normalized)
    res = run_oracle(sc, loaded.oracle)
    path = os.path.join(out_dir, "oracle.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        network = isinstance(sc, NetworkScenario)
        header = ["t", "point_id", "p", "i_r", "i_theta", "i_phi", "mass"]
        if network:
            header.append("sphere_id")
        w.writerow(header)
        for i, t in enumerate(res.times):
            for j in range(len(sc.observe)):
                row = [f"{t:.6g}", j, f"{res.conc[i, j] / scale:.9e}",
                       "nan", "nan", "nan", f"{res.mass[i]:.9e}"]
                if network:
                    w.writerow(row + [1])
                    w.writerow([f"{t:.6g}", j, f"{res.conc_s2[i, j] / scale:.9e}",
                                "nan", "nan", "nan", f"{res.mass_s2[i]:.9e}", 2])
                else:
                    w.writerow(row)
    print(path)
    return EXIT_OK


def compare_curves(sc, oracle_cfg, tol, smooth_window=0.5):
    """Engine-vs-oracle deviation check shared by the CLI and the tests.

    Returns (passed, per-point max deviation as a fraction of the peak,
    engine runtime, oracle runtime). The pass threshold at each time is
    max(tol * peak, 3 sigma) where sigma is the binomial error of the
    kernel-count estimate predicted by the engine. Both curves are smoothed
    with the same centered moving average, so the smoothing is bias-free.
    """
    network = isinstance(sc, NetworkScenario)
    if network:
        raise ScenarioError("compare supports single-sphere scenarios")
    ms = sc.sphere.mode_set
    kr = oracle_cfg.kernel_radius if oracle_cfg.kernel_radius is not None \
        else 0.08 * ms.R0

    t0 = time.perf_counter()
    eng = simulate(sc)
    t_eng = time.perf_counter() - t0
    t0 = time.perf_counter()
    orc = run_oracle(sc, oracle_cfg)
    t_orc = time.perf_counter() - t0

    # engine prediction of the kernel-ball average at the oracle record times
    Wb = ball_average_weights(ms, sc.observe, kr)
    idx = np.rint(orc.times / sc.sphere.T).astype(int)
    p_ball = _engine_ball_curve(sc, Wb)[idx]

    n_sm = max(1, int(round(smooth_window / oracle_cfg.record_interval)))
    eng_s = _smooth(p_ball, n_sm)
    orc_s = _smooth(orc.conc, n_sm)

    vols = np.array([kernel_volume(pt.r, kr, ms.R0) for pt in sc.observe])
    max_frac = np.zeros(len(sc.observe))
    ok = True
    for j in range(len(sc.observe)):
        peak = float(np.max(eng_s[:, j]))
        dev = np.abs(orc_s[:, j] - eng_s[:, j])
        counts = np.maximum(eng_s[:, j] * vols[j] / orc.weight, 1.0)
        sigma = np.sqrt(counts) * orc.weight / vols[j]
        allowed = np.maximum(tol * peak, 3.0 * sigma)
        max_frac[j] = float(np.max(dev) / peak) if peak > 0 else 0.0
        if np.any(dev > allowed):
            ok = False
    return ok, max_frac, t_eng, t_orc


def _engine_ball_curve(sc, Wb):
    """Engine time series of ball-averaged concentration (real part)."""
    from .engine import discretize, step
    from .sources import source_vector_at

    sp = sc.sphere
    ms = sp.mode_set
    T = sp.T
    n_steps = int(round(sc.horizon / T))
    y = np.zeros(len(ms), dtype=complex)
    zero = np.zeros_like(y)
    out = np.zeros((n_steps + 1, Wb.shape[0]))
    cache = {}
    for k in range(n_steps):
        g = sp.gamma.value(k * T)
        A_d = cache.get(g)
        if A_d is None:
            A_d = cache[g] = discretize(ms, sp.feedback, g, T)
        y = step(y, A_d, source_vector_at(sc.schedule, ms, (k + 1) * T), zero, T)
        out[k + 1] = np.real(Wb @ y)
    return out


def _smooth(arr, n):
    if n <= 1:
        return arr
    kern = np.ones(n) / n
    out = np.empty_like(arr)
    for j in range(arr.shape[1]):
        out[:, j] = np.convolve(arr[:, j], kern, mode="same")
        # fix edge shrinkage of the moving average
        for i in range(n // 2):
            out[i, j] = arr[: i + n // 2 + 1, j].mean()
            out[-1 - i, j] = arr[-(i + n // 2 + 1):, j].mean()
    return out


def _cmd_compare(loaded, out_dir, tol):
    sc = loaded.scenario
    ok, max_frac, t_eng, t_orc = compare_curves(sc, loaded.oracle, tol)
    path = os.path.join(out_dir, "compare.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["point_id", "max_deviation_fraction_of_peak"])
        for j, f in enumerate(max_frac):
            w.writerow([j, f"{f:.6g}"])
    ratio = t_orc / t_eng if t_eng > 0 else float("inf")
    print(f"engine {t_eng:.2f} s, oracle {t_orc:.2f} s (x{ratio:.1f}); "
          f"max deviation {max_frac.max():.3f} of peak; "
          f"{'PASS' if ok else 'FAIL'} at tol {tol}")
    return EXIT_OK if ok else EXIT_COMPARE


def _cmd_spectrum(loaded, out_dir):
    sc = loaded.scenario
    network = isinstance(sc, NetworkScenario)
    sphere = sc.sphere_s1 if network else sc.sphere
    ms = sphere.mode_set
    mpath = os.path.join(out_dir, "modes.csv")
    with open(mpath, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mu", "n", "nu", "m", "k", "s", "N"])
        for mo in ms:
            w.writerow([mo.mu, mo.n, mo.nu, mo.m,
                        f"{mo.k:.12g}", f"{mo.s:.12g}", f"{mo.N:.12g}"])
    epath = os.path.join(out_dir, "eigenvalues.csv")
    with open(epath, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma", "rank", "real", "imag"])
        for g in sphere.gamma.levels:
            lam = closed_loop_eigenvalues(ms, sphere.feedback, g)
            for i, ev in enumerate(lam):
                w.writerow([f"{g:g}", i, f"{np.real(ev):.12g}",
                            f"{np.imag(ev):.12g}"])
    print(mpath)
    print(epath)
    return EXIT_OK


def _dump_matrices(sc, out_dir):
    if isinstance(sc, NetworkScenario):
        np.savetxt(os.path.join(out_dir, "feedback_s1.csv"),
                   sc.sphere_s1.feedback.entries, delimiter=",")
        np.savetxt(os.path.join(out_dir, "connection.csv"),
                   sc.connection.entries, delimiter=",")
    elif sc.sphere.feedback is not None:
        np.savetxt(os.path.join(out_dir, "feedback.csv"),
                   sc.sphere.feedback.entries, delimiter=",")


def _write_engine_csv(path, sc, results, scale):
    network = results[0][0] is not None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["t", "point_id", "p", "i_r", "i_theta", "i_phi", "mass"]
        if network:
            header.append("sphere_id")
        w.writerow(header)
        for sphere_id, res in results:
            for i, t in enumerate(res.times):
                for j in range(res.p.shape[1]):
                    row = [f"{t:.6g}", j,
                           f"{np.real(res.p[i, j]) / scale:.9e}",
                           f"{np.real(res.i_r[i, j]):.9e}",
                           f"{np.real(res.i_theta[i, j]):.9e}",
                           f"{np.real(res.i_phi[i, j]):.9e}",
                           f"{res.mass[i]:.9e}"]
                    if network:
                        row.append(sphere_id)
                    w.writerow(row)


if __name__ == "__main__":
    sys.exit(main())
