"""Acceptance suite: one test per sub-check, one summary line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed in the ``acceptance criteria`` section at the end of the session.
"""

import functools
import math

import numpy as np
import pytest
from scipy import integrate, stats

from gaussmicro.classical import (NoCrossover, classical_average_fidelity, crossover_energy,
                                  fit_value)
from gaussmicro.cli import main
from gaussmicro.entanglement import cm_entry_statistics, entropy_samples, sigma_gap
from gaussmicro.haar import RngStream, sample_compact_symplectic
from gaussmicro.microcanonical import (boltzmann_limit_density, marginal_cdf,
                                       sample_energy_vector, sample_pure_cm, sample_reduced_cm)
from gaussmicro.symplectic import energy, entropy_f, symplectic_form
from gaussmicro.teleportation import average_fidelity, mc_average_fidelity, per_state_fidelity

pytestmark = pytest.mark.acceptance

F5 = 2.7548875021634685
THRESHOLD_ENERGIES = (2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)


# 1. structural invariants

def test_c1_compact_symplectic(acceptance):
    worst_o = worst_s = 0.0
    for n in (1, 2, 5, 20):
        o = sample_compact_symplectic(n, RngStream(1).generator(n), size=10_000)
        ot = np.swapaxes(o, -1, -2)
        worst_o = max(worst_o, np.abs(ot @ o - np.eye(2 * n)).max())
        worst_s = max(worst_s, np.abs(ot @ symplectic_form(n) @ o - symplectic_form(n)).max())
    ok = acceptance(1, "K(n) invariants", worst_o <= 1e-10 and worst_s <= 1e-10,
                    f"orth {worst_o:.1e}, sympl {worst_s:.1e}, tol 1e-10")
    assert ok


def test_c1_pure_and_within_budget(acceptance):
    worst_p, excess = 0.0, -math.inf
    for n, E in ((5, 50.0), (20, 200.0)):
        sig, ev = sample_pure_cm(n, E, RngStream(2).generator(n), size=10_000)
        om = symplectic_form(n)
        worst_p = max(worst_p, np.abs(sig @ om @ sig - om).max())
        excess = max(excess, ev.sum(-1).max() - E, energy(sig[-1]) - E - 1e-9)
    ok = acceptance(1, "purity and budget", worst_p <= 1e-8 and excess <= 0.0,
                    f"purity {worst_p:.1e} (tol 1e-8), max sum E_j - E {excess:.1e}")
    assert ok


# 2. measure correctness

@pytest.mark.parametrize("n,E", [(2, 8.0), (5, 50.0), (20, 200.0)])
def test_c2_marginal_ks(acceptance, n, E):
    e1 = sample_energy_vector(n, E, RngStream(3).generator(n), size=100_000)[:, 0]
    p = stats.kstest(e1, lambda x: marginal_cdf(x, n, E)).pvalue
    ok = acceptance(2, f"KS (n={n}, E={E:g})", p > 0.01, f"p={p:.3f}")
    assert ok


def test_c2_boltzmann_limit(acceptance):
    n, T = 100, 8.0
    e1 = sample_energy_vector(n, n * (T + 2), RngStream(4), size=100_000)[:, 0]
    hist, edges = np.histogram(e1, bins=40, range=(2.0, 2.0 + 5 * T))
    dens = hist / (e1.size * np.diff(edges))
    mid = 0.5 * (edges[1:] + edges[:-1])
    sup = np.abs(dens - boltzmann_limit_density(mid, T)).max()
    ok = acceptance(2, "Boltzmann limit n=100", sup <= 0.02 / T,
                    f"sup {sup:.2e} <= {0.02 / T:.2e}")
    assert ok


# 3. canonical principle

def test_c3_mean_cm_entries(acceptance):
    rep = cm_entry_statistics(100, 1000.0, 100_000, RngStream(5))
    z = np.abs(rep["mean"] - 5.0 * np.eye(4)) / rep["mean_stderr"]
    zf = np.abs(rep["mean"] - rep["mean_target_finite_n"]) / rep["mean_stderr"]
    diag = np.diag(rep["mean"])
    ok = acceptance(3, "mean entries vs 5 delta_jk", z.max() <= 4.0,
                    f"max z {z.max():.1f} (diag mean {diag.mean():.4f}; "
                    f"vs exact finite-n target {rep['mean_target_finite_n'][0, 0]:.4f}: "
                    f"max z {zf.max():.1f})")
    assert ok


def test_c3_variance_decreases(acceptance):
    T = 8.0
    var = []
    for n in (5, 20, 80):
        gam, _ = sample_reduced_cm(n, n * (T + 2), [0], RngStream(6).generator(n), size=100_000)
        var.append(gam[:, 0, 0].var(ddof=1))
    ok = acceptance(3, "var(sigma_11) decreasing", var[0] > var[1] > var[2],
                    ", ".join(f"{v:.3f}" for v in var))
    assert ok


# 4. typical entanglement

@pytest.mark.parametrize("n,E,lo,hi", [(5, 50.0, 3.5, 4.5), (20, 200.0, 12.1, 15.1)])
def test_c4_sigma_gap(acceptance, n, E, lo, hi):
    st = entropy_samples(1, n, E, 100_000, RngStream(2024))
    gap = sigma_gap(st)
    ok = acceptance(4, f"sigma gap n={n}", lo <= gap <= hi, f"{gap:.2f} in [{lo}, {hi}]")
    assert ok


def test_c4_thermal_mean(acceptance):
    st = entropy_samples(1, 100, 1000.0, 100_000, RngStream(7))
    dev = abs(st.mean - F5)
    ok = acceptance(4, "thermal mean n=100", dev <= 0.05, f"|{st.mean:.4f} - f(5)| = {dev:.4f}")
    assert ok


# 5. teleportation closed form

def test_c5_quadrature_identity(acceptance):
    pairs = [(E, r) for E in (2.5, 4.0, 8.0, 20.0, 100.0) for r in (0.25, 0.5, 1.0, 2.0)]
    worst = 0.0
    for E, r in pairs:
        val, _ = integrate.quad(lambda e: per_state_fidelity(e, r), 2.0, E,
                                epsabs=1e-13, epsrel=1e-13, limit=200)
        worst = max(worst, abs(val / (E - 2) - average_fidelity(E, r)))
    ok = acceptance(5, f"quadrature identity ({len(pairs)} pairs)", worst <= 1e-10,
                    f"max residual {worst:.1e}")
    assert ok


def test_c5_monte_carlo(acceptance):
    st = mc_average_fidelity(10.0, 1.0, 100_000, RngStream(8))
    z = abs(st.mean - average_fidelity(10.0, 1.0)) / st.stderr
    ok = acceptance(5, "MC at (10, 1)", z <= 3.0, f"{st.mean:.5f}, z={z:.2f}")
    assert ok


def test_c5_limit_large_squeezing(acceptance):
    v = average_fidelity(10.0, 5.0)
    ok = acceptance(5, "r=5, E=10 limit", v >= 0.999, f"{v:.6f} >= 0.999")
    assert ok


def test_c5_limit_large_energy(acceptance):
    v = average_fidelity(1e4, 1.0)
    ok = acceptance(5, "E=1e4, r=1 limit", v <= 0.05, f"{v:.6f} <= 0.05")
    assert ok


# 6. classical threshold

@pytest.fixture(scope="module")
def thresholds():
    return {E: classical_average_fidelity(E, mc_samples=100_000, rng=int(10 * E))
            for E in THRESHOLD_ENERGIES}


def test_c6_fit(acceptance, thresholds):
    dev = {E: abs(res.value - fit_value(E)) for E, res in thresholds.items()}
    worst = max(dev.values())
    vals = ", ".join(f"{E:g}:{thresholds[E].value:.4f}/{float(fit_value(E)):.4f}" for E in dev)
    ok = acceptance(6, "fit deviation", worst <= 0.005,
                    f"max {worst:.4f} <= 0.005 (stretch 0.002); computed/fit {vals}")
    assert ok


def test_c6_quadrature_vs_mc(acceptance, thresholds):
    z = {E: abs(r.value - r.mc.mean) / math.hypot(r.mc.stderr, r.error)
         for E, r in thresholds.items()}
    ok = acceptance(6, "quadrature vs MC", all(r.consistent for r in thresholds.values()),
                    f"max z {max(z.values()):.2f} <= 4")
    assert ok


# 7. crossover

@functools.lru_cache(maxsize=None)
def _crossover(r):
    try:
        return crossover_energy(r)
    except NoCrossover:
        return None


def test_c7_crossover_r1(acceptance):
    ec = _crossover(1.0)
    ok = acceptance(7, "crossover r=1", ec is not None and 2.11 <= ec <= 2.21,
                    "none on (2, 8]" if ec is None else f"{ec:.4f} in [2.11, 2.21]")
    assert ok


def test_c7_crossover_ordering(acceptance):
    e1, e05 = _crossover(1.0), _crossover(0.5)
    ok = acceptance(7, "r=0.5 exists and exceeds r=1",
                    e05 is not None and e1 is not None and e05 > e1,
                    f"r=0.5: {e05}, r=1: {e1}")
    assert ok


# 8. determinism

EXPERIMENTS = {
    "validate": ["validate", "--samples", "300"],
    "entropy": ["entropy", "--modes", "5", "--energy", "50", "--samples", "20000"],
    "figure1": ["figure1", "--grid-points", "3", "--emin", "2.5", "--emax", "6",
                "--quad-nodes", "16", "--policy-nodes", "24"],
    "teleport-curve": ["teleport-curve", "--samples", "20000", "--grid-points", "4"],
    "classical-threshold": ["classical-threshold", "--energy", "3,6", "--samples", "20000",
                            "--quad-nodes", "16", "--policy-nodes", "24"],
    "crossover": ["crossover", "--quad-nodes", "16", "--policy-nodes", "24", "--emax", "4"],
}


@pytest.mark.parametrize("name", list(EXPERIMENTS))
def test_c8_byte_identical(acceptance, tmp_path, name):
    outs = []
    for tag, workers in (("a", "1"), ("b", "1"), ("c", "8")):
        path = tmp_path / f"{tag}.csv"
        code = main(EXPERIMENTS[name] + ["--seed", "11", "--workers", workers,
                                         "--output", str(path), "--no-timestamp"])
        outs.append((code, path.read_bytes(), (tmp_path / f"{tag}.csv.json").read_bytes()))
    same = outs[0] == outs[1] == outs[2]
    ok = acceptance(8, name, same and outs[0][0] == 0,
                    "rerun and workers 1 vs 8 identical" if same else "outputs differ")
    assert ok
