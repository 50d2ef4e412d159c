"""Entanglement statistics of microcanonical pure Gaussian states."""

from dataclasses import dataclass, field

import numpy as np

from .haar import RngStream
from .microcanonical import _check_budget, sample_reduced_cm, temperature
from .stats import DEFAULT_CHUNK, SampleStats, map_chunks, reduce_stats
from .symplectic import entropy_f, single_mode_nu, symplectic_spectrum

HIST_BINS = 200


class DegenerateDistribution(ValueError):
    """The entropy distribution has zero spread."""


@dataclass
class EntropyStats:
    m: int
    n: int
    E: float
    samples: int
    mean: float
    std: float
    max_observed: float
    smax: float
    histogram: np.ndarray = field(repr=False)
    bin_edges: np.ndarray = field(repr=False)
    stats: SampleStats = field(repr=False, default=None)

    @property
    def stderr(self):
        return self.std / np.sqrt(self.samples)


def thermal_entropy_prediction(m, T):
    """Entropy ``m f(1 + T/2)`` of ``m`` thermal modes at temperature ``T``."""
    if T < 0:
        raise ValueError("temperature must be >= 0")
    return m * float(entropy_f(1.0 + T / 2.0))


def max_single_mode_nu(n, E):
    """Largest one-mode symplectic eigenvalue of a pure n-mode state with energy <= E.

    A mode with eigenvalue ``nu`` carries energy ``>= 2 nu`` and, by purity,
    so does its complement; the bound ``4 nu + 2(n - 2) <= E`` is saturated
    by a two-mode squeezed pair with the other modes in vacuum.
    """
    if n < 2:
        raise ValueError("need n >= 2 for a bipartition")
    _check_budget(n, E)
    return (E - 2.0 * n + 4.0) / 4.0


def max_single_mode_entropy(n, E):
    return float(entropy_f(max_single_mode_nu(n, E)))


def reduction_entropies(gamma):
    """Entropies (bits) of a stack of reduced CMs of shape ``(..., 2m, 2m)``."""
    if gamma.shape[-1] == 2:
        return entropy_f(single_mode_nu(gamma))
    flat = gamma.reshape(-1, *gamma.shape[-2:])
    out = np.array([np.sum(entropy_f(symplectic_spectrum(g))) for g in flat])
    return out.reshape(gamma.shape[:-2])


def entropy_samples(m, n, E, samples, rng, random_modes=False, fixed_total=False,
                    chunk_size=DEFAULT_CHUNK, workers=None, bins=HIST_BINS):
    """Monte Carlo distribution of the entropy of an m-mode reduction.

    The reduction keeps the first ``m`` modes; ``random_modes=True`` picks a
    uniformly random subset per sample instead (the measure is invariant
    under mode permutations, so both must agree statistically).
    ``rng`` is an :class:`RngStream` or an integer seed.
    """
    if not 1 <= m < n:
        raise ValueError("m must be < n")
    _check_budget(n, E)
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    smax = m * max_single_mode_entropy(n, E)

    def chunk(gen, count):
        if random_modes:
            gam = np.empty((count, 2 * m, 2 * m))
            for i in range(count):
                modes = np.sort(gen.choice(n, size=m, replace=False))
                gam[i], _ = sample_reduced_cm(n, E, modes, gen, fixed_total=fixed_total)
        else:
            gam, _ = sample_reduced_cm(n, E, np.arange(m), gen, size=count,
                                       fixed_total=fixed_total)
        return reduction_entropies(gam)

    parts = map_chunks(chunk, samples, stream, chunk_size, workers)
    st = reduce_stats(parts)
    values = np.concatenate(parts)
    hist_hi = smax if smax > 0 else 1.0
    counts, edges = np.histogram(values, bins=bins, range=(0.0, hist_hi))
    total = counts.sum()
    hist = counts / total if total else counts.astype(float)
    return EntropyStats(m=m, n=n, E=float(E), samples=int(samples), mean=st.mean,
                        std=st.std, max_observed=st.max, smax=smax,
                        histogram=hist, bin_edges=edges, stats=st)


def sigma_gap(stats, n=None, E=None):
    """Distance from the mean entropy to the maximum, in standard deviations."""
    n = stats.n if n is None else n
    E = stats.E if E is None else E
    if stats.std <= 0:
        raise DegenerateDistribution("entropy distribution has zero standard deviation")
    return (max_single_mode_entropy(n, E) - stats.mean) / stats.std


def cm_entry_statistics(n, E, samples, rng, modes=(0, 1), chunk_size=DEFAULT_CHUNK,
                        workers=None):
    """Means and second moments of the CM block on ``modes`` vs thermal targets.

    Targets are ``(1 + T/2) delta_jk`` for the means and ``(1 + T/2)^2
    delta_jk`` for the second moments, with ``T = (E - 2n)/n``; these hold in
    the thermodynamic limit.  ``mean_target_finite_n`` is the exact Haar
    average ``sum_l E[E_l] / 2n`` at the given ``n``, which lies below the
    limit by ``T / (2(n + 1))``.
    """
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    modes = np.asarray(modes, dtype=int)
    k = 2 * modes.size

    def chunk(gen, count):
        gam, _ = sample_reduced_cm(n, E, modes, gen, size=count)
        return gam.sum(axis=0), (gam * gam).sum(axis=0), (gam ** 4).sum(axis=0)

    parts = map_chunks(chunk, samples, stream, chunk_size, workers)
    s1 = np.zeros((k, k))
    s2 = np.zeros((k, k))
    s4 = np.zeros((k, k))
    for a, b, c in parts:
        s1 += a
        s2 += b
        s4 += c
    mean = s1 / samples
    second = s2 / samples
    var = np.maximum(second - mean ** 2, 0.0) * samples / (samples - 1)
    var2 = np.maximum(s4 / samples - second ** 2, 0.0) * samples / (samples - 1)
    T = temperature(n, E)
    t = 1.0 + T / 2.0
    eye = np.eye(k)
    return {
        "T": T,
        "mean": mean,
        "mean_stderr": np.sqrt(var / samples),
        "mean_target": t * eye,
        "mean_target_finite_n": (1.0 + (E - 2.0 * n) / (2.0 * (n + 1))) * eye,
        "second_moment": second,
        "second_moment_stderr": np.sqrt(var2 / samples),
        "second_moment_target": t * t * eye,
        "variance": var,
    }
