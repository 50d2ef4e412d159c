"""Microcanonical measure on pure Gaussian covariance matrices.

A pure n-mode CM is written ``sigma = O^T (Z^2 ⊕ Z^-2) O`` with ``O``
Haar-distributed on K(n) and local energies ``E_j = z_j^2 + z_j^-2``
drawn from the flat measure on ``{E_j >= 2, sum_j E_j <= E}``.
"""

import numpy as np

from .haar import as_generator, haar_columns, sample_compact_symplectic
from .stats import DEFAULT_CHUNK, map_chunks, reduce_stats, SampleStats


class InfeasibleBudget(ValueError):
    """Energy budget below the vacuum energy ``2n``."""


def temperature(n, E):
    """Thermodynamic temperature ``(E - 2n) / n``."""
    return (E - 2.0 * n) / n


def _check_budget(n, E):
    if n < 1:
        raise ValueError("n must be >= 1")
    if E < 2 * n:
        raise InfeasibleBudget(f"energy budget {E} is below the vacuum energy {2 * n}")


def sample_energy_vector(n, E, rng, size=None, fixed_total=False):
    """Local energies uniform on the solid simplex ``Γ_E``.

    ``E_j = 2 + (E - 2n) x_j`` where ``x`` is uniform on
    ``{x_j >= 0, sum x_j <= 1}``, built from ``n + 1`` standard exponentials.
    With ``fixed_total=True`` the last exponential is dropped and the energies
    sit on the face ``sum E_j = E`` instead.

    Returns shape ``(n,)`` or ``(size, n)``.
    """
    _check_budget(n, E)
    gen = as_generator(rng)
    shape = (n + 1,) if size is None else (size, n + 1)
    g = gen.standard_exponential(shape)
    if fixed_total:
        x = g[..., :n] / g[..., :n].sum(axis=-1, keepdims=True)
    else:
        x = g[..., :n] / g.sum(axis=-1, keepdims=True)
    ev = 2.0 + (E - 2.0 * n) * x
    if not fixed_total:
        # rounding can push the total a few ulps over the budget
        rows = np.atleast_2d(ev)
        for i in np.flatnonzero(rows.sum(axis=-1) > E):
            j = np.argmax(rows[i])
            while rows[i].sum() > E:
                rows[i, j] = np.nextafter(rows[i, j], -np.inf)
    return ev


def marginal_density(e, n, E):
    """Marginal density of one local energy under the flat simplex measure.

    ``P_n(e, E) = n/(E - 2n) * (1 - (e - 2)/(E - 2n))^(n-1)`` on
    ``[2, E - 2(n-1)]`` and zero elsewhere.
    """
    _check_budget(n, E)
    e = np.asarray(e, dtype=float)
    width = E - 2.0 * n
    if width == 0:
        out = np.zeros_like(e)
        return out if out.ndim else float(out)
    u = (e - 2.0) / width
    inside = (u >= 0) & (u <= 1)
    out = np.where(inside, n / width * np.clip(1.0 - u, 0.0, 1.0) ** (n - 1), 0.0)
    return out if out.ndim else float(out)


def marginal_cdf(e, n, E):
    """Cumulative distribution of :func:`marginal_density`."""
    _check_budget(n, E)
    u = np.clip((np.asarray(e, dtype=float) - 2.0) / (E - 2.0 * n), 0.0, 1.0)
    return 1.0 - (1.0 - u) ** n


def boltzmann_limit_density(e, T):
    """Exponential density ``exp(-(e - 2)/T)/T`` for ``e >= 2``."""
    if T <= 0:
        raise ValueError("temperature must be positive")
    e = np.asarray(e, dtype=float)
    out = np.where(e >= 2.0, np.exp(-(e - 2.0) / T) / T, 0.0)
    return out if out.ndim else float(out)


def squeezings_from_energies(energies):
    """Invert ``E = z^2 + z^-2`` for the root ``z >= 1``."""
    e = np.asarray(energies, dtype=float)
    if np.any(e < 2.0):
        raise ValueError("local energies must be >= 2")
    z2 = 0.5 * (e + np.sqrt(np.maximum(e * e - 4.0, 0.0)))
    out = np.sqrt(z2)
    return out if out.ndim else float(out)


def cm_from_decomposition(o, z):
    """``O^T diag(z^2, z^-2) O`` for a K(n) matrix (or stack) and squeezings."""
    z2 = np.asarray(z, dtype=float) ** 2
    d = np.concatenate([z2, 1.0 / z2], axis=-1)
    return np.einsum("...ki,...k,...kj->...ij", o, d, o)


def sample_pure_cm(n, E, rng, size=None, fixed_total=False):
    """Draw pure CMs from the microcanonical measure.

    Returns ``(sigma, energies)`` with ``sigma`` of shape ``(2n, 2n)`` (or
    ``(size, 2n, 2n)``) and the local energies that generated it.
    """
    gen = as_generator(rng)
    ev = sample_energy_vector(n, E, gen, size=size, fixed_total=fixed_total)
    if E == 2 * n:
        return _vacuum(2 * n, size), ev
    o = sample_compact_symplectic(n, gen, size=size)
    return cm_from_decomposition(o, squeezings_from_energies(ev)), ev


def _vacuum(dim, size):
    eye = np.eye(dim)
    return eye if size is None else np.broadcast_to(eye, (size, dim, dim)).copy()


def reduced_cm_from_columns(u, z):
    """Reduction of ``O^T (Z^2 ⊕ Z^-2) O`` to the modes whose unitary columns are ``u``.

    ``u`` holds columns ``j in M`` of the unitary ``X + iY`` (shape
    ``(..., n, m)``).  The matching columns of ``O`` are ``(x_j; -y_j)`` and
    ``(y_j; x_j)``, so the 2m x 2m block is obtained without forming ``O``.
    """
    x, y = u.real, u.imag
    w = np.concatenate([
        np.concatenate([x, y], axis=-1),
        np.concatenate([-y, x], axis=-1),
    ], axis=-2)
    return cm_from_decomposition(w, z)


def sample_reduced_cm(n, E, modes, rng, size=None, fixed_total=False):
    """Reduced CMs on ``modes`` of microcanonical pure states.

    Distributed exactly as ``partial_trace(sample_pure_cm(...), modes)`` but
    only the needed unitary columns are drawn. Returns ``(gamma, energies)``.
    """
    modes = np.asarray(modes, dtype=int)
    if modes.size == 0 or modes.min() < 0 or modes.max() >= n:
        raise ValueError("mode index out of range")
    gen = as_generator(rng)
    ev = sample_energy_vector(n, E, gen, size=size, fixed_total=fixed_total)
    if E == 2 * n:
        return _vacuum(2 * modes.size, size), ev
    z = squeezings_from_energies(ev)
    # Haar columns are exchangeable: any m of them share the law of the first m
    u = haar_columns(n, modes.size, gen, size=size)
    return reduced_cm_from_columns(u, z), ev


def microcanonical_average(quantity, n, E, samples, stream, chunk_size=DEFAULT_CHUNK,
                           workers=None, vectorized=False, fixed_total=False):
    """Streaming statistics of ``quantity(sigma)`` over microcanonical draws.

    ``quantity`` maps one CM to a float, or a stack of CMs to an array when
    ``vectorized=True``.  Results are identical for any ``workers``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")

    def chunk(gen, count):
        sig, _ = sample_pure_cm(n, E, gen, size=count, fixed_total=fixed_total)
        if vectorized:
            vals = np.asarray(quantity(sig), dtype=float)
        else:
            vals = np.array([quantity(s) for s in sig], dtype=float)
        return SampleStats.from_values(vals)

    return reduce_stats(map_chunks(chunk, samples, stream, chunk_size, workers))
