"""Haar-random elements of K(n) = Sp(2n, R) ∩ SO(2n) via U(n).

A unitary ``U = X + iY`` maps to the orthogonal symplectic matrix
``O = [[X, Y], [-Y, X]]``.  Unitaries are drawn from the circular unitary
ensemble by orthonormalising a complex Ginibre matrix and fixing the phases
of the triangular factor (Mezzadri, Notices AMS 54, 2007).
"""

from dataclasses import dataclass

import numpy as np

from .symplectic import symplectic_form

UNITARITY_TOL = 1e-8


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream addressed by ``(seed, stream)``.

    Substreams are derived with :class:`numpy.random.SeedSequence` spawn keys,
    so ``child(k)`` is a deterministic function of ``(seed, stream, k)``
    and distinct keys give statistically independent generators.
    """

    seed: int
    stream: int = 0

    def generator(self, *key):
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *key))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, k):
        return RngStream(self.seed, _mix(self.stream, k))


def _mix(a, b):
    # deterministic 64-bit combination for nested stream indices
    return int(np.random.SeedSequence([a, b]).generate_state(2, dtype=np.uint64)[0])


def as_generator(rng):
    """Accept an :class:`RngStream`, a ``Generator`` or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return np.random.default_rng(rng)


def haar_columns(n, m, rng, size=None):
    """First ``m`` columns of Haar-random ``n x n`` unitaries.

    Returns a complex array of shape ``(n, m)`` or ``(size, n, m)``.  The
    columns of a CUE matrix are obtained from the QR factorisation of an
    ``n x m`` Ginibre block, so this is exact for any ``m <= n``.
    """
    rng = as_generator(rng)
    shape = (n, m) if size is None else (size, n, m)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def sample_unitary(n, rng, size=None):
    """Haar-random unitary split into real and imaginary parts ``(X, Y)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = haar_columns(n, n, rng, size=size)
    return u.real, u.imag


def embed_compact(x, y, check=True):
    """Map ``X + iY`` in U(n) to ``[[X, Y], [-Y, X]]`` in K(n).

    Works on single matrices or stacks; raises ``ValueError`` if the input is
    not unitary within 1e-8.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if check:
        u = x + 1j * y
        n = u.shape[-1]
        err = np.abs(u @ np.conj(np.swapaxes(u, -1, -2)) - np.eye(n)).max()
        if err > UNITARITY_TOL:
            raise ValueError(f"X + iY is not unitary (deviation {err:.2e})")
    top = np.concatenate([x, y], axis=-1)
    bottom = np.concatenate([-y, x], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def sample_compact_symplectic(n, rng, size=None):
    """Haar-random orthogonal symplectic matrix (or a stack of ``size`` of them)."""
    x, y = sample_unitary(n, rng, size=size)
    return embed_compact(x, y, check=False)


def is_compact_symplectic(o, tol=1e-10):
    o = np.asarray(o)
    n = o.shape[-1] // 2
    omega = symplectic_form(n)
    ot = np.swapaxes(o, -1, -2)
    orth = np.abs(ot @ o - np.eye(2 * n)).max()
    sympl = np.abs(ot @ omega @ o - omega).max()
    return bool(orth <= tol and sympl <= tol)


def haar_average_cm_check(energies, samples, rng, batch=4096):
    """Monte Carlo check of the Haar average of ``O^T (Z^2 ⊕ Z^-2) O``.

    For fixed local energies the Haar mean of the CM is
    ``(sum_l E_l / 2n) * identity``.  Returns a dict with the empirical mean,
    its standard errors, the target, the largest deviation in units of
    standard error, and the empirical second moments of the entries.
    """
    from .microcanonical import squeezings_from_energies

    energies = np.asarray(energies, dtype=float)
    n = energies.size
    z2 = squeezings_from_energies(energies) ** 2
    diag = np.concatenate([z2, 1.0 / z2])
    gen = as_generator(rng)
    s1 = np.zeros((2 * n, 2 * n))
    s2 = np.zeros((2 * n, 2 * n))
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        o = sample_compact_symplectic(n, gen, size=b)
        sig = np.einsum("bki,k,bkj->bij", o, diag, o)
        s1 += sig.sum(axis=0)
        s2 += (sig * sig).sum(axis=0)
        done += b
    mean = s1 / samples
    second = s2 / samples
    var = (second - mean**2) * samples / max(samples - 1, 1)
    stderr = np.sqrt(np.maximum(var, 0.0) / samples)
    target = energies.sum() / (2 * n) * np.eye(2 * n)
    dev = np.abs(mean - target)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(stderr > 0, dev / stderr, np.where(dev > 1e-12, np.inf, 0.0))
    return {
        "mean": mean,
        "stderr": stderr,
        "target": target,
        "max_abs_deviation": float(dev.max()),
        "max_z": float(z.max()),
        "second_moment": second,
    }
