"""Covariance-matrix linear algebra for n-mode Gaussian states.

Conventions used throughout the package:

* quadratures ordered ``R = (x_1, ..., x_n, p_1, ..., p_n)`` ("xxpp");
* symplectic form ``Omega = [[0, I], [-I, 0]]``;
* vacuum covariance matrix equal to the identity, so a single-mode vacuum
  has energy ``Tr(sigma) = 2``.

Covariance matrices are plain ``numpy`` arrays of shape ``(2n, 2n)``.
"""

import numpy as np

SYMMETRY_TOL = 1e-10
PHYSICALITY_TOL = 1e-8
PURITY_TOL = 1e-8


class PhysicalityError(ValueError):
    """Raised when a matrix violates the uncertainty relation."""


def symplectic_form(n):
    """Return the ``2n x 2n`` symplectic form in xxpp ordering."""
    n = int(n)
    if n < 1:
        raise ValueError(f"mode count must be >= 1, got {n}")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def num_modes(sigma):
    sigma = np.asarray(sigma)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
        raise ValueError(f"expected a (2n, 2n) matrix, got shape {sigma.shape}")
    return sigma.shape[0] // 2


def check_cm(sigma, tol=PHYSICALITY_TOL):
    """Validate ``sigma`` as a physical covariance matrix and return it as an array.

    Checks symmetry, the uncertainty relation (all symplectic eigenvalues
    ``>= 1 - tol``) and the energy bound ``Tr(sigma) >= 2n``.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = num_modes(sigma)
    if np.max(np.abs(sigma - sigma.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(sigma))):
        raise ValueError("covariance matrix is not symmetric")
    nu = _raw_symplectic_eigenvalues(sigma)
    if nu[-1] < 1.0 - tol:
        raise PhysicalityError(f"symplectic eigenvalue {nu[-1]:.3e} < 1")
    if np.trace(sigma) < 2 * n - tol:
        raise PhysicalityError("energy below the vacuum value")
    return sigma


def energy(sigma):
    """Energy ``Tr(sigma)`` of a zero-mean state (vacuum mode contributes 2)."""
    return float(np.trace(np.asarray(sigma)))


def mode_indices(modes, n):
    """Row/column indices ``{j, j + n}`` of the (0-based) modes in xxpp ordering."""
    modes = np.asarray(modes, dtype=int).ravel()
    if modes.size == 0:
        raise ValueError("reduction must keep at least one mode")
    if np.any(np.diff(modes) <= 0):
        raise ValueError("modes must be strictly increasing")
    if modes[0] < 0 or modes[-1] >= n:
        raise ValueError(f"mode index out of range for n={n}: {modes.tolist()}")
    return np.concatenate([modes, modes + n])


def partial_trace(sigma, modes):
    """Covariance matrix of the reduced state on ``modes`` (0-based, increasing).

    Tracing out modes of a Gaussian state pinches the corresponding rows and
    columns of the covariance matrix; the result is again in xxpp ordering.
    """
    sigma = np.asarray(sigma)
    idx = mode_indices(modes, num_modes(sigma))
    return sigma[np.ix_(idx, idx)]


def _raw_symplectic_eigenvalues(sigma):
    # eigenvalues of Omega sigma are +-i nu_k
    n = num_modes(sigma)
    omega = symplectic_form(n)
    ev = np.linalg.eigvals(omega @ sigma)
    nu = np.sort(np.abs(ev.imag))[::-1]
    return nu[::2]


def symplectic_spectrum(sigma):
    """Symplectic eigenvalues of ``sigma`` in descending order.

    Raises :class:`PhysicalityError` if any value lies below ``1 - 1e-8``.
    """
    sigma = np.asarray(sigma, dtype=float)
    nu = _raw_symplectic_eigenvalues(sigma)
    if nu[-1] < 1.0 - PHYSICALITY_TOL:
        raise PhysicalityError(f"symplectic eigenvalue {nu[-1]:.3e} < 1")
    return nu


def single_mode_nu(sigma):
    """Symplectic eigenvalue ``sqrt(det sigma)`` of one or a stack of 2x2 CMs."""
    sigma = np.asarray(sigma)
    det = sigma[..., 0, 0] * sigma[..., 1, 1] - sigma[..., 0, 1] * sigma[..., 1, 0]
    return np.sqrt(np.maximum(det, 0.0))


def entropy_f(x):
    """Entropy in bits of a single mode with symplectic eigenvalue ``x``.

    ``f(x) = (x+1)/2 log2((x+1)/2) - (x-1)/2 log2((x-1)/2)``, with ``f(1) = 0``.
    Values in ``[1 - 1e-8, 1)`` are clamped to 1; anything lower raises.
    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 1.0 - PHYSICALITY_TOL) or np.any(np.isnan(x)):
        raise ValueError("entropy_f is defined for x >= 1")
    x = np.maximum(x, 1.0)
    a = (x + 1.0) / 2.0
    b = (x - 1.0) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        blog = np.where(b > 0.0, b * np.log2(np.where(b > 0.0, b, 1.0)), 0.0)
    out = a * np.log2(a) - blog
    return out if out.ndim else float(out)


def von_neumann_entropy(sigma):
    """Von Neumann entropy (bits) of the Gaussian state with covariance ``sigma``."""
    return float(np.sum(entropy_f(symplectic_spectrum(sigma))))


def is_pure(sigma, tol=PURITY_TOL):
    """True iff ``sigma Omega sigma = Omega`` holds entrywise within ``tol``.

    For a symmetric CM this is the same as ``sigma^T Omega sigma = Omega``,
    i.e. every symplectic eigenvalue equal to 1.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    sigma = np.asarray(sigma, dtype=float)
    omega = symplectic_form(num_modes(sigma))
    return bool(np.max(np.abs(sigma.T @ omega @ sigma - omega)) <= tol)


def fidelity_pure_single_mode(sigma_a, sigma_b):
    """Overlap of two zero-mean single-mode Gaussian states, one of them pure.

    Returns ``2 / sqrt(det(sigma_a + sigma_b))``. Both arguments may be
    stacks of 2x2 matrices with broadcastable leading dimensions.
    """
    sigma_a = np.asarray(sigma_a, dtype=float)
    sigma_b = np.asarray(sigma_b, dtype=float)
    if sigma_a.shape[-2:] != (2, 2) or sigma_b.shape[-2:] != (2, 2):
        raise ValueError("pure-state fidelity is only implemented for one mode")
    s = sigma_a + sigma_b
    det = s[..., 0, 0] * s[..., 1, 1] - s[..., 0, 1] * s[..., 1, 0]
    out = 2.0 / np.sqrt(det)
    return out if out.ndim else float(out)


def rotation(phi):
    """Phase-space rotation by ``phi`` (a passive single-mode symplectic map)."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def squeezed_cm(z, phi=0.0):
    """Single-mode pure CM ``R(phi) diag(z^2, z^-2) R(phi)^T``."""
    r = rotation(phi)
    return r @ np.diag([z * z, 1.0 / (z * z)]) @ r.T


def two_mode_squeezed_cm(r):
    """CM of the two-mode squeezed vacuum with squeezing parameter ``r`` (xxpp)."""
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    return np.array([
        [c, s, 0.0, 0.0],
        [s, c, 0.0, 0.0],
        [0.0, 0.0, c, -s],
        [0.0, 0.0, -s, c],
    ])
