"""Average fidelity of continuous-variable teleportation of squeezed states.

At the level of second moments the unit-gain protocol with a two-mode
squeezed resource of parameter ``r`` maps ``sigma -> sigma + 2 e^{-2r} I``.
"""

from dataclasses import dataclass

import numpy as np

from .haar import RngStream
from .microcanonical import sample_energy_vector, squeezings_from_energies
from .stats import DEFAULT_CHUNK, SampleStats, map_chunks, reduce_stats
from .symplectic import fidelity_pure_single_mode, num_modes, squeezed_cm


@dataclass(frozen=True)
class TeleportParams:
    r: float

    def __post_init__(self):
        if not self.r >= 0:
            raise ValueError("squeezing parameter r must be >= 0")


def _r(params):
    r = params.r if isinstance(params, TeleportParams) else float(params)
    if not r >= 0:
        raise ValueError("squeezing parameter r must be >= 0")
    return r


def output_cm(sigma_in, params):
    """Output CM of the teleportation channel for a single-mode input."""
    sigma_in = np.asarray(sigma_in, dtype=float)
    if num_modes(sigma_in) != 1:
        raise ValueError("teleportation is defined for one mode")
    return sigma_in + 2.0 * np.exp(-2.0 * _r(params)) * np.eye(2)


def per_state_fidelity(e1, params):
    """Fidelity ``(1 + e^{-4r} + e^{-2r} E1)^{-1/2}`` for a pure input of energy ``E1``."""
    e1 = np.asarray(e1, dtype=float)
    if np.any(e1 < 2.0):
        raise ValueError("single-mode energy must be >= 2")
    a = np.exp(-2.0 * _r(params))
    out = 1.0 / np.sqrt(1.0 + a * a + a * e1)
    return out if out.ndim else float(out)


def average_fidelity(E, params):
    """Closed-form average of :func:`per_state_fidelity` over ``E1`` uniform on ``[2, E]``.

    ``2 e^{2r} (sqrt(1 + e^{-4r} + E e^{-2r}) - 1 - e^{-2r}) / (E - 2)``,
    continued to ``1/(1 + e^{-2r})`` at ``E = 2``.
    """
    E = np.asarray(E, dtype=float)
    if np.any(E < 2.0):
        raise ValueError("energy budget must be >= 2")
    a = np.exp(-2.0 * _r(params))
    d = E - 2.0
    # sqrt(1 + a^2 + E a) - (1 + a) = a d / (sqrt(...) + 1 + a), no cancellation
    root = np.sqrt(1.0 + a * a + a * E)
    out = 2.0 / (root + 1.0 + a)
    out = np.where(d > 0, out, 1.0 / (1.0 + a))
    return out if out.ndim else float(out)


def mc_average_fidelity(E, params, samples, rng, rotate=True, chunk_size=DEFAULT_CHUNK,
                        workers=None):
    """Monte Carlo estimate of the average fidelity over single-mode microcanonical inputs.

    Each input is a squeezed state with energy uniform on ``[2, E]`` and a
    uniformly random phase; the fidelity is evaluated from the CMs.
    """
    r = _r(params)
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    noise = 2.0 * np.exp(-2.0 * r)

    def chunk(gen, count):
        e1 = sample_energy_vector(1, E, gen, size=count)[:, 0]
        z2 = squeezings_from_energies(e1) ** 2
        phi = gen.uniform(0.0, 2.0 * np.pi, size=count) if rotate else np.zeros(count)
        c, s = np.cos(phi), np.sin(phi)
        sig = np.empty((count, 2, 2))
        sig[:, 0, 0] = c * c * z2 + s * s / z2
        sig[:, 1, 1] = s * s * z2 + c * c / z2
        sig[:, 0, 1] = sig[:, 1, 0] = c * s * (z2 - 1.0 / z2)
        return SampleStats.from_values(
            fidelity_pure_single_mode(sig, sig + noise * np.eye(2)))

    return reduce_stats(map_chunks(chunk, samples, stream, chunk_size, workers))


def input_cm(e1, phi=0.0):
    """Pure single-mode input with energy ``e1`` rotated by ``phi``."""
    return squeezed_cm(squeezings_from_energies(e1), phi)
