"""Monte Carlo and quadrature tools for an energy-constrained measure on pure
Gaussian states: entanglement statistics, teleportation fidelities and a
heterodyne classical benchmark."""

__version__ = "0.1.0"

from .symplectic import (  # noqa: E402
    energy,
    entropy_f,
    fidelity_pure_single_mode,
    is_pure,
    partial_trace,
    symplectic_form,
    symplectic_spectrum,
    von_neumann_entropy,
)
from .haar import RngStream, embed_compact, sample_compact_symplectic, sample_unitary  # noqa: E402
from .microcanonical import (  # noqa: E402
    boltzmann_limit_density,
    marginal_density,
    microcanonical_average,
    sample_energy_vector,
    sample_pure_cm,
    sample_reduced_cm,
    squeezings_from_energies,
)
from .stats import SampleStats  # noqa: E402
