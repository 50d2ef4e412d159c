# Heterodyne measure-and-prepare benchmark.
#
# Alice heterodynes the unknown squeezed input and Bob prepares the pure
# squeezed state that maximises the expected fidelity given the outcome.
# This takes a minute or two at the default quadrature sizes.

import math

from gaussmicro.classical import classical_average_fidelity, fit_value
from gaussmicro.teleportation import average_fidelity

for E in (2.5, 4.0, 8.0):
    res = classical_average_fidelity(E, mc_samples=50_000, rng=1)
    vacuum_only = 4 * (math.sqrt(E + 2) - 2) / (E - 2)
    print(f"E={E}: F_cl={res.value:.5f} (+-{res.error:.1e}), "
          f"Monte Carlo {res.mc.mean:.5f} +- {res.mc.stderr:.5f}")
    print(f"    always answering the vacuum gives {vacuum_only:.5f}; "
          f"the arcsinh fit gives {float(fit_value(E)):.5f}")
    print(f"    teleportation r=1 gives {average_fidelity(E, 1.0):.5f}")

# Bob's reply squeezes more as the outcome moves away from the origin.
pol = res.policy
for i in range(0, pol.rho.size, pol.rho.size // 8):
    print(f"    rho={pol.rho[i]:6.3f}  zeta={pol.zeta[i]:.4f}  chi={pol.chi[i]:.4f}")
