# Average teleportation fidelity of squeezed inputs.
#
# Inputs are pure one-mode squeezed states with energy uniform on [2, E];
# the channel adds 2 exp(-2r) of noise to every quadrature.

import numpy as np

from gaussmicro.haar import RngStream
from gaussmicro.teleportation import average_fidelity, mc_average_fidelity

energies = np.array([2.0, 2.5, 4.0, 8.0, 10.0, 50.0, 1e4])
print("E        " + "  ".join(f"r={r:<6g}" for r in (0.5, 1.0, 2.0, 5.0)))
for E in energies:
    row = "  ".join(f"{average_fidelity(E, r):.6f}" for r in (0.5, 1.0, 2.0, 5.0))
    print(f"{E:<8g} {row}")

# Monte Carlo over the same input ensemble agrees with the closed form.
st = mc_average_fidelity(10.0, 1.0, 100_000, RngStream(8))
print(f"E=10, r=1: closed form {average_fidelity(10.0, 1.0):.6f}, "
      f"Monte Carlo {st.mean:.6f} +- {st.stderr:.6f}")
