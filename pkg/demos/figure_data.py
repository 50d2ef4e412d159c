# Table of teleportation fidelities and the heterodyne benchmark on one grid.
#
# Equivalent to `gaussmicro figure1 --grid-points 7 --emin 2.5 --emax 8`, but
# kept small so it finishes quickly.

import numpy as np

from gaussmicro.classical import classical_average_fidelity
from gaussmicro.teleportation import average_fidelity

print("E, fbar_r0.5, fbar_r1, fcl")
for E in np.linspace(2.5, 8.0, 7):
    fcl = classical_average_fidelity(E, quad=(32, 32), nodes=96).value
    print(f"{E:.3f}, {average_fidelity(E, 0.5):.5f}, {average_fidelity(E, 1.0):.5f}, {fcl:.5f}")
