# Entanglement of one mode inside a random pure Gaussian state.
#
# Draw pure n-mode states from the microcanonical measure with total energy
# budget E, keep a single mode, and look at its von Neumann entropy.

import numpy as np

from gaussmicro.entanglement import entropy_samples, max_single_mode_entropy, sigma_gap
from gaussmicro.haar import RngStream

for n, E in [(5, 50.0), (20, 200.0)]:
    st = entropy_samples(1, n, E, 100_000, RngStream(2024))
    print(f"n={n:3d} E={E:6.1f}  mean S={st.mean:.4f}  std={st.std:.4f}  "
          f"max observed={st.max_observed:.4f}  bound={st.smax:.4f}")
    # how far the typical state sits below the most entangled one
    print(f"    the bound is {sigma_gap(st):.2f} standard deviations above the mean")

# The histogram is normalised to one over 200 bins between 0 and the bound.
st = entropy_samples(1, 5, 50.0, 100_000, RngStream(1))
centres = 0.5 * (st.bin_edges[1:] + st.bin_edges[:-1])
peak = centres[np.argmax(st.histogram)]
print(f"most likely entropy at n=5, E=50: about {peak:.2f} bits "
      f"(bound {max_single_mode_entropy(5, 50.0):.2f})")

# Two modes out of six carry less than twice the one-mode entropy.
one = entropy_samples(1, 6, 60.0, 20_000, RngStream(5))
two = entropy_samples(2, 6, 60.0, 20_000, RngStream(6))
print(f"n=6 E=60: S(1 mode)={one.mean:.3f}  S(2 modes)={two.mean:.3f}")
