"""Self-checks bundled for the ``validate`` command."""

from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .entanglement import max_single_mode_entropy, reduction_entropies
from .haar import RngStream, haar_average_cm_check, sample_compact_symplectic
from .microcanonical import marginal_cdf, sample_energy_vector, sample_pure_cm, sample_reduced_cm
from .symplectic import fidelity_pure_single_mode, symplectic_form
from .teleportation import average_fidelity, input_cm, output_cm, per_state_fidelity


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<44s} measured={self.measured:.3e}  tol={self.tolerance:.1e}"


def _le(name, measured, tol):
    return Check(name, float(measured), float(tol), bool(measured <= tol))


def run_validation_suite(seed=0, samples=2000, omega=None):
    """Run structural, statistical and oracle checks; return a list of :class:`Check`.

    ``omega`` overrides the symplectic form used by the purity check (a
    negative control: any other convention must make it fail).
    """
    stream = RngStream(seed)
    out = []

    worst_o = worst_s = 0.0
    for k, n in enumerate((1, 2, 5, 20)):
        o = sample_compact_symplectic(n, stream.generator(0, k), size=samples)
        om = symplectic_form(n)
        ot = np.swapaxes(o, -1, -2)
        worst_o = max(worst_o, np.abs(ot @ o - np.eye(2 * n)).max())
        worst_s = max(worst_s, np.abs(ot @ om @ o - om).max())
    out.append(_le("K(n) orthogonality", worst_o, 1e-10))
    out.append(_le("K(n) symplecticity", worst_s, 1e-10))

    n, E = 5, 50.0
    sig, ev = sample_pure_cm(n, E, stream.generator(1), size=samples)
    om = symplectic_form(n) if omega is None else np.asarray(omega)
    purity = np.abs(sig @ om @ sig - om).max()
    out.append(_le("microcanonical purity", purity, 1e-8))
    tr = np.trace(sig, axis1=-2, axis2=-1)
    out.append(_le("energy conservation |Tr - sum E_j|", np.abs(tr - ev.sum(-1)).max(), 1e-9))
    out.append(_le("energy budget max(sum E_j) - E", max(ev.sum(-1).max() - E, 0.0), 0.0))

    for k, (n, E) in enumerate(((2, 8.0), (5, 50.0), (20, 200.0))):
        e1 = sample_energy_vector(n, E, stream.generator(2, k), size=20 * samples)[:, 0]
        p = stats.kstest(e1, lambda x: marginal_cdf(x, n, E)).pvalue
        out.append(Check(f"marginal KS p-value (n={n}, E={E:g})", p, 0.01, bool(p >= 0.01)))

    rep = haar_average_cm_check([4.0, 6.0, 8.0], 10 * samples, stream.generator(3))
    out.append(_le("Haar average of CM, max z-score", rep["max_z"], 4.0))

    resid = 0.0
    for E in (2.5, 5.0, 10.0, 50.0):
        for r in (0.0, 0.5, 1.0, 2.0):
            val, _ = integrate.quad(per_state_fidelity, 2.0, E, args=(r,),
                                    epsabs=1e-13, epsrel=1e-13, limit=200)
            resid = max(resid, abs((E - 2.0) * average_fidelity(E, r) - val))
    out.append(_le("teleportation quadrature identity", resid, 1e-10))

    gen = stream.generator(4)
    worst = 0.0
    for _ in range(200):
        e1 = 2.0 + 20.0 * gen.random()
        r = 2.0 * gen.random()
        s_in = input_cm(e1, gen.uniform(0, 2 * np.pi))
        f = fidelity_pure_single_mode(s_in, output_cm(s_in, r))
        worst = max(worst, abs(f - per_state_fidelity(e1, r)))
    out.append(_le("channel fidelity vs closed form", worst, 1e-12))

    n, E = 5, 50.0
    gam, _ = sample_reduced_cm(n, E, [0], stream.generator(5), size=samples)
    excess = reduction_entropies(gam).max() - max_single_mode_entropy(n, E)
    out.append(_le("single-mode entropy <= maximum", max(excess, 0.0), 0.0))
    return out
