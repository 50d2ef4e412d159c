"""Heterodyne measure-and-prepare benchmark for squeezed-state teleportation.

Alice heterodynes the input (outcome ``m`` with law ``N(0, sigma_in + I)``)
and Bob prepares a centred pure state ``sigma_B(m)`` from the input
alphabet.  The average fidelity is an integral over outcomes of

    g(m, sigma_B) = E_in[ p(m | sigma_in) F(sigma_in, sigma_B) ],

so Bob's reply is optimised separately for each outcome.  Inputs are
phase-covariant, hence ``g(R m, R sigma_B R^T) = g(m, sigma_B)`` and the
policy only needs to be tabulated along the positive x axis.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .haar import RngStream, as_generator
from .microcanonical import squeezings_from_energies
from .stats import SampleStats, map_chunks, reduce_stats
from .symplectic import fidelity_pure_single_mode, squeezed_cm
from .teleportation import average_fidelity

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
FIT_K = 0.317576
TAIL_MASS = 1e-8


class ConsistencyError(RuntimeError):
    """Quadrature and Monte Carlo estimates disagree."""


class NoCrossover(RuntimeError):
    """The quantum and classical fidelity curves do not cross on the bracket."""


def max_log_squeezing(E):
    """Largest ``s = ln z`` with ``z^2 + z^-2 <= E``."""
    if E < 2:
        raise ValueError("energy must be >= 2")
    return 0.5 * math.acosh(E / 2.0)


def fit_value(E):
    """Empirical fit ``1 - k arcsinh(sqrt(E - 2))`` with ``k = 0.317576``."""
    return 1.0 - FIT_K * np.arcsinh(np.sqrt(np.asarray(E, dtype=float) - 2.0))


def heterodyne_density(m, sigma_in):
    """Density of heterodyne outcomes ``m = (x, p)`` for a zero-mean input.

    Gaussian with covariance ``sigma_in + I``.  ``m`` may have shape ``(..., 2)``.
    """
    m = np.asarray(m, dtype=float)
    c = np.asarray(sigma_in, dtype=float) + np.eye(2)
    det = c[..., 0, 0] * c[..., 1, 1] - c[..., 0, 1] * c[..., 1, 0]
    q = (c[..., 1, 1] * m[..., 0] ** 2 - 2 * c[..., 0, 1] * m[..., 0] * m[..., 1]
         + c[..., 0, 0] * m[..., 1] ** 2) / det
    return np.exp(-0.5 * q) / (2.0 * np.pi * np.sqrt(det))


def sample_heterodyne(sigma_in, rng, size=None):
    gen = as_generator(rng)
    c = np.asarray(sigma_in, dtype=float) + np.eye(2)
    return gen.multivariate_normal(np.zeros(2), c, size=size)


class InputQuadrature:
    """Tensor Gauss-Legendre rule over the single-mode input alphabet.

    Energies are parametrised as ``E1 = 2 + u^2`` with ``u in [0, sqrt(E-2)]``,
    which removes the square-root singularity of ``z(E1)`` at the vacuum; the
    phase ``theta`` runs over ``[0, pi)``.  Weights include the input density
    ``1/(E - 2) * 1/pi`` so they sum to one.
    """

    def __init__(self, E, n_energy=64, n_phase=64):
        if n_energy < 8 or n_phase < 8:
            raise ValueError("quadrature node counts must be >= 8")
        if E <= 2:
            raise ValueError("need E > 2")
        self.E = float(E)
        self.shape = (n_energy, n_phase)
        xu, wu = np.polynomial.legendre.leggauss(n_energy)
        xt, wt = np.polynomial.legendre.leggauss(n_phase)
        umax = math.sqrt(E - 2.0)
        u = 0.5 * umax * (xu + 1.0)
        wu = 0.5 * umax * wu * 2.0 * u / (E - 2.0)
        theta = 0.5 * np.pi * (xt + 1.0)
        wt = 0.5 * wt
        uu, tt = np.meshgrid(u, theta, indexing="ij")
        self.e1 = (2.0 + uu * uu).ravel()
        self.theta = tt.ravel()
        self.weight = np.outer(wu, wt).ravel()
        z2 = squeezings_from_energies(self.e1) ** 2
        c, s = np.cos(self.theta), np.sin(self.theta)
        self.sxx = c * c * z2 + s * s / z2
        self.spp = s * s * z2 + c * c / z2
        self.sxp = c * s * (z2 - 1.0 / z2)
        self.cdet = (self.sxx + 1.0) * (self.spp + 1.0) - self.sxp ** 2

    def outcome_weights(self, rho):
        """``weight * p((rho, 0) | sigma_in)`` for each radius and node, shape ``(K, Q)``."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))[:, None]
        q = rho * rho * (self.spp + 1.0) / self.cdet
        return self.weight * np.exp(-0.5 * q) / (2.0 * np.pi * np.sqrt(self.cdet))

    def fidelities(self, s, chi):
        """Fidelity of every input node with replies ``R(chi) diag(e^{2s}, e^{-2s}) R(chi)^T``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))[:, None]
        chi = np.atleast_1d(np.asarray(chi, dtype=float))[:, None]
        z2 = np.exp(2.0 * s)
        c, sn = np.cos(chi), np.sin(chi)
        bxx = c * c * z2 + sn * sn / z2
        bpp = sn * sn * z2 + c * c / z2
        bxp = c * sn * (z2 - 1.0 / z2)
        det = (self.sxx + bxx) * (self.spp + bpp) - (self.sxp + bxp) ** 2
        return 2.0 / np.sqrt(det)

    def objective(self, weights, s, chi):
        """``g`` for each row of precomputed outcome ``weights``."""
        return np.sum(weights * self.fidelities(s, chi), axis=-1)


def posterior_objective(m, sigma_b, E, quad=(64, 64)):
    """``g(m, sigma_B)``: outcome density times fidelity, averaged over inputs."""
    q = quad if isinstance(quad, InputQuadrature) else InputQuadrature(E, *quad)
    m = np.asarray(m, dtype=float)
    sigma_b = np.asarray(sigma_b, dtype=float)
    sig = np.empty((q.e1.size, 2, 2))
    sig[:, 0, 0] = q.sxx
    sig[:, 1, 1] = q.spp
    sig[:, 0, 1] = sig[:, 1, 0] = q.sxp
    dens = heterodyne_density(m, sig)
    return float(np.sum(q.weight * dens * fidelity_pure_single_mode(sig, sigma_b)))


@dataclass
class BobPolicy:
    """Radial table of Bob's replies ``(zeta, chi)`` along the positive x axis.

    For an outcome at radius ``rho`` and phase ``phi`` Bob prepares
    ``R(chi + phi) diag(zeta^2, zeta^-2) R(chi + phi)^T`` with ``zeta`` and
    ``chi`` interpolated linearly in ``rho``.
    """

    E: float
    rho: np.ndarray
    zeta: np.ndarray
    chi: np.ndarray
    value: np.ndarray = field(default=None, repr=False)
    flagged: np.ndarray = field(default=None, repr=False)

    @property
    def rho_max(self):
        return float(self.rho[-1])

    def reply(self, m):
        """``(zeta, chi)`` for outcomes ``m`` of shape ``(..., 2)``; ``chi`` absolute."""
        m = np.asarray(m, dtype=float)
        rho = np.hypot(m[..., 0], m[..., 1])
        phi = np.arctan2(m[..., 1], m[..., 0])
        zeta = np.interp(rho, self.rho, self.zeta)
        chi = np.interp(rho, self.rho, self.chi)
        return zeta, chi + phi

    def reply_cm(self, m):
        """Bob's CM for a single outcome ``m``."""
        zeta, chi = self.reply(m)
        return squeezed_cm(float(zeta), float(chi))

    def dump(self, fh):
        """Write the policy table: a commented header then ``rho,zeta,chi`` rows."""
        fh.write(f"# E={float(self.E)!r}\n# rho_max={self.rho_max!r}\n"
                 f"# nodes={self.rho.size}\n")
        fh.write("rho,zeta,chi\n")
        for r, z, c in zip(self.rho, self.zeta, self.chi):
            fh.write(f"{float(r)!r},{float(z)!r},{float(c)!r}\n")

    @classmethod
    def load(cls, fh):
        meta = {}
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = float(v)
            elif line != "rho,zeta,chi":
                rows.append([float(t) for t in line.split(",")])
        arr = np.array(rows)
        if int(meta["nodes"]) != len(arr):
            raise ValueError("node count in header does not match the table")
        return cls(E=meta["E"], rho=arr[:, 0], zeta=arr[:, 1], chi=arr[:, 2])

    @classmethod
    def constant(cls, E, rho_max, zeta=1.0, chi=0.0, nodes=2):
        rho = np.linspace(0.0, rho_max, nodes)
        return cls(E=E, rho=rho, zeta=np.full(nodes, zeta), chi=np.full(nodes, chi))


@dataclass
class ThresholdResult:
    E: float
    value: float
    policy: BobPolicy = field(repr=False)
    error: float
    mc: SampleStats = None
    flagged_nodes: int = 0

    @property
    def consistent(self):
        if self.mc is None:
            return None
        return abs(self.value - self.mc.mean) <= 4.0 * math.hypot(self.mc.stderr, self.error)


def default_rho_max(E):
    """Radius beyond which the outcome tail mass is below 1e-8 for every input.

    ``|m|^2`` is stochastically dominated by ``lambda * chi^2_2`` with
    ``lambda = z_max^2 + 1`` the largest eigenvalue of ``sigma_in + I``.
    """
    z2 = math.exp(2.0 * max_log_squeezing(E))
    return math.sqrt(2.0 * (z2 + 1.0) * math.log(1.0 / TAIL_MASS))


def golden_section_max(f, lo, hi, iters=48):
    """Vectorised golden-section search for a maximum of ``f`` on ``[lo, hi]``.

    ``f`` maps an array of abscissae (one per problem) to an array of values.
    Returns the best abscissae and values seen.
    """
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        # maximum bracketed by [a, d] if f(c) >= f(d), else by [c, b]
        a, b = np.where(left, a, c), np.where(left, d, b)
        x = np.where(left, b - GOLDEN * (b - a), a + GOLDEN * (b - a))
        fx = f(x)
        c, d, fc, fd = (np.where(left, x, d), np.where(left, c, x),
                        np.where(left, fx, fd), np.where(left, fc, fx))
    return np.where(fc >= fd, c, d), np.maximum(fc, fd)


def _coordinate_ascent(q, w, s, chi, s_max, max_rounds, tol, line_iters):
    val = q.objective(w, s, chi)
    converged = np.zeros(s.shape, dtype=bool)
    for _ in range(max_rounds):
        start = val.copy()
        xs, vs = golden_section_max(lambda x: q.objective(w, x, chi),
                                    np.zeros_like(s), np.full_like(s, s_max), line_iters)
        better = vs > val
        s = np.where(better, xs, s)
        val = np.where(better, vs, val)
        xc, vc = golden_section_max(lambda x: q.objective(w, s, x),
                                    chi - np.pi / 2, chi + np.pi / 2, line_iters)
        better = vc > val
        chi = np.where(better, xc, chi)
        val = np.where(better, vc, val)
        converged = (val - start) <= tol * np.maximum(val, 1e-300)
        if np.all(converged):
            break
    return s, chi, val, ~converged


def grid_search(q, w, s_max, n_s=16, n_chi=12):
    """Brute-force maximum of ``g`` over an ``n_s x n_chi`` grid of replies."""
    best_v = np.full(w.shape[0], -np.inf)
    best_s = np.zeros(w.shape[0])
    best_c = np.zeros(w.shape[0])
    for s in np.linspace(0.0, s_max, n_s):
        for c in np.linspace(0.0, np.pi, n_chi, endpoint=False):
            v = q.objective(w, np.full(w.shape[0], s), np.full(w.shape[0], c))
            up = v > best_v
            best_v = np.where(up, v, best_v)
            best_s = np.where(up, s, best_s)
            best_c = np.where(up, c, best_c)
    return best_s, best_c, best_v


def optimize_bob_policy(E, nodes=256, rho_max=None, quad=(64, 64), grid=(16, 12),
                        max_rounds=30, tol=1e-12, line_iters=48, reply_energy=None):
    """Optimise Bob's reply at ``nodes`` radii in ``[0, rho_max]``.

    Each node starts a coordinate ascent (golden-section line searches in
    ``s = ln zeta`` and ``chi``) from the best point of a coarse grid and from
    ``chi in {0, pi/2}``; the best local optimum is kept, so the result never
    falls below the grid oracle.  ``reply_energy`` loosens Bob's energy cap
    above ``E`` (off the input alphabet, for exploration only).
    """
    if E <= 2:
        raise ValueError("need E > 2")
    q = quad if isinstance(quad, InputQuadrature) else InputQuadrature(E, *quad)
    rho_max = default_rho_max(E) if rho_max is None else float(rho_max)
    rho = np.linspace(0.0, rho_max, nodes)
    w = q.outcome_weights(rho)
    s_max = max_log_squeezing(E if reply_energy is None else reply_energy)

    gs, gc, gv = grid_search(q, w, s_max, *grid)
    best = None
    for s0, c0 in ((gs, gc), (np.full(nodes, 0.5 * s_max), np.zeros(nodes)),
                   (np.full(nodes, 0.5 * s_max), np.full(nodes, np.pi / 2))):
        res = _coordinate_ascent(q, w, s0.copy(), c0.copy(), s_max, max_rounds, tol, line_iters)
        if best is None:
            best = res
        else:
            up = res[2] > best[2]
            best = tuple(np.where(up, a, b) for a, b in zip(res, best))
    s, chi, val, flagged = best
    chi = np.mod(chi, np.pi)
    # at zeta = 1 the angle is meaningless; pin it for a tidy table
    chi = np.where(s <= 1e-12, 0.0, chi)
    chi[0] = 0.0 if s[0] <= 1e-6 else chi[0]
    chi = _unwrap_half_turn(chi)
    return BobPolicy(E=float(E), rho=rho, zeta=np.exp(s), chi=chi, value=val, flagged=flagged)


def _unwrap_half_turn(chi):
    # reply angles are defined mod pi; make neighbours continuous for interpolation
    return np.unwrap(2.0 * chi) / 2.0


def _radial_integral(q, policy, rho_max, order):
    x, wx = np.polynomial.legendre.leggauss(order)
    edges = policy.rho
    if edges[-1] < rho_max:
        edges = np.append(edges, rho_max)
    a, b = edges[:-1, None], edges[1:, None]
    r = (0.5 * (b - a) * (x + 1.0) + a).ravel()
    wr = (0.5 * (b - a) * wx).ravel()
    zeta = np.interp(r, policy.rho, policy.zeta)
    chi = np.interp(r, policy.rho, policy.chi)
    g = q.objective(q.outcome_weights(r), np.log(zeta), chi)
    return 2.0 * np.pi * float(np.sum(wr * r * g))


def quadrature_average_fidelity(E, policy, quad=(64, 64), radial_order=4):
    """Average fidelity of ``policy`` by radial quadrature over outcomes.

    Rotational covariance makes the angular integral exactly ``2 pi`` times
    the value on the x axis.  Returns ``(value, error_estimate)``.
    """
    q = quad if isinstance(quad, InputQuadrature) else InputQuadrature(E, *quad)
    n_e, n_t = q.shape
    hi = _radial_integral(q, policy, policy.rho_max, radial_order)
    lo = _radial_integral(q, policy, policy.rho_max, max(2, radial_order - 2))
    coarse = InputQuadrature(E, max(8, n_e // 2), max(8, n_t // 2))
    lo_in = _radial_integral(coarse, policy, policy.rho_max, radial_order)
    return hi, abs(hi - lo) + abs(hi - lo_in)


def mc_average_fidelity(E, policy, samples, rng, chunk_size=4096, workers=None):
    """Monte Carlo estimate: draw input, draw heterodyne outcome, apply the policy."""
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))

    def chunk(gen, count):
        e1 = 2.0 + (E - 2.0) * gen.random(count)
        z2 = squeezings_from_energies(e1) ** 2
        th = gen.uniform(0.0, np.pi, count)
        c, s = np.cos(th), np.sin(th)
        sig = np.empty((count, 2, 2))
        sig[:, 0, 0] = c * c * z2 + s * s / z2
        sig[:, 1, 1] = s * s * z2 + c * c / z2
        sig[:, 0, 1] = sig[:, 1, 0] = c * s * (z2 - 1.0 / z2)
        cov = sig + np.eye(2)
        chol = np.linalg.cholesky(cov)
        m = np.einsum("bij,bj->bi", chol, gen.standard_normal((count, 2)))
        zeta, chi = policy.reply(m)
        zb2 = zeta * zeta
        cb, sb = np.cos(chi), np.sin(chi)
        bob = np.empty((count, 2, 2))
        bob[:, 0, 0] = cb * cb * zb2 + sb * sb / zb2
        bob[:, 1, 1] = sb * sb * zb2 + cb * cb / zb2
        bob[:, 0, 1] = bob[:, 1, 0] = cb * sb * (zb2 - 1.0 / zb2)
        return SampleStats.from_values(fidelity_pure_single_mode(sig, bob))

    return reduce_stats(map_chunks(chunk, samples, stream, chunk_size, workers))


def classical_average_fidelity(E, policy=None, quad=(64, 64), nodes=256, mc_samples=0,
                               rng=0, check=False, workers=None):
    """Heterodyne classical threshold at budget ``E``.

    Optimises a policy when none is given, evaluates it by quadrature and,
    with ``mc_samples > 0``, cross-checks by Monte Carlo.  ``check=True``
    raises :class:`ConsistencyError` when the two disagree by more than four
    combined standard errors.
    """
    if E <= 2:
        return ThresholdResult(E=float(E), value=1.0,
                               policy=BobPolicy.constant(E, 1.0), error=0.0)
    q = InputQuadrature(E, *quad)
    if policy is None:
        policy = optimize_bob_policy(E, nodes=nodes, quad=q)
    value, err = quadrature_average_fidelity(E, policy, quad=q)
    mc = mc_average_fidelity(E, policy, mc_samples, rng, workers=workers) if mc_samples else None
    flagged = int(np.sum(policy.flagged)) if policy.flagged is not None else 0
    res = ThresholdResult(E=float(E), value=value, policy=policy, error=err, mc=mc,
                          flagged_nodes=flagged)
    if check and mc is not None and not res.consistent:
        raise ConsistencyError(
            f"quadrature {value:.6f} vs Monte Carlo {mc.mean:.6f} +- {mc.stderr:.1e}")
    return res


def crossover_energy(params, tol=1e-3, E_lo=2.0 + 1e-6, E_hi=8.0, quad=(64, 64), nodes=256):
    """Budget at which teleportation starts beating the heterodyne threshold.

    Bisection on ``average_fidelity(E, r) - F_cl(E)`` over ``(E_lo, E_hi]``.
    Raises :class:`NoCrossover` if the difference does not change sign.
    """
    r = params.r if hasattr(params, "r") else float(params)
    if r <= 0:
        raise ValueError("need r > 0")

    def h(E):
        return average_fidelity(E, r) - classical_average_fidelity(E, quad=quad, nodes=nodes).value

    h_lo, h_hi = h(E_lo), h(E_hi)
    if not (h_lo < 0 < h_hi):
        raise NoCrossover(f"no sign change on [{E_lo}, {E_hi}] for r={r}: "
                          f"h={h_lo:.4f}, {h_hi:.4f}")
    a, b = E_lo, E_hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if h(mid) < 0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)
