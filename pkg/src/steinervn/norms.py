"""Sup-norm estimation on l_q balls, a brute-force oracle, analytic bounds.

estimate_norm produces certified LOWER bounds: the returned value is the
modulus of the polynomial at an explicit witness point inside the unit
ball, recomputed with compensated summation independently of the optimizer.
Upper bounds are analytic only (see analytic_bounds).
"""

import logging
import math
from dataclasses import dataclass
from math import comb, factorial, inf, log

import numpy as np

from .errors import ConvergenceError, DomainError
from .polynomials import (SteinerPolynomial, evaluate_compensated,
                          evaluate_many, value_and_partials)
from .seeding import rng_for

logger = logging.getLogger(__name__)

ARMIJO = 1e-4
STEP0 = 0.5
STEP_SHRINK = 0.5
ORACLE_MAX_N = 7
ORACLE_MIN_RESOLUTION = 16
ORACLE_SAMPLES = 1_000_000


@dataclass
class NormEstimate:
    """Certified lower bound of a sup-norm with its witness point.

    value equals |p(witness)| under independent compensated re-evaluation,
    and the witness satisfies ||witness||_q <= 1 + 1e-12.
    """

    value: float
    q: float
    witness: np.ndarray
    method: str  # multistart_ascent | grid_oracle | trivial
    starts: int
    iterations: int
    seed: int


@dataclass
class BoundSet:
    """Analytic reference bounds for (k, q, n); natural logs throughout."""

    ksz_infty: float
    qnorm_upper: float
    l1_upper: float
    ell2_upper: float
    polarization: float


def qnorm(z: np.ndarray, q) -> float:
    """l_q norm of a complex vector, q in [1, inf]."""
    mods = np.abs(z)
    if q == inf:
        return float(mods.max()) if mods.size else 0.0
    top = float(mods.max()) if mods.size else 0.0
    if top == 0.0:
        return 0.0
    return top * float(np.sum((mods / top) ** q)) ** (1.0 / q)


def _check_q(q):
    if not (q == inf or (isinstance(q, (int, float)) and q >= 1)):
        raise DomainError(f"q={q} outside [1, inf]")


# ---------------------------------------------------------------------------
# Projected gradient ascent
# ---------------------------------------------------------------------------

def _align_burnin(p, z, q, steps=30):
    """Sharpen a random start by Hoelder alignment before the ascent.

    Each step replaces z with the unit-q-norm point maximizing the
    linearization |sum_j (dp/dz_j) z_j|: conjugate phases with moduli
    proportional to |dp/dz_j|^{q'-1} (all moduli 1 when q = inf).  This is
    one alternating-maximization step on the symmetric multilinear form; it
    is a heuristic initializer only, so the best point seen is returned and
    certification happens downstream.  Degenerate for q = 1 (the linearized
    optimum is a single coordinate), so callers skip it there.
    """
    best_f, best_z = -1.0, z
    for _ in range(steps):
        val, part = value_and_partials(p, z)
        f = abs(val) ** 2
        if f > best_f:
            best_f, best_z = f, z
        mods = np.abs(part)
        if not mods.any():
            break
        w = np.conj(part)
        if q == inf:
            z_new = np.where(mods > 0, w / np.maximum(mods, 1e-300), z)
        else:
            qp = q / (q - 1.0)
            z_new = w * np.maximum(mods, 1e-300) ** (qp - 2.0)
            z_new[mods == 0.0] = 0.0
            nrm = qnorm(z_new, q)
            if nrm == 0.0:
                break
            z_new = z_new / nrm
        z = z_new
    val, _ = value_and_partials(p, z)
    if abs(val) ** 2 > best_f:
        best_z = z
    return best_z


def _backtrack(f, gn2, alphas, f_candidates):
    """Index of the first step in a decreasing alpha sequence passing Armijo."""
    if not np.all(np.isfinite(f_candidates)):
        raise FloatingPointError("non-finite objective in line search")
    hits = np.nonzero(f_candidates >= f + ARMIJO * alphas * gn2)[0]
    return int(hits[0]) if hits.size else -1


_LS_CHUNK = 8
_LS_MIN_STEP = 1e-18


def _phase_ascent(p, theta, max_iters, tol):
    """Gradient ascent of |p(e^{i theta})|^2 over the torus.

    Backtracking line search from step 0.5 (halving, Armijo constant 1e-4),
    with the candidate steps of each backtracking pass evaluated in one
    vectorized batch.  Returns (theta, |p|^2, iterations).
    """
    z = np.exp(1j * theta)
    f = abs(evaluate_many(p, z[None, :])[0]) ** 2
    iters = 0
    for _ in range(max_iters):
        iters += 1
        val, partials = value_and_partials(p, z)
        grad = -2.0 * np.imag(np.conj(val) * partials * z)
        gn2 = float(grad @ grad)
        if not np.isfinite(gn2):
            raise FloatingPointError("non-finite gradient in phase ascent")
        if gn2 == 0.0:
            break
        alpha, hit = STEP0, -1
        while alpha > _LS_MIN_STEP:
            alphas = alpha * STEP_SHRINK ** np.arange(_LS_CHUNK)
            cands = theta[None, :] + alphas[:, None] * grad[None, :]
            fs = np.abs(evaluate_many(p, np.exp(1j * cands))) ** 2
            hit = _backtrack(f, gn2, alphas, fs)
            if hit >= 0:
                theta_new, f_new = cands[hit], float(fs[hit])
                break
            alpha *= STEP_SHRINK ** _LS_CHUNK
        if hit < 0:
            break
        gain = (f_new - f) / max(f_new, 1e-300)
        theta, f = theta_new, f_new
        z = np.exp(1j * theta)
        if gain < tol:
            break
    return theta, f, iters


def _sphere_normal(z, q):
    """Complex packing of the gradient of ||z||_q at a unit vector.

    Entry j is z_j |z_j|^{q-2}; moduli are clamped below to keep the field
    bounded for q < 2.
    """
    mods = np.abs(z)
    safe = np.maximum(mods, 1e-12)
    u = z * safe ** (q - 2.0)
    u[mods == 0.0] = 0.0
    return u


def _qnorm_rows(points: np.ndarray, q) -> np.ndarray:
    mods = np.abs(points)
    if q == inf:
        return mods.max(axis=1)
    if q == 1:
        return mods.sum(axis=1)
    if q == 2:
        return np.sqrt((mods ** 2).sum(axis=1))
    return (mods ** q).sum(axis=1) ** (1.0 / q)


def _sphere_ascent(p, z, q, max_iters, tol):
    """Ascent of the scale-invariant |p(z)|^2 / ||z||_q^{2k} with renormalization.

    The search direction is the gradient of the quotient, which vanishes at
    constrained critical points on the q-sphere; line search as in
    _phase_ascent.
    """
    z = z / qnorm(z, q)
    f = abs(evaluate_many(p, z[None, :])[0]) ** 2
    iters = 0
    for _ in range(max_iters):
        iters += 1
        val, partials = value_and_partials(p, z)
        grad_f = 2.0 * np.conj(val) * partials  # complex packing of (df/dx, df/dy)
        direction = grad_f - 2.0 * p.k * f * _sphere_normal(z, q)
        gn2 = float(np.sum(direction.real ** 2 + direction.imag ** 2))
        if not np.isfinite(gn2):
            raise FloatingPointError("non-finite gradient in sphere ascent")
        if gn2 == 0.0:
            break
        alpha, hit = STEP0, -1
        while alpha > _LS_MIN_STEP:
            alphas = alpha * STEP_SHRINK ** np.arange(_LS_CHUNK)
            cands = z[None, :] + alphas[:, None] * direction[None, :]
            norms = _qnorm_rows(cands, q)
            good = norms > 0.0
            cands[good] /= norms[good, None]
            fs = np.abs(evaluate_many(p, cands)) ** 2
            hit = _backtrack(f, gn2, alphas, np.where(good, fs, -1.0))
            if hit >= 0:
                z_new, f_new = cands[hit], float(fs[hit])
                break
            alpha *= STEP_SHRINK ** _LS_CHUNK
        if hit < 0:
            break
        gain = (f_new - f) / max(f_new, 1e-300)
        z, f = z_new, f_new
        if gain < tol:
            break
    return z, f, iters


def _certify(p, witness, q, method, starts, iterations, seed):
    nrm = qnorm(witness, q)
    if nrm > 1.0 + 1e-12:
        witness = witness / nrm
    value = abs(evaluate_compensated(p, witness))
    return NormEstimate(value, float(q) if q != inf else inf, witness,
                        method, starts, iterations, seed)


def estimate_norm(p: SteinerPolynomial, q, starts: int = 64, max_iters: int = 2000,
                  tol: float = 1e-10, seed: int = 0) -> NormEstimate:
    """Best witness over ``starts`` runs of projected gradient ascent.

    For q = inf the ascent runs over phase vectors z_j = e^{i theta_j} (the
    maximum modulus principle puts the optimum on the torus); for finite q
    over the complex unit q-sphere (homogeneity puts it on the sphere).
    Start s uses the derived seed (seed, "start", s), so enlarging ``starts``
    keeps all earlier starts and the result is nondecreasing.  Non-finite
    intermediates discard the start with a warning.
    """
    _check_q(q)
    if starts < 1:
        raise DomainError(f"starts={starts} must be >= 1")
    n = p.n
    if p.num_terms == 0:
        witness = np.zeros(n, dtype=np.complex128)
        if q == inf:
            witness[:] = 1.0
        elif n:
            witness[0] = 1.0
        return _certify(p, witness, q, "trivial", starts, 0, seed)

    best_f, best_point, total_iters = -1.0, None, 0
    for s in range(starts):
        rng = rng_for(seed, "start", s)
        try:
            if q == inf:
                z0 = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n))
                z0 = _align_burnin(p, z0, q)
                theta, f, it = _phase_ascent(p, np.angle(z0), max_iters, tol)
                point = np.exp(1j * theta)
            else:
                z0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                if q > 1:
                    z0 = _align_burnin(p, z0 / qnorm(z0, q), q)
                point, f, it = _sphere_ascent(p, z0, q, max_iters, tol)
        except FloatingPointError as exc:
            logger.warning("estimate_norm: start %d discarded (%s)", s, exc)
            continue
        total_iters += it
        if f > best_f:
            best_f, best_point = f, point
    if best_point is None:
        raise ConvergenceError(f"all {starts} ascent starts produced non-finite values")
    return _certify(p, best_point, q, "multistart_ascent", starts, total_iters, seed)


def recertify(p: SteinerPolynomial, est: NormEstimate, rel: float = 1e-10) -> bool:
    """Independent check of both NormEstimate invariants."""
    if qnorm(est.witness, est.q) > 1.0 + 1e-12:
        return False
    value = abs(evaluate_compensated(p, est.witness))
    return abs(value - est.value) <= rel * max(1.0, abs(est.value))


# ---------------------------------------------------------------------------
# Brute-force oracle (tests only)
# ---------------------------------------------------------------------------

def _decode_phases(ranks, resolution, dim):
    digits = np.empty((ranks.size, dim), dtype=np.int64)
    r = ranks.copy()
    for j in range(dim):
        digits[:, j] = r % resolution
        r //= resolution
    return digits * (2.0 * np.pi / resolution)


def _local_phase_refine(p, theta, spacing):
    """Shrinking local grid around the best phase vector (first phase pinned)."""
    dim = theta.size - 1
    offsets = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    grids = np.meshgrid(*([offsets] * dim), indexing="ij")
    stencil = np.stack([g.ravel() for g in grids], axis=1)  # (5^dim, dim)
    center_row = int(np.argmax(np.all(stencil == 0.0, axis=1)))
    delta = spacing
    best = abs(evaluate_many(p, np.exp(1j * theta)[None, :])[0])
    for _ in range(80):
        cand = np.zeros((stencil.shape[0], theta.size))
        cand[:, 1:] = theta[1:] + delta * stencil
        vals = np.abs(evaluate_many(p, np.exp(1j * cand)))
        j = int(np.argmax(vals))
        improved = vals[j] > best
        if improved:
            best = float(vals[j])
            theta = cand[j]
        if not improved or j == center_row:
            delta *= 0.35
        if delta < 1e-10:
            break
    return theta, best


def _sample_sphere(rng, count, n, q):
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    norms = np.abs(z)
    if q == 1:
        scale = norms.sum(axis=1)
    else:
        scale = (norms ** q).sum(axis=1) ** (1.0 / q)
    return z / scale[:, None]


def _local_sphere_refine(p, z, q, rng):
    best = abs(evaluate_many(p, z[None, :])[0])
    radius = 0.25
    for _ in range(800):
        pert = rng.standard_normal((256, z.size)) + 1j * rng.standard_normal((256, z.size))
        cand = z[None, :] + radius * pert
        if q == 1:
            scale = np.abs(cand).sum(axis=1)
        else:
            scale = (np.abs(cand) ** q).sum(axis=1) ** (1.0 / q)
        cand = cand / scale[:, None]
        vals = np.abs(evaluate_many(p, cand))
        j = int(np.argmax(vals))
        if vals[j] > best:
            best = float(vals[j])
            z = cand[j]
        else:
            radius *= 0.96
        if radius < 1e-8:
            break
    return z, best


def brute_force_norm(p: SteinerPolynomial, q, resolution: int) -> NormEstimate:
    """Independent search oracle for tiny dimension.

    q = inf: exhaustive phase grid (the first phase is pinned to 0, which is
    lossless for homogeneous polynomials) followed by a shrinking local grid
    refinement.  Finite q: at least 10^6 random points on the q-sphere plus a
    shrinking random local search.  Deterministic; intended for tests, so the
    dimension is capped.
    """
    _check_q(q)
    if p.n > ORACLE_MAX_N:
        raise DomainError(f"oracle supports n <= {ORACLE_MAX_N}, got n={p.n}")
    if resolution < ORACLE_MIN_RESOLUTION:
        raise DomainError(f"resolution {resolution} < {ORACLE_MIN_RESOLUTION}")
    n = p.n
    if p.num_terms == 0:
        return estimate_norm(p, q, starts=1, seed=0)

    if q == inf:
        dim = n - 1
        total = resolution ** dim
        best_val, best_theta = -1.0, np.zeros(n)
        chunk = 1 << 15
        for lo in range(0, total, chunk):
            ranks = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
            thetas = np.zeros((ranks.size, n))
            thetas[:, 1:] = _decode_phases(ranks, resolution, dim)
            vals = np.abs(evaluate_many(p, np.exp(1j * thetas)))
            j = int(np.argmax(vals))
            if vals[j] > best_val:
                best_val, best_theta = float(vals[j]), thetas[j]
        theta, _ = _local_phase_refine(p, best_theta, 2.0 * np.pi / resolution)
        witness = np.exp(1j * theta)
        est = _certify(p, witness, q, "grid_oracle", total, 0, 0)
        return est

    rng = rng_for(0, "oracle", n, p.k, int(resolution))
    best_val, best_z = -1.0, None
    chunk = 1 << 14
    remaining = ORACLE_SAMPLES
    while remaining > 0:
        batch = _sample_sphere(rng, min(chunk, remaining), n, q)
        vals = np.abs(evaluate_many(p, batch))
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best_z = float(vals[j]), batch[j]
        remaining -= batch.shape[0]
    z, _ = _local_sphere_refine(p, best_z, q, rng)
    return _certify(p, z, q, "grid_oracle", ORACLE_SAMPLES, 0, 0)


# ---------------------------------------------------------------------------
# Analytic formulas
# ---------------------------------------------------------------------------

def ksz_polydisk_bound(n: int, k: int, m: int, absolute_constant: float = 8.0) -> float:
    """Probabilistic polydisk bound D * sqrt(n * ln(k) * m) for m-term random
    unimodular polynomials; D defaults to the ceiling 8."""
    if n < 2 or k < 2:
        raise DomainError(f"need n, k >= 2, got n={n}, k={k}")
    if m < 0:
        raise DomainError(f"term count m={m} must be >= 0")
    return absolute_constant * math.sqrt(n * log(k) * m)


def polarization_constant(k: int, q) -> float:
    """Factor relating a polynomial's sup-norm to its symmetric multilinear form.

    Equal to 1 at q=2, k^{k/2} (k+1)^{(k+1)/2} / (2^k k!) at q=inf, and the
    generic k^k / k! otherwise.
    """
    if k < 2:
        raise DomainError(f"degree k={k} must be >= 2")
    _check_q(q)
    if q == 2:
        return 1.0
    if q == inf:
        return k ** (k / 2.0) * (k + 1) ** ((k + 1) / 2.0) / (2.0 ** k * factorial(k))
    return float(k ** k) / factorial(k)


def analytic_bounds(k: int, q, n: int, K: float = 1.0, M: float = 2.0,
                    absolute_constant: float = 8.0) -> BoundSet:
    """All analytic reference bounds for degree-k Steiner unimodular
    polynomials in n variables at exponent q.

    qnorm_upper interpolates between the l_2 bound M k K ln^{3/2} n and the
    polydisk bound, using the tight coefficient (M k K)^{2/q} * (D lam_inf
    sqrt(ln k)/sqrt(k!))^{(q-2)/q} for q >= 2, so at q = 2 it reduces exactly
    to ell2_upper.  For 1 <= q < 2 it interpolates between the l_1 and l_2
    bounds.  l1_upper = 1/k! is reported separately as the sharper q = 1
    ceiling.  All logs are natural.
    """
    _check_q(q)
    if k < 2 or n < 2:
        raise DomainError(f"need k >= 2 and n >= 2, got k={k}, n={n}")
    if K <= 0 or M <= 1:
        raise DomainError(f"need K > 0 and M > 1, got K={K}, M={M}")
    D = absolute_constant
    fact = factorial(k)
    lam_inf = polarization_constant(k, inf)
    ell2_upper = M * k * K * log(n) ** 1.5
    l1_upper = 1.0 / fact
    polydisk_coeff = D * lam_inf * math.sqrt(log(k)) / math.sqrt(fact)
    if q == inf:
        qnorm_upper = polydisk_coeff * n ** (k / 2.0)
    elif q >= 2:
        qnorm_upper = ((M * k * K) ** (2.0 / q)
                       * polydisk_coeff ** ((q - 2.0) / q)
                       * log(n) ** (3.0 / q)
                       * n ** ((k / 2.0) * (q - 2.0) / q))
    else:
        qnorm_upper = ((k ** k / fact ** 2) ** ((2.0 - q) / q)
                       * (M * k * K * log(n) ** 1.5) ** ((2.0 * q - 2.0) / q))
    ksz_infty = absolute_constant * math.sqrt(log(k) * comb(n, k - 1) * n / k)
    return BoundSet(ksz_infty, qnorm_upper, l1_upper, ell2_upper,
                    polarization_constant(k, q))
