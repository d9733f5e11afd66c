"""Monte Carlo fractional moments of Green functions and the explicit bounds.

The centerpiece is E|G(z; x, y)|^s over the disorder, estimated trial by
trial with per-trial random streams, and compared against the explicit 1-D
decay constants, the gap-construction bounds, the finite-volume screening
sum, and the non-local a-priori bound from the exponential-weight transform.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .green import annulus
from .model import (
    BoxGeometry,
    DisorderDensity,
    ModelConfig,
    SingleSitePotential,
    Site,
    _as_site,
    adjacency_matrix,
    explicit_geometry,
    exterior_boundary,
    l1_norm,
    lambda_plus,
    site_sub,
)
from .rng import trial_stream

__all__ = [
    "MomentEstimate",
    "OneDConstants",
    "GapConstants",
    "DecayFit",
    "DisorderSampler",
    "estimate_moment",
    "one_d_constants",
    "gap_constants",
    "decay_profile",
    "finite_volume_sum",
    "nonlocal_apriori_bound",
    "w_xy",
    "polynomial_root_criterion",
    "apriori_moment_trend",
    "run_trials",
]


# ---------------------------------------------------------------------------
# trial harness


def run_trials(fn, trials: int, threads: int = 1) -> np.ndarray:
    """Evaluate fn(trial_index) for each trial, collected in index order.

    Each trial derives its own random stream from (seed, index), so the
    result array is bitwise identical no matter how many workers run.
    """
    out = np.empty(trials)
    if threads <= 1:
        for t in range(trials):
            out[t] = fn(t)
        return out
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for t, val in zip(range(trials), pool.map(fn, range(trials))):
            out[t] = val
    return out


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    stderr: float
    trials: int
    exponent: float
    x: Site
    y: Site
    z: complex

    def upper(self, k: float = 3.0) -> float:
        return self.mean + k * self.stderr


class DisorderSampler:
    """Precomputed assembly data: per trial only the diagonal changes.

    The hopping part of H is fixed by the geometry; the random diagonal is
    U @ omega with U[i, j] = u(x_i - k_j) over the influencing sites k_j.
    """

    def __init__(self, model: ModelConfig, geometry: BoxGeometry):
        self.model = model
        self.geometry = geometry
        self.coupling_sites = tuple(sorted(lambda_plus(geometry, model.potential)))
        self.hopping = -adjacency_matrix(geometry)
        n, m = len(geometry), len(self.coupling_sites)
        U = np.zeros((n, m))
        for j, k in enumerate(self.coupling_sites):
            for i, x in enumerate(geometry.sites):
                U[i, j] = model.potential.value(site_sub(x, k))
        self.U = U

    def omega(self, seed: int, trial: int) -> np.ndarray:
        rng = trial_stream(seed, trial)
        return np.asarray(self.model.density.sample(rng, size=len(self.coupling_sites)))

    def hamiltonian(self, omega_vec: np.ndarray) -> np.ndarray:
        H = self.hopping.copy()
        np.fill_diagonal(H, self.model.coupling * (self.U @ omega_vec))
        return H

    def green_column(self, omega_vec: np.ndarray, z: complex, x) -> np.ndarray:
        """Column G(z; ., x) via one linear solve, with one retried perturbation.

        A singular solve is retried once with the imaginary part of z nudged;
        a second failure aborts the trial loudly rather than dropping it.
        """
        H = self.hamiltonian(omega_vec)
        n = H.shape[0]
        rhs = np.zeros(n, dtype=complex)
        rhs[self.geometry.index_of(x)] = 1.0
        M = H - z * np.eye(n, dtype=complex)
        try:
            return np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            z_retry = complex(z.real, z.imag + math.copysign(1e-10 * (1 + abs(z)), z.imag or 1.0))
            M = H - z_retry * np.eye(n, dtype=complex)
            return np.linalg.solve(M, rhs)


def estimate_moment(model: ModelConfig, geometry: BoxGeometry, z: complex, s_exp: float,
                    x, y, trials: int, seed: int, threads: int = 1) -> MomentEstimate:
    """Unbiased MC mean of |G(z; x, y)|^s over i.i.d. disorder."""
    if complex(z).imag == 0:
        raise ValueError("z must have nonzero imaginary part for the disorder average")
    if not 0.0 < s_exp < 1.0:
        raise ValueError("fractional exponent must lie in (0, 1)")
    x, y = _as_site(x), _as_site(y)
    if x not in geometry or y not in geometry:
        raise ValueError("x and y must lie in the geometry")
    sampler = DisorderSampler(model, geometry)
    iy = geometry.index_of(y)

    def one(trial: int) -> float:
        col = sampler.green_column(sampler.omega(seed, trial), z, x)
        return abs(col[iy]) ** s_exp

    vals = run_trials(one, trials, threads)
    mean = float(np.mean(vals))
    if trials > 1 and np.ptp(vals) > 0.0:
        stderr = float(np.std(vals, ddof=1) / math.sqrt(trials))
    else:
        stderr = 0.0  # degenerate distribution (e.g. no disorder)
    return MomentEstimate(mean, stderr, trials, s_exp, x, y, complex(z))


# ---------------------------------------------------------------------------
# explicit one-dimensional constants


def _fractional_prefactor(s: float) -> float:
    return 2.0 ** s * s ** (-s) / (1.0 - s)


@dataclass(frozen=True)
class OneDConstants:
    n: int
    s: float
    coupling: float
    C_u: float
    C_rho: float
    C: float            # C_u C_rho / lambda^s, the per-step contraction
    C_u_plus: float
    C_rho_plus: float
    C_plus: float       # prefactor of the decay bound
    mu: float           # -ln C, positive above the disorder threshold
    disorder_threshold: float

    def bound(self, dist: int) -> float:
        """C_plus * exp(-mu * floor(dist / n)), the decay bound at a separation."""
        return self.C_plus * math.exp(-self.mu * (dist // self.n))


def one_d_constants(u: SingleSitePotential, density: DisorderDensity,
                    coupling: float, s: float) -> OneDConstants:
    """Explicit decay constants for connected supp u = {0..n-1} in d = 1."""
    if u.dimension != 1:
        raise ValueError("one-dimensional potentials only")
    if not 0.0 < s < 1.0:
        raise ValueError("exponent s must lie in (0, 1)")
    if coupling <= 0.0:
        raise ValueError("the decay constants need a positive coupling")
    supp = [k[0] for k in u.support()]
    n = max(supp) + 1
    if supp != list(range(n)):
        raise ValueError("supp u must be connected {0..n-1}; use gap_constants otherwise")
    vals = [u.value((k,)) for k in range(n)]
    prod_all = abs(math.prod(vals))
    C_u = prod_all ** (-s / n)
    C_rho = density.linf ** s * _fractional_prefactor(s)
    C = C_u * C_rho / coupling ** s
    prefix_products = [abs(math.prod(vals[: i + 1])) for i in range(n)]
    C_u_plus = max(p ** (-s / n) for p in prefix_products)
    C_rho_plus = max(density.linf ** s, density.linf ** (s / n)) * _fractional_prefactor(s)
    C_plus = C_u_plus * C_rho_plus * max(coupling ** (-s), coupling ** (-s / n))
    mu = -math.log(C)
    threshold = (C_u * C_rho) ** (1.0 / s)  # lambda above this gives C < 1
    return OneDConstants(n, s, coupling, C_u, C_rho, C, C_u_plus, C_rho_plus, C_plus, mu, threshold)


# ---------------------------------------------------------------------------
# gap construction for non-connected supports


@dataclass(frozen=True)
class GapConstants:
    n: int
    r: int
    s: float
    coupling: float
    alpha: tuple[float, ...]     # the searched direction in [0,1]^{r+1}
    min_distance: float          # achieved min distance to the u-hyperplanes
    d0: float                    # volume-argument radius 1/((n+r)(r+1)^{r/2})
    D: float                     # direct bound evaluated at alpha
    D_volume: float              # alpha-free closed-form bound
    D_plus: float                # direct short-segment bound at alpha
    D_plus_volume: float         # alpha-free closed-form short-segment bound
    mu: float                    # -ln D when D < 1, else <= 0

    def bound(self, dist: int) -> float:
        return self.D_plus * math.exp(-self.mu * (dist // (self.n + self.r)))


def largest_gap(u: SingleSitePotential) -> int:
    """Number of sites in the largest run missing from supp u (0 if connected)."""
    supp = sorted(k[0] for k in u.support())
    if supp[0] != 0:
        raise ValueError("normalize supp u so that min supp = 0")
    best = 0
    for a, b in zip(supp, supp[1:]):
        best = max(best, b - a - 1)
    return best


def gap_constants(u: SingleSitePotential, density: DisorderDensity, coupling: float,
                  s: float, search_samples: int = 10000, seed: int = 1) -> GapConstants:
    """Bound constants for finite supp u with gaps, via the hyperplane search.

    A direction alpha in [0,1]^{r+1} is drawn uniformly and kept when its
    Euclidean distance to every hyperplane sum_k alpha_k u(i-k) = 0 is at
    least half the volume-argument radius d0; existence is guaranteed because
    those neighborhoods cover at most half the cube.
    """
    if u.dimension != 1:
        raise ValueError("one-dimensional potentials only")
    if not 0.0 < s < 1.0:
        raise ValueError("exponent s must lie in (0, 1)")
    supp = sorted(k[0] for k in u.support())
    if supp[0] != 0:
        raise ValueError("normalize supp u so that min supp = 0")
    n = supp[-1] + 1
    r = largest_gap(u)
    R = density.support_radius
    rows = []
    for i in range(n + r):
        rows.append(np.array([u.value((i - k,)) for k in range(r + 1)]))
    norms = np.array([np.linalg.norm(row) for row in rows])
    if np.any(norms == 0):
        raise ValueError("every length-(r+1) window must meet supp u; r is inconsistent")
    d0 = 1.0 / ((n + r) * (r + 1) ** (r / 2.0))

    rng = trial_stream(seed, 0)
    best_alpha, best_dist = None, -1.0
    for _ in range(search_samples):
        cand = rng.random(r + 1)
        dist = min(abs(float(row @ cand)) / nv for row, nv in zip(rows, norms))
        if dist > best_dist:
            best_dist, best_alpha = dist, cand
    if best_alpha is None or best_dist < d0 / 2.0:
        raise RuntimeError("hyperplane search failed to reach the guaranteed distance; "
                           f"best {best_dist:.3g} < d0/2 = {d0 / 2.0:.3g}")
    alpha = best_alpha
    pref = _fractional_prefactor(s)

    ratio = 0.0 if r == 0 else max(abs(alpha[i]) / abs(alpha[0]) for i in range(1, r + 1))
    prod_alpha = math.prod(abs(float(row @ alpha)) * coupling for row in rows)
    D_direct = (density.linf ** ((r + 1) * s) * (2 * R) ** (r * s) * pref * abs(alpha[0]) ** s
                * (1.0 + ratio) ** (r * s) * prod_alpha ** (-s / (n + r)))

    vol_factor = 2.0 * (n + r) * (r + 1) ** (r / 2.0)
    prod_sq = math.prod(float(row @ row) for row in rows)
    D_volume = (density.linf ** ((r + 1) * s) * (2 * R) ** (r * s) * pref
                * (1.0 + vol_factor) ** (r * s) * vol_factor ** s
                / (prod_sq ** (s / (2 * (n + r))) * coupling ** s))

    def d_plus_direct(l: int) -> float:
        t = s * (l + 1) / (n + r)
        prod_l = math.prod(abs(float(rows[i] @ alpha)) * coupling for i in range(l + 1))
        return (density.linf ** ((r + 1) * t) * (2 * R) ** (r * t) * pref
                * abs(alpha[0]) ** t * (1.0 + ratio) ** (r * s) * prod_l ** (-s / (n + r)))

    def d_plus_volume(l: int) -> float:
        t = s * (l + 1) / (n + r)
        vol_l = 2.0 * (l + 1) * (r + 1) ** (r / 2.0)
        prod_sq_l = math.prod(float(rows[i] @ rows[i]) * coupling ** 2 for i in range(l + 1))
        return (density.linf ** ((r + 1) * t) * (2 * R) ** (r * t) * pref
                * (1.0 + vol_l) ** (r * s) * vol_l ** s / prod_sq_l ** (s / (2 * (n + r))))

    D_plus = max(d_plus_direct(l) for l in range(n + r))
    D_plus_vol = max(d_plus_volume(l) for l in range(n + r))
    mu = -math.log(D_direct) if D_direct < 1 else 0.0
    return GapConstants(n, r, s, coupling, tuple(float(a) for a in alpha), best_dist, d0,
                        D_direct, D_volume, D_plus, D_plus_vol, mu)


# ---------------------------------------------------------------------------
# decay profiles


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    residual: float
    distances: tuple[int, ...]


def decay_profile(model: ModelConfig, box_sites: int, z: complex, s: float,
                  trials: int, seed: int, threads: int = 1) -> dict:
    """Moment sweep E|G(z; x, y)|^{s/n} along a 1-D box, with the decay bound.

    x is the left end of the box, y sweeps; for connected supp u the exponent
    is s/n and the bound uses the explicit contraction constants, otherwise
    s/(n+r) with the gap constants.  Also fits a decay rate to log(mean).
    """
    if model.dimension != 1:
        raise ValueError("decay profiles are one-dimensional")
    geometry = explicit_geometry([(k,) for k in range(box_sites)])
    supp = sorted(k[0] for k in model.potential.support())
    n = supp[-1] + 1
    r = largest_gap(model.potential)
    if model.coupling == 0.0:
        # flat diagnostic profile; no decay bound applies without disorder
        consts = None
        exponent = s / (n + r)
        step = n + r
        bound_fn = lambda dist: math.inf
        min_dist = len(geometry) + 1
    elif r == 0:
        consts = one_d_constants(model.potential, model.density, model.coupling, s)
        exponent = s / n
        step = n
        bound_fn = consts.bound
        min_dist = 2 * n
    else:
        consts = gap_constants(model.potential, model.density, model.coupling, s)
        exponent = s / (n + r)
        step = n + r
        bound_fn = consts.bound
        min_dist = 2 * (n + r)

    sampler = DisorderSampler(model, geometry)
    x = (0,)
    ix = 0

    cols = np.empty((trials, len(geometry)))

    def one(trial: int) -> float:
        col = sampler.green_column(sampler.omega(seed, trial), z, x)
        cols[trial] = np.abs(col) ** exponent
        return 0.0

    run_trials(one, trials, threads)
    estimates = []
    for iy in range(1, len(geometry)):
        vals = cols[:, iy]
        mean = float(np.mean(vals))
        if trials > 1 and np.ptp(vals) > 0.0:
            stderr = float(np.std(vals, ddof=1) / math.sqrt(trials))
        else:
            stderr = 0.0
        estimates.append(MomentEstimate(mean, stderr, trials, exponent, x, (iy,), complex(z)))

    dists, logs, weights = [], [], []
    for est in estimates:
        dist = est.y[0]
        if est.mean > 0 and est.stderr < est.mean:
            dists.append(dist)
            logs.append(math.log(est.mean))
            rel = est.stderr / est.mean if est.stderr > 0 else 1e-6
            weights.append(1.0 / rel ** 2)
    if len(dists) >= 2:
        coef, res = np.polyfit(dists, logs, 1, w=np.sqrt(weights)), 0.0
        pred = np.polyval(coef, dists)
        res = float(np.sqrt(np.mean((np.array(logs) - pred) ** 2)))
        fit = DecayFit(float(coef[0]), float(coef[1]), res, tuple(dists))
    else:
        fit = DecayFit(0.0, 0.0, math.inf, tuple(dists))

    rows = []
    for est in estimates:
        dist = est.y[0]
        bound = bound_fn(dist) if dist >= min_dist else math.inf
        rows.append({
            "distance": dist,
            "mean": est.mean,
            "stderr": est.stderr,
            "bound": bound,
            "pass": bool(est.upper() <= bound),
        })
    return {
        "estimates": estimates,
        "rows": rows,
        "fit": fit,
        "constants": consts,
        "exponent": exponent,
        "step": step,
        "min_dist": min_dist,
    }


# ---------------------------------------------------------------------------
# finite-volume screening sum


def finite_volume_sum(model: ModelConfig, region: BoxGeometry, x, z: complex, s: float,
                      L: int, trials: int, seed: int, threads: int = 1) -> dict:
    """Screened moment sum across the annulus around x, and its scaled form.

    raw = sum over w in the exterior boundary of W_x (within the region,
    zero-convention for the rest) of the MC mean of
    |G_{region minus W_x}(z; x, w)|^{s/(2|Theta|)}; the scaled value
    multiplies by L^{3(d-1)} Xi_s(lambda) / lambda^{2s/(2|Theta|)}, leaving
    out only the non-explicit prefactor of the criterion.
    """
    x = _as_site(x)
    ann = annulus(region, x, L, model.potential)
    depleted_sites = region.site_set() - ann.W_x
    if x not in depleted_sites:
        raise ValueError("x fell into the annulus; enlarge the region or L")
    sub = region.subset(depleted_sites)
    boundary = sorted(exterior_boundary(ann.W_x) & depleted_sites)
    theta_count = len(model.potential.support())
    exponent = s / (2 * theta_count)

    sampler = DisorderSampler(model, sub)
    idx = [sub.index_of(w) for w in boundary]
    acc = np.empty((trials, len(boundary)))

    def one(trial: int) -> float:
        col = sampler.green_column(sampler.omega(seed, trial), z, x)
        acc[trial] = np.abs(col[idx]) ** exponent
        return 0.0

    run_trials(one, trials, threads)
    means = acc.mean(axis=0)
    stderrs = acc.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros(len(boundary))
    raw = float(means.sum())
    lam = model.coupling
    xi = max(lam ** (-exponent), lam ** (-2 * s))
    d = model.dimension
    scaled = raw * L ** (3 * (d - 1)) * xi / lam ** (2 * s / (2 * theta_count))
    return {
        "boundary_sites": boundary,
        "means": means,
        "stderrs": stderrs,
        "raw_sum": raw,
        "scaled": scaled,
        "xi": xi,
        "exponent": exponent,
        "annulus": ann,
        "note": "non-explicit criterion prefactor omitted",
    }


# ---------------------------------------------------------------------------
# non-local a-priori bound


def exponential_weights(u: SingleSitePotential) -> dict:
    """Rate and l1 mass of the exponential coefficient family for u.

    c = ln(1 + ubar / (2 ||u||_1)) / diam and C = ((e^c + 1)/(e^c - 1))^d;
    when sum u < 0 the sign of u is flipped first (the couplings absorb it).
    """
    ubar = u.total()
    if ubar == 0:
        raise ValueError("sum of u vanishes; the transform degenerates")
    flipped = ubar < 0
    ubar = abs(ubar)
    n = u.diameter_l1()
    if n < 1:
        raise ValueError("single-site support must have diameter >= 1; "
                         "rank-one potentials take the scalar pole route instead")
    d = u.dimension
    c = math.log(1.0 + ubar / (2.0 * u.l1())) / n
    C = ((math.exp(c) + 1.0) / (math.exp(c) - 1.0)) ** d
    return {"c": c, "C": C, "ubar": ubar, "n": n, "sign_flipped": flipped, "dimension": d}


def nonlocal_apriori_bound(u: SingleSitePotential, density: DisorderDensity,
                           coupling: float, s: float) -> dict:
    """Closed-form bound on E|G(z;x,y)|^s from the exponential-weight transform.

    Needs ubar = sum u != 0 (the sign is flipped when negative), a density
    with integrable derivative, and diameter n >= 1.  The bound is
    8 ubar^{-s} s^{-s}/(1-s) ||rho'||^s C^s lambda^{-s}.
    """
    if not 0.0 < s < 1.0:
        raise ValueError("exponent s must lie in (0, 1)")
    if density.deriv_l1 is None:
        raise ValueError("density must have an integrable derivative")
    info = exponential_weights(u)
    bound = (8.0 / info["ubar"] ** s * s ** (-s) / (1.0 - s)
             * density.deriv_l1 ** s * info["C"] ** s / coupling ** s)
    return {"bound": bound, **info}


def w_xy(u: SingleSitePotential, x, y, window) -> dict:
    """Exponential-coefficient combination W(k) = sum_j alpha(j) u(k - j).

    alpha(j) = (e^{-c|j-x|_1} + e^{-c|j-y|_1}) / 2 with the rate c of the
    exponential weights; reports the margins W(k) - alpha(k) ubar / 2 over
    the window (all should be >= 0) and W at x, y against ubar / 4.
    """
    info = exponential_weights(u)
    sign = -1.0 if info["sign_flipped"] else 1.0
    c = info["c"]
    x, y = _as_site(x), _as_site(y)

    def alpha(k: Site) -> float:
        return 0.5 * (math.exp(-c * l1_norm(site_sub(k, x)))
                      + math.exp(-c * l1_norm(site_sub(k, y))))

    supp = u.support()
    values: dict[Site, float] = {}
    margins: dict[Site, float] = {}
    window_sites = [_as_site(k) for k in (window.sites if isinstance(window, BoxGeometry) else window)]
    for k in window_sites:
        w = sum(alpha(site_sub(k, t)) * sign * u.value(t) for t in supp)
        values[k] = w
        margins[k] = w - alpha(k) * info["ubar"] / 2.0
    report = {
        "values": values,
        "margins": margins,
        "min_margin": min(margins.values()),
        "at_x": values.get(x),
        "at_y": values.get(y),
        "quarter_ubar": info["ubar"] / 4.0,
        **info,
    }
    return report


# ---------------------------------------------------------------------------
# polynomial-root criterion for extracting a nonnegative combination


def polynomial_root_criterion(u: SingleSitePotential, max_multiplier_degree: int = 200) -> dict:
    """Decide whether p(x) = sum_k u(k) x^k has no roots on [0, infinity).

    When it has none, a nonnegative combination w = sum_j alpha_j u(. - j)
    with positive endpoints is extracted by multiplying p with (1 + x)^M for
    the smallest workable M (coefficients of products of polynomials are
    convolutions of translate coefficients).  A root within 1e-9 of the
    nonnegative axis makes the verdict ambiguous.
    """
    if u.dimension != 1:
        raise ValueError("one-dimensional potentials only")
    supp = sorted(k[0] for k in u.support())
    if supp[0] != 0:
        raise ValueError("normalize supp u so that min supp = 0")
    n = supp[-1] + 1
    coeffs = np.array([u.value((k,)) for k in range(n)])
    # np.roots wants highest degree first
    roots = np.roots(coeffs[::-1]) if n > 1 else np.array([])
    scale = max(1.0, float(np.max(np.abs(roots))) if len(roots) else 1.0)
    tol = 1e-9 * scale
    # distance from a root to the closed nonnegative real axis
    dists = np.array([abs(r.imag) if r.real >= 0 else abs(r) for r in roots]) if len(roots) else np.array([])
    passes = bool(np.all(dists > tol)) if len(dists) else True
    ambiguous = bool(np.any((dists > 0.1 * tol) & (dists <= 10 * tol))) if len(dists) else False
    out = {"passes": passes, "roots": roots, "ambiguous": ambiguous}
    if not passes:
        return out
    sgn = 1.0 if coeffs[0] > 0 else -1.0
    p = sgn * coeffs
    # bounded search over (1+x)^M multipliers; positivity is reached for some
    # finite M whenever p > 0 on the nonnegative axis, and the convolution of
    # translate coefficients with u is exactly the product polynomial
    conv = p.copy()
    for M in range(max_multiplier_degree + 1):
        if conv[0] > 0 and conv[-1] > 0 and np.all(conv >= -1e-12 * np.max(np.abs(conv))):
            alpha = sgn * np.array([math.comb(M, j) for j in range(M + 1)], dtype=float)
            out.update({"multiplier_degree": M, "alpha": alpha, "w": conv})
            return out
        conv = np.convolve(conv, [1.0, 1.0])
    raise RuntimeError(f"no positivizing multiplier up to degree {max_multiplier_degree}")


# ---------------------------------------------------------------------------
# empirical boundedness trend (the a-priori constants are not explicit)


def apriori_moment_trend(model_factory, couplings, geometry: BoxGeometry, s: float,
                         z_values, x, y, trials: int, seed: int, threads: int = 1) -> dict:
    """Moment table over an energy grid and a coupling ladder.

    The a-priori bound's constants are not explicit, so this reports the
    moments E|G(z;x,y)|^{s/(2|Theta|)} for each z and coupling, for trend
    checks (bounded over z, non-increasing in the coupling within MC error).
    """
    table = {}
    for lam in couplings:
        model = model_factory(lam)
        theta_count = len(model.potential.support())
        exponent = s / (2 * theta_count)
        row = []
        for z in z_values:
            est = estimate_moment(model, geometry, z, exponent, x, y, trials, seed, threads)
            row.append(est)
        table[lam] = row
    return {"table": table, "z_values": list(z_values)}
