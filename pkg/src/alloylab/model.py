"""Lattice geometry, single-site potentials, disorder densities and Hamiltonians.

The operator under study is H = -Delta + lambda * V on a finite subset of Z^d,
where Delta is the discrete hopping Laplacian without its diagonal part and
V(x) = sum_k omega_k u(x - k) couples i.i.d. random variables omega_k through
a fixed profile u.  Everything here is dense: boxes stay at desk scale
(a few thousand sites), where dense LU and eigensolves are simpler and
exactly reproducible.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .rng import site_stream

__all__ = [
    "Site",
    "BoxGeometry",
    "SingleSitePotential",
    "DisorderDensity",
    "Configuration",
    "ModelConfig",
    "HamiltonianMatrix",
    "build_box",
    "explicit_geometry",
    "interior_boundary",
    "exterior_boundary",
    "lambda_plus",
    "potential_value",
    "assemble_hamiltonian",
    "sample_configuration",
    "connected_components",
    "load_model_config",
]

Site = tuple[int, ...]


def _as_site(x) -> Site:
    if isinstance(x, int):
        return (x,)
    return tuple(int(c) for c in x)


def l1_norm(x: Site) -> int:
    return sum(abs(c) for c in x)


def linf_norm(x: Site) -> int:
    return max(abs(c) for c in x)


def site_add(a: Site, b: Site) -> Site:
    return tuple(x + y for x, y in zip(a, b))


def site_sub(a: Site, b: Site) -> Site:
    return tuple(x - y for x, y in zip(a, b))


def neighbors(x: Site) -> list[Site]:
    """The 2d sites at l1-distance one."""
    out = []
    for i in range(len(x)):
        for step in (-1, 1):
            y = list(x)
            y[i] += step
            out.append(tuple(y))
    return out


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class BoxGeometry:
    """An ordered finite subset of Z^d with site <-> index maps.

    Sites are kept in lexicographic order so that matrix layouts, random
    draws and CSV outputs are reproducible across runs.
    """

    sites: tuple[Site, ...]
    descriptor: str = "explicit"

    def __post_init__(self):
        if not self.sites:
            raise ValueError("geometry must contain at least one site")
        d = len(self.sites[0])
        if any(len(s) != d for s in self.sites):
            raise ValueError("all sites must share one dimension")
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("duplicate sites in geometry")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.sites)})

    @property
    def dimension(self) -> int:
        return len(self.sites[0])

    def __len__(self) -> int:
        return len(self.sites)

    def __contains__(self, site) -> bool:
        return _as_site(site) in self._index

    def index_of(self, site) -> int:
        return self._index[_as_site(site)]

    def site_set(self) -> frozenset[Site]:
        return frozenset(self.sites)

    def subset(self, sites) -> "BoxGeometry":
        """Sub-geometry on the given sites (kept in this geometry's order)."""
        keep = {_as_site(s) for s in sites}
        missing = keep - set(self.sites)
        if missing:
            raise ValueError(f"sites not in geometry: {sorted(missing)[:4]}")
        return BoxGeometry(tuple(s for s in self.sites if s in keep))


def build_box(L: int, center=0, d: int | None = None) -> BoxGeometry:
    """All sites with |k - center|_inf <= L, in lexicographic order."""
    if L < 0:
        raise ValueError("L must be >= 0")
    if d is None:
        center = _as_site(center)
        d = len(center)
    else:
        center = _as_site(center) if not isinstance(center, int) else (center,) * d
        if len(center) != d:
            raise ValueError("center/dimension mismatch")
    ranges = [range(c - L, c + L + 1) for c in center]
    sites = tuple(itertools.product(*ranges))
    return BoxGeometry(sites, descriptor=f"cube(L={L}, center={center})")


def explicit_geometry(sites) -> BoxGeometry:
    """Geometry on an explicit site set, sorted lexicographically."""
    return BoxGeometry(tuple(sorted({_as_site(s) for s in sites})))


def interior_boundary(sites) -> set[Site]:
    """Sites of the set with fewer than 2d neighbors inside the set."""
    pts = {_as_site(s) for s in (sites.sites if isinstance(sites, BoxGeometry) else sites)}
    if not pts:
        raise ValueError("empty site set")
    d = len(next(iter(pts)))
    return {x for x in pts if sum(1 for y in neighbors(x) if y in pts) < 2 * d}


def exterior_boundary(sites) -> set[Site]:
    """Sites outside the set that are l1-adjacent to it."""
    pts = {_as_site(s) for s in (sites.sites if isinstance(sites, BoxGeometry) else sites)}
    if not pts:
        raise ValueError("empty site set")
    out = set()
    for x in pts:
        for y in neighbors(x):
            if y not in pts:
                out.add(y)
    return out


def connected_components(sites) -> list[set[Site]]:
    """Connected components under l1-adjacency (flood fill)."""
    remaining = {_as_site(s) for s in (sites.sites if isinstance(sites, BoxGeometry) else sites)}
    comps = []
    while remaining:
        seed = next(iter(remaining))
        comp = {seed}
        frontier = [seed]
        remaining.discard(seed)
        while frontier:
            x = frontier.pop()
            for y in neighbors(x):
                if y in remaining:
                    remaining.discard(y)
                    comp.add(y)
                    frontier.append(y)
        comps.append(comp)
    return comps


# ---------------------------------------------------------------------------
# single-site potential


@dataclass(frozen=True)
class SingleSitePotential:
    """Profile u: Z^d -> R with finite support or a truncated exponential tail.

    ``support_values`` holds the explicitly stored core.  When ``tail`` is
    present, sites outside the core but within ``truncation_radius`` (l1)
    take the value sign * tail_amplitude * exp(-tail_rate * |k|_1); beyond
    the truncation radius u is treated as zero and ``tail_l1_error`` bounds
    the discarded l1 mass.
    """

    support_values: dict[Site, float]
    tail_amplitude: float | None = None
    tail_rate: float | None = None
    truncation_radius: int = 0
    tail_sign: int = 1

    def __post_init__(self):
        vals = {_as_site(k): float(v) for k, v in self.support_values.items() if v != 0.0}
        if self.tail_amplitude is None and not vals:
            raise ValueError("potential must not be identically zero")
        object.__setattr__(self, "support_values", vals)
        if self.tail_amplitude is not None:
            if self.tail_amplitude <= 0 or self.tail_rate is None or self.tail_rate <= 0:
                raise ValueError("tail requires amplitude > 0 and rate > 0")
            if self.truncation_radius < 1:
                raise ValueError("tail requires a truncation radius >= 1")
            for k, v in vals.items():
                if abs(v) > self.tail_amplitude * math.exp(-self.tail_rate * l1_norm(k)) + 1e-12:
                    raise ValueError(f"stored value at {k} exceeds the exponential envelope")
        if (0,) * self.dimension not in self._effective_support():
            raise ValueError("u must satisfy 0 in supp u (translate the profile)")

    @property
    def dimension(self) -> int:
        if self.support_values:
            return len(next(iter(self.support_values)))
        return 1

    def _effective_support(self) -> set[Site]:
        supp = set(self.support_values)
        if self.tail_amplitude is not None:
            d = self.dimension
            rad = self.truncation_radius
            for k in itertools.product(range(-rad, rad + 1), repeat=d):
                if l1_norm(k) <= rad:
                    supp.add(k)
        return supp

    def support(self) -> tuple[Site, ...]:
        """Effective support Theta (core plus truncated tail), sorted."""
        return tuple(sorted(self._effective_support()))

    def value(self, k) -> float:
        k = _as_site(k)
        if k in self.support_values:
            return self.support_values[k]
        if self.tail_amplitude is not None and l1_norm(k) <= self.truncation_radius:
            return self.tail_sign * self.tail_amplitude * math.exp(-self.tail_rate * l1_norm(k))
        return 0.0

    def tail_l1_error(self) -> float:
        """Upper bound on the l1 mass discarded by truncating the tail."""
        if self.tail_amplitude is None:
            return 0.0
        d = self.dimension
        a, rad = self.tail_rate, self.truncation_radius
        # number of sites with |k|_1 = m is bounded by 2^d * binom(m+d-1, d-1) <= (2m+1)^d / max(1,m)^(d-1)... use exact count
        total = 0.0
        m = rad + 1
        while True:
            count = _l1_sphere_count(d, m)
            term = count * self.tail_amplitude * math.exp(-a * m)
            total += term
            if term < 1e-300 or term < 1e-16 * total:
                break
            m += 1
        return total

    def diameter_linf(self) -> int:
        supp = self.support()
        return max(linf_norm(site_sub(a, b)) for a in supp for b in supp)

    def diameter_l1(self) -> int:
        supp = self.support()
        return max(l1_norm(site_sub(a, b)) for a in supp for b in supp)

    def total(self) -> float:
        """The sum of u over its effective support (symbolically: u-bar)."""
        return sum(self.value(k) for k in self.support())

    def l1(self) -> float:
        return sum(abs(self.value(k)) for k in self.support())

    @staticmethod
    def delta(d: int = 1, value: float = 1.0) -> "SingleSitePotential":
        return SingleSitePotential({(0,) * d: value})

    @staticmethod
    def from_values(values: dict, d: int | None = None) -> "SingleSitePotential":
        vals = {}
        for k, v in values.items():
            k = _as_site(k)
            if d is not None and len(k) != d:
                raise ValueError("site dimension mismatch")
            vals[k] = float(v)
        return SingleSitePotential(vals)

    @staticmethod
    def exponential(rate: float, truncation_radius: int, d: int = 1,
                    amplitude: float = 1.0, sign: int = 1) -> "SingleSitePotential":
        """u(k) = sign * amplitude * exp(-rate * |k|_1), truncated."""
        return SingleSitePotential({(0,) * d: sign * amplitude}, tail_amplitude=amplitude,
                                   tail_rate=rate, truncation_radius=truncation_radius,
                                   tail_sign=sign)


def _l1_sphere_count(d: int, m: int) -> int:
    """Number of sites in Z^d with |k|_1 = m."""
    if m == 0:
        return 1
    total = 0
    for j in range(1, min(d, m) + 1):  # j = number of nonzero coordinates
        total += math.comb(d, j) * (2 ** j) * math.comb(m - 1, j - 1)
    return total


# ---------------------------------------------------------------------------
# disorder density


class DisorderDensity:
    """Compactly supported probability density with norms and a sampler.

    Supported kinds: ``uniform(a, b)``, ``raised_cosine(a, b)`` and
    ``piecewise_linear(knots)``.  Atomic (discrete) disorder is rejected at
    construction; every bound evaluated by this package needs a density.
    """

    def __init__(self, kind: str, params):
        self.kind = kind
        if kind == "uniform":
            a, b = map(float, params)
            if not b > a:
                raise ValueError("uniform(a,b) needs b > a")
            self.a, self.b = a, b
            self.linf = 1.0 / (b - a)
            self.total_variation = 2.0 / (b - a)
            self.deriv_l1 = None  # not W^{1,1}
        elif kind == "raised_cosine":
            a, b = map(float, params)
            if not b > a:
                raise ValueError("raised_cosine(a,b) needs b > a")
            self.a, self.b = a, b
            self.linf = 2.0 / (b - a)
            self.deriv_l1 = 4.0 / (b - a)
            self.total_variation = self.deriv_l1
        elif kind == "piecewise_linear":
            knots = [(float(t), float(y)) for t, y in params]
            if len(knots) < 2:
                raise ValueError("piecewise_linear needs at least two knots")
            ts = [t for t, _ in knots]
            ys = [y for _, y in knots]
            if sorted(ts) != ts or len(set(ts)) != len(ts):
                raise ValueError("knot abscissae must be strictly increasing")
            if min(ys) < 0:
                raise ValueError("density values must be nonnegative")
            mass = sum((ys[i] + ys[i + 1]) / 2 * (ts[i + 1] - ts[i]) for i in range(len(ts) - 1))
            if mass <= 0:
                raise ValueError("density must have positive mass")
            ys = [y / mass for y in ys]
            self.knots_t = np.array(ts)
            self.knots_y = np.array(ys)
            self.a, self.b = ts[0], ts[-1]
            self.linf = max(ys)
            jumps = abs(ys[0]) + abs(ys[-1])  # jumps onto/off the support
            slopes_tv = sum(abs(ys[i + 1] - ys[i]) for i in range(len(ys) - 1))
            self.total_variation = slopes_tv + jumps
            self.deriv_l1 = slopes_tv if ys[0] == 0.0 and ys[-1] == 0.0 else None
        elif kind == "discrete":
            raise ValueError("atomic disorder measures are not supported; use a density")
        else:
            raise ValueError(f"unknown density kind {kind!r}")
        self.l1 = 1.0
        self.support_radius = max(abs(self.a), abs(self.b))
        self._cdf_cache = None

    # -- evaluation ---------------------------------------------------------

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "uniform":
            return np.where((t >= self.a) & (t <= self.b), 1.0 / (self.b - self.a), 0.0)
        if self.kind == "raised_cosine":
            x = (t - self.a) / (self.b - self.a)
            inside = (x >= 0) & (x <= 1)
            return np.where(inside, (1.0 - np.cos(2 * np.pi * np.clip(x, 0, 1))) / (self.b - self.a), 0.0)
        vals = np.interp(t, self.knots_t, self.knots_y, left=0.0, right=0.0)
        return np.where((t >= self.a) & (t <= self.b), vals, 0.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "uniform":
            return np.clip((t - self.a) / (self.b - self.a), 0.0, 1.0)
        if self.kind == "raised_cosine":
            x = np.clip((t - self.a) / (self.b - self.a), 0.0, 1.0)
            return x - np.sin(2 * np.pi * x) / (2 * np.pi)
        ts, ys = self.knots_t, self.knots_y
        if not hasattr(self, "_knot_mass"):
            seg = (ys[:-1] + ys[1:]) / 2 * np.diff(ts)
            self._knot_mass = np.concatenate([[0.0], np.cumsum(seg)])
        tc = np.clip(t, self.a, self.b)
        idx = np.clip(np.searchsorted(ts, tc, side="right") - 1, 0, len(ts) - 2)
        t0, t1 = ts[idx], ts[idx + 1]
        y0, y1 = ys[idx], ys[idx + 1]
        dt = tc - t0
        y_t = y0 + (y1 - y0) * dt / (t1 - t0)
        return np.clip(self._knot_mass[idx] + (y0 + y_t) / 2 * dt, 0.0, 1.0)

    def quantile(self, q):
        """Inverse CDF by vectorized bisection; deterministic to ~1e-14."""
        q = np.asarray(q, dtype=float)
        lo = np.full(q.shape, self.a)
        hi = np.full(q.shape, self.b)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    # -- sampling -----------------------------------------------------------

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        if self.kind == "uniform":
            return self.a + (self.b - self.a) * u
        out = self.quantile(u)
        return float(out) if size is None else out

    # -- checks -------------------------------------------------------------

    def mass_by_quadrature(self) -> float:
        val, _ = quad(lambda t: float(self.pdf(t)), self.a, self.b, limit=200)
        return val

    def __repr__(self):
        return f"DisorderDensity({self.kind}, [{self.a}, {self.b}])"


# ---------------------------------------------------------------------------
# configurations and Hamiltonians


@dataclass(frozen=True)
class Configuration:
    """Realized couplings omega_k on a finite set of sites."""

    values: dict[Site, float]
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", {_as_site(k): float(v) for k, v in self.values.items()})

    def __getitem__(self, site) -> float:
        return self.values[_as_site(site)]

    def __contains__(self, site) -> bool:
        return _as_site(site) in self.values


@dataclass(frozen=True)
class ModelConfig:
    dimension: int
    coupling: float
    potential: SingleSitePotential
    density: DisorderDensity

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.coupling < 0:
            raise ValueError("coupling lambda must be >= 0")
        if self.potential.dimension != self.dimension:
            raise ValueError("potential dimension does not match the model")


@dataclass(frozen=True)
class HamiltonianMatrix:
    geometry: BoxGeometry
    entries: np.ndarray

    def __post_init__(self):
        n = len(self.geometry)
        if self.entries.shape != (n, n):
            raise ValueError("matrix shape does not match geometry")


def adjacency_matrix(geometry: BoxGeometry) -> np.ndarray:
    """0/1 matrix of l1-adjacent in-set pairs (the hopping pattern)."""
    n = len(geometry)
    A = np.zeros((n, n))
    for i, x in enumerate(geometry.sites):
        for y in neighbors(x):
            j = geometry._index.get(y)
            if j is not None:
                A[i, j] = 1.0
    return A


def lambda_plus(geometry, u: SingleSitePotential) -> set[Site]:
    """Sites whose coupling influences the potential inside the geometry.

    omega_k enters V(x) exactly when u(x - k) != 0, so the influencing set
    is { x - t : x in the geometry, t in supp u }.
    """
    sites = geometry.sites if isinstance(geometry, BoxGeometry) else [_as_site(s) for s in geometry]
    supp = u.support()
    return {site_sub(x, t) for x in sites for t in supp}


def potential_value(u: SingleSitePotential, omega: Configuration, x) -> float:
    """V(x) = sum_k omega_k u(x - k), an exact finite sum over supp u."""
    x = _as_site(x)
    total = 0.0
    for t in u.support():
        k = site_sub(x, t)
        if k not in omega:
            raise KeyError(f"configuration missing omega at {k} (needed for V({x}))")
        total += omega[k] * u.value(t)
    return total


def assemble_hamiltonian(model: ModelConfig, omega: Configuration, geometry: BoxGeometry) -> HamiltonianMatrix:
    """H = -Delta_Gamma + lambda V_Gamma as a dense real symmetric matrix."""
    n = len(geometry)
    H = -adjacency_matrix(geometry)
    diag = np.array([potential_value(model.potential, omega, x) for x in geometry.sites])
    H[np.arange(n), np.arange(n)] = model.coupling * diag
    return HamiltonianMatrix(geometry, H)


def sample_configuration(model: ModelConfig, sites, seed: int) -> Configuration:
    """One i.i.d. draw per site; a pure function of (seed, site)."""
    values = {}
    for s in sorted({_as_site(x) for x in sites}):
        rng = site_stream(seed, s)
        values[s] = float(model.density.sample(rng))
    return Configuration(values, seed=seed)


# ---------------------------------------------------------------------------
# config files

_TOP_KEYS = {"dimension", "lambda", "potential", "density", "seed"}
_POT_KEYS = {"support", "tail"}
_TAIL_KEYS = {"C", "alpha", "radius", "sign"}
_DENS_KEYS = {"kind", "params"}


def load_model_config(path) -> tuple[ModelConfig, int | None]:
    """Load a model from a JSON config file; returns (model, default seed).

    Keys: dimension, lambda, potential.support = [[site, value], ...],
    potential.tail = {C, alpha, radius}, density = {kind, params}, seed.
    Unknown keys are rejected.
    """
    with open(path) as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(f"config parse error at line {err.lineno}, column {err.colno}: {err.msg}") from err

    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key in ("dimension", "lambda", "potential", "density"):
        if key not in raw:
            raise ValueError(f"config missing required key {key!r}")

    d = int(raw["dimension"])
    lam = float(raw["lambda"])

    pot_raw = raw["potential"]
    unknown = set(pot_raw) - _POT_KEYS
    if unknown:
        raise ValueError(f"unknown potential keys: {sorted(unknown)}")
    support = {}
    for entry in pot_raw.get("support", []):
        site, value = entry
        site = _as_site(site)
        if len(site) != d:
            raise ValueError(f"potential site {site} has wrong dimension")
        support[site] = float(value)
    tail_raw = pot_raw.get("tail")
    if tail_raw is not None:
        unknown = set(tail_raw) - _TAIL_KEYS
        if unknown:
            raise ValueError(f"unknown tail keys: {sorted(unknown)}")
        u = SingleSitePotential(support or {(0,) * d: float(tail_raw["C"])},
                                tail_amplitude=float(tail_raw["C"]),
                                tail_rate=float(tail_raw["alpha"]),
                                truncation_radius=int(tail_raw["radius"]),
                                tail_sign=int(tail_raw.get("sign", 1)))
    else:
        u = SingleSitePotential(support)

    dens_raw = raw["density"]
    unknown = set(dens_raw) - _DENS_KEYS
    if unknown:
        raise ValueError(f"unknown density keys: {sorted(unknown)}")
    density = DisorderDensity(dens_raw["kind"], dens_raw["params"])

    seed = raw.get("seed")
    return ModelConfig(d, lam, u, density), (int(seed) if seed is not None else None)
