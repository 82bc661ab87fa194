"""Average-fidelity evaluation for (scheme, estimator, prior) triples.

Four entry points:

* :func:`exact_fidelity` -- exact enumeration over outcomes with prior
  quadrature: F = sum_x integral dρ f(r⃗, R⃗(x)) p(x|r⃗).  For the optimal
  estimator this equals (sum_x P_x + sum_x |V(x)|)/2.
* :func:`monte_carlo_fidelity` -- simulate states and outcomes, estimate,
  average; stderr reported; bit-reproducible for a fixed seed.
* :func:`tomography_with_discard` -- linear-inversion estimation keeping
  only outcomes whose tomographic point is physical; the fidelity is the
  conditional average over kept outcomes and the discarded probability
  mass is reported alongside.
* :func:`adaptive_local_fidelity` -- sequential single-copy measurements
  whose axes are chosen by a policy; estimation by the optimal rule on
  the full outcome-sequence likelihood.

The local x/y engine reduces every computation to (n+1) x (n+1) count
tables accumulated radially (matrix products per radial node, reduced in
a fixed node order so results are bit-reproducible for any thread count).
The collective engine exploits rotational invariance of the full-ball
ensemble: |V(k, m̂)| does not depend on m̂, so the direction integral
collapses and a 2-D (radius x polar-cosine) grid suffices.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    Prior,
    PriorKind,
    build_prior,
    clamp_fidelity,
    sample_states,
)
from .estimators import ml_phi_batch
from .quadrature import QuadratureError, gauss_legendre
from .schemes import (
    DEFAULT_ENUMERATION_LIMIT,
    SchemeKind,
    SchemeSpec,
    binom_log_pmf_matrix,
    collective_k_values,
    collective_log_weight,
)

__all__ = [
    "Method",
    "FidelityReport",
    "SweepResult",
    "AllOutcomesDiscardedError",
    "EnumerationLimitError",
    "LocalTables",
    "local_tables",
    "collective_tables",
    "collective_v_norm",
    "collective_fidelity_full_grid",
    "fidelity_from_guesses",
    "exact_fidelity",
    "monte_carlo_fidelity",
    "tomography_with_discard",
    "adaptive_local_fidelity",
    "sweep",
    "ADAPTIVE_POLICIES",
]

DEFAULT_RADIAL_ORDER = 128
DEFAULT_ANGULAR_ORDER = 256
# Auto-refinement stops once doubling both orders moves F by less than this.
FIDELITY_STABLE_TOL = 1e-8
_MAX_DOUBLINGS = 3

EXACT_ESTIMATORS = ("optimal", "ml", "tomography")
ADAPTIVE_POLICIES = ("fixed-xy", "greedy-fidelity")


class Method(Enum):
    EXACT_ENUMERATION = "exact-enumeration"
    MONTE_CARLO = "monte-carlo"


class AllOutcomesDiscardedError(RuntimeError):
    """Every outcome was unphysical, so the kept-only average is undefined."""

    def __init__(self, message: str):
        super().__init__(message)
        self.discarded_fraction = 1.0


class EnumerationLimitError(ValueError):
    """The requested copy number exceeds the exact-enumeration limit."""


@dataclass(frozen=True)
class FidelityReport:
    """One evaluated average fidelity.

    ``stderr`` is 0 for exact enumeration; ``discarded_fraction`` is set
    only by the tomography-with-discarding protocol.
    """

    scheme: SchemeSpec
    estimator: str
    copies: int
    fidelity: float
    stderr: float
    method: Method
    discarded_fraction: float | None = None

    def __post_init__(self):
        if self.stderr < 0.0:
            raise ValueError("stderr must be nonnegative")
        if not 0.0 <= self.fidelity <= 1.0:
            raise ValueError("fidelity must lie in [0, 1]")
        if self.discarded_fraction is not None and not 0.0 <= self.discarded_fraction <= 1.0:
            raise ValueError("discarded_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class SweepResult:
    """Fidelity reports over a strictly increasing list of copy numbers."""

    points: tuple

    def __post_init__(self):
        ns = [n for n, _ in self.points]
        if any(b <= a for a, b in zip(ns[:-1], ns[1:])):
            raise ValueError("sweep copy numbers must be strictly increasing")
        object.__setattr__(self, "points", tuple((int(n), rep) for n, rep in self.points))


def _require_prior(scheme_kind: SchemeKind, prior: Prior) -> None:
    if scheme_kind is SchemeKind.LOCAL_XY and prior.kind is not PriorKind.EQUATORIAL_BURES:
        raise ValueError("the local x/y scheme estimates the equatorial ensemble")
    if scheme_kind is SchemeKind.COLLECTIVE and prior.kind is not PriorKind.FULL_BURES:
        raise ValueError(
            "the collective engine relies on full rotational invariance; use the full-ball ensemble"
        )


def _check_enumerable(total_copies: int, enumeration_limit: int) -> None:
    if total_copies > enumeration_limit:
        raise EnumerationLimitError(
            f"N = {total_copies} exceeds the enumeration limit {enumeration_limit}"
        )


def _check_estimator(estimator: str, scheme_kind: SchemeKind) -> None:
    if estimator == "random":
        raise ValueError(
            "the outcome-independent baseline has no per-outcome average; "
            "use core.random_guess_fidelity(prior)"
        )
    if estimator not in EXACT_ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; expected one of {EXACT_ESTIMATORS}")
    if scheme_kind is SchemeKind.COLLECTIVE and estimator != "optimal":
        raise ValueError("tomographic and ML estimators are defined for the local x/y scheme only")


# ---------------------------------------------------------------------------
# local x/y table engine


@dataclass(frozen=True)
class LocalTables:
    """Per-outcome probability mass and unnormalized posterior-mean vectors.

    All arrays are (n+1, n+1), indexed [k_x, k_y].  ``prob`` sums to 1 up
    to quadrature round-off; (v_t, v_x, v_y) are the components of
    V(x) = integral dρ 𝐫 p(x|r⃗) (the z-component vanishes for the
    equatorial ensemble).
    """

    n_per_axis: int
    prob: np.ndarray
    v_t: np.ndarray
    v_x: np.ndarray
    v_y: np.ndarray


def local_tables(spec: SchemeSpec, prior: Prior, threads: int = 1) -> LocalTables:
    """Accumulate the outcome tables for a local x/y scheme over a prior.

    The radial quadrature loop is the unit of parallelism; contributions
    are reduced in fixed node order regardless of ``threads``, so results
    are bit-identical for any thread count.
    """
    if spec.kind is not SchemeKind.LOCAL_XY:
        raise ValueError("local_tables expects the local x/y scheme")
    _require_prior(spec.kind, prior)
    n = spec.n_per_axis
    K = n + 1
    cx = prior.directions[:, 0]
    sy = prior.directions[:, 1]
    aw = prior.angular_w

    def node_contribution(i: int):
        r = prior.radial_r[i]
        w = prior.radial_w[i]
        bx = np.exp(binom_log_pmf_matrix(n, 0.5 * (1.0 + r * cx)))
        by = np.exp(binom_log_pmf_matrix(n, 0.5 * (1.0 + r * sy)))
        wby = by * (w * aw)
        m = bx @ wby.T
        mx = (bx * (r * cx)) @ wby.T
        my = bx @ (wby * (r * sy)).T
        return m, mx, my

    prob = np.zeros((K, K))
    v_t = np.zeros((K, K))
    v_x = np.zeros((K, K))
    v_y = np.zeros((K, K))
    n_r = prior.radial_r.size
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(node_contribution, i) for i in range(n_r)]
            results = (f.result() for f in futures)
            for i, (m, mx, my) in enumerate(results):
                prob += m
                v_t += prior.radial_t[i] * m
                v_x += mx
                v_y += my
    else:
        for i in range(n_r):
            m, mx, my = node_contribution(i)
            prob += m
            v_t += prior.radial_t[i] * m
            v_x += mx
            v_y += my
    return LocalTables(n_per_axis=n, prob=prob, v_t=v_t, v_x=v_x, v_y=v_y)


def _physical_mask(n: int) -> np.ndarray:
    """Outcomes whose tomographic point is inside the disc, exactly.

    (2 k_x - n)^2 + (2 k_y - n)^2 <= n^2 in integer arithmetic.
    """
    k = np.arange(n + 1)
    dx = (2 * k - n)[:, None] ** 2
    dy = (2 * k - n)[None, :] ** 2
    return dx + dy <= n * n


def _tomography_guess_tables(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(t, x, y) guess components for physical outcomes; NaN when unphysical."""
    alpha = np.arange(n + 1, dtype=float) / n
    rx = 2.0 * alpha - 1.0
    gx, gy = np.meshgrid(rx, rx, indexing="ij")
    rr = gx**2 + gy**2
    phys = _physical_mask(n)
    tg = np.where(phys, np.sqrt(np.maximum(0.0, 1.0 - rr)), np.nan)
    gx = np.where(phys, gx, np.nan)
    gy = np.where(phys, gy, np.nan)
    return tg, gx, gy, phys


def _ml_guess_tables(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(t, x, y) guess components of the ML estimator for every outcome."""
    tg, gx, gy, phys = _tomography_guess_tables(n)
    if not np.all(phys):
        alpha = np.arange(n + 1, dtype=float) / n
        ax, ay = np.meshgrid(alpha, alpha, indexing="ij")
        phi = ml_phi_batch(ax[~phys], ay[~phys])
        tg = tg.copy()
        gx = gx.copy()
        gy = gy.copy()
        tg[~phys] = 0.0
        gx[~phys] = np.cos(phi)
        gy[~phys] = np.sin(phi)
    return tg, gx, gy


def _optimal_guess_tables(tables: LocalTables) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    norm = np.sqrt(tables.v_t**2 + tables.v_x**2 + tables.v_y**2)
    return tables.v_t / norm, tables.v_x / norm, tables.v_y / norm


def _local_exact_value(tables: LocalTables, guesses) -> float:
    """(sum_x P_x + sum_x R⃗(x)·V(x))/2; |V| itself when guesses is None."""
    if guesses is None:
        norm = np.sqrt(tables.v_t**2 + tables.v_x**2 + tables.v_y**2)
        return 0.5 * float(tables.prob.sum() + norm.sum())
    tg, gx, gy = guesses
    dot = tg * tables.v_t + gx * tables.v_x + gy * tables.v_y
    return 0.5 * float(tables.prob.sum() + dot.sum())


# ---------------------------------------------------------------------------
# collective reduced engine


@dataclass(frozen=True)
class CollectiveTables:
    """Per-spin-label mass and posterior-mean components (direction-frame).

    ``v_par`` is the component of V(k, m̂) along m̂; by rotational
    invariance of the full-ball ensemble the transverse components vanish
    and these values do not depend on m̂.
    """

    total_copies: int
    k_values: np.ndarray
    prob: np.ndarray
    v_t: np.ndarray
    v_par: np.ndarray


def collective_tables(
    total_copies: int, prior: Prior, cos_order: int, threads: int = 1
) -> CollectiveTables:
    """Reduced 2-D quadrature (radius x polar cosine) for the collective scheme."""
    _require_prior(SchemeKind.COLLECTIVE, prior)
    r = prior.radial_r
    t = prior.radial_t
    wr = prior.radial_w
    c, gw = gauss_legendre(cos_order)
    wc = gw / 2.0  # uniform sphere measure: integral dm g(cosΘ) = ∫ g(c) dc/2

    # log((1 - r^2)/4) = 2 log t - log 4, with t = cos u exact near r = 1
    log_quarter = 2.0 * np.log(t) - math.log(4.0)
    log_cos = np.log(0.5 * (1.0 + np.outer(r, c)))
    w2 = np.outer(wr, wc)
    w2_t = w2 * t[:, None]
    w2_rc = w2 * (r[:, None] * c[None, :])

    ks = collective_k_values(total_copies)

    def k_contribution(idx: int):
        k = ks[idx]
        hk = total_copies / 2.0 - k
        logd = collective_log_weight(k, total_copies) + (2.0 * k) * log_cos
        if hk > 0:
            logd = logd + hk * log_quarter[:, None]
        d = np.exp(logd)
        return (
            float(np.einsum("ij,ij->", w2, d)),
            float(np.einsum("ij,ij->", w2_t, d)),
            float(np.einsum("ij,ij->", w2_rc, d)),
        )

    K = ks.size
    prob = np.empty(K)
    v_t = np.empty(K)
    v_par = np.empty(K)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(k_contribution, range(K)))
    else:
        results = [k_contribution(i) for i in range(K)]
    for i, (p, vt, vp) in enumerate(results):
        prob[i] = p
        v_t[i] = vt
        v_par[i] = vp
    return CollectiveTables(
        total_copies=total_copies, k_values=ks, prob=prob, v_t=v_t, v_par=v_par
    )


def _collective_exact_value(tables: CollectiveTables) -> float:
    norm = np.hypot(tables.v_t, tables.v_par)
    return 0.5 * float(tables.prob.sum() + norm.sum())


def collective_v_norm(total_copies: int, prior: Prior, k: float, direction) -> float:
    """|V(k, m̂)| by direct 3-D quadrature over the prior's own grid.

    The independent route for the rotational-invariance check: no
    reduction, just sum w * 𝐫 * p(k, m̂ | r⃗) over the full product grid.
    """
    _require_prior(SchemeKind.COLLECTIVE, prior)
    d = np.asarray(direction, dtype=float)
    d = d / float(np.sqrt(d @ d))
    nodes4, weights = prior.product_nodes()
    p = _collective_density(total_copies, float(k), nodes4, d)
    v = (weights * p) @ nodes4
    return float(np.sqrt(v @ v))


def _collective_density(total_copies: int, k: float, nodes4: np.ndarray, direction: np.ndarray):
    """Vectorized p(k, m̂ | r⃗) over embedded prior nodes (t, r⃗)."""
    t = nodes4[:, 0]
    dots = nodes4[:, 1:] @ direction
    hk = total_copies / 2.0 - k
    logp = np.full(t.shape, collective_log_weight(k, total_copies))
    with np.errstate(divide="ignore"):
        if hk > 0:
            logp = logp + hk * (2.0 * np.log(t) - math.log(4.0))
        if k > 0:
            logp = logp + 2.0 * k * np.log(0.5 * (1.0 + dots))
    return np.exp(logp)


def collective_fidelity_full_grid(
    total_copies: int, prior: Prior, angular_order: int = 12
) -> float:
    """Collective optimal fidelity by brute-force 3-D quadrature.

    Enumerates a direction grid (Gauss x uniform azimuth) for m̂ and sums
    (P + |V|)/2 over (k, m̂) against the prior's full product grid — the
    slow independent route that the reduced engine is checked against.
    """
    _require_prior(SchemeKind.COLLECTIVE, prior)
    mu, wmu = gauss_legendre(angular_order)
    phi = 2.0 * np.pi * np.arange(angular_order) / angular_order
    sin_th = np.sqrt(1.0 - mu**2)
    dirs = np.empty((angular_order * angular_order, 3))
    dirs[:, 0] = np.repeat(sin_th, angular_order) * np.tile(np.cos(phi), angular_order)
    dirs[:, 1] = np.repeat(sin_th, angular_order) * np.tile(np.sin(phi), angular_order)
    dirs[:, 2] = np.repeat(mu, angular_order)
    wdir = np.repeat(wmu / wmu.sum(), angular_order) / angular_order

    nodes4, weights = prior.product_nodes()
    total = 0.0
    for k in collective_k_values(total_copies):
        for j in range(dirs.shape[0]):
            p = _collective_density(total_copies, float(k), nodes4, dirs[j])
            wp = weights * p
            mass = float(wp.sum())
            v = wp @ nodes4
            total += wdir[j] * (mass + float(np.sqrt(v @ v)))
    return 0.5 * total


# ---------------------------------------------------------------------------
# generic outcome-sum route (cross-check path)


def fidelity_from_guesses(
    spec: SchemeSpec, prior: Prior, guesses, kept: np.ndarray | None = None
) -> tuple[float, float]:
    """Direct Eq.-5-style route: sum_x integral dρ f(r⃗, R⃗(x)) p(x|r⃗).

    ``guesses`` is an (t, x, y) triple of (n+1, n+1) guess-component
    tables; ``kept`` optionally restricts the outcome sum.  Accumulates
    node-by-node with outer products — no shared code with the table
    engine — and returns (fidelity_sum, probability_mass) over the kept
    outcomes.  Intended for cross-checks at modest quadrature orders.
    """
    if spec.kind is not SchemeKind.LOCAL_XY:
        raise ValueError("the outcome-sum route is implemented for the local x/y scheme")
    _require_prior(spec.kind, prior)
    n = spec.n_per_axis
    tg, gx, gy = guesses
    mask = np.ones((n + 1, n + 1), dtype=bool) if kept is None else kept
    total = 0.0
    mass = 0.0
    for i in range(prior.radial_r.size):
        r = prior.radial_r[i]
        t = prior.radial_t[i]
        wr = prior.radial_w[i]
        for j in range(prior.directions.shape[0]):
            cxj = prior.directions[j, 0]
            syj = prior.directions[j, 1]
            w = wr * prior.angular_w[j]
            bx = np.exp(binom_log_pmf_matrix(n, np.array([0.5 * (1.0 + r * cxj)])))[:, 0]
            by = np.exp(binom_log_pmf_matrix(n, np.array([0.5 * (1.0 + r * syj)])))[:, 0]
            pmat = np.outer(bx, by)
            fmat = 0.5 * (1.0 + t * tg + (r * cxj) * gx + (r * syj) * gy)
            total += w * float((pmat * fmat)[mask].sum())
            mass += w * float(pmat[mask].sum())
    return total, mass


# ---------------------------------------------------------------------------
# exact evaluation entry points


def _stabilized_report(prior: Prior, radial_order, angular_order, evaluate):
    """Run ``evaluate(prior)`` with explicit orders, or auto-refine.

    With explicit orders the prior is rebuilt once at those orders.  In
    auto mode both orders are doubled (rebuilding the prior) until the
    fidelity moves by less than FIDELITY_STABLE_TOL, starting from the
    given prior's own grid.
    """
    if radial_order is not None or angular_order is not None:
        p = build_prior(
            prior.kind,
            radial_order=radial_order if radial_order is not None else DEFAULT_RADIAL_ORDER,
            angular_order=angular_order if angular_order is not None else DEFAULT_ANGULAR_ORDER,
        )
        return evaluate(p)
    p = prior
    prev = evaluate(p)
    ro, ao = p.radial_order, p.angular_order
    for _ in range(_MAX_DOUBLINGS):
        ro *= 2
        ao *= 2
        p = build_prior(prior.kind, radial_order=ro, angular_order=ao)
        cur = evaluate(p)
        if abs(cur[0] - prev[0]) < FIDELITY_STABLE_TOL:
            return cur
        prev = cur
    raise QuadratureError(
        "fidelity did not stabilize under quadrature-order doubling",
        cur[0],
        abs(cur[0] - prev[0]),
    )


def exact_fidelity(
    scheme: SchemeSpec,
    estimator: str,
    prior: Prior,
    *,
    radial_order: int | None = None,
    angular_order: int | None = None,
    threads: int = 1,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> FidelityReport:
    """Exact average fidelity by outcome enumeration and prior quadrature.

    With no explicit orders, the quadrature is refined by doubling until
    the fidelity is stable to 1e-8.  ``estimator`` is one of "optimal",
    "ml", "tomography" (the last delegates to
    :func:`tomography_with_discard` and reports discarded mass).
    """
    _check_estimator(estimator, scheme.kind)
    _check_enumerable(scheme.total_copies, enumeration_limit)
    _require_prior(scheme.kind, prior)
    if estimator == "tomography":
        return tomography_with_discard(
            scheme,
            prior,
            radial_order=radial_order,
            angular_order=angular_order,
            threads=threads,
            enumeration_limit=enumeration_limit,
        )

    if scheme.kind is SchemeKind.LOCAL_XY:
        guesses = None if estimator == "optimal" else _ml_guess_tables(scheme.n_per_axis)

        def evaluate(p: Prior):
            value = _local_exact_value(local_tables(scheme, p, threads=threads), guesses)
            return (value,)

    else:

        def evaluate(p: Prior):
            value = _collective_exact_value(
                collective_tables(scheme.total_copies, p, cos_order=p.angular_order, threads=threads)
            )
            return (value,)

    (value,) = _stabilized_report(prior, radial_order, angular_order, evaluate)
    return FidelityReport(
        scheme=scheme,
        estimator=estimator,
        copies=scheme.total_copies,
        fidelity=clamp_fidelity(value),
        stderr=0.0,
        method=Method.EXACT_ENUMERATION,
    )


def tomography_with_discard(
    scheme: SchemeSpec,
    prior: Prior,
    *,
    radial_order: int | None = None,
    angular_order: int | None = None,
    threads: int = 1,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> FidelityReport:
    """Linear-inversion estimation conditioned on physical outcomes.

    F = [sum_{x: R<=1} integral dρ f p] / [sum_{x: R<=1} integral dρ p];
    discarded_fraction = 1 - sum_{x: R<=1} integral dρ p.  Raises
    :class:`AllOutcomesDiscardedError` when no outcome is physical, which
    happens at N = 2 (every count pair has both frequencies extremal, so
    R = sqrt(2)).
    """
    if scheme.kind is not SchemeKind.LOCAL_XY:
        raise ValueError("tomography-with-discarding is defined for the local x/y scheme")
    _check_enumerable(scheme.total_copies, enumeration_limit)
    _require_prior(scheme.kind, prior)
    n = scheme.n_per_axis
    tg, gx, gy, phys = _tomography_guess_tables(n)
    if not phys.any():
        raise AllOutcomesDiscardedError(
            f"every outcome at N = {scheme.total_copies} is unphysical (R > 1); "
            "the kept-only average is undefined"
        )

    def evaluate(p: Prior):
        tables = local_tables(scheme, p, threads=threads)
        kept_mass = float(tables.prob[phys].sum())
        if kept_mass <= 0.0:
            raise AllOutcomesDiscardedError("kept outcomes carry no probability mass")
        dot = tg * tables.v_t + gx * tables.v_x + gy * tables.v_y
        num = 0.5 * float((tables.prob + dot)[phys].sum())
        return num / kept_mass, 1.0 - kept_mass

    value, discarded = _stabilized_report(prior, radial_order, angular_order, evaluate)
    return FidelityReport(
        scheme=scheme,
        estimator="tomography",
        copies=scheme.total_copies,
        fidelity=clamp_fidelity(value),
        stderr=0.0,
        method=Method.EXACT_ENUMERATION,
        discarded_fraction=min(max(discarded, 0.0), 1.0),
    )


# ---------------------------------------------------------------------------
# Monte Carlo


def _mc_draw_counts(rng, vecs: np.ndarray, n_half: int) -> tuple[np.ndarray, np.ndarray]:
    """Simulate per-axis +1 counts; one uniform per copy, row-major.

    Chunked by whole samples so the stream is identical to a single
    (samples, N) draw.
    """
    samples = vecs.shape[0]
    total = 2 * n_half
    chunk = max(1, (1 << 23) // max(total, 1))
    kx = np.empty(samples, dtype=np.int64)
    ky = np.empty(samples, dtype=np.int64)
    qx = 0.5 * (1.0 + vecs[:, 0])
    qy = 0.5 * (1.0 + vecs[:, 1])
    for s in range(0, samples, chunk):
        e = min(s + chunk, samples)
        u = rng.random((e - s, total))
        kx[s:e] = (u[:, :n_half] < qx[s:e, None]).sum(axis=1)
        ky[s:e] = (u[:, n_half:] < qy[s:e, None]).sum(axis=1)
    return kx, ky


def _mc_local(
    scheme: SchemeSpec,
    estimator: str,
    prior: Prior,
    samples: int,
    seed,
    radial_order,
    angular_order,
    threads: int,
) -> FidelityReport:
    n = scheme.n_per_axis
    rng = np.random.default_rng(seed)
    t_states, vecs = sample_states(prior.kind, samples, rng)
    kx, ky = _mc_draw_counts(rng, vecs, n)

    if estimator == "optimal":
        p = prior
        if radial_order is not None or angular_order is not None:
            p = build_prior(
                prior.kind,
                radial_order=radial_order or DEFAULT_RADIAL_ORDER,
                angular_order=angular_order or DEFAULT_ANGULAR_ORDER,
            )
        tg, gx, gy = _optimal_guess_tables(local_tables(scheme, p, threads=threads))
    elif estimator == "ml":
        tg, gx, gy = _ml_guess_tables(n)
    else:  # tomography
        tg, gx, gy, phys = _tomography_guess_tables(n)

    if estimator == "tomography":
        kept = phys[kx, ky]
        kept_count = int(kept.sum())
        if kept_count == 0:
            raise AllOutcomesDiscardedError(
                f"all {samples} simulated outcomes at N = {scheme.total_copies} were unphysical"
            )
        f = 0.5 * (
            1.0
            + t_states[kept] * tg[kx[kept], ky[kept]]
            + vecs[kept, 0] * gx[kx[kept], ky[kept]]
            + vecs[kept, 1] * gy[kx[kept], ky[kept]]
        )
        stderr = float(np.std(f, ddof=1) / math.sqrt(kept_count)) if kept_count > 1 else 0.0
        return FidelityReport(
            scheme=scheme,
            estimator=estimator,
            copies=scheme.total_copies,
            fidelity=clamp_fidelity(float(f.mean())),
            stderr=stderr,
            method=Method.MONTE_CARLO,
            discarded_fraction=1.0 - kept_count / samples,
        )

    f = 0.5 * (1.0 + t_states * tg[kx, ky] + vecs[:, 0] * gx[kx, ky] + vecs[:, 1] * gy[kx, ky])
    stderr = float(np.std(f, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return FidelityReport(
        scheme=scheme,
        estimator=estimator,
        copies=scheme.total_copies,
        fidelity=clamp_fidelity(float(f.mean())),
        stderr=stderr,
        method=Method.MONTE_CARLO,
    )


def _mc_collective(
    scheme: SchemeSpec,
    prior: Prior,
    samples: int,
    seed,
    radial_order,
    angular_order,
    threads: int,
) -> FidelityReport:
    N = scheme.total_copies
    p = prior
    if radial_order is not None or angular_order is not None:
        p = build_prior(
            prior.kind,
            radial_order=radial_order or DEFAULT_RADIAL_ORDER,
            angular_order=angular_order or DEFAULT_ANGULAR_ORDER,
        )
    tables = collective_tables(N, p, cos_order=p.angular_order, threads=threads)
    norm = np.hypot(tables.v_t, tables.v_par)
    g_t = tables.v_t / norm
    g_par = tables.v_par / norm

    rng = np.random.default_rng(seed)
    t_states, vecs = sample_states(prior.kind, samples, rng)
    r = np.sqrt(np.einsum("ij,ij->i", vecs, vecs))

    ks = tables.k_values
    logc = np.array([collective_log_weight(k, N) for k in ks])
    hk = N / 2.0 - ks
    m_exp = 2.0 * ks + 1.0

    f = np.empty(samples)
    chunk = max(1, (1 << 22) // max(ks.size, 1))
    for s in range(0, samples, chunk):
        e = min(s + chunk, samples)
        u = rng.random((e - s, 2))
        rr = r[s:e]
        tt = t_states[s:e]
        log_a = np.log1p(rr) - math.log(2.0)
        log_b = np.log1p(-rr) - math.log(2.0)
        log_ratio = log_b - log_a
        # marginal over directions: p(k|r) = c_k ((1-r^2)/4)^(N/2-k) I_k(r),
        # I_k = (a^m - b^m)/(r m) with m = 2k+1, via expm1 for stability
        small = rr < 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.log(-np.expm1(np.outer(log_ratio, m_exp))) - np.log(
                np.outer(rr, m_exp)
            )
        if small.any():
            tail[small] = math.log(2.0)
        log_i = np.outer(log_a, m_exp) + tail
        log_quarter = 2.0 * np.log(np.maximum(tt, 1e-300)) - math.log(4.0)
        logp = logc[None, :] + np.outer(log_quarter, hk) + log_i
        probs = np.exp(logp - logp.max(axis=1, keepdims=True))
        cum = np.cumsum(probs, axis=1)
        cum /= cum[:, -1:]
        idx = (u[:, 0:1] > cum).sum(axis=1)
        idx = np.minimum(idx, ks.size - 1)

        mm = m_exp[idx]
        a = 0.5 * (1.0 + rr)
        d = np.exp(mm * log_ratio)
        base = d + u[:, 1] * (1.0 - d)
        with np.errstate(divide="ignore"):
            root = np.exp(np.log(np.maximum(base, 1e-300)) / mm)
        cos_th = np.where(small, 2.0 * u[:, 1] - 1.0, (2.0 * a * root - 1.0) / np.maximum(rr, 1e-300))
        cos_th = np.clip(cos_th, -1.0, 1.0)
        f[s:e] = 0.5 * (1.0 + tt * g_t[idx] + g_par[idx] * (rr * cos_th))

    stderr = float(np.std(f, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return FidelityReport(
        scheme=scheme,
        estimator="optimal",
        copies=N,
        fidelity=clamp_fidelity(float(f.mean())),
        stderr=stderr,
        method=Method.MONTE_CARLO,
    )


def monte_carlo_fidelity(
    scheme: SchemeSpec,
    estimator: str,
    prior: Prior,
    samples: int,
    seed,
    *,
    radial_order: int | None = None,
    angular_order: int | None = None,
    threads: int = 1,
) -> FidelityReport:
    """Stochastic estimate of the average fidelity.

    Draw order is fixed: first all states (one batch), then outcome
    uniforms row by row — (samples, N) for the local scheme, (samples, 2)
    for the collective scheme (spin label, then polar cosine by inverse
    CDF).  The same seed therefore yields a bit-identical report.  With a
    single sample the standard error is reported as 0 (no variance
    estimate exists), never NaN.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    _check_estimator(estimator, scheme.kind)
    _require_prior(scheme.kind, prior)
    if scheme.kind is SchemeKind.LOCAL_XY:
        return _mc_local(
            scheme, estimator, prior, samples, seed, radial_order, angular_order, threads
        )
    return _mc_collective(scheme, prior, samples, seed, radial_order, angular_order, threads)


# ---------------------------------------------------------------------------
# adaptive local measurements

_GREEDY_AXES = 12
_GREEDY_RADIAL_ORDER = 32
_GREEDY_ANGULAR_ORDER = 64
_GREEDY_CHUNK = 1024


def _greedy_adaptive(
    prior: Prior, total_copies: int, samples: int, seed
) -> tuple[np.ndarray, float]:
    """Greedy-fidelity adaptive runs; returns per-sample fidelities."""
    grid = build_prior(
        prior.kind, radial_order=_GREEDY_RADIAL_ORDER, angular_order=_GREEDY_ANGULAR_ORDER
    )
    nodes4, w0 = grid.product_nodes()
    betas = np.pi * np.arange(_GREEDY_AXES) / _GREEDY_AXES
    cos_b, sin_b = np.cos(betas), np.sin(betas)
    # q_plus[j, node] = probability of the +1 outcome along axis j
    q_plus = 0.5 * (1.0 + cos_b[:, None] * nodes4[None, :, 1] + sin_b[:, None] * nodes4[None, :, 2])

    rng = np.random.default_rng(seed)
    t_states, vecs = sample_states(prior.kind, samples, rng)

    f = np.empty(samples)
    for s in range(0, samples, _GREEDY_CHUNK):
        e = min(s + _GREEDY_CHUNK, samples)
        S = e - s
        u = rng.random((S, total_copies))
        post = np.repeat(w0[None, :], S, axis=0)
        for step in range(total_copies):
            v_tot = post @ nodes4  # (S, 4)
            scores = np.empty((S, _GREEDY_AXES))
            for j in range(_GREEDY_AXES):
                v_plus = (post * q_plus[j]) @ nodes4
                v_minus = v_tot - v_plus
                scores[:, j] = np.sqrt(np.einsum("sd,sd->s", v_plus, v_plus)) + np.sqrt(
                    np.einsum("sd,sd->s", v_minus, v_minus)
                )
            jstar = scores.argmax(axis=1)
            q_true = 0.5 * (1.0 + vecs[s:e, 0] * cos_b[jstar] + vecs[s:e, 1] * sin_b[jstar])
            plus = u[:, step] < q_true
            q_sel = q_plus[jstar]
            post = post * np.where(plus[:, None], q_sel, 1.0 - q_sel)
            post /= post.sum(axis=1, keepdims=True)
        v = post @ nodes4
        v /= np.sqrt(np.einsum("sd,sd->s", v, v))[:, None]
        f[s:e] = 0.5 * (
            1.0 + t_states[s:e] * v[:, 0] + vecs[s:e, 0] * v[:, 1] + vecs[s:e, 1] * v[:, 2]
        )
    return f


def adaptive_local_fidelity(
    prior: Prior, total_copies: int, policy: str, samples: int, seed
) -> FidelityReport:
    """Sequential single-copy measurements with policy-chosen axes.

    ``fixed-xy`` measures the first N/2 copies along x and the rest along
    y — exactly the local x/y scheme — and shares the Monte Carlo code
    path with :func:`monte_carlo_fidelity`, so its report is bit-identical
    to the plain local run.  ``greedy-fidelity`` picks, before each copy,
    the equatorial axis maximizing the expected posterior |V| (the
    expected fidelity of the optimal guess) on a quadrature posterior;
    the final guess is the optimal rule applied to the sequence posterior.
    """
    if policy not in ADAPTIVE_POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {ADAPTIVE_POLICIES}")
    if prior.kind is not PriorKind.EQUATORIAL_BURES:
        raise ValueError("adaptive local measurements estimate the equatorial ensemble")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    scheme = SchemeSpec(SchemeKind.LOCAL_XY, total_copies)
    if policy == "fixed-xy":
        return _mc_local(scheme, "optimal", prior, samples, seed, None, None, threads=1)
    f = _greedy_adaptive(prior, total_copies, samples, seed)
    stderr = float(np.std(f, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return FidelityReport(
        scheme=scheme,
        estimator="optimal",
        copies=total_copies,
        fidelity=clamp_fidelity(float(f.mean())),
        stderr=stderr,
        method=Method.MONTE_CARLO,
    )


# ---------------------------------------------------------------------------
# sweeps


def sweep(
    scheme_kind: SchemeKind,
    estimator: str,
    prior: Prior,
    copies_list,
    *,
    radial_order: int | None = None,
    angular_order: int | None = None,
    threads: int = 1,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> SweepResult:
    """Exact fidelity reports over a strictly increasing list of N."""
    points = []
    for n in copies_list:
        spec = SchemeSpec(scheme_kind, int(n))
        report = exact_fidelity(
            spec,
            estimator,
            prior,
            radial_order=radial_order,
            angular_order=angular_order,
            threads=threads,
            enumeration_limit=enumeration_limit,
        )
        points.append((int(n), report))
    return SweepResult(points=tuple(points))
