"""Exact convergence bounds of the Magnus series for the 2x2 block dynamics.

With the dimensionless variables tau = |kappa| w (t - t0) and
Lambda = delta_omega (t - t0) / 2, the Magnus series of a block converges
iff |tau| stays below the distance r_Lambda from the origin to the nearest
branch point of the closed-form matrix exponent, continued to complex
coupling z:

    A_R(z) = cos(Lambda) cos(gamma(z)) + Lambda sin(Lambda) sinc(gamma(z)),
    gamma(z) = sqrt(Lambda^2 + z^2),
    g(z) = A_R(z) + 1,      r_Lambda = min { |z0| : g(z0) = 0 }.

A_R depends on z only through u = z^2 (cos and sinc are even), so the root
search runs in the u plane: multi-start Newton on the entire function
G(u) = g(sqrt(u)), followed by an argument-principle count certifying that
no zero lies strictly inside the candidate modulus. From r_Lambda follow
the exact convergence time t_max(delta_omega) and the pointwise test that
also detects the isolated reconvergence windows beyond t_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "ConvergenceResult",
    "RootSearchError",
    "a_r_function",
    "g_function",
    "min_root",
    "r_lambda",
    "sufficient_bound",
    "t_max",
    "t_max_scan",
    "converges_at",
    "reconvergence_intervals",
]


class RootSearchError(RuntimeError):
    """Root search exhausted its window or failed to certify minimality."""


@dataclass(frozen=True)
class ConvergenceResult:
    """Minimal-modulus branch-point root z0 of g_Lambda and the radius
    r = |z0| of Magnus convergence in tau = |kappa| w (t - t0)."""

    lam: float
    root: complex
    radius: float
    residual: float
    certified: bool


def _cos_sinc_j1(gam: np.ndarray):
    """(cos(z), sinc(z), j_1(z)/z) on complex arrays with one sin/cos pass;
    series fill-ins near 0."""
    gam = np.asarray(gam, dtype=complex)
    c = np.cos(gam)
    s = np.sin(gam)
    sinc = np.empty_like(gam)
    j1o = np.empty_like(gam)
    gg = gam * gam
    small = np.abs(gam) < 1e-3
    if small.any():
        gs = gg[small]
        sinc[small] = 1.0 - gs / 6.0 * (1.0 - gs / 20.0)
        j1o[small] = (1.0 / 3.0) * (1.0 - gs / 10.0 * (1.0 - gs / 28.0))
    big = ~small
    if big.any():
        sinc[big] = s[big] / gam[big]
        j1o[big] = (sinc[big] - c[big]) / gg[big]
    return c, sinc, j1o


def a_r_function(lam: float, z) -> complex | np.ndarray:
    """Real part A_{R,Lambda}(z) of the continued block coefficient a.

    Entire in z: gamma(z) = sqrt(Lambda^2 + z^2) enters only through the
    even functions cos and sinc, so the square-root branch is immaterial.
    """
    gam = np.sqrt(lam * lam + np.asarray(z, dtype=complex) ** 2)
    c, sinc, _ = _cos_sinc_j1(gam)
    out = math.cos(lam) * c + lam * math.sin(lam) * sinc
    return out if np.ndim(out) else complex(out)


def g_function(lam: float, z) -> complex | np.ndarray:
    """g_Lambda(z) = A_{R,Lambda}(z) + 1; branch points of the Magnus
    generating exponent sit exactly at its zeros."""
    out = a_r_function(lam, z) + 1.0
    return out if np.ndim(out) else complex(out)


def _g_and_dg(lam: float, u: np.ndarray):
    """G(u) = g(sqrt(u)) and dG/du, sharing the transcendental evaluations."""
    gam = np.sqrt(lam * lam + np.asarray(u, dtype=complex))
    c, sinc, j1o = _cos_sinc_j1(gam)
    cl, sl = math.cos(lam), lam * math.sin(lam)
    g = cl * c + sl * sinc + 1.0
    dg = -0.5 * cl * sinc - 0.5 * sl * j1o
    return g, dg


def _g_of_u(lam: float, u: np.ndarray) -> np.ndarray:
    return _g_and_dg(lam, u)[0]


def _newton_roots(lam: float, starts: np.ndarray, u_cap: float, iters: int = 70) -> np.ndarray:
    """Vectorized Newton on G(u); returns deduplicated converged roots.

    The active set is compacted every iteration: converged points retire,
    escapees (|u| beyond the window) are dropped.
    """
    u = np.array(starts, dtype=complex)
    tol = 1e-12 * (2.0 + abs(lam))
    done = []
    with np.errstate(all="ignore"):
        for _ in range(iters):
            if u.size == 0:
                break
            g, dg = _g_and_dg(lam, u)
            settled = np.abs(g) <= 0.25 * tol
            if settled.any():
                done.append(u[settled])
                u, g, dg = u[~settled], g[~settled], dg[~settled]
            step = g / dg
            u = u - step
            keep = np.isfinite(u) & (np.abs(u) <= 20.0 * u_cap)
            u = u[keep]
        if u.size:
            g = _g_of_u(lam, u)
            done.append(u[np.abs(g) < 1e-10 * (2.0 + abs(lam))])
    roots = np.concatenate(done) if done else np.array([], dtype=complex)
    if roots.size == 0:
        return roots
    roots = roots[np.argsort(np.abs(roots))]
    kept: list[complex] = []
    for r in roots:
        if all(abs(r - q) > 1e-6 * (1.0 + abs(r)) for q in kept):
            kept.append(complex(r))
    return np.array(kept)


def _multiplicity(lam: float, u_i: complex, spacing: float) -> int:
    """Zero multiplicity of G at u_i from the residue of G'/G at a probe
    point much closer to u_i than to any other zero."""
    eps = 0.15 * spacing
    probe = u_i + eps
    g, dg = _g_and_dg(lam, np.array([probe]))
    m = ((probe - u_i) * dg[0] / g[0]).real
    return max(1, int(round(m)))


def _count_zeros_inside(lam: float, rho: float, m_nodes: int, deflate=()) -> float:
    """(1/2 pi i) contour integral of G'/G over |u| = rho (trapezoid).

    ``deflate`` holds known zeros (u_i, multiplicity) strictly outside the
    contour whose pole terms m_i/(u - u_i) are subtracted from G'/G; each
    subtracted term integrates to zero, so the count is unchanged while the
    integrand stays analytic near the contour and the trapezoid rule keeps
    its geometric convergence even when |u_i| barely exceeds rho.
    """
    th = np.linspace(0.0, 2.0 * math.pi, m_nodes, endpoint=False)
    u = rho * np.exp(1j * th)
    g, dg = _g_and_dg(lam, u)
    val = u * dg / g
    for u_i, mult in deflate:
        val -= mult * u / (u - u_i)
    return float(np.mean(val).real)


def _certify_minimal(lam: float, u0: complex, roots: np.ndarray) -> bool:
    """Argument-principle count of zeros of G strictly inside
    |u| = |u0| (1 - 1e-4); minimality holds iff the count is 0.

    All located zeros near the contour (and their conjugate mirrors) are
    deflated, so the node count stays modest; it still escalates until two
    passes agree on an integer.
    """
    rho = abs(u0) * (1.0 - 1e-4)
    known = list(roots)
    known += [np.conj(r) for r in roots if abs(r.imag) > 1e-14 * (1.0 + abs(r))]
    merged: list[complex] = []
    for r in known:  # Newton may have found a root and its mirror separately
        if all(abs(r - q) > 1e-6 * (1.0 + abs(r)) for q in merged):
            merged.append(complex(r))
    near = [r for r in merged if rho <= abs(r) <= 3.0 * rho]
    deflate = []
    for i, r in enumerate(near):
        spacing = min(
            [abs(r - q) for j, q in enumerate(near) if j != i] or [0.05 * rho]
        )
        spacing = min(spacing, 0.1 * (1.0 + abs(r)))
        deflate.append((r, _multiplicity(lam, r, spacing)))
    prev = None
    for m_nodes in (2048, 16384, 131072):
        cnt = _count_zeros_inside(lam, rho, m_nodes, deflate)
        near_int = abs(cnt - round(cnt)) < 1e-3
        if near_int and (prev is None or abs(cnt - prev) < 1e-3):
            return round(cnt) == 0
        prev = cnt
    return abs(prev - round(prev)) < 5e-3 and round(prev) == 0


def _start_points(lam: float, u_cap: float, dense: bool = False) -> np.ndarray:
    n_rho, n_th = (64, 96) if dense else (36, 40)
    floor = max(1e-2, 0.02 * (math.pi**2 + 2.0 * math.pi * lam))
    rho = np.geomspace(floor, u_cap, n_rho)
    th = np.linspace(0.0, math.pi, n_th)  # conjugate symmetry: upper half
    grid = np.outer(rho, np.exp(1j * th)).ravel()
    # principled seeds: gamma = Lambda + s with s near odd multiples of pi
    seeds = []
    for j in range(1, 8):
        for sgn in (1.0, -1.0):
            for eps in (0.0, 0.1, 0.5, 1.5):
                s = sgn * (2 * j - 1) * math.pi + 1j * eps
                seeds.append(2.0 * lam * s + s * s)
    return np.concatenate([grid, np.array(seeds)])


def min_root(lam: float, search_pad: float = 5.0) -> ConvergenceResult:
    """Minimal-modulus zero of g_Lambda, certified by argument principle.

    Searches the u = z^2 plane over |u| <= (pi + 2|Lambda| + search_pad)^2
    with a multi-start Newton iteration; if the certification contour finds
    a zero strictly inside the candidate modulus, the search restarts with
    denser seeding confined to that disc. Lambda = 0 is the analytic limit
    g_0(z) = cos(z) + 1 with r = pi.
    """
    lam = abs(float(lam))
    if lam == 0.0:
        return ConvergenceResult(0.0, complex(math.pi), math.pi, 0.0, True)
    r_cap = math.pi + 2.0 * lam + search_pad
    u_cap = r_cap * r_cap
    starts = _start_points(lam, u_cap)
    for attempt in range(6):
        roots = _newton_roots(lam, starts, u_cap)
        roots = roots[np.abs(roots) <= u_cap] if roots.size else roots
        if roots.size == 0:
            raise RootSearchError(
                f"no zero of g_Lambda found within |z| <= {r_cap:.3g} for Lambda = {lam:.6g}"
            )
        u0 = complex(roots[0])
        if _certify_minimal(lam, u0, roots):
            z0 = complex(np.sqrt(complex(u0)))
            resid = abs(complex(_g_of_u(lam, np.array([u0]))[0]))
            return ConvergenceResult(lam, z0, math.sqrt(abs(u0)), resid, True)
        # a closer zero exists: reseed densely inside the candidate disc
        u_cap = abs(u0)
        starts = _start_points(lam, u_cap, dense=True)
    raise RootSearchError(f"minimality certification kept failing for Lambda = {lam:.6g}")


@lru_cache(maxsize=4096)
def _r_lambda_cached(lam: float) -> float:
    return min_root(lam).radius


def r_lambda(lam: float) -> float:
    """Convergence radius r_Lambda (cached)."""
    return _r_lambda_cached(round(abs(float(lam)), 12))


def sufficient_bound(w_max: float, kappa: float = 1.0) -> float:
    """Sufficient convergence horizon pi / (|kappa| w_max) (spectral-norm
    criterion); infinite when the coupling vanishes entirely."""
    if w_max < 0 or kappa <= 0:
        raise ValueError("w_max must be >= 0 and kappa > 0")
    if w_max == 0.0:
        return math.inf
    return math.pi / (kappa * w_max)


def t_max(
    delta_omega: float,
    w_max: float,
    kappa: float = 1.0,
    grid_ratio: float = 1.01,
    rel_tol: float = 1e-6,
) -> float:
    """Exact upper limit of continuous Magnus convergence.

    Smallest positive t solving |kappa w_max| t = r_{delta_omega t / 2},
    located by bracketing the first sign change of
    h(t) = kappa w_max t - r_{delta_omega t / 2} on a geometric t grid and
    bisecting. h < 0 strictly below the sufficient bound (r_Lambda >= pi),
    so the scan starts there.
    """
    if w_max <= 0 or kappa <= 0:
        raise ValueError("w_max and kappa must be > 0")
    delta_omega = abs(delta_omega)
    if delta_omega == 0.0:
        return sufficient_bound(w_max, kappa)

    def h(t: float) -> float:
        return kappa * w_max * t - r_lambda(0.5 * delta_omega * t)

    t_lo = sufficient_bound(w_max, kappa)
    h_lo = h(t_lo)
    if h_lo >= 0.0:  # r at the sufficient bound is exactly pi only as dw -> 0
        return t_lo
    t_cur = t_lo
    for _ in range(5000):
        t_next = t_cur * grid_ratio
        if h(t_next) > 0.0:
            lo, hi = t_cur, t_next
            while (hi - lo) > rel_tol * lo:
                mid = 0.5 * (lo + hi)
                if h(mid) > 0.0:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        t_cur = t_next
    raise RootSearchError(
        f"no convergence-boundary crossing below t = {t_cur:.3g} "
        f"for delta_omega = {delta_omega:.6g}"
    )


def converges_at(
    t: float, t0: float, delta_omega: float, w_max: float, kappa: float = 1.0
) -> bool:
    """Pointwise Magnus convergence test
    |kappa w_max| (t - t0) < r_{delta_omega (t - t0)/2}; true as well in
    the isolated reconvergence windows beyond t_max."""
    if t < t0:
        raise ValueError("t must be >= t0")
    T = t - t0
    if T == 0.0:
        return True
    return kappa * w_max * T < r_lambda(0.5 * abs(delta_omega) * T)


class _SharedRadiusGrid:
    """r_Lambda sampled once on a Lambda grid, shared by batch scans."""

    def __init__(self, lam_max: float, step: float = 0.02):
        n = max(4, int(math.ceil(lam_max / step)) + 1)
        self.lams = np.linspace(step, lam_max, n)
        self.radii = np.array([r_lambda(l) for l in self.lams])


def t_max_scan(
    delta_omegas, w_max: float, kappa: float = 1.0, rel_tol: float = 1e-6
) -> np.ndarray:
    """t_max for many detunings, sharing one r_Lambda table.

    The crossing condition in Lambda = delta_omega t / 2 reads
    c Lambda = r_Lambda with c = 2 kappa w_max / delta_omega; the first
    sign-change cell is located on the shared grid and refined by bisection
    with exact r_Lambda evaluations (t_max = 2 Lambda / delta_omega).
    """
    delta_omegas = np.asarray(list(delta_omegas), dtype=float)
    if np.any(delta_omegas < 0):
        raise ValueError("detunings must be >= 0")
    out = np.empty(len(delta_omegas))
    pos = delta_omegas[delta_omegas > 0]
    if pos.size:
        # Lambda at crossing grows ~ quadratically in delta_omega; pad the
        # asymptotic estimate generously and extend on demand.
        c_min = 2.0 * kappa * w_max / float(np.max(pos))
        lam_guess = math.pi * (1.0 + math.sqrt(1.0 + c_min * c_min)) / (c_min * c_min)
        grid = _SharedRadiusGrid(max(3.0, 2.5 * lam_guess))
    for i, dw in enumerate(delta_omegas):
        if dw == 0.0:
            out[i] = sufficient_bound(w_max, kappa)
            continue
        c = 2.0 * kappa * w_max / dw
        h = c * grid.lams - grid.radii
        idx = np.nonzero(h > 0.0)[0]
        while idx.size == 0:
            grid = _SharedRadiusGrid(2.0 * grid.lams[-1])
            h = c * grid.lams - grid.radii
            idx = np.nonzero(h > 0.0)[0]
        j = int(idx[0])
        if j == 0:
            out[i] = 2.0 * grid.lams[0] / dw  # crossing below first node: ~ t_suff
            continue
        lo, hi = grid.lams[j - 1], grid.lams[j]
        while (hi - lo) > rel_tol * lo:
            mid = 0.5 * (lo + hi)
            if c * mid - r_lambda(mid) > 0.0:
                hi = mid
            else:
                lo = mid
        out[i] = 2.0 * (0.5 * (lo + hi)) / dw
    return out


def reconvergence_intervals(
    delta_omega: float,
    w_max: float,
    kappa: float = 1.0,
    t_factor: float = 4.0,
    n_samples: int = 600,
) -> list[tuple[float, float]]:
    """Maximal t intervals beyond t_max where the series converges again.

    Samples the convergence condition on a uniform t grid over
    (t_max, t_factor * t_max] and returns the contiguous True runs;
    endpoint resolution is the grid spacing.
    """
    tm = t_max(delta_omega, w_max, kappa)
    ts = np.linspace(tm, t_factor * tm, n_samples + 1)[1:]
    mask = np.array([converges_at(t, 0.0, delta_omega, w_max, kappa) for t in ts])
    edges = np.flatnonzero(np.diff(np.concatenate(([False], mask, [False])).astype(int)))
    return [(float(ts[lo]), float(ts[hi - 1])) for lo, hi in zip(edges[::2], edges[1::2])]
