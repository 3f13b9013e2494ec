"""Regularized Glauber-Sudarshan P function from a Fock-basis density matrix.

A radially symmetric filter of width w turns the (generally highly singular)
P function into the pointwise-finite quasiprobability

    P_Omega(alpha) = sum_{m,n} rho_{m,n} P_{Omega,n,m}(alpha),

whose negativities witness nonclassicality. Each coefficient function
reduces to a one-dimensional Bessel-Laguerre integral,

    P_{Omega,n,m}(alpha) = (16/pi^2) w^2 e^{i(n-m) phi_alpha}
        * int_0^1 dz Lambda_{n,m}(2wz) z J_{n-m}(4w|alpha|z)
          [arccos(z) - z sqrt(1-z^2)],

evaluated with fixed-node Gauss-Legendre quadrature. The integral depends
on alpha only through |alpha|, so grid evaluation builds radial tables per
(radii, w) that can be reused across evolution times, and the symmetry
P_{Omega,n,m} = conj(P_{Omega,m,n}) halves the work. The heavy contractions
run on the kernel backend selected in ``ionjc._kernels``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as _sps
from numpy.polynomial.legendre import leggauss

from . import _kernels
from .specfun import bessel_j, laguerre, laguerre_sequence

__all__ = [
    "GridSpec",
    "QuasiprobGrid",
    "lambda_nm",
    "p_omega_element",
    "p_omega_grid",
    "characteristic_oracle",
    "clear_table_cache",
]

DEFAULT_QUAD_NODES = 200


@dataclass(frozen=True)
class GridSpec:
    """Rectangular phase-space sampling: alpha = re + i*im on an
    n_im x n_re grid."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    n_re: int
    n_im: int

    def __post_init__(self):
        if self.n_re < 1 or self.n_im < 1:
            raise ValueError("grid resolution must be >= 1 in both directions")
        if self.re_max < self.re_min or self.im_max < self.im_min:
            raise ValueError("grid ranges must be ordered")

    @classmethod
    def square(cls, extent: float, n: int) -> "GridSpec":
        return cls(-extent, extent, -extent, extent, n, n)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        re = np.linspace(self.re_min, self.re_max, self.n_re) if self.n_re > 1 else np.array([self.re_min])
        im = np.linspace(self.im_min, self.im_max, self.n_im) if self.n_im > 1 else np.array([self.im_min])
        return re, im

    def alphas(self) -> np.ndarray:
        re, im = self.axes()
        return re[None, :] + 1j * im[:, None]


@dataclass(frozen=True)
class QuasiprobGrid:
    """P_Omega sampled on a grid; values[i, j] belongs to
    alpha = re_j + i*im_i."""

    spec: GridSpec
    w: float
    values: np.ndarray
    imag_residue: float


def lambda_nm(n: int, m: int, x) -> float:
    """Radial kernel Lambda_{n,m}(x) of the displaced Fock overlap.

    m >= n:  (-x)^(m-n) sqrt(n!/m!) L_n^(m-n)(x^2)
    m <  n:  x^(n-m) sqrt(m!/n!) L_m^(n-m)(x^2)

    Factorial ratios in log space; x may be scalar or ndarray (x >= 0).
    """
    if n < 0 or m < 0:
        raise ValueError("Fock indices must be >= 0")
    x = np.asarray(x, dtype=float)
    if m >= n:
        d = m - n
        ratio = math.exp(0.5 * (math.lgamma(n + 1) - math.lgamma(m + 1)))
        out = (-x) ** d * ratio * laguerre(n, d, x * x)
    else:
        d = n - m
        ratio = math.exp(0.5 * (math.lgamma(m + 1) - math.lgamma(n + 1)))
        out = x**d * ratio * laguerre(m, d, x * x)
    return out if np.ndim(out) else float(out)


def _unit_gauss(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights mapped to [0, 1]."""
    x, wt = leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * wt


def _boundary_factor(z: np.ndarray) -> np.ndarray:
    return np.arccos(z) - z * np.sqrt(1.0 - z * z)


def p_omega_element(n: int, m: int, alpha: complex, w: float, quad_nodes: int = DEFAULT_QUAD_NODES) -> complex:
    """Single coefficient P_{Omega,n,m}(alpha) by Gauss-Legendre quadrature."""
    if w <= 0:
        raise ValueError("filter width w must be > 0")
    if quad_nodes < 64:
        raise ValueError("quad_nodes must be >= 64")
    z, wq = _unit_gauss(quad_nodes)
    r = abs(alpha)
    phi = np.angle(alpha) if r > 0 else 0.0
    integrand = lambda_nm(n, m, 2.0 * w * z) * z * bessel_j(n - m, 4.0 * w * r * z) * _boundary_factor(z)
    return (16.0 / math.pi**2) * w * w * np.exp(1j * (n - m) * phi) * float(np.sum(wq * integrand))


def _lambda_pairs_for_d(n_max: int, d: int, x: np.ndarray) -> np.ndarray:
    """Lambda_{m+d, m}(x) for m = 0..n_max-d, one recurrence sweep.

    Row m corresponds to the pair (n, m) = (m+d, m).
    """
    m = np.arange(n_max - d + 1)
    ratio = np.exp(0.5 * (_sps.gammaln(m + 1) - _sps.gammaln(m + d + 1)))
    lag = laguerre_sequence(n_max - d, d, x * x)
    return (x**d)[None, :] * ratio[:, None] * lag


class _RadialTable:
    """Radial integrals I_{n,m}(r) for all pairs with d = n - m >= 0.

    tables[d][m, j] = the z-integral for the pair (m+d, m) at radius
    radii[j], including the (16/pi^2) w^2 prefactor. I is real and
    symmetric in (n, m), so d >= 0 suffices.
    """

    def __init__(self, radii: np.ndarray, w: float, n_max: int, quad_nodes: int):
        self.radii = radii
        self.w = w
        self.n_max = n_max
        self.quad_nodes = quad_nodes
        z, wq = _unit_gauss(quad_nodes)
        zg = wq * z * _boundary_factor(z)
        xnodes = 2.0 * w * z
        args = (4.0 * w * np.outer(radii, z)).ravel()
        jall = _kernels.bessel_orders(n_max, args).reshape(n_max + 1, len(radii), quad_nodes)
        pref = 16.0 / math.pi**2 * w * w
        self.tables = []
        for d in range(n_max + 1):
            lam = _lambda_pairs_for_d(n_max, d, xnodes)
            self.tables.append(pref * _kernels.contract_table(lam, zg, jall[d]))

    def combine(self, rho: np.ndarray, rinv: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """sum_{m,n} rho_{m,n} P_{Omega,n,m} on grid points with radius
        index rinv and phase phi.

        The radial tables cover d = n - m >= 0 only (I is symmetric in
        n, m); both triangles of rho enter the sum, so the imaginary part
        of the result genuinely measures deviation of rho from Hermiticity
        plus rounding.
        """
        dim = rho.shape[0]
        if dim > self.n_max + 1:
            raise ValueError("density matrix larger than the cached table")
        vals = np.zeros(phi.shape, dtype=complex)
        for d in range(dim):
            tab = self.tables[d][: dim - d]
            m = np.arange(dim - d)
            t_up = rho[m, m + d] @ tab  # pairs n = m + d
            if d == 0:
                vals += t_up[rinv]
                continue
            t_lo = rho[m + d, m] @ tab  # mirrored pairs
            vals += t_up[rinv] * np.exp(1j * d * phi) + t_lo[rinv] * np.exp(-1j * d * phi)
        return vals


_TABLE_CACHE: dict[tuple, _RadialTable] = {}
_TABLE_CACHE_MAX = 4


def clear_table_cache():
    _TABLE_CACHE.clear()


def _get_table(radii: np.ndarray, w: float, n_max: int, quad_nodes: int) -> _RadialTable:
    key = (radii.tobytes(), float(w), int(n_max), int(quad_nodes))
    tab = _TABLE_CACHE.get(key)
    if tab is None or tab.n_max < n_max:
        if len(_TABLE_CACHE) >= _TABLE_CACHE_MAX:
            _TABLE_CACHE.pop(next(iter(_TABLE_CACHE)))
        tab = _RadialTable(radii, w, n_max, quad_nodes)
        _TABLE_CACHE[key] = tab
    return tab


def p_omega_grid(
    rho: np.ndarray,
    spec: GridSpec,
    w: float,
    quad_nodes: int = DEFAULT_QUAD_NODES,
    use_cache: bool = True,
) -> QuasiprobGrid:
    """P_Omega over a rectangular alpha grid.

    ``rho`` is the (n_max+1)^2 Fock-basis density matrix (entries
    rho[m, n] = <m|rho|n>). Radial tables are cached per (radii, w,
    truncation, quadrature) so repeated calls for new times reuse them.
    """
    rho = np.asarray(rho, dtype=complex)
    if w <= 0:
        raise ValueError("filter width w must be > 0")
    if quad_nodes < 64:
        raise ValueError("quad_nodes must be >= 64")
    alphas = spec.alphas()
    rad = np.abs(alphas).ravel()
    phi = np.angle(alphas).ravel()
    radii, rinv = np.unique(rad, return_inverse=True)
    n_max = rho.shape[0] - 1
    if use_cache:
        table = _get_table(radii, w, n_max, quad_nodes)
    else:
        table = _RadialTable(radii, w, n_max, quad_nodes)
    vals = table.combine(rho, rinv, phi)
    values = vals.real.reshape(alphas.shape)
    resid = float(np.max(np.abs(vals.imag)))
    return QuasiprobGrid(spec, w, values, resid)


def _char_poly_coeffs(rho: np.ndarray) -> np.ndarray:
    """C[j, l] with Phi_N(beta) = sum_{j,l} C[j,l] beta^j (-conj(beta))^l.

    Exact finite representation of the normally ordered characteristic
    function of a truncated Fock-basis state; uses only factorials, no
    Laguerre or Bessel evaluations (kept independent of the primary path).
    """
    dim = rho.shape[0]
    C = np.zeros((dim, dim), dtype=complex)
    lg = _sps.gammaln(np.arange(dim + 1) + 1.0)
    for j in range(dim):
        for l in range(dim):
            q = np.arange(0, dim - max(j, l))
            if len(q) == 0:
                continue
            coeff = np.exp(
                0.5 * (lg[q + j] - lg[q]) + 0.5 * (lg[q + l] - lg[q]) - lg[j] - lg[l]
            )
            C[j, l] = np.sum(rho[q + l, q + j] * coeff)
    return C


def _characteristic_oracle_many(
    rho: np.ndarray, alphas: np.ndarray, w: float, n_rad: int = 400, n_ang: int = 256
) -> np.ndarray:
    """P_Omega at several alphas via the filtered characteristic function.

    2-D Fourier transform over the filter disc |beta| <= 2w on a midpoint
    radial x uniform angular grid; deliberately a different discretization
    and special-function path than the Bessel-Laguerre quadrature.
    """
    rho = np.asarray(rho, dtype=complex)
    b = (np.arange(n_rad) + 0.5) * (2.0 * w / n_rad)
    db = 2.0 * w / n_rad
    ang = np.arange(n_ang) * (2.0 * math.pi / n_ang)
    beta = (b[:, None] * np.exp(1j * ang)[None, :]).ravel()
    C = _char_poly_coeffs(rho)
    dim = rho.shape[0]
    p1 = np.stack([beta**j for j in range(dim)])
    p2 = np.stack([(-np.conj(beta)) ** l for l in range(dim)])
    phi_n = np.einsum("jl,jk,lk->k", C, p1, p2)
    zq = b / (2.0 * w)
    filt = (2.0 / math.pi) * _boundary_factor(zq)
    weight = phi_n * np.repeat(filt * b, n_ang) * db * (2.0 * math.pi / n_ang) / math.pi**2
    out = np.empty(len(alphas))
    for i, al in enumerate(alphas):
        out[i] = float(np.sum(weight * np.exp(al * np.conj(beta) - np.conj(al) * beta)).real)
    return out


def characteristic_oracle(rho: np.ndarray, alpha: complex, w: float) -> float:
    """Independent P_Omega(alpha) evaluation (verification path)."""
    return float(_characteristic_oracle_many(rho, np.array([alpha]), w)[0])
