"""Per-block 2x2 evolution of the detuned sideband model.

The joint dynamics decouples into independent 2x2 unitaries

    U_n = [[a_n, b_n], [-conj(b_n), conj(a_n)]],    |a_n|^2 + |b_n|^2 = 1,

acting on the pair {|2,n>, |1,n+k>}. This module provides the exact
closed-form (a_n, b_n), the first-order (no time ordering) solution, the
Magnus correction matrices of order 1..5 built from spherical Bessel
combinations f_l, truncated-Magnus block unitaries of any order up to 5,
and the closed-form matrix exponent that generates all Magnus orders.

Conventions: time is carried explicitly; the dimensionless time of the
underlying model is t*|kappa|. The truncated Magnus exponent is

    E_L = sum_{l<=L} (-i |kappa|)^l M_n^[l],      U_n^[L] = exp(E_L),

with E_L anti-Hermitian and traceless at every order, so every truncated
block is exactly unitary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import ModelParams, coupling_w, coupling_w_sequence, spherical_bessel

__all__ = [
    "BlockCoefficients",
    "MagnusTermMatrix",
    "EvolutionMethod",
    "BranchPointError",
    "gamma_n",
    "exact_block",
    "no_time_ordering_block",
    "magnus_f",
    "magnus_term",
    "magnus_block",
    "generating_exponent",
    "block_table",
]


class BranchPointError(ValueError):
    """Matrix-logarithm evaluation requested too close to Re(a) = -1."""


@dataclass(frozen=True)
class BlockCoefficients:
    """Entries (a, b) of one 2x2 evolution block U_n."""

    n: int
    a: complex
    b: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [-np.conj(self.b), np.conj(self.a)]])

    @property
    def unitarity_defect(self) -> float:
        return abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0)


@dataclass(frozen=True)
class MagnusTermMatrix:
    """Magnus correction matrix M_n^[l] (order l in 1..5)."""

    order: int
    entries: np.ndarray


@dataclass(frozen=True)
class EvolutionMethod:
    """Evolution variant: exact, first order (no time ordering), or
    Magnus truncated at order 1..5."""

    kind: str
    order: int | None = None

    def __post_init__(self):
        if self.kind not in ("exact", "noto", "magnus"):
            raise ValueError(f"unknown evolution method kind {self.kind!r}")
        if self.kind == "magnus":
            if self.order is None or not 1 <= self.order <= 5:
                raise ValueError("Magnus truncation order must be in 1..5")
        elif self.order is not None:
            raise ValueError(f"method {self.kind!r} takes no order")

    @classmethod
    def exact(cls) -> "EvolutionMethod":
        return cls("exact")

    @classmethod
    def no_time_ordering(cls) -> "EvolutionMethod":
        return cls("noto")

    @classmethod
    def magnus(cls, order: int) -> "EvolutionMethod":
        return cls("magnus", order)

    @classmethod
    def parse(cls, name: str) -> "EvolutionMethod":
        """Parse 'exact', 'noto' or 'magnus1'..'magnus5'."""
        name = name.strip().lower()
        if name == "exact":
            return cls.exact()
        if name == "noto":
            return cls.no_time_ordering()
        if name.startswith("magnus") and name[6:] in "12345" and len(name) == 7:
            return cls.magnus(int(name[6:]))
        raise ValueError(f"unknown evolution method {name!r}")

    @property
    def label(self) -> str:
        return self.kind if self.order is None else f"magnus{self.order}"


def _sinc(x):
    """sin(x)/x with the removable singularity filled in (real arrays)."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)
    return out if out.ndim else float(out)


def gamma_n(n: int, params: ModelParams) -> float:
    """Block Rabi frequency Gamma_n = sqrt((dw/2)^2 + (|kappa| w_n)^2)."""
    w = coupling_w(n, params)
    return math.hypot(0.5 * params.delta_omega, params.kappa_abs * w)


def _exact_ab_free(weff, t, t0, dw):
    """Exact (a, b) for an effective coupling amplitude weff = |kappa| w_n;
    weff may carry any sign (the solution is entire in the coupling)."""
    T = t - t0
    gam = np.hypot(0.5 * dw, np.asarray(weff, dtype=float))
    sc = _sinc(gam * T)
    a = np.exp(-0.5j * dw * T) * (np.cos(gam * T) + 0.5j * dw * T * sc)
    b = np.exp(-0.5j * dw * (t + t0)) * (-1j) * np.asarray(weff) * T * sc
    return a, b


def _exact_ab(w, t, t0, params):
    return _exact_ab_free(params.kappa_abs * np.asarray(w, dtype=float), t, t0, params.delta_omega)


def exact_block(n: int, t: float, t0: float, params: ModelParams) -> BlockCoefficients:
    """Exact closed-form block coefficients.

    a_n = e^{-i dw (t-t0)/2} [cos(Gamma_n (t-t0)) + (i dw / 2 Gamma_n) sin(Gamma_n (t-t0))]
    b_n = e^{-i dw (t+t0)/2} (|kappa| w_n / i Gamma_n) sin(Gamma_n (t-t0))

    written with sinc so the degenerate limit Gamma_n -> 0 returns (1, 0)
    without dividing by Gamma_n.
    """
    a, b = _exact_ab(coupling_w(n, params), t, t0, params)
    return BlockCoefficients(n, complex(a), complex(b))


def no_time_ordering_block(n: int, t: float, t0: float, params: ModelParams) -> BlockCoefficients:
    """First-order block: exp of the first Magnus term only.

    Rotation angle w_n |kappa| (t-t0) sinc(dw (t-t0)/2). The phase of b is
    the one produced by the matrix exponential of the first Magnus term
    (-i times the printed real prefactor); the difference is a global phase
    on b and drops out of every observable assembled here.
    """
    dw, kap = params.delta_omega, params.kappa_abs
    T = t - t0
    x = coupling_w(n, params) * kap * T * _sinc(0.5 * dw * T)
    a = complex(math.cos(x))
    b = -1j * np.exp(-0.5j * dw * (t + t0)) * math.sin(x)
    return BlockCoefficients(n, a, complex(b))


def magnus_f(ell: int, z: float) -> float:
    """Scalar shape functions f_l(z) of the Magnus terms, l = 1..5.

    Combinations of spherical Bessel functions; all removable singularities
    at z = 0 are resolved inside spherical_bessel. f_1(0) = 1 and
    f_l(0) = 0 for l >= 2.
    """
    if ell == 1:
        return spherical_bessel(0, z)
    z = float(z)
    j0 = spherical_bessel(0, z)
    j1 = spherical_bessel(1, z)
    if ell == 2:
        return 0.5 * (j1 * math.cos(z) - j0 * math.sin(z))
    j2 = spherical_bessel(2, z)
    if ell == 3:
        return (-(j0**3) + j0 + j2) / 6.0
    s, c = math.sin(z), math.cos(z)
    s2, c2 = math.sin(2 * z), math.cos(2 * z)
    j3 = spherical_bessel(3, z)
    if ell == 4:
        return (
            0.5 * j0**2 * s2
            - 0.5 * j0 * s
            - 0.5 * j1**2 * s2
            - 0.5 * j2 * s
            - j1 * j0 * c2
            + 0.3 * j1 * c
            + 0.3 * j3 * c
        ) / 12.0
    if ell == 5:
        j4 = spherical_bessel(4, z)
        return (
            0.5 * j0
            + (5.0 / 7.0) * j2
            + (3.0 / 14.0) * j4
            + 2.0 * j1**2 * j0 * s**2
            - (13.0 / 6.0) * j1 * j0 * s
            - 0.5 * j3 * j0 * s
            - (5.0 / 3.0) * j1 * j2 * s
            + 2.0 * j0**3 * c**2
            - 2.5 * j0**2 * c
            - 2.5 * j2 * j0 * c
            + 4.0 * j1 * j0**2 * s * c
        ) / 60.0
    raise ValueError(f"Magnus order must be 1..5, got {ell}")


def magnus_term(ell: int, n: int, t: float, t0: float, params: ModelParams) -> MagnusTermMatrix:
    """Magnus correction matrix M_n^[l](t, t0).

    Odd l:  w_n^l (t-t0)^l f_l(dw (t-t0)/2) * [[0, e^{-i dw (t+t0)/2}],
                                               [e^{+i dw (t+t0)/2}, 0]]
    Even l: i w_n^l (t-t0)^l f_l(dw (t-t0)/2) * diag(1, -1)
    """
    if not 1 <= ell <= 5:
        raise ValueError(f"Magnus order must be 1..5, got {ell}")
    dw = params.delta_omega
    T = t - t0
    w = coupling_w(n, params)
    scale = w**ell * T**ell * magnus_f(ell, 0.5 * dw * T)
    if ell % 2:
        ph = np.exp(-0.5j * dw * (t + t0))
        mat = scale * np.array([[0.0, ph], [np.conj(ph), 0.0]])
    else:
        mat = 1j * scale * np.array([[1.0, 0.0], [0.0, -1.0]])
    return MagnusTermMatrix(ell, mat)


def _magnus_sums(order, w, t, t0, params):
    """Real amplitudes (P, F) of the truncated exponent
    E = [[iF, -iP e^{-i dw (t+t0)/2}], [-iP e^{+i ...}, -iF]]."""
    dw, kap = params.delta_omega, params.kappa_abs
    T = t - t0
    z = 0.5 * dw * T
    w = np.asarray(w, dtype=float)
    tau = kap * w * T
    P = np.zeros_like(w)
    F = np.zeros_like(w)
    for ell in range(1, order + 1):
        fl = magnus_f(ell, z)
        if ell % 2:
            P += (-1.0) ** ((ell - 1) // 2) * tau**ell * fl
        else:
            F += (-1.0) ** (ell // 2) * tau**ell * fl
    return P, F


def _magnus_ab(order, w, t, t0, params):
    P, F = _magnus_sums(order, w, t, t0, params)
    om = np.hypot(P, F)
    sc = _sinc(om)
    a = np.cos(om) + 1j * F * sc
    b = -1j * P * sc * np.exp(-0.5j * params.delta_omega * (t + t0))
    return a, b


def magnus_block(order: int, n: int, t: float, t0: float, params: ModelParams) -> BlockCoefficients:
    """Block unitary of the Magnus expansion truncated at ``order`` (1..5).

    The exponent E = sum_{l<=order} (-i|kappa|)^l M_n^[l] is anti-Hermitian
    and traceless, so exp(E) is evaluated with the closed 2x2 formula
    exp(E) = cos(|v|) I + sinc(|v|) E, unitary by construction.
    """
    if not 1 <= order <= 5:
        raise ValueError(f"Magnus order must be 1..5, got {order}")
    a, b = _magnus_ab(order, coupling_w(n, params), t, t0, params)
    return BlockCoefficients(n, complex(a), complex(b))


def generating_exponent(
    n: int, kappa: float, t: float, t0: float, params: ModelParams
) -> np.ndarray:
    """Closed-form matrix exponent M_n(|kappa|) with U_n = exp(-i M_n).

    M_n = arccos(Re a_n)/sqrt(1 - Re^2 a_n) * [[-Im a_n, i b_n],
                                               [-i conj(b_n), Im a_n]]

    evaluated at coupling magnitude ``kappa`` (params.kappa_abs is ignored
    here so the coupling can be scanned as the expansion variable, with the
    detuning held fixed). Its Taylor coefficients in kappa generate every
    Magnus term. Re(a_n) -> +1 is a removable limit (prefactor -> 1);
    Re(a_n) = -1 is a genuine branch point and raises BranchPointError.
    """
    weff = coupling_w(n, params) * kappa  # w_n does not depend on kappa_abs
    a, b = _exact_ab_free(weff, t, t0, params.delta_omega)
    ra = min(1.0, max(-1.0, float(np.real(a))))
    if abs(ra + 1.0) < 1e-9:
        raise BranchPointError(
            f"Re(a_n) = {ra} within 1e-9 of the branch point at -1"
        )
    theta_ = math.acos(ra)
    fac = 1.0 if theta_ < 1e-8 else theta_ / math.sin(theta_)
    return fac * np.array(
        [[-np.imag(a), 1j * b], [-1j * np.conj(b), np.imag(a)]]
    )


def block_table(
    method: EvolutionMethod, n_max: int, t: float, t0: float, params: ModelParams
) -> tuple[np.ndarray, np.ndarray]:
    """(a_n, b_n) arrays for n = 0..n_max under the chosen method.

    Blocks for different n are independent; this is the vectorized path the
    state-assembly routines use.
    """
    w = coupling_w_sequence(n_max, params)
    if method.kind == "exact":
        return _exact_ab(w, t, t0, params)
    if method.kind == "noto":
        x = w * params.kappa_abs * (t - t0) * _sinc(0.5 * params.delta_omega * (t - t0))
        a = np.cos(x).astype(complex)
        b = -1j * np.exp(-0.5j * params.delta_omega * (t + t0)) * np.sin(x)
        return a, b
    return _magnus_ab(method.order, w, t, t0, params)
