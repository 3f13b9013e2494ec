"""Shared oracles for the test suite.

Every oracle here deliberately avoids the code path it checks: the block
ODE is integrated numerically, density matrices are rebuilt from a full
joint state vector, Magnus terms are recovered from high-precision finite
differences of the closed-form exponent and from ordered nested-commutator
quadrature.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp

from ionjc.dynamics import block_table
from ionjc.specfun import ModelParams, coupling_w


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)


def random_params(rng, k_max=3, dw_max=1.0):
    return ModelParams(
        k=int(rng.integers(0, k_max + 1)),
        eta=float(rng.uniform(0.05, 0.5)),
        delta_phi=float(rng.uniform(0.0, 2.0 * math.pi)),
        theta=float(rng.uniform(0.0, 2.0 * math.pi)),
        delta_omega=float(rng.uniform(0.0, dw_max)),
        kappa_abs=1.0,
    )


# ---------------------------------------------------------------------------
# block ODE oracles
# ---------------------------------------------------------------------------

def _block_rhs_matrix(w, dw, kap, t):
    return -1j * kap * w * np.array(
        [[0.0, np.exp(-1j * dw * t)], [np.exp(1j * dw * t), 0.0]]
    )


def ode_block(n, t, t0, params, rtol=1e-11, atol=1e-13):
    """Step-size-controlled integration of dU/dt = -i|kappa| H_n(t) U."""
    w = coupling_w(n, params)
    dw, kap = params.delta_omega, params.kappa_abs

    def rhs(tt, y):
        u = (y[:4] + 1j * y[4:]).reshape(2, 2)
        du = _block_rhs_matrix(w, dw, kap, tt) @ u
        return np.concatenate([du.real.ravel(), du.imag.ravel()])

    y0 = np.concatenate([np.eye(2).ravel(), np.zeros(4)])
    sol = solve_ivp(rhs, (t0, t), y0, method="DOP853", rtol=rtol, atol=atol)
    y = sol.y[:, -1]
    return (y[:4] + 1j * y[4:]).reshape(2, 2)


def rk4_block(n, t, t0, params, steps=10_000):
    """Fixed-step classical RK4 for the same block ODE."""
    w = coupling_w(n, params)
    dw, kap = params.delta_omega, params.kappa_abs
    h = (t - t0) / steps
    u = np.eye(2, dtype=complex)
    tt = t0
    for _ in range(steps):
        k1 = _block_rhs_matrix(w, dw, kap, tt) @ u
        k2 = _block_rhs_matrix(w, dw, kap, tt + 0.5 * h) @ (u + 0.5 * h * k1)
        k3 = _block_rhs_matrix(w, dw, kap, tt + 0.5 * h) @ (u + 0.5 * h * k2)
        k4 = _block_rhs_matrix(w, dw, kap, tt + h) @ (u + h * k3)
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        tt += h
    return u


# ---------------------------------------------------------------------------
# full joint-state oracle (electronic (+) motional)
# ---------------------------------------------------------------------------

def full_state_oracle(t, t0, params, alpha0, electronic, n_max, method=None, pad=12):
    """Evolve |electronic, alpha0> as an explicit joint state vector and
    trace out the electron.

    Builds the full block-structured unitary (including the theta phases
    the reduced formulas drop), applies free-evolution phases with nu and
    omega21, and returns (rho_motional[:n_max+1, :n_max+1], sigma11,
    sigma22).
    """
    from ionjc.dynamics import EvolutionMethod

    if method is None:
        method = EvolutionMethod.exact()
    k = params.k
    n_tot = n_max + k + pad
    dim = n_tot + 1

    q = np.arange(dim)
    r = abs(alpha0)
    if r == 0:
        coh = np.zeros(dim, dtype=complex)
        coh[0] = 1.0
    else:
        import scipy.special as sps

        coh = np.exp(q * math.log(r) - 0.5 * r * r - 0.5 * sps.gammaln(q + 1.0)) * np.exp(
            1j * q * np.angle(alpha0)
        )
    psi = np.zeros(2 * dim, dtype=complex)  # [ |1,q> block, |2,q> block ]
    if electronic == 1:
        psi[:dim] = coh
    else:
        psi[dim:] = coh

    # free evolution phases exp(-i Phi_{j,q} (t - t0))
    T = t - t0
    psi[:dim] *= np.exp(-1j * q * params.nu * T)
    psi[dim:] *= np.exp(-1j * (q * params.nu + params.omega21) * T)

    # block unitary: U|2,n> = a|2,n> - e^{-i theta} b* |1,n+k>
    #                U|1,n+k> = e^{i theta} b |2,n> + a* |1,n+k>
    a, b = block_table(method, n_tot, t, t0, params)
    U = np.zeros((2 * dim, 2 * dim), dtype=complex)
    for qq in range(min(k, dim)):
        U[qq, qq] = 1.0  # uncoupled |1, q<k>
    eio = np.exp(1j * params.theta)
    for n in range(0, dim - k):
        i2, i1 = dim + n, n + k
        U[i2, i2] = a[n]
        U[i1, i2] = -np.conj(eio) * np.conj(b[n])
        U[i2, i1] = eio * b[n]
        U[i1, i1] = np.conj(a[n])
    psi = U @ psi

    amp1, amp2 = psi[:dim], psi[dim:]
    rho = np.outer(amp1, amp1.conj()) + np.outer(amp2, amp2.conj())
    sigma11 = float(np.sum(np.abs(amp1) ** 2))
    sigma22 = float(np.sum(np.abs(amp2) ** 2))
    return rho[: n_max + 1, : n_max + 1], sigma11, sigma22


# ---------------------------------------------------------------------------
# high-precision finite-difference oracle for the Magnus terms
# ---------------------------------------------------------------------------

def _mp_exponent(kappa, w, dw, t, t0):
    """Generating exponent M(kappa) in mpmath arithmetic."""
    T = t - t0
    gam = mp.sqrt((mp.mpf(dw) / 2) ** 2 + (w * kappa) ** 2)
    phase_t = mp.e ** (-0.5j * dw * T)
    phase_tt = mp.e ** (-0.5j * dw * (t + t0))
    if gam == 0:
        a, b = mp.mpc(1), mp.mpc(0)
    else:
        a = phase_t * (mp.cos(gam * T) + 0.5j * dw / gam * mp.sin(gam * T))
        b = phase_tt * w * kappa / (1j * gam) * mp.sin(gam * T)
    ra = mp.re(a)
    ra = mp.mpf(1) if ra > 1 else (mp.mpf(-1) if ra < -1 else ra)
    th = mp.acos(ra)
    fac = th / mp.sin(th) if mp.fabs(mp.sin(th)) > mp.mpf("1e-30") else mp.mpf(1)
    return [
        [-fac * mp.im(a), fac * 1j * b],
        [-fac * 1j * mp.conj(b), fac * mp.im(a)],
    ]


def _stencil(ell, n_half):
    """Central finite-difference weights for the ell-th derivative on
    offsets -n_half..n_half (mpmath exact solve)."""
    with mp.workdps(50):
        offs = list(range(-n_half, n_half + 1))
        rows = [[mp.mpf(o) ** p for o in offs] for p in range(len(offs))]
        rhs = [mp.factorial(ell) if p == ell else mp.mpf(0) for p in range(len(offs))]
        w = mp.lu_solve(mp.matrix(rows), mp.matrix(rhs))
        return offs, [w[i] for i in range(len(offs))]


def fd_magnus_term(ell, n, t, t0, params, h=1e-3):
    """M_n^[ell] from finite differences of M(kappa) at kappa = 0.

    Fourth-order central stencil at steps h and h/2 plus one Richardson
    step; evaluated at 40 significant digits so roundoff never limits the
    high orders.
    """
    w = coupling_w(n, params)
    n_half = ell // 2 + 2
    offs, wts = _stencil(ell, n_half)
    with mp.workdps(40):
        def deriv(step):
            acc = [[mp.mpc(0), mp.mpc(0)], [mp.mpc(0), mp.mpc(0)]]
            for o, wt in zip(offs, wts):
                if wt == 0:
                    continue
                mat = _mp_exponent(mp.mpf(step) * o, mp.mpf(w), params.delta_omega, t, t0)
                for i in range(2):
                    for j in range(2):
                        acc[i][j] += wt * mat[i][j]
            return [[acc[i][j] / mp.mpf(step) ** ell for j in range(2)] for i in range(2)]

        d1 = deriv(h)
        d2 = deriv(h / 2)
        extrap = [[(16 * d2[i][j] - d1[i][j]) / 15 for j in range(2)] for i in range(2)]
        pref = (1j) ** (ell - 1) / mp.factorial(ell)
        return np.array(
            [[complex(pref * extrap[i][j]) for j in range(2)] for i in range(2)]
        )


# ---------------------------------------------------------------------------
# ordered nested-commutator quadrature oracle
# ---------------------------------------------------------------------------

def _h_vec(dw, ts):
    """H(t) = w (cos(dw t) sx + sin(dw t) sy): unit coupling direction."""
    return np.stack([np.cos(dw * ts), np.sin(dw * ts), np.zeros_like(ts)], axis=-1)


def _vec_to_matrix(v):
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return v[..., 0] * sx + v[..., 1] * sy + v[..., 2] * sz


def commutator_magnus_2(n, t, t0, params, nodes=64):
    """M^[2] = 1/2 int_{t0}^{t} dt1 int_{t0}^{t1} dt2 [H(t1), H(t2)]."""
    w = coupling_w(n, params)
    dw = params.delta_omega
    x, wt = leggauss(nodes)
    t1 = t0 + 0.5 * (t - t0) * (x + 1.0)
    w1 = 0.5 * (t - t0) * wt
    acc = np.zeros(3)
    for tt1, q1 in zip(t1, w1):
        t2 = t0 + 0.5 * (tt1 - t0) * (x + 1.0)
        w2 = 0.5 * (tt1 - t0) * wt
        n1 = _h_vec(dw, np.array([tt1]))[0]
        n2 = _h_vec(dw, t2)
        acc = acc + q1 * (w2[:, None] * np.cross(n1, n2)).sum(axis=0)
    # [a.s, b.s] = 2i (a x b).s
    return 0.5 * w * w * 2j * _vec_to_matrix(acc)


def commutator_magnus_3(n, t, t0, params, nodes=40):
    """M^[3] = 1/6 int dt1 int^t1 dt2 int^t2 dt3 of
    [H1,[H2,H3]] + [H3,[H2,H1]]."""
    w = coupling_w(n, params)
    dw = params.delta_omega
    x, wt = leggauss(nodes)
    acc = np.zeros(3)
    t1 = t0 + 0.5 * (t - t0) * (x + 1.0)
    w1 = 0.5 * (t - t0) * wt
    for tt1, q1 in zip(t1, w1):
        t2 = t0 + 0.5 * (tt1 - t0) * (x + 1.0)
        w2 = 0.5 * (tt1 - t0) * wt
        n1 = _h_vec(dw, np.array([tt1]))[0]
        for tt2, q2 in zip(t2, w2):
            t3 = t0 + 0.5 * (tt2 - t0) * (x + 1.0)
            w3 = (0.5 * (tt2 - t0) * wt)[:, None]
            n2 = _h_vec(dw, np.array([tt2]))[0]
            n3 = _h_vec(dw, t3)
            inner = np.cross(n2, n3)           # [H2,H3] direction
            term1 = np.cross(n1, inner)        # [H1,[H2,H3]]
            inner2 = np.cross(n2, n1)          # [H2,H1]
            term2 = np.cross(n3, inner2)       # [H3,[H2,H1]]
            acc = acc + q1 * q2 * (w3 * (term1 + term2)).sum(axis=0)
    # two nested commutators: (2i)^2 multiplies cross-of-cross
    return (w**3 / 6.0) * (2j) ** 2 * _vec_to_matrix(acc)
