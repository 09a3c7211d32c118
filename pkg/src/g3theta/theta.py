"""Numerical evaluation of theta functions with characteristics.

Evaluation strategy: every argument is first reduced modulo the lattice
L_tau = tau Z^g + Z^g, the truncated Gaussian series is summed at the reduced
point, and the functional-equation factor sqrt(((a,m))) * e_m is restored.
The truncation radius follows a Gaussian tail bound with a safety margin and
is validated empirically by radius doubling (see the test suite), not by a
proven constant.

Supported condition regime: lambda_min(Im tau) >= 0.1 and |tau|_max <= 20.
Outside it everything still runs but accuracy claims are void.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._lattice import lattice_sum
from .chars import Characteristic, enumerate_by_parity
from .errors import DimensionMismatch, IllConditioned, NotPositiveDefinite


@dataclass(frozen=True)
class Tolerance:
    """Relative truncation target for the theta series."""

    eps_trunc: float = 1e-14

    def __post_init__(self):
        if not 0.0 < self.eps_trunc < 1e-6:
            raise ValueError("eps_trunc must lie in (0, 1e-6)")


class PeriodMatrix:
    """A point tau of the Siegel upper half space with cached decompositions.

    Immutable after construction (the internal evaluator cache is a memo and
    does not affect results); safe for unrestricted concurrent reads.
    """

    def __init__(self, tau):
        tau = np.atleast_2d(np.asarray(tau, dtype=np.complex128))
        if tau.shape[0] != tau.shape[1]:
            raise DimensionMismatch(f"period matrix must be square, got {tau.shape}")
        asym = float(np.max(np.abs(tau - tau.T))) if tau.size else 0.0
        if asym > 1e-6:
            raise NotPositiveDefinite(f"period matrix is not symmetric (|asym|={asym:.3e})")
        tau = 0.5 * (tau + tau.T)
        y = np.ascontiguousarray(tau.imag)
        eigs = np.linalg.eigvalsh(y)
        if eigs[0] <= 0.0:
            raise NotPositiveDefinite("imaginary part not positive definite")
        self.g = tau.shape[0]
        self.tau = tau
        self.y = y
        self.y_inv = np.linalg.inv(y)
        self.y_chol = np.linalg.cholesky(y)
        self.det_y = float(np.prod(eigs))
        self.lambda_min = float(eigs[0])
        self._evaluators: dict = {}
        self.tau.setflags(write=False)

    def __repr__(self):
        return f"PeriodMatrix(g={self.g}, lambda_min={self.lambda_min:.4g})"


@dataclass(frozen=True)
class ReducedPoint:
    """z = z0 + tau*m_top + m_bottom with z0 = tau*x0 + y0, x0,y0 in [-1/2,1/2)."""

    z0: np.ndarray
    m_top: np.ndarray
    m_bottom: np.ndarray
    x0: np.ndarray
    y0: np.ndarray


def _frac_center(v):
    """Fractional part in [-1/2, 1/2) together with the integer part."""
    m = np.floor(v + 0.5).astype(np.int64)
    return v - m, m


def reduce_point(tau: PeriodMatrix, z) -> ReducedPoint:
    """Split z into a reduced point plus a lattice vector of L_tau."""
    z = np.asarray(z, dtype=np.complex128).reshape(tau.g)
    x = tau.y_inv @ z.imag
    y = z.real - tau.tau.real @ x
    x0, m_top = _frac_center(x)
    y0, m_bottom = _frac_center(y)
    z0 = tau.tau @ x0 + y0
    return ReducedPoint(z0, m_top, m_bottom, x0, y0)


def e_factor(m_top, m_bottom, z, tau: PeriodMatrix) -> complex:
    """The automorphy factor e_m(z,tau) = exp(-pi i m'^T tau m' - 2 pi i m'^T z)."""
    mt = np.asarray(m_top, dtype=np.float64).reshape(tau.g)
    z = np.asarray(z, dtype=np.complex128).reshape(tau.g)
    expo = -1j * np.pi * (mt @ tau.tau @ mt) - 2j * np.pi * (mt @ z)
    return complex(np.exp(expo))


def eta_factor(a: Characteristic, z, tau: PeriodMatrix) -> complex:
    """exp(-pi i a'^T tau a' - 2 pi i a'^T (z + a'')), on the {0,1/2} representative."""
    ap = np.array(a.top, dtype=np.float64) / 2.0
    app = np.array(a.bottom, dtype=np.float64) / 2.0
    z = np.asarray(z, dtype=np.complex128).reshape(tau.g)
    expo = -1j * np.pi * (ap @ tau.tau @ ap) - 2j * np.pi * (ap @ (z + app))
    return complex(np.exp(expo))


def sqrt_pair_sign(a: Characteristic, m_top, m_bottom) -> int:
    """The exact sign sqrt(((a,m))) = exp(2 pi i (a'^T m'' - m'^T a''))."""
    s = sum(t * int(mb) for t, mb in zip(a.top, m_bottom))
    s -= sum(int(mt) * b for mt, b in zip(m_top, a.bottom))
    return -1 if s % 2 else 1


class ThetaEvaluator:
    """Precomputed truncated series for theta_a(., tau) at reduced points.

    The integer box covers the ellipsoid |n + a' + x0|_Y <= R for every
    x0 in [-1/2, 1/2)^g, where R follows the Gaussian tail rule
    R = sqrt(max(1, -ln eps) / (pi lambda_min)) + 2.5.
    """

    def __init__(self, tau: PeriodMatrix, a: Characteristic,
                 tol: Tolerance = Tolerance(), radius_factor: float = 1.0):
        if a.g != tau.g:
            raise DimensionMismatch("characteristic degree does not match tau")
        g = tau.g
        ap = np.array(a.top, dtype=np.float64) / 2.0
        app = np.array(a.bottom, dtype=np.float64) / 2.0
        radius = math.sqrt(max(1.0, -math.log(tol.eps_trunc)) / (math.pi * tau.lambda_min))
        radius = (radius + 2.5) * radius_factor
        # worst-case offset of x0 over the corners of [-1/2, 1/2]^g
        corner = max(
            float(np.array(s) @ tau.y @ np.array(s))
            for s in itertools.product((-0.5, 0.5), repeat=g)
        )
        r_eff = radius + math.sqrt(corner)
        half = r_eff * np.sqrt(np.diag(tau.y_inv))
        axes = [
            np.arange(math.ceil(-ap[i] - half[i]), math.floor(-ap[i] + half[i]) + 1)
            for i in range(g)
        ]
        n_box = 1
        for ax in axes:
            if len(ax) == 0:
                raise IllConditioned("empty truncation box")
            n_box *= len(ax)
        if n_box > 20_000_000:
            raise IllConditioned(
                f"truncation box needs {n_box} lattice points; tau is outside "
                "the supported conditioning regime")
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, g)
        m = grid.astype(np.float64) + ap
        keep = np.einsum("ni,ij,nj->n", m, tau.y, m) <= r_eff * r_eff
        m = np.ascontiguousarray(m[keep])
        grid = grid[keep]
        expo = 1j * np.pi * np.einsum("ni,ij,nj->n", m, tau.tau, m)
        expo = expo + 2j * np.pi * (m @ app)
        n_min = np.array([int(ax[0]) for ax in axes], dtype=np.int64)
        self.tau = tau
        self.a = a
        self.m = m
        self.q = np.ascontiguousarray(np.exp(expo))
        self.idx = np.ascontiguousarray(grid - n_min)
        self.starts = n_min.astype(np.float64) + ap
        self.lens = np.array([len(ax) for ax in axes], dtype=np.int64)

    @property
    def n_terms(self) -> int:
        return self.m.shape[0]

    def values(self, z0) -> np.ndarray:
        """theta_a at a batch of reduced points z0 (B, g)."""
        z0 = np.ascontiguousarray(np.asarray(z0, dtype=np.complex128))
        return lattice_sum(self.idx, self.starts, self.lens, self.q, z0)

    def value(self, z0) -> complex:
        return complex(self.values(np.reshape(z0, (1, self.tau.g)))[0])


def get_evaluator(tau: PeriodMatrix, a: Characteristic,
                  tol: Tolerance = Tolerance(),
                  radius_factor: float = 1.0) -> ThetaEvaluator:
    """Memoized ThetaEvaluator for (tau, a, tol, radius_factor)."""
    key = (a, tol.eps_trunc, radius_factor)
    ev = tau._evaluators.get(key)
    if ev is None:
        ev = ThetaEvaluator(tau, a, tol, radius_factor)
        tau._evaluators[key] = ev
    return ev


def theta_char(a: Characteristic, z, tau: PeriodMatrix,
               tol: Tolerance = Tolerance(), radius_factor: float = 1.0) -> complex:
    """theta_a(z, tau) with relative truncation error <= tol.eps_trunc.

    The argument is always reduced before summation; the functional-equation
    factor sqrt(((a,m))) * e_m(z0) restores the value at the original z.
    """
    rp = reduce_point(tau, z)
    ev = get_evaluator(tau, a, tol, radius_factor)
    base = ev.value(rp.z0)
    sign = sqrt_pair_sign(a, rp.m_top, rp.m_bottom)
    return sign * e_factor(rp.m_top, rp.m_bottom, rp.z0, tau) * base


def theta_null_table(tau: PeriodMatrix, tol: Tolerance = Tolerance()) -> dict:
    """theta_a(0, tau) for all even characteristics (odd nulls vanish)."""
    even, _ = enumerate_by_parity(tau.g)
    zero = np.zeros(tau.g, dtype=np.complex128)
    return {a: get_evaluator(tau, a, tol).value(zero) for a in even}


def p_norm(z, tau: PeriodMatrix) -> float:
    """exp(-pi (Im z)^T (Im tau)^{-1} (Im z)); always <= 1."""
    zi = np.asarray(z, dtype=np.complex128).reshape(tau.g).imag
    return float(np.exp(-np.pi * (zi @ tau.y_inv @ zi)))


def norm_theta(a: Characteristic, z, tau: PeriodMatrix,
               tol: Tolerance = Tolerance()) -> float:
    """The normalized value ||theta_a||(z, tau) = (det Y)^{1/4} ||P|| |theta_a|."""
    return tau.det_y**0.25 * p_norm(z, tau) * abs(theta_char(a, z, tau, tol))


class SymplecticMatrix:
    """An integer symplectic matrix in g x g blocks A, B, C, D.

    The symplectic relations are verified exactly in integers on
    construction.
    """

    def __init__(self, a, b, c, d):
        self.a = np.asarray(a, dtype=np.int64)
        self.b = np.asarray(b, dtype=np.int64)
        self.c = np.asarray(c, dtype=np.int64)
        self.d = np.asarray(d, dtype=np.int64)
        g = self.a.shape[0]
        for blk in (self.a, self.b, self.c, self.d):
            if blk.shape != (g, g):
                raise DimensionMismatch("blocks must be g x g")
        eye = np.eye(g, dtype=np.int64)
        if (
            np.any(self.a.T @ self.c != self.c.T @ self.a)
            or np.any(self.b.T @ self.d != self.d.T @ self.b)
            or np.any(self.a.T @ self.d - self.c.T @ self.b != eye)
        ):
            raise ValueError("blocks do not satisfy the symplectic relations")
        self.g = g

    @classmethod
    def identity(cls, g: int) -> "SymplecticMatrix":
        eye = np.eye(g, dtype=np.int64)
        zero = np.zeros((g, g), dtype=np.int64)
        return cls(eye, zero, zero, eye)

    @classmethod
    def from_matrix(cls, mat) -> "SymplecticMatrix":
        mat = np.asarray(mat, dtype=np.int64)
        g = mat.shape[0] // 2
        return cls(mat[:g, :g], mat[:g, g:], mat[g:, :g], mat[g:, g:])

    def matrix(self) -> np.ndarray:
        return np.block([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix.from_matrix(self.matrix() @ other.matrix())


def random_symplectic(g: int, rng, n_factors: int = 6) -> SymplecticMatrix:
    """A small random element of Sp(2g, Z), as a product of generators.

    Factors are translations [[I,B],[0,I]] with small symmetric B, unimodular
    block-diagonals [[U,0],[0,U^-T]] from a single elementary row operation,
    and the involution [[0,-I],[I,0]].  Entries stay small so that C tau + D
    remains well conditioned for tau near i*I.
    """
    eye = np.eye(g, dtype=np.int64)
    zero = np.zeros((g, g), dtype=np.int64)
    s = SymplecticMatrix.identity(g)
    for _ in range(n_factors):
        kind = rng.integers(0, 3)
        if kind == 0:
            b = rng.integers(-1, 2, size=(g, g))
            b = np.triu(b)
            b = b + np.triu(b, 1).T
            f = SymplecticMatrix(eye, b, zero, eye)
        elif kind == 1:
            u = eye.copy()
            i, j = rng.integers(0, g, size=2)
            if i != j:
                u[i, j] = int(rng.integers(-1, 2))
            u_inv_t = np.rint(np.linalg.inv(u.T)).astype(np.int64)
            f = SymplecticMatrix(u, zero, zero, u_inv_t)
        else:
            f = SymplecticMatrix(zero, -eye, eye, zero)
        s = s @ f
    return s


def symplectic_apply(s: SymplecticMatrix, z, tau: PeriodMatrix):
    """The action (z, tau) -> (^t(C tau + D)^{-1} z, (A tau + B)(C tau + D)^{-1})."""
    m = s.c @ tau.tau + s.d
    if np.linalg.cond(m) > 1e8:
        raise IllConditioned("C tau + D is too ill-conditioned")
    tau2 = (s.a @ tau.tau + s.b) @ np.linalg.inv(m)
    if float(np.max(np.abs(tau2 - tau2.T))) > 1e-10:
        raise IllConditioned("transformed period matrix lost symmetry")
    z = np.asarray(z, dtype=np.complex128).reshape(tau.g)
    z2 = np.linalg.solve(m.T, z)
    return z2, PeriodMatrix(tau2)
