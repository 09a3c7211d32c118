"""The degree-three second-order theta function built from reduced values.

The central objects are the reduced values h_a(tau) (signed products of 16
even theta constants), the 8-term explicit formula for the order-two theta
function phi(z, tau) that vanishes to order >= 4 at the origin, and the
hyperelliptic-locus quantities psi and xi.  Products of 16 to 280 theta
constants overflow binary64, so all such products are carried in log form
(LogComplex).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .chars import (
    Characteristic,
    add,
    decompose_for,
    build_fundamental_system,
    enumerate_all,
    enumerate_by_parity,
    j_pair_sign,
    pair_sign,
    parity_sign,
    pencil_representatives,
)
from .errors import (
    BadCharacteristic,
    AmbiguousVanishingNull,
    LostPositivity,
    NearPole,
    NoConvergence,
    NotHyperelliptic,
    NoVanishingNull,
)
from .theta import (
    PeriodMatrix,
    Tolerance,
    get_evaluator,
    p_norm,
    theta_char,
    theta_null_table,
)


def _wrap_angle(t: float) -> float:
    """Wrap into (-pi, pi]."""
    w = math.remainder(t, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class LogComplex:
    """A complex number stored as (log magnitude, argument).

    ``logabs = -inf`` encodes an exact zero.  Multiplication adds logabs and
    wraps the argument into (-pi, pi], so products of hundreds of factors
    never overflow.
    """

    logabs: float
    arg: float = 0.0

    @classmethod
    def from_complex(cls, w) -> "LogComplex":
        w = complex(w)
        if w == 0:
            return cls(float("-inf"), 0.0)
        return cls(math.log(abs(w)), cmath.phase(w))

    @classmethod
    def from_sign(cls, s: int) -> "LogComplex":
        return cls(0.0, 0.0 if s > 0 else math.pi)

    @property
    def is_zero(self) -> bool:
        return self.logabs == float("-inf")

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        if self.is_zero or other.is_zero:
            return LogComplex(float("-inf"), 0.0)
        return LogComplex(self.logabs + other.logabs, _wrap_angle(self.arg + other.arg))

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        if other.is_zero:
            raise ZeroDivisionError("division by an exact LogComplex zero")
        if self.is_zero:
            return self
        return LogComplex(self.logabs - other.logabs, _wrap_angle(self.arg - other.arg))

    def __pow__(self, n: int) -> "LogComplex":
        if self.is_zero:
            return self
        return LogComplex(n * self.logabs, _wrap_angle(n * self.arg))

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0.0 + 0.0j
        return cmath.rect(math.exp(self.logabs), self.arg)


def _first_admissible_k(a: Characteristic):
    """First even k in canonical order with k + a even."""
    even, _ = enumerate_by_parity(a.g)
    for k in even:
        if parity_sign(add(k, a)) == 1:
            return k
    raise BadCharacteristic(f"no admissible even k for {a}")


def _null_at_vector(twice, nulls) -> complex:
    """Theta null at a possibly non-reduced characteristic vector.

    ``twice`` holds 2x the half-integer vector (length 2g, any integers).
    Writing the vector as reduced representative r plus an integer shift n,
    the null picks up the sign exp(2 pi i r'^T n'') relative to the table
    entry at r.
    """
    g = len(twice) // 2
    top = tuple(t & 1 for t in twice[:g])
    bottom = tuple(t & 1 for t in twice[g:])
    shift = sum(top[i] * ((twice[g + i] - bottom[i]) // 2) for i in range(g))
    sign = -1 if shift % 2 else 1
    return sign * nulls[Characteristic(top, bottom)]


def reduced_value_with_k(a: Characteristic, k: Characteristic, reps, nulls) -> LogComplex:
    """The reduced value h_a from the pencil representative with odd-sum k.

    Sign (j, a) exact on fixed representatives, times the product of the 16
    even theta constants at k x1 x2 x3 eps, where {x1, x2, x3} runs over the
    three-element subsets of the 4-subset with product a and eps over its
    complement.  Each factor is the actual vector sum of representatives
    (theta nulls are not class functions), reduced with its exact sign.
    """
    dec = decompose_for(a, k, reps)
    out = LogComplex.from_sign(j_pair_sign(dec.j, a))
    g = a.g
    odd = [m for m in dec.system.members if parity_sign(m) == -1]
    k_twice = [sum(m.top[i] for m in odd) for i in range(g)]
    k_twice += [sum(m.bottom[i] for m in odd) for i in range(g)]
    for x in dec.four:
        three = [y for y in dec.four if y != x]
        base = list(k_twice)
        for y in three:
            for i in range(g):
                base[i] += y.top[i]
                base[g + i] += y.bottom[i]
        for eps in dec.rest:
            t = list(base)
            for i in range(g):
                t[i] += eps.top[i]
                t[g + i] += eps.bottom[i]
            out = out * LogComplex.from_complex(_null_at_vector(t, nulls))
    return out


class FrobeniusContext:
    """Everything needed to evaluate phi at a fixed period matrix.

    Holds the 36 pencil representatives, the even theta-null table, the
    64-entry table of reduced values (log form), the best-conditioned even
    characteristic k_star (maximal |theta null|), and the translation
    parameter b of the explicit formula.  Immutable after construction.
    """

    def __init__(self, tau: PeriodMatrix, tol: Tolerance, reps, nulls,
                 k_star: Characteristic, h_table: dict, b: Characteristic,
                 flags):
        self.tau = tau
        self.tol = tol
        self.reps = reps
        self.nulls = nulls
        self.k_star = k_star
        self.h_table = h_table
        self.b = b
        self.flags = tuple(flags)
        self._rep_by_k = {rep.k: rep for rep in reps}

    @property
    def near_decomposable(self) -> bool:
        return "near-decomposable" in self.flags

    def rep_for(self, k: Characteristic):
        return self._rep_by_k[k]


def build_frobenius_context(tau: PeriodMatrix, tol: Tolerance = Tolerance(),
                            b: Characteristic | None = None) -> FrobeniusContext:
    """Precompute pencil representatives, nulls, all 64 reduced values, k_star.

    The reduced value of each nonzero a uses the first admissible even k in
    canonical order; independence of this choice is a tested property, not an
    assumption.
    """
    if tau.g != 3:
        raise BadCharacteristic("the second-order construction requires g = 3")
    base = build_fundamental_system()
    reps = pencil_representatives(base)
    nulls = theta_null_table(tau, tol)
    k_star = max(sorted(nulls, key=lambda c: c.index), key=lambda c: abs(nulls[c]))
    h_table = {}
    for a in enumerate_all(3):
        if a.is_zero:
            h_table[a] = LogComplex(float("-inf"), 0.0)
        else:
            h_table[a] = reduced_value_with_k(a, _first_admissible_k(a), reps, nulls)
    flags = []
    mags = sorted(abs(v) for v in nulls.values())
    median = mags[len(mags) // 2]
    n_small = sum(1 for v in nulls.values() if abs(v) < 1e-10 * median)
    if n_small >= 2:
        flags.append("near-decomposable")
    if b is None:
        b = Characteristic.zero(3)
    return FrobeniusContext(tau, tol, reps, nulls, k_star, h_table, b, flags)


def reduced_value(a: Characteristic, ctx: FrobeniusContext) -> LogComplex:
    """The reduced value h_a(tau); exact zero for a = 0."""
    return ctx.h_table[a]


def _phi_terms(ctx: FrobeniusContext):
    """The (characteristic, complex coefficient) pairs of the 8-term formula,
    already divided by theta_{k_star}(0)^2."""
    system = ctx.rep_for(ctx.k_star)
    denom = ctx.nulls[ctx.k_star] ** 2
    terms = []
    for lam in system.members:
        bl = add(ctx.b, lam)
        kbl = add(ctx.k_star, bl)
        h = ctx.h_table[bl]
        if h.is_zero:
            continue
        coeff = pair_sign(kbl, bl) * h.to_complex() / denom
        terms.append((kbl, coeff))
    return terms


def frobenius_phi(z, ctx: FrobeniusContext, tol: Tolerance | None = None) -> complex:
    """phi(z, tau) from the explicit 8-term sum of squared theta functions."""
    tol = tol or ctx.tol
    out = 0.0 + 0.0j
    for kbl, coeff in _phi_terms(ctx):
        th = theta_char(kbl, z, ctx.tau, tol)
        out += coeff * th * th
    return out


def phi_batch(ctx: FrobeniusContext, z0: np.ndarray) -> np.ndarray:
    """phi at a batch of reduced points z0 (B, g)."""
    out = np.zeros(z0.shape[0], dtype=np.complex128)
    for kbl, coeff in _phi_terms(ctx):
        th = get_evaluator(ctx.tau, kbl, ctx.tol).values(z0)
        out += coeff * th * th
    return out


def norm_phi(z, ctx: FrobeniusContext) -> float:
    """||phi||(z, tau) = (det Y)^4 ||P||^2 |phi| (weight eight, index one)."""
    return ctx.tau.det_y**4 * p_norm(z, ctx.tau) ** 2 * abs(frobenius_phi(z, ctx))


def f_a_value(a: Characteristic, z, ctx: FrobeniusContext) -> complex:
    """The lattice-periodic quotient f_a(z) = phi(z) / theta_a(z)^2."""
    th = theta_char(a, z, ctx.tau, ctx.tol)
    # compare ||theta_a||(z) against the largest null norm; det Y factors cancel
    scale = max(abs(v) for v in ctx.nulls.values())
    if p_norm(z, ctx.tau) * abs(th) < 1e-12 * scale:
        raise NearPole(f"theta_{a} vanishes at this point")
    return frobenius_phi(z, ctx) / (th * th)


def find_vanishing_even_null(tau: PeriodMatrix, threshold: float = 1e-10,
                             tol: Tolerance = Tolerance()):
    """The unique even characteristic with |theta_a(0)| below threshold*median.

    Returns None at a generic tau; raises AmbiguousVanishingNull when two or
    more nulls vanish (decomposable locus).
    """
    nulls = theta_null_table(tau, tol)
    mags = sorted(abs(v) for v in nulls.values())
    median = mags[len(mags) // 2]
    below = [a for a in sorted(nulls, key=lambda c: c.index)
             if abs(nulls[a]) < threshold * median]
    if not below:
        return None
    if len(below) > 1:
        raise AmbiguousVanishingNull(below)
    return below[0]


def psi_log(ctx: FrobeniusContext, a: Characteristic) -> LogComplex:
    """psi(tau) = (k,a) h_a(tau) / theta_{ka}(0,tau)^2 on the hyperelliptic locus."""
    k = find_vanishing_even_null(ctx.tau, tol=ctx.tol)
    if k is None:
        raise NotHyperelliptic("no vanishing even theta constant")
    if a.is_zero:
        raise BadCharacteristic("a must be nonzero")
    ka = add(k, a)
    if parity_sign(ka) != 1:
        raise BadCharacteristic(f"k + a = {ka} is odd; h_a vanishes here")
    sign = LogComplex.from_sign(pair_sign(k, a))
    return sign * ctx.h_table[a] / (LogComplex.from_complex(ctx.nulls[ka]) ** 2)


def xi_log(tau: PeriodMatrix, tol: Tolerance = Tolerance()) -> LogComplex:
    """Log of the product of the 35 non-vanishing even theta constants to the
    eighth power, at a hyperelliptic tau."""
    k = find_vanishing_even_null(tau, tol=tol)
    if k is None:
        raise NoVanishingNull("no vanishing even theta constant")
    nulls = theta_null_table(tau, tol)
    out = LogComplex(0.0, 0.0)
    count = 0
    for a in sorted(nulls, key=lambda c: c.index):
        if a == k:
            continue
        out = out * (LogComplex.from_complex(nulls[a]) ** 8)
        count += 1
    assert count == 35
    return out


def norm_xi_log(tau: PeriodMatrix, tol: Tolerance = Tolerance()) -> float:
    """log ||xi||(tau) = 140 * (1/2) log det Y + log |xi(tau)|."""
    return xi_log(tau, tol).logabs + 70.0 * math.log(tau.det_y)


def locate_hyperelliptic(tau0: PeriodMatrix, k: Characteristic,
                         max_iter: int = 50,
                         tol: Tolerance = Tolerance()) -> PeriodMatrix:
    """Newton iteration driving theta_k(0, tau0 + t E11) to zero in t.

    The derivative is a central complex finite difference with step 1e-5;
    steps that break positive definiteness of Im tau or fail to decrease
    |theta_k(0)| are halved.  Stops when |theta_k(0)| <= 1e-12 * median
    |even null|.  Some characteristics only vanish in the decomposable limit
    Im t -> infinity along this slice; iterates escaping beyond |t| = 25 or a
    collapsing derivative raise NoConvergence, and the caller should try a
    different k.
    """
    if parity_sign(k) != 1:
        raise BadCharacteristic("target characteristic must be even")
    base = np.array(tau0.tau)
    e11 = np.zeros_like(base)
    e11[0, 0] = 1.0
    if abs(theta_char(k, np.zeros(tau0.g), tau0, tol)) == 0.0:
        raise BadCharacteristic("theta_k already vanishes at the start point")

    def admissible(t: complex) -> bool:
        # keep iterates inside the conditioning regime of the theta kernel
        y = (base + t * e11).imag
        return float(np.linalg.eigvalsh(0.5 * (y + y.T))[0]) > 0.05

    def null_at(t: complex) -> complex:
        pm = PeriodMatrix(base + t * e11)
        return theta_char(k, np.zeros(pm.g), pm, tol)

    mags = sorted(abs(v) for v in theta_null_table(tau0, tol).values())
    scale = mags[len(mags) // 2]
    h = 1e-5
    t = 0.0 + 0.0j
    for _ in range(max_iter):
        val = null_at(t)
        if abs(val) <= 1e-12 * scale:
            return PeriodMatrix(base + t * e11)
        deriv = (null_at(t + h) - null_at(t - h)) / (2.0 * h)
        if abs(deriv) < 1e-14 * scale:
            raise NoConvergence(
                "derivative underflow; the zero may lie at the decomposable "
                "boundary for this characteristic")
        step = -val / deriv
        halvings = 0
        while not admissible(t + step):
            step *= 0.5
            halvings += 1
            if halvings > 60:
                raise LostPositivity("no admissible Newton step")
        halvings = 0
        while abs(null_at(t + step)) >= abs(val):
            step *= 0.5
            halvings += 1
            if halvings > 40:
                raise NoConvergence("Newton stalled at a non-zero minimum")
        t = t + step
        if abs(t) > 25.0:
            raise NoConvergence(
                "iterates escaping to infinity; the zero for this "
                "characteristic lies at the decomposable boundary")
    raise NoConvergence(f"theta_{k} null not reached in {max_iter} iterations")
