"""Randomized quasi-Monte Carlo integration over the torus C^g / L_tau.

Points come from an unscrambled Sobol sequence on [0,1)^{2g} with independent
uniform random shifts mod 1; (x, y) -> tau x + y pushes the unit-cube
Lebesgue measure to normalized Haar measure, so no Jacobian factor appears.
The shift spread drives the reported standard error (log singularities make
plain QMC error bounds inapplicable).

Determinism: the Sobol stream and the shifts depend only on the plan, points
are evaluated into per-index slots, and all reductions run in a fixed order,
so the mean is bit-identical regardless of worker-thread count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .chars import Characteristic
from .errors import G3Error
from .frobenius import FrobeniusContext, phi_batch
from .theta import PeriodMatrix, Tolerance, get_evaluator

_CLAMP = 1e-300
_LOG_CLAMP = math.log(_CLAMP)


@dataclass(frozen=True)
class QmcPlan:
    """Point budget for one torus integral; fully determines the point set."""

    n_points: int = 2**20
    n_shifts: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.n_points < 2**10 or self.n_points & (self.n_points - 1):
            raise ValueError("n_points must be a power of two >= 2^10")
        if self.n_shifts < 4:
            raise ValueError("n_shifts must be >= 4")


@dataclass(frozen=True)
class IntegrationResult:
    mean: float
    stderr: float
    n_points: int
    n_shifts: int
    seed: int
    flagged_points: int

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n_points": self.n_points,
            "n_shifts": self.n_shifts,
            "seed": self.seed,
            "flagged": self.flagged_points,
        }


@dataclass(frozen=True)
class LogNormTheta:
    """log ||theta_a|| against normalized Haar measure."""

    a: Characteristic = Characteristic.zero(3)


@dataclass(frozen=True)
class NormThetaSquared:
    """||theta_a||^2; smooth, integrates to 2^{-g/2}."""

    a: Characteristic = Characteristic.zero(3)


@dataclass(frozen=True)
class LogNormPhi:
    """log ||phi||; needs a FrobeniusContext as target."""


@dataclass(frozen=True)
class LogAbsFa:
    """log |f_a| = log |phi / theta_a^2|; needs a FrobeniusContext."""

    a: Characteristic


@dataclass(frozen=True)
class ConstantIntegrand:
    """Test hook: a constant function on the torus."""

    value: float


class NearDecomposableWarning(UserWarning):
    """The context flagged tau as near-decomposable; log||K|| diverges there."""


def _clamped_log_abs(values: np.ndarray):
    a = np.abs(values)
    flagged = int(np.count_nonzero(a < _CLAMP))
    return np.log(np.maximum(a, _CLAMP)), flagged


def _make_evaluator(integrand, target, tol: Tolerance):
    """Returns (tau, f) with f(x0, z0) -> (per-point values, flagged count)."""
    if isinstance(target, FrobeniusContext):
        ctx, tau = target, target.tau
    else:
        ctx, tau = None, target
    ln_det_y = math.log(tau.det_y)

    if isinstance(integrand, ConstantIntegrand):
        def f(x0, z0):
            return np.full(x0.shape[0], integrand.value), 0
        return tau, f

    if isinstance(integrand, (LogNormTheta, NormThetaSquared)):
        ev = get_evaluator(tau, integrand.a, tol)
        if isinstance(integrand, NormThetaSquared):
            def f(x0, z0):
                pe = -np.pi * np.einsum("bi,ij,bj->b", x0, tau.y, x0)
                th = np.abs(ev.values(z0))
                return math.sqrt(tau.det_y) * np.exp(2.0 * pe) * th * th, 0
        else:
            def f(x0, z0):
                pe = -np.pi * np.einsum("bi,ij,bj->b", x0, tau.y, x0)
                logs, flagged = _clamped_log_abs(ev.values(z0))
                return 0.25 * ln_det_y + pe + logs, flagged
        return tau, f

    if isinstance(integrand, LogNormPhi):
        if ctx is None:
            raise G3Error("LogNormPhi needs a FrobeniusContext target")

        def f(x0, z0):
            pe = -np.pi * np.einsum("bi,ij,bj->b", x0, tau.y, x0)
            logs, flagged = _clamped_log_abs(phi_batch(ctx, z0))
            return 4.0 * ln_det_y + 2.0 * pe + logs, flagged
        return tau, f

    if isinstance(integrand, LogAbsFa):
        if ctx is None:
            raise G3Error("LogAbsFa needs a FrobeniusContext target")
        ev = get_evaluator(tau, integrand.a, tol)

        def f(x0, z0):
            log_phi, fl1 = _clamped_log_abs(phi_batch(ctx, z0))
            log_th, fl2 = _clamped_log_abs(ev.values(z0))
            return log_phi - 2.0 * log_th, fl1 + fl2
        return tau, f

    raise G3Error(f"unknown integrand {integrand!r}")


def integrate_torus(integrand, target, plan: QmcPlan = QmcPlan(),
                    tol: Tolerance = Tolerance(),
                    chunk: int = 1 << 16) -> IntegrationResult:
    """Shift-randomized QMC mean of the integrand over the torus.

    ``target`` is a PeriodMatrix, or a FrobeniusContext for phi-based
    integrands.  The mean is over points, the standard error is the sample
    deviation across shifts divided by sqrt(n_shifts).  Divergent log values
    are clamped at ln(1e-300) and counted in ``flagged_points``.
    """
    tau, f = _make_evaluator(integrand, target, tol)
    g = tau.g
    sob = qmc.Sobol(d=2 * g, scramble=False)
    u = sob.random_base2(int(math.log2(plan.n_points)))
    rng = np.random.default_rng(plan.seed)
    shifts = rng.random((plan.n_shifts, 2 * g))
    shift_means = np.empty(plan.n_shifts)
    flagged = 0
    for si in range(plan.n_shifts):
        v = u + shifts[si]
        v -= np.floor(v + 0.5)  # fractional parts in [-1/2, 1/2)
        total = 0.0
        for lo in range(0, plan.n_points, chunk):
            w = v[lo:lo + chunk]
            x0 = w[:, :g]
            y0 = w[:, g:]
            z0 = x0 @ tau.tau + y0
            vals, fl = f(np.ascontiguousarray(x0), z0)
            total += float(np.sum(vals))
            flagged += fl
        shift_means[si] = total / plan.n_points
    mean = float(np.mean(shift_means))
    stderr = float(np.std(shift_means, ddof=1) / math.sqrt(plan.n_shifts))
    return IntegrationResult(mean, stderr, plan.n_points, plan.n_shifts,
                             plan.seed, flagged)


def log_H(tau: PeriodMatrix, plan: QmcPlan = QmcPlan(),
          tol: Tolerance = Tolerance(),
          a: Characteristic | None = None) -> IntegrationResult:
    """log ||H|| = integral of log ||theta_a||; independent of a."""
    a = a if a is not None else Characteristic.zero(tau.g)
    return integrate_torus(LogNormTheta(a), tau, plan, tol)


def log_K(ctx: FrobeniusContext, plan: QmcPlan = QmcPlan()) -> IntegrationResult:
    """log ||K|| = integral of log ||phi|| over the torus."""
    if ctx.near_decomposable:
        warnings.warn(
            "tau flagged near-decomposable; log||K|| diverges to -inf "
            "along this locus", NearDecomposableWarning)
    return integrate_torus(LogNormPhi(), ctx, plan, ctx.tol)


def mean_log_fa(a: Characteristic, ctx: FrobeniusContext,
                plan: QmcPlan = QmcPlan()) -> IntegrationResult:
    """Mean of log |f_a| over the torus (the subtracted term of the height
    pairing formula)."""
    return integrate_torus(LogAbsFa(a), ctx, plan, ctx.tol)
