"""Assembly of the headline real invariants from the two torus integrals.

The Kawazumi-Zhang invariant, the Faltings delta invariant, lambda, and the
chosen representative of the Hain-Reed class are all exact rational
combinations of log||H|| and log||K|| plus explicit constants.  Error fields
propagate linearly from the two integral standard errors with those exact
rational coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chars import Characteristic
from .errors import NearPole, NotHyperelliptic
from .frobenius import (
    FrobeniusContext,
    build_frobenius_context,
    f_a_value,
    find_vanishing_even_null,
    norm_xi_log,
)
from .integrate import IntegrationResult, QmcPlan, log_H, log_K, mean_log_fa
from .theta import PeriodMatrix, Tolerance

_LOG2 = math.log(2.0)
_LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ValueWithError:
    value: float
    err: float

    def to_json(self) -> dict:
        return {"value": self.value, "err": self.err}


@dataclass(frozen=True)
class InvariantReport:
    log_h: IntegrationResult
    log_k: IntegrationResult
    phi_kz: ValueWithError
    delta: ValueWithError
    lam: ValueWithError
    beta_rep: ValueWithError
    wilms_residual: float
    flags: tuple = ()

    def to_json(self) -> dict:
        return {
            "log_H": self.log_h.to_json(),
            "log_K": self.log_k.to_json(),
            "phi_kz": self.phi_kz.to_json(),
            "delta": self.delta.to_json(),
            "lambda": self.lam.to_json(),
            "beta_rep": self.beta_rep.to_json(),
            "wilms_residual": self.wilms_residual,
            "flags": list(self.flags),
        }


def assemble(log_h: IntegrationResult, log_k: IntegrationResult,
             flags=()) -> InvariantReport:
    """Exact rational assembly of the invariants from the two integrals."""
    lh, lk = log_h.mean, log_k.mean
    sh, sk = log_h.stderr, log_k.stderr
    g = 3

    phi = -(2.0 / 3.0) * lk + (32.0 / 3.0) * lh + 8.0 * _LOG2
    phi_err = (2.0 / 3.0) * sk + (32.0 / 3.0) * sh

    delta = -(4.0 / 3.0) * lk - (8.0 / 3.0) * lh - 24.0 * _LOG2PI + 16.0 * _LOG2
    delta_err = (4.0 / 3.0) * sk + (8.0 / 3.0) * sh

    lam = (g - 1) / (6.0 * (2 * g + 1)) * phi + delta / 12.0 - (g / 3.0) * _LOG2PI
    lam_err = phi_err / 21.0 + delta_err / 12.0

    beta = -4.0 * lk + 8.0 * lh
    beta_err = 4.0 * sk + 8.0 * sh

    wilms_residual = delta - (-24.0 * lh + 2.0 * phi - 8.0 * g * _LOG2PI)

    return InvariantReport(
        log_h, log_k,
        ValueWithError(phi, phi_err),
        ValueWithError(delta, delta_err),
        ValueWithError(lam, lam_err),
        ValueWithError(beta, beta_err),
        wilms_residual,
        tuple(flags),
    )


def invariants_report(tau: PeriodMatrix, plan: QmcPlan = QmcPlan(),
                      tol: Tolerance = Tolerance(),
                      ctx: FrobeniusContext | None = None) -> InvariantReport:
    """Full report at tau: both integrals plus the assembled invariants."""
    if ctx is None:
        ctx = build_frobenius_context(tau, tol)
    lh = log_H(tau, plan, tol)
    lk = log_K(ctx, plan)
    return assemble(lh, lk, ctx.flags)


@dataclass(frozen=True)
class HyperellipticCrossCheck:
    phi_main: ValueWithError
    phi_hyp: ValueWithError
    sigma_combined: float

    def to_json(self) -> dict:
        return {
            "phi_main": self.phi_main.to_json(),
            "phi_hyp": self.phi_hyp.to_json(),
            "sigma_combined": self.sigma_combined,
        }


def hyperelliptic_cross_check(tau_star: PeriodMatrix,
                              plan: QmcPlan = QmcPlan(),
                              tol: Tolerance = Tolerance()) -> HyperellipticCrossCheck:
    """Two independent routes to the Kawazumi-Zhang invariant at a
    hyperelliptic period matrix.

    The main route uses both torus integrals; the deterministic xi route
    replaces the phi integral by -(1/30) log||xi|| + (28/3) log||H|| + 8 log 2
    and shares only the log||H|| estimate.  sigma_combined propagates the
    stderrs through the difference of the two expressions, accounting for the
    shared log||H|| sample.
    """
    if find_vanishing_even_null(tau_star, tol=tol) is None:
        raise NotHyperelliptic("no vanishing even theta constant at tau")
    ctx = build_frobenius_context(tau_star, tol)
    lh = log_H(tau_star, plan, tol)
    lk = log_K(ctx, plan)
    report = assemble(lh, lk, ctx.flags)
    lxi = norm_xi_log(tau_star, tol)
    phi_hyp = -(1.0 / 30.0) * lxi + (28.0 / 3.0) * lh.mean + 8.0 * _LOG2
    phi_hyp_err = (28.0 / 3.0) * lh.stderr
    # difference = -(2/3) log||K|| + (4/3) log||H|| + (1/30) log||xi||
    sigma = (2.0 / 3.0) * lk.stderr + (4.0 / 3.0) * lh.stderr
    return HyperellipticCrossCheck(report.phi_kz,
                                   ValueWithError(phi_hyp, phi_hyp_err), sigma)


def ceresa_height(a: Characteristic, d, ctx: FrobeniusContext,
                  plan: QmcPlan = QmcPlan()) -> ValueWithError:
    """Archimedean height pairing 2 log|f_a|(D) - 2 * mean of log|f_a|.

    Raises NearPole when D lies numerically on the divisor of theta_a or of
    phi.
    """
    fd = f_a_value(a, d, ctx)
    if fd == 0:
        raise NearPole("phi vanishes at D")
    mean = mean_log_fa(a, ctx, plan)
    value = 2.0 * math.log(abs(fd)) - 2.0 * mean.mean
    return ValueWithError(value, 2.0 * mean.stderr)
