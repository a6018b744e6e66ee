"""Two-parameter Mittag-Leffler function on the complex plane.

E_{alpha,sigma}(z) = sum_{n>=0} z^n / Gamma(alpha n + sigma)

evaluated three ways: the defining power series (with an extended-precision
fallback when float64 cancellation would eat the answer), the exponentially
growing sector expansion, and the algebraic outer expansion.  ``ml_eval``
glues these together into a single entry point that is accurate on both
sides of the Stokes line and reduces to exp(z) at alpha = sigma = 1.

The series suffers catastrophic cancellation once |z|^(1/alpha) is large and
arg(z)/alpha points away from the positive axis: the peak term grows like
exp(|z|^(1/alpha)) while the value itself can be O(1/|z|).  We estimate the
lost digits up front and sum in mpmath with just enough precision when
float64 cannot deliver the requested tolerance.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np
from scipy.special import gammaln, rgamma

from .errors import DomainError, NonConvergence, OverflowGuard

# mpmath working precision is process-global state; hold this while inside a
# workdps block so threaded sweeps cannot interleave precision changes
_MP_LOCK = threading.Lock()

__all__ = [
    "MLParams",
    "MLAccuracy",
    "DEFAULT_ACCURACY",
    "gamma_reciprocal",
    "sector_half_angle",
    "ml_series",
    "ml_asymptotic_sector",
    "ml_asymptotic_outer",
    "ml_eval",
    "ml_deriv",
]

# Hard cap on series terms before declaring non-convergence.  The adaptive
# cap below can raise this for small alpha where the peak term sits at
# index ~ |z|^(1/alpha)/alpha.
_SERIES_TERM_CAP = 10_000

# exp() overflows past ~709.78; leave headroom for the algebraic prefactor.
_EXP_ARG_LIMIT = 705.0


@dataclass(frozen=True)
class MLParams:
    """Order pair (alpha, sigma) of the Mittag-Leffler function."""

    alpha: float
    sigma: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise DomainError(
                f"MLParams.alpha must lie in (0, 2), got {self.alpha!r}"
            )
        if not np.isfinite(self.sigma):
            raise DomainError(f"MLParams.sigma must be finite, got {self.sigma!r}")


@dataclass(frozen=True)
class MLAccuracy:
    """Tolerances and switch-over radius for the evaluator.

    rel_tol        target relative accuracy of the series summation
    series_radius  |z| below which ml_eval uses the power series
    p_terms        algebraic terms kept by the fixed-order expansions
    """

    rel_tol: float = 1e-12
    series_radius: float = 10.0
    p_terms: int = 4

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0):
            raise DomainError(
                f"MLAccuracy.rel_tol must lie in (0, 1), got {self.rel_tol!r}"
            )
        if self.series_radius <= 0.0:
            raise DomainError(
                f"MLAccuracy.series_radius must be positive, got {self.series_radius!r}"
            )
        if not (1 <= int(self.p_terms) <= 8):
            raise DomainError(
                f"MLAccuracy.p_terms must lie in [1, 8], got {self.p_terms!r}"
            )


DEFAULT_ACCURACY = MLAccuracy()


def gamma_reciprocal(x: float) -> float:
    """1/Gamma(x) as a total function on the reals.

    Returns exactly 0.0 at the poles of Gamma (x = 0, -1, -2, ...), which is
    what every expansion below needs: terms sitting on a pole drop out.
    """
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    return float(rgamma(x))


def sector_half_angle(alpha: float) -> float:
    """Half-angle of the exponential-growth sector, 3*pi*alpha/4."""
    return 0.75 * math.pi * alpha


# ---------------------------------------------------------------------------
# power series
# ---------------------------------------------------------------------------


def _series_cap(alpha: float, z: complex) -> int:
    """Term budget: the peak term sits near n ~ |z|^(1/alpha)/alpha, and the
    tail needs a few multiples of that to die off."""
    r = abs(z)
    if r <= 1.0:
        return _SERIES_TERM_CAP
    x = r ** (1.0 / alpha)
    return max(_SERIES_TERM_CAP, int(math.ceil(4.0 * x / alpha)))

def _cancellation_log(alpha: float, sigma: float, z: complex) -> float:
    """Estimated natural log of (peak term magnitude / |E|) at z.

    The peak term of the series is ~ exp(x) / sqrt(x) with x = |z|^(1/alpha);
    the value is ~ exp(x cos(arg z / alpha)) inside the exponential sector and
    only algebraically small outside.  The difference of the exponents is the
    cancellation we pay for in digits.
    """
    r = abs(z)
    if r <= 1.0:
        return 0.0
    x = r ** (1.0 / alpha)
    phi = abs(math.atan2(z.imag, z.real)) / alpha
    if phi < math.pi:
        value_log = max(x * math.cos(phi), -math.log(r))
    else:
        value_log = -math.log(r)
    return max(x - value_log, 0.0)


def _series_float64(alpha, sigma, z, rel_tol, cap):
    """Direct float64 summation.  Returns (value, ok); ok=False means the
    measured roundoff floor exceeds rel_tol and the caller must escalate."""
    total = 0j
    zn = 1.0 + 0j
    peak = 0.0
    quiet = 0
    n = 0
    while n < cap:
        g = gamma_reciprocal(sigma + alpha * n)
        term = zn * g
        mag = abs(term)
        if mag > peak:
            peak = mag
        total += term
        if not np.isfinite(mag):
            return total, False
        if mag < rel_tol * abs(total) and abs(total) > 0.0:
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
        zn *= z
        n += 1
    else:
        raise NonConvergence(
            f"series for E_{{{alpha},{sigma}}} needed more than {cap} terms at z={z!r}"
        )
    if abs(total) == 0.0:
        return total, peak == 0.0
    # roundoff estimate: unit roundoff times the peak partial magnitude,
    # with a sqrt(n) accumulation allowance
    noise = 2.3e-16 * peak * math.sqrt(max(n, 1)) / abs(total)
    return total, noise <= 0.5 * rel_tol


def _series_mp(alpha, sigma, z, rel_tol, cap):
    """Arbitrary-precision summation with working precision set from the
    predicted cancellation.

    Gamma arguments are advanced with an exact rational recurrence when alpha
    is (close to) a small fraction p/q:

        Gamma(alpha*n + sigma) = Gamma(alpha*(n-q) + sigma) * prod_{j<p} (base + j)

    Repeated addition of a binary-float alpha drifts by ~n*eps, which is fatal
    when thousands of digits must cancel; the recurrence keeps the arguments
    exact.  For awkward alpha we fall back to per-term gamma calls.
    """
    lost = _cancellation_log(alpha, sigma, z) * 0.4343  # nats -> digits
    dps = int(math.ceil(lost)) + int(math.ceil(-math.log10(rel_tol))) + 15
    dps += int(max(math.log10(abs(z)), 0.0)) + 2
    frac = Fraction(alpha).limit_denominator(64)
    exact_rational = abs(float(frac) - alpha) < 1e-15 and frac.denominator <= 64
    with _MP_LOCK, mp.workdps(dps):
        zm = mp.mpc(z)
        floor = mp.mpf(10) ** (-(dps - 2))
        total = mp.mpc(0)
        zn = mp.mpc(1)
        quiet = 0
        if exact_rational:
            p, q = frac.numerator, frac.denominator
            am = mp.mpf(p) / q
            sm = mp.mpf(sigma)
            # seed one ring of gamma values, then recurse within residue classes
            ring = [mp.gamma(am * n + sm) for n in range(q)]
            ring_next = list(ring)
            n = 0
            while n < cap:
                r = n % q
                if n >= q:
                    if r == 0:
                        ring = ring_next
                        ring_next = list(ring)
                    base = am * (n - q) + sm
                    prod = mp.mpf(1)
                    for j in range(p):
                        prod *= base + j
                    gval = ring[r] * prod
                    ring_next[r] = gval
                else:
                    gval = ring[r]
                term = zn / gval
                total += term
                if n > 4 and abs(term) < floor * abs(total):
                    quiet += 1
                    if quiet >= 3:
                        break
                else:
                    quiet = 0
                zn *= zm
                n += 1
            else:
                raise NonConvergence(
                    f"mp series for E_{{{alpha},{sigma}}} exceeded {cap} terms at z={z!r}"
                )
        else:
            am = mp.mpf(alpha)
            sm = mp.mpf(sigma)
            n = 0
            while n < cap:
                arg = am * n + sm
                if arg <= 0 and arg == mp.floor(arg):
                    term = mp.mpc(0)
                else:
                    term = zn / mp.gamma(arg)
                total += term
                if n > 4 and abs(term) < floor * abs(total):
                    quiet += 1
                    if quiet >= 3:
                        break
                else:
                    quiet = 0
                zn *= zm
                n += 1
            else:
                raise NonConvergence(
                    f"mp series for E_{{{alpha},{sigma}}} exceeded {cap} terms at z={z!r}"
                )
        result = complex(total)
    if not np.isfinite(result.real) or not np.isfinite(result.imag):
        raise OverflowGuard(
            f"E_{{{alpha},{sigma}}}({z!r}) exceeds double range"
        )
    return result


def ml_series(params: MLParams, z: complex, acc: MLAccuracy = DEFAULT_ACCURACY) -> complex:
    """Power-series evaluation of E_{alpha,sigma}(z).

    Intended for |z| <= acc.series_radius.  Stops once three consecutive
    terms fall below rel_tol times the running sum; raises NonConvergence if
    the adaptive term cap is exhausted.  Escalates to extended precision when
    the float64 roundoff floor would exceed rel_tol.
    """
    z = complex(z)
    if z == 0:
        return complex(gamma_reciprocal(params.sigma))
    cap = _series_cap(params.alpha, z)
    lost = _cancellation_log(params.alpha, params.sigma, z)
    # 42 nats of cancellation is already past any float64 tolerance; skip
    # the doomed attempt and go straight to mpmath
    if lost <= 42.0:
        value, ok = _series_float64(params.alpha, params.sigma, z, acc.rel_tol, cap)
        if ok:
            return value
    return _series_mp(params.alpha, params.sigma, z, acc.rel_tol, cap)


# ---------------------------------------------------------------------------
# large-|z| expansions
# ---------------------------------------------------------------------------


def _algebraic_tail(alpha, sigma, z, p):
    """sum_{k=1..p} z^{-k} / Gamma(sigma - alpha k), the shared algebraic part."""
    total = 0j
    zk = 1.0 + 0j
    for k in range(1, p + 1):
        zk /= z
        g = gamma_reciprocal(sigma - alpha * k)
        total += zk * g
    return total


def _exp_part(alpha, sigma, z):
    """(1/alpha) z^((1-sigma)/alpha) exp(z^(1/alpha)), guarded against overflow."""
    w = z ** (1.0 / alpha)
    if w.real > _EXP_ARG_LIMIT:
        raise OverflowGuard(
            f"exp term of E_{{{alpha},{sigma}}} overflows at z={z!r} "
            f"(Re z^(1/alpha) = {w.real:.1f})"
        )
    pref = z ** ((1.0 - sigma) / alpha) if sigma != 1.0 else 1.0 + 0j
    value = (pref * np.exp(w)) / alpha
    if not (np.isfinite(value.real) and np.isfinite(value.imag)):
        raise OverflowGuard(
            f"exp term of E_{{{alpha},{sigma}}} overflows at z={z!r}"
        )
    return value


def ml_asymptotic_sector(params: MLParams, z: complex, p: int) -> complex:
    """Fixed-order expansion inside the growth sector |arg z| <= 3*pi*alpha/4:

        (1/alpha) z^((1-sigma)/alpha) exp(z^(1/alpha))
            - sum_{k=1..p} z^(-k) / Gamma(sigma - alpha k)

    Raises DomainError outside the sector (boundary included in the sector).
    """
    z = complex(z)
    if z == 0:
        raise DomainError("asymptotic expansion undefined at z = 0")
    mu = sector_half_angle(params.alpha)
    if abs(math.atan2(z.imag, z.real)) > mu + 1e-15:
        raise DomainError(
            f"z={z!r} lies outside the growth sector |arg z| <= {mu:.6f}"
        )
    return _exp_part(params.alpha, params.sigma, z) - _algebraic_tail(
        params.alpha, params.sigma, z, int(p)
    )


def ml_asymptotic_outer(params: MLParams, z: complex, p: int) -> complex:
    """Fixed-order expansion in the outer region 3*pi*alpha/4 < |arg z| <= pi:

        - sum_{k=1..p} z^(-k) / Gamma(sigma - alpha k)

    Raises DomainError inside the growth sector.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("asymptotic expansion undefined at z = 0")
    mu = sector_half_angle(params.alpha)
    if abs(math.atan2(z.imag, z.real)) <= mu:
        raise DomainError(
            f"z={z!r} lies inside the growth sector; use ml_asymptotic_sector"
        )
    return -_algebraic_tail(params.alpha, params.sigma, z, int(p))


def _algebraic_tail_adaptive(alpha, sigma, z, rel_tol):
    """Algebraic tail truncated at its own optimal order.

    The term envelope (ignoring the oscillatory 1/Gamma factor, which has
    zeros that would fool a naive size test) is

        e_k = -k ln|z| + ln|Gamma(alpha k + 1 - sigma)| - ln(pi),

    via the reflection formula.  We stop once the envelope starts growing or
    the terms are negligible relative to the partial sum.
    """
    logr = math.log(abs(z))
    total = 0j
    zk = 1.0 + 0j
    prev_env = -math.inf
    # individual terms can vanish at reflection zeros, so never stop on the
    # size of the current term; only the envelope decides.  The cap keeps the
    # gamma argument below the float overflow threshold.
    k_cap = min(199, int((170.0 + sigma - 1.0) / alpha))
    for k in range(1, k_cap + 1):
        env = -k * logr + float(gammaln(alpha * k + 1.0 - sigma)) - math.log(math.pi)
        if k > 2 and env > prev_env:
            break
        prev_env = env
        zk /= z
        total += zk * gamma_reciprocal(sigma - alpha * k)
    return total


def ml_eval(params: MLParams, z: complex, acc: MLAccuracy = DEFAULT_ACCURACY) -> complex:
    """Evaluate E_{alpha,sigma}(z) anywhere in the cut plane.

    Uses the power series for |z| below acc.series_radius and an adaptively
    truncated large-|z| expansion beyond it.  On the large-|z| side the
    exponential part is kept wherever |arg z| <= pi*alpha, not only inside
    the 3*pi*alpha/4 sector: across that wider wedge the exp term is still
    the correct recessive/dominant contribution, and dropping it at, say,
    alpha = 1, z < 0 would lose exp(z) entirely.
    """
    z = complex(z)
    if z == 0:
        return complex(gamma_reciprocal(params.sigma))
    if abs(z) < acc.series_radius:
        return ml_series(params, z, acc)
    alpha, sigma = params.alpha, params.sigma
    value = -_algebraic_tail_adaptive(alpha, sigma, z, acc.rel_tol)
    if abs(math.atan2(z.imag, z.real)) <= math.pi * alpha + 1e-14:
        value += _exp_part(alpha, sigma, z)
    return value


def ml_deriv(alpha: float, z: complex, acc: MLAccuracy = DEFAULT_ACCURACY) -> complex:
    """d/dz E_{alpha,1}(z) = (1/alpha) E_{alpha,alpha}(z) for alpha in (0, 1]."""
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"ml_deriv requires alpha in (0, 1], got {alpha!r}")
    return ml_eval(MLParams(alpha, alpha), z, acc) / alpha
