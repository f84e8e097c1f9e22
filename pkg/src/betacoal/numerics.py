"""Special functions and closed-form constants for the Beta(2-a, a) coalescent.

Everything downstream (rates, samplers, limit-law normalizations) funnels its
Gamma-function arithmetic through :func:`log_gamma`, so that rate formulas for
block counts up to 10^7 never overflow.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
SQRT2 = math.sqrt(2.0)

# Lanczos approximation, g = 7, 9 coefficients (Godfrey's set).  Gives close
# to full double precision for x > 0.5; the reflection branch covers (0, 0.5).
_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _log_gamma_lanczos(x):
    """Lanczos series for ln Gamma(x), valid for x >= 0.5 (vectorized)."""
    y = x - 1.0
    acc = np.full_like(y, _LANCZOS_COEF[0])
    for i in range(1, len(_LANCZOS_COEF)):
        acc = acc + _LANCZOS_COEF[i] / (y + i)
    t = y + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (y + 0.5) * np.log(t) - t + np.log(acc)


def log_gamma(x):
    """Natural log of the Gamma function for positive real ``x``.

    Accepts scalars or numpy arrays.  Raises ``ValueError`` on any
    non-positive or non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("log_gamma requires finite x > 0")
    small = arr < 0.5
    safe = np.where(small, 1.0, arr)
    out = _log_gamma_lanczos(safe)
    if np.any(small):
        xs = np.where(small, arr, 0.25)
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        refl = np.log(np.pi / np.sin(np.pi * xs)) - _log_gamma_lanczos(1.0 - xs)
        out = np.where(small, refl, out)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class AlphaParams:
    """Validated stability index plus every derived closed-form constant.

    ``boundary`` is ``None`` for a generic alpha in (1, 2), or one of
    ``"golden"`` / ``"sqrt2"`` when the measure-zero threshold cases are
    selected symbolically (floating-point equality is never used for the
    regime splits).

    Fields:
      gamma_const     1 / (alpha - 1), the mean jump size of the V law.
      c1              Gamma(a) a (a-1) / (2-a), the tree-length centering.
      c2              Gamma(a) a (a-1)^(1+1/a) / Gamma(2-a)^(1/a), the
                      stable-fluctuation scale.
      c_weighted_sum  ((1 + a - a^2) Gamma(2-a))^(-1/a), the constant in the
                      weighted-V-sum stable limit (NaN above the golden
                      ratio, where 1 + a - a^2 < 0).
      v_norm          a / Gamma(2-a), normalizer of the V probability mass.
      sigma_alpha     sigma^alpha of the maximally skewed stable reference
                      law, fixed so that P(x < -t) * t^alpha -> 1.
    """

    alpha: float
    boundary: str | None
    gamma_const: float
    c1: float
    c2: float
    c_weighted_sum: float
    v_norm: float
    sigma_alpha: float


def make_alpha_params(alpha) -> AlphaParams:
    """Build :class:`AlphaParams` from a float in (1, 2) or a boundary tag.

    ``alpha`` may be the string ``"golden"`` ((1+sqrt 5)/2) or ``"sqrt2"``.
    """
    boundary = None
    if isinstance(alpha, str):
        tag = alpha.lower()
        if tag == "golden":
            boundary = "golden"
            a = GOLDEN_RATIO
        elif tag == "sqrt2":
            boundary = "sqrt2"
            a = SQRT2
        else:
            raise ValueError(f"unknown alpha tag {alpha!r}")
    else:
        a = float(alpha)
        if not math.isfinite(a):
            raise ValueError("alpha must be finite")
    if not 1.0 < a < 2.0:
        raise ValueError(f"alpha must lie strictly in (1, 2), got {a}")

    lg_a = log_gamma(a)
    lg_2ma = log_gamma(2.0 - a)
    gamma_a = math.exp(lg_a)
    gamma_2ma = math.exp(lg_2ma)

    c1 = gamma_a * a * (a - 1.0) / (2.0 - a)
    c2 = gamma_a * a * (a - 1.0) ** (1.0 + 1.0 / a) / gamma_2ma ** (1.0 / a)
    disc = 1.0 + a - a * a
    if boundary == "golden":
        # at the golden ratio the (1 + a - a^2) factor degenerates to the
        # pure log-scale limit with constant Gamma(2-a)^(-1/a)
        c_ws = gamma_2ma ** (-1.0 / a)
    elif disc > 0.0:
        c_ws = (disc * gamma_2ma) ** (-1.0 / a)
    else:
        c_ws = math.nan
    v_norm = a / gamma_2ma
    # sigma^alpha making the left tail satisfy P(x < -t) ~ t^(-alpha);
    # cos(pi a / 2) < 0 and 1 - a < 0 on (1, 2), so this is positive.
    sigma_alpha = gamma_2ma * math.cos(math.pi * a / 2.0) / (1.0 - a)

    return AlphaParams(
        alpha=a,
        boundary=boundary,
        gamma_const=1.0 / (a - 1.0),
        c1=c1,
        c2=c2,
        c_weighted_sum=c_ws,
        v_norm=v_norm,
        sigma_alpha=sigma_alpha,
    )


def stable_cf_exponent(u, params: AlphaParams) -> complex:
    """Log characteristic function of the maximally skewed stable reference.

    psi(u) = -sigma^a |u|^a (1 + i sign(u) tan(pi a / 2)); exp(psi(u)) is the
    characteristic function of the law drawn by ``sampling.sample_stable``.
    """
    a = params.alpha
    u = float(u)
    if u == 0.0:
        return complex(0.0, 0.0)
    s = 1.0 if u > 0 else -1.0
    mag = params.sigma_alpha * abs(u) ** a
    return complex(-mag, -mag * s * math.tan(math.pi * a / 2.0))


def stable_cf(u, params: AlphaParams) -> complex:
    """Characteristic function exp(psi(u)) of the stable reference law."""
    return cmath.exp(stable_cf_exponent(u, params))
