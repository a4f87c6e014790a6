"""Closed-form acceptance and error probabilities of the four filter detectors.

A filter detector looks at the tap arm and decides "signal" or "vacuum".
Its acceptance probability P(beta) is the chance of deciding "signal" when a
coherent state of amplitude beta hits it; the error probability is E = P(0).

Homodyne thresholds live in the quadrature units where the vacuum variance
is 1/4 (standard deviation 1/2), which makes the threshold B and the
effective displacement a directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc, erfcinv

HDR_QUAD_RELTOL = 1e-10


@dataclass(frozen=True)
class IdealOnOff:
    """Lossless, dark-count-free photon presence detector: P = 1 - exp(-|beta|^2)."""


@dataclass(frozen=True)
class Apd:
    """Avalanche photodiode in Geiger mode with quantum efficiency ``eta``
    and per-window dark-count probability ``dark_prob``."""

    eta: float
    dark_prob: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"APD efficiency must lie in (0, 1], got {self.eta}")
        if not 0.0 <= self.dark_prob < 1.0:
            raise ValueError(f"dark-count probability must lie in [0, 1), got {self.dark_prob}")


def _check_homodyne(eta, threshold, efficiency_model):
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"homodyne efficiency must lie in (0, 1], got {eta}")
    if not (np.isfinite(threshold) and threshold >= 0.0):
        raise ValueError(f"threshold must be finite and >= 0, got {threshold}")
    if efficiency_model not in ("linear", "sqrt"):
        raise ValueError(f"efficiency_model must be 'linear' or 'sqrt', got {efficiency_model!r}")


@dataclass(frozen=True)
class HomodyneStabilized:
    """Homodyne filter with a phase-locked local oscillator; accepts when
    |x| exceeds ``threshold``.

    ``efficiency_model`` selects how the detection efficiency scales the
    signal mean: 'linear' uses a = eta * |beta| (the model the acceptance
    probabilities below are calibrated against), 'sqrt' uses the loss-channel
    scaling a = sqrt(eta) * |beta|.
    """

    eta: float
    threshold: float
    efficiency_model: str = "linear"

    def __post_init__(self):
        _check_homodyne(self.eta, self.threshold, self.efficiency_model)


@dataclass(frozen=True)
class HomodyneRandomized:
    """Homodyne filter with a phase-randomized local oscillator; accepts when
    |x| exceeds ``threshold``.  Efficiency scaling as in HomodyneStabilized."""

    eta: float
    threshold: float
    efficiency_model: str = "linear"

    def __post_init__(self):
        _check_homodyne(self.eta, self.threshold, self.efficiency_model)


FilterDetector = IdealOnOff | Apd | HomodyneStabilized | HomodyneRandomized


def effective_displacement(det, beta_mag: float) -> float:
    """Mean quadrature displacement a seen by a homodyne filter for |beta|."""
    if det.efficiency_model == "linear":
        return det.eta * beta_mag
    return np.sqrt(det.eta) * beta_mag


def acceptance_probability(det: FilterDetector, beta) -> float:
    """Probability that the filter accepts a coherent state of amplitude beta.

    Closed forms:
      ideal on/off      1 - exp(-|beta|^2)
      APD               1 - (1-p_d) exp(-eta (1-p_d) |beta|^2)
      stabilized HD     [erfc(sqrt2 (B+a)) + erfc(sqrt2 (B-a))] / 2, a = eta |beta|
      randomized HD     (1/2pi) int erfc(sqrt2 (B - a cos t)) dt over (-pi, pi)
    """
    b = abs(beta)
    if isinstance(det, IdealOnOff):
        return float(-np.expm1(-b * b))
    if isinstance(det, Apd):
        q = 1.0 - det.dark_prob
        return float(1.0 - q * np.exp(-det.eta * q * b * b))
    a = effective_displacement(det, b)
    if isinstance(det, HomodyneStabilized):
        B = det.threshold
        return float(0.5 * (erfc(np.sqrt(2.0) * (B + a)) + erfc(np.sqrt(2.0) * (B - a))))
    if isinstance(det, HomodyneRandomized):
        B = det.threshold
        if a == 0.0:
            return float(erfc(np.sqrt(2.0) * B))
        # integrand is even in the phase: fold to (0, pi)
        val, _ = quad(
            lambda t: erfc(np.sqrt(2.0) * (B - a * np.cos(t))),
            0.0, np.pi, epsabs=1e-14, epsrel=HDR_QUAD_RELTOL, limit=200,
        )
        return float(val / np.pi)
    raise TypeError(f"unknown detector {det!r}")


def error_probability(det: FilterDetector) -> float:
    """Probability of accepting vacuum, E = P(0).

    Closed forms: 0 for the ideal detector, p_d for the APD and
    erfc(sqrt2 B) for both homodyne variants.
    """
    if isinstance(det, IdealOnOff):
        return 0.0
    if isinstance(det, Apd):
        return det.dark_prob
    return float(erfc(np.sqrt(2.0) * det.threshold))


def threshold_for_error(error_target: float) -> float:
    """Homodyne threshold B with erfc(sqrt2 B) = error_target, exact to 1e-12.

    The map B -> E is strictly decreasing, so the inverse is unique; the test
    suite cross-checks this value against an independent bisection root find.
    """
    if not 0.0 < error_target <= 1.0:
        raise ValueError(f"error target must lie in (0, 1], got {error_target}")
    return float(erfcinv(error_target) / np.sqrt(2.0))


def acceptance_curvature(det: FilterDetector) -> float:
    """Analytic second derivative of P with respect to |beta| at |beta| = 0.

    Used to cross-check the finite-difference sensitivity:
      ideal on/off      2
      APD               2 eta (1-p_d)^2
      stabilized HD     8 sqrt(2/pi) kappa^2 B exp(-2 B^2)
      randomized HD     half the stabilized value
    with kappa the efficiency scaling of the homodyne displacement.
    """
    if isinstance(det, IdealOnOff):
        return 2.0
    if isinstance(det, Apd):
        return 2.0 * det.eta * (1.0 - det.dark_prob) ** 2
    kappa = effective_displacement(det, 1.0)
    B = det.threshold
    hds = 8.0 * np.sqrt(2.0 / np.pi) * kappa * kappa * B * np.exp(-2.0 * B * B)
    if isinstance(det, HomodyneStabilized):
        return float(hds)
    return float(0.5 * hds)
