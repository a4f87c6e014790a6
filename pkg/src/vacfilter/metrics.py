"""Figures of merit for the filtering protocol: sensitivity, gain, success
probability and the parametric gain-versus-success curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detectors import acceptance_curvature, acceptance_probability, error_probability


@dataclass(frozen=True)
class FilterFigures:
    """Bundle of merit figures for one detector/channel working point."""

    sensitivity: float
    sensitivity_over_r: float
    gain: float
    success_probability: float
    error_probability: float


def sensitivity(det, tap_reflectivity: float, *, analytic: bool = False,
                tol: float = 1e-8) -> float:
    """Half the second derivative of the acceptance probability with respect
    to the signal amplitude |alpha|, at |alpha| = 0, for a tap of
    reflectivity R (the detector sees sqrt(R) |alpha|).

    The derivative is taken with respect to the amplitude, not the photon
    number; this normalization makes the ideal on/off filter score exactly R.
    Computed by symmetric finite differences with Richardson extrapolation
    unless ``analytic=True``, in which case the closed-form curvature is used.
    """
    R = tap_reflectivity
    if not 0.0 < R <= 1.0:
        raise ValueError(f"tap reflectivity must lie in (0, 1], got {R}")
    if analytic:
        return 0.5 * R * acceptance_curvature(det)

    sqrt_r = np.sqrt(R)
    p0 = acceptance_probability(det, 0.0)

    def curvature(h):
        # f(t) = P(sqrt(R) t) is even in t, so 2 (f(h) - f(0)) / h^2 -> f''(0)
        return 2.0 * (acceptance_probability(det, sqrt_r * h) - p0) / (h * h)

    return 0.5 * _richardson_even(curvature, tol=tol)


def _richardson_even(d, *, h0: float = 1e-2, levels: int = 6, tol: float = 1e-8) -> float:
    """Richardson-extrapolate d(h) = c0 + c1 h^2 + c2 h^4 + ... toward h -> 0.

    Halves the step from h0 down to ~3e-4 and returns the deepest Neville
    column once consecutive estimates agree to ``tol``.
    """
    table = []
    best = None
    for k in range(levels):
        h = h0 / 2.0 ** k
        row = [d(h)]
        for j, prev in enumerate(table[-1] if table else []):
            f = 4.0 ** (j + 1)
            row.append((f * row[j] - prev) / (f - 1.0))
        table.append(row)
        if best is not None and abs(row[-1] - best) < tol:
            return row[-1]
        best = row[-1]
    return table[-1][-1]


def success_probability(p: float, p_accept: float, error_prob: float) -> float:
    """P_S = p P + (1-p) E, the overall rate of positive filter outcomes."""
    for name, v in (("p", p), ("p_accept", p_accept), ("error_prob", error_prob)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return p * p_accept + (1.0 - p) * error_prob


def gain(p: float, p_s: float, error_prob: float, p_accept: float | None = None) -> float:
    """Gain G = p'/p of the coherent-state probability through the filter,
    written as (1/p) (1 - (1-p) E / P_S).

    If ``p_accept`` is supplied, the algebraically equivalent form
    G = P / P_S is required to agree to 1e-12 (a cheap internal consistency
    check of the inputs).
    """
    if p <= 0.0:
        raise ValueError("gain needs p > 0")
    if p_s <= 0.0:
        raise ValueError("gain undefined at vanishing success probability")
    g = (1.0 - (1.0 - p) * error_prob / p_s) / p
    if p_accept is not None:
        alt = p_accept / p_s
        if abs(g - alt) > 1e-12:
            raise ValueError(
                f"inconsistent inputs: gain forms disagree ({g!r} vs {alt!r}); "
                "is P_S = p P + (1-p) E?"
            )
    return g


def gain_vs_success_curve(det, p: float, tap_photon_numbers):
    """Parametric (P_S, G) samples over a grid of mean photon numbers R|alpha|^2
    hitting the filter detector.

    At matched error probability, points from different detectors fall on the
    single curve G = (1/p)(1 - (1-p) E / P_S).
    """
    e = error_probability(det)
    out = []
    for n_mean in tap_photon_numbers:
        if n_mean < 0.0:
            raise ValueError(f"mean photon number must be >= 0, got {n_mean}")
        p_acc = acceptance_probability(det, np.sqrt(n_mean))
        p_s = success_probability(p, p_acc, e)
        out.append((p_s, gain(p, p_s, e, p_accept=p_acc)))
    return out


def filter_figures(det, tap_reflectivity: float, alpha_mag: float, p: float) -> FilterFigures:
    """All merit figures for a detector behind a tap of reflectivity R with a
    signal of amplitude |alpha| and channel transmission probability p."""
    beta = np.sqrt(tap_reflectivity) * alpha_mag
    p_acc = acceptance_probability(det, beta)
    e = error_probability(det)
    p_s = success_probability(p, p_acc, e)
    s = sensitivity(det, tap_reflectivity)
    return FilterFigures(
        sensitivity=s,
        sensitivity_over_r=s / tap_reflectivity,
        gain=gain(p, p_s, e, p_accept=p_acc),
        success_probability=p_s,
        error_probability=e,
    )
