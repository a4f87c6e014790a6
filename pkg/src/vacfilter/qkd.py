"""Security analysis of the filtered protocol against collective attacks.

The entanglement-based picture: Alice prepares a two-mode squeezed vacuum of
variance V and heterodynes one mode, which Gaussian-modulates coherent states
sent through the erasure channel toward Bob.  The asymptotic reverse-
reconciliation bound K = I_ab - chi_bE is evaluated "as if Gaussian" on the
covariance matrix of the actual (non-Gaussian) joint state, which lower-bounds
the true rate by Gaussian extremality.

With a tap filter in place, Bob's mode is split on a beam splitter of
transmissivity T = 1 - R, the tap is watched by an on/off detector, and only
click events are kept.  The click-conditioned covariance matrix follows from
the second-moment identity

    CV_click = (CV_all - P0 * CV_noclick) / P_S,      P_S = 1 - P0,

where CV_all is the tap-traced covariance after the beam splitter and
CV_noclick the no-click-conditioned one.

Two modeling knobs are exposed because they change the numbers:

* ``erased_mode_variance``: variance of Alice's mode in the erased branch.
  "marginal" uses V (the reduced state of the two-mode squeezed vacuum);
  "alphabet" uses (V+1/V)/2 (the thermal average of the prepared coherent
  alphabet).  "marginal" is the default: it is the choice consistent with the
  entanglement-based picture and the one that reproduces the published
  security thresholds (see tests).
* ``protocol``: "heterodyne" (Bob heterodynes, default) or "homodyne"
  (Bob measures one random quadrature).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gaussian
from .gaussian import (
    CovMatrix,
    GaussianMixtureState,
    NumericsError,
    entropy_g,
    mixture_covariance,
    symplectic_eigenvalues,
)

SYMMETRIC_FORM_TOL = 1e-8
MIN_SUCCESS_PROB = 1e-12


@dataclass(frozen=True)
class TapFilter:
    """Filter hardware: tap reflectivity R and the on/off detector watching it."""

    tap_reflectivity: float
    eta: float = 1.0
    dark_prob: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.tap_reflectivity < 1.0:
            raise ValueError(
                f"tap reflectivity must lie in (0, 1), got {self.tap_reflectivity}"
            )
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"detector efficiency must lie in (0, 1], got {self.eta}")
        if not 0.0 <= self.dark_prob < 1.0:
            raise ValueError(f"dark-count probability must lie in [0, 1), got {self.dark_prob}")

    @property
    def transmissivity(self) -> float:
        return 1.0 - self.tap_reflectivity


@dataclass(frozen=True)
class QkdScenario:
    V: float
    p: float
    filter: TapFilter | None = None
    protocol: str = "heterodyne"
    erased_mode_variance: str = "marginal"
    prefactor: str = "ps"  # "ps": K = P_S (I - chi);  "p_ps": K = p P_S (I - chi)

    def __post_init__(self):
        if self.V < 1.0:
            raise ValueError(f"squeezing variance must be >= 1, got {self.V}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"transmission probability must lie in [0, 1], got {self.p}")
        if self.protocol not in ("heterodyne", "homodyne"):
            raise ValueError(f"protocol must be heterodyne/homodyne, got {self.protocol!r}")
        if self.erased_mode_variance not in ("marginal", "alphabet"):
            raise ValueError(
                f"erased_mode_variance must be marginal/alphabet, got {self.erased_mode_variance!r}"
            )
        if self.prefactor not in ("ps", "p_ps"):
            raise ValueError(f"prefactor must be ps/p_ps, got {self.prefactor!r}")

    @property
    def sigma(self) -> float:
        """Displacement variance of the prepared coherent alphabet."""
        return (self.V + 1.0 / self.V) / 2.0 - 1.0


@dataclass(frozen=True)
class KeyRateResult:
    k_lower: float
    i_ab: float
    chi_be: float
    p_s: float
    multiplier: float
    optimizer: tuple | None = None  # (V, T) when produced by an optimizer


def joint_state(V: float, p: float,
                erased_mode_variance: str = "marginal") -> GaussianMixtureState:
    """Two-mode Alice/Bob mixture after the erasure channel: with weight p the
    two-mode squeezed vacuum, with weight 1-p Alice's thermal mode next to
    vacuum at Bob."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"transmission probability must lie in [0, 1], got {p}")
    w = V if erased_mode_variance == "marginal" else (V + 1.0 / V) / 2.0
    kept = gaussian.two_mode_squeezed(V)
    erased = gaussian.tensor(gaussian.thermal(w), gaussian.vacuum(1))
    if p == 1.0:
        return kept
    if p == 0.0:
        return erased
    return gaussian.mix([(p, kept), (1.0 - p, erased)])


def filtered_covariance(scenario: QkdScenario):
    """Click-conditioned covariance matrix of the Alice/Bob state behind the
    tap filter, with the success probability.

    Returns (CovMatrix, P_S, P0).  Means vanish by symmetry (every mixture
    component is zero-mean and all operations preserve that), which the
    implementation asserts.
    """
    flt = scenario.filter
    if flt is None:
        raise ValueError("filtered_covariance needs a scenario with a filter")
    state = joint_state(scenario.V, scenario.p, scenario.erased_mode_variance)
    state = gaussian.tensor(state, gaussian.vacuum(1))  # tap mode, index 2
    state = gaussian.apply_beamsplitter(state, 1, 2, flt.transmissivity)

    for comp in state.components:
        assert np.max(np.abs(comp.mean)) < 1e-12, "filtered state must be zero-mean"

    cv_all = mixture_covariance(gaussian.drop_mode(state, 2))
    p0, noclick = gaussian.condition_on_noclick(state, 2, flt.eta, flt.dark_prob)
    cv_noclick = mixture_covariance(noclick)
    p_s = 1.0 - p0
    if p_s <= MIN_SUCCESS_PROB:
        raise NumericsError(
            f"filter success probability degenerate (P_S = {p_s:.3e}); "
            "no click-conditioned state to analyze"
        )
    cv_click = (cv_all - p0 * cv_noclick) / p_s
    return CovMatrix(cv_click, repair=True), p_s, p0


def _symmetric_form(cm) -> tuple:
    """Extract (a, b, c) from a CM of the form [[a I, c Z], [c Z, b I]],
    averaging the x/p blocks; asymmetry beyond 1e-8 is an error because the
    closed-form conditional eigenvalue below would be invalid."""
    m = cm.mat if isinstance(cm, CovMatrix) else np.asarray(cm, dtype=float)
    if m.shape != (4, 4):
        raise ValueError(f"key-rate evaluation expects a two-mode CM, got {m.shape}")
    a = 0.5 * (m[0, 0] + m[1, 1])
    b = 0.5 * (m[2, 2] + m[3, 3])
    c = 0.5 * (m[0, 2] - m[1, 3])
    model = np.zeros((4, 4))
    model[0, 0] = model[1, 1] = a
    model[2, 2] = model[3, 3] = b
    model[0, 2] = model[2, 0] = c
    model[1, 3] = model[3, 1] = -c
    dev = float(np.max(np.abs(m - model)))
    if dev > SYMMETRIC_FORM_TOL:
        raise ValueError(
            f"covariance matrix departs from the symmetric (a, b, c) form by {dev:.3e}"
        )
    return a, b, c


def key_rate(cm, multiplier: float = 1.0, protocol: str = "heterodyne",
             p_s: float | None = None) -> KeyRateResult:
    """Reverse-reconciliation Gaussian key-rate bound from a two-mode CM of
    symmetric form [[a I, c Z], [c Z, b I]].

    heterodyne (Bob measures both quadratures):
        I_ab  = log2[(a+1) / (a+1 - c^2/(b+1))]
        chi   = g((nu1-1)/2) + g((nu2-1)/2) - g((nu3-1)/2),
                nu3 = a - c^2/(b+1)
    homodyne (Bob measures one quadrature):
        I_ab  = (1/2) log2[(a+1) / (a+1 - c^2/b)]
        nu3   = sqrt(a (a - c^2/b))

    K = multiplier * (I_ab - chi); the multiplier is the filter success
    probability for filtered scenarios (or p * P_S under the alternative
    convention) and 1 otherwise.
    """
    a, b, c = _symmetric_form(cm)
    nus = symplectic_eigenvalues(cm)
    if protocol == "heterodyne":
        denom = b + 1.0
        cond = a - c * c / denom
        i_ab = math.log2((a + 1.0) / (a + 1.0 - c * c / denom))
        nu3 = cond
    elif protocol == "homodyne":
        if b <= 0.0:
            raise ValueError("degenerate Bob variance")
        cond = a - c * c / b
        i_ab = 0.5 * math.log2((a + 1.0) / (a + 1.0 - c * c / b))
        nu3 = math.sqrt(max(a * cond, 0.0))
    else:
        raise ValueError(f"protocol must be heterodyne/homodyne, got {protocol!r}")
    chi = (
        entropy_g(max(nus[0] - 1.0, 0.0) / 2.0)
        + entropy_g(max(nus[1] - 1.0, 0.0) / 2.0)
        - entropy_g(max(nu3 - 1.0, 0.0) / 2.0)
    )
    rate = i_ab - chi
    return KeyRateResult(
        k_lower=multiplier * rate,
        i_ab=i_ab,
        chi_be=chi,
        p_s=p_s if p_s is not None else multiplier,
        multiplier=multiplier,
    )


def scenario_key_rate(scenario: QkdScenario) -> KeyRateResult:
    """Key-rate bound of a full scenario (filtered or not)."""
    if scenario.filter is None:
        cm = mixture_covariance(
            joint_state(scenario.V, scenario.p, scenario.erased_mode_variance)
        )
        return key_rate(CovMatrix(cm), 1.0, scenario.protocol, p_s=1.0)
    cm, p_s, _ = filtered_covariance(scenario)
    mult = p_s if scenario.prefactor == "ps" else scenario.p * p_s
    return key_rate(cm, mult, scenario.protocol, p_s=p_s)


def weak_squeezing_keyrate(p: float, p_s: float, transmissivity: float, V: float) -> float:
    """Small-alphabet closed form p * P_S * (1/2) log2(e/2) * T * (V-1)^2.

    The exact bound approaches this expression with the P_S slot instantiated
    as the tap fraction 1 - T; the test suite pins that correspondence.
    """
    if V < 1.0:
        raise ValueError(f"squeezing variance must be >= 1, got {V}")
    return p * p_s * 0.5 * math.log2(math.e / 2.0) * transmissivity * (V - 1.0) ** 2


# ---------------------------------------------------------------------------
# optimization and threshold search
# ---------------------------------------------------------------------------

_V_COARSE = np.concatenate([np.linspace(1.002, 1.3, 25), np.linspace(1.35, 4.0, 23)])
_T_COARSE = np.linspace(0.02, 0.95, 32)


def _rate_at(p, V, T, flt, protocol, erased_mode_variance):
    scenario = QkdScenario(V=V, p=p, protocol=protocol,
                           erased_mode_variance=erased_mode_variance,
                           filter=None if flt is None else
                           TapFilter(1.0 - T, flt.eta, flt.dark_prob))
    try:
        res = scenario_key_rate(scenario)
    except (NumericsError, ValueError):
        return None
    return res


def optimize_key_rate(p: float, flt: TapFilter | None = None, *,
                      protocol: str = "heterodyne",
                      erased_mode_variance: str = "marginal",
                      refine_rounds: int = 2) -> KeyRateResult:
    """Maximize the key-rate bound over the squeezing variance V (and the
    filter transmissivity T when a filter is present) by a deterministic
    coarse grid followed by local refinement."""
    t_values = [1.0] if flt is None else list(_T_COARSE)

    best = None
    best_vt = None
    for V in _V_COARSE:
        for T in t_values:
            res = _rate_at(p, V, T, flt, protocol, erased_mode_variance)
            if res is not None and (best is None or res.k_lower > best.k_lower):
                best, best_vt = res, (V, T)
    if best is None:
        raise NumericsError("key-rate optimization failed at every grid point")

    v_span = float(_V_COARSE[1] - _V_COARSE[0]) * 2.0
    t_span = float(_T_COARSE[1] - _T_COARSE[0]) * 2.0 if flt is not None else 0.0
    for _ in range(refine_rounds):
        v0, t0 = best_vt
        vs = np.linspace(max(1.0005, v0 - v_span), v0 + v_span, 9)
        ts = [1.0] if flt is None else np.linspace(
            max(0.005, t0 - t_span), min(0.995, t0 + t_span), 9)
        for V in vs:
            for T in ts:
                res = _rate_at(p, V, T, flt, protocol, erased_mode_variance)
                if res is not None and res.k_lower > best.k_lower:
                    best, best_vt = res, (V, T)
        v_span /= 3.0
        t_span /= 3.0

    return KeyRateResult(best.k_lower, best.i_ab, best.chi_be, best.p_s,
                         best.multiplier, optimizer=best_vt)


@dataclass
class PminResult:
    p_min: float
    precision: float
    bounded_below: bool  # True when the rate is already positive at the floor
    trace: list  # (p, max K) pairs explored by the bisection


def p_min_search(flt: TapFilter | None = None, *,
                 precision: float = 1e-3,
                 protocol: str = "heterodyne",
                 erased_mode_variance: str = "marginal",
                 p_floor: float = 1e-3,
                 max_iterations: int = 60) -> PminResult:
    """Smallest channel transmission probability with a positive optimized
    key-rate bound, by bisection on the sign of max_(V,T) K(p).

    The search is deterministic (fixed grids, no stochastic optimizer).  If
    the bound is already positive at ``p_floor`` the floor is returned with
    ``bounded_below=True`` (an ideal filter keeps the protocol secure for
    arbitrarily small p).
    """
    trace = []

    def max_rate(p):
        k = optimize_key_rate(p, flt, protocol=protocol,
                              erased_mode_variance=erased_mode_variance).k_lower
        trace.append((p, k))
        return k

    lo, hi = p_floor, 1.0 - 1e-9
    if max_rate(lo) > 0.0:
        return PminResult(lo, precision, True, trace)
    k_hi = max_rate(hi)
    if k_hi <= 0.0:
        raise NumericsError(
            "key rate not positive even at p ~ 1; no threshold to bracket"
        )
    iterations = 0
    while hi - lo > precision:
        if iterations >= max_iterations:
            raise NumericsError("bisection budget exhausted before reaching precision")
        mid = 0.5 * (lo + hi)
        if max_rate(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        iterations += 1
    return PminResult(0.5 * (lo + hi), precision, False, trace)
