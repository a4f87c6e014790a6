"""Trial-level stochastic simulation of the filtering protocol.

Each trial draws a preparation (coherent with probability p, else vacuum),
sends the tap arm to the filter detector, records the accept/reject decision
and a verification homodyne sample of the transmitted arm.  Acceptance and
error probabilities are estimated by comparing decisions against the known
preparation.

Randomness contract: trial t consumes exactly four uniform variates derived
from a Philox stream keyed by (seed, t // BLOCK_SIZE), so results are
bit-identical for any worker count and any partitioning of the trial range.
Normal variates are produced from uniforms by the inverse CDF, never by
rejection sampling, to keep the per-trial consumption fixed.

Imperfect vacuum preparation is modeled by an optional residual coherent
amplitude ``prep_error`` leaking into nominal vacuum slots; it lets the
simulated error probability reproduce an experimental floor that sits above
the dark-count level.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtri
from scipy.stats import chi2 as _chi2_dist

from .detectors import (
    Apd,
    HomodyneRandomized,
    HomodyneStabilized,
    IdealOnOff,
    acceptance_probability,
    effective_displacement,
    error_probability,
)
from .signal_model import ErasureMixture, marginal_cdf

BLOCK_SIZE = 1 << 16
_QUAD_SD = 0.5  # vacuum quadrature standard deviation, homodyne convention
_U_LO = 2.0 ** -53
_U_HI = 1.0 - 2.0 ** -53


@dataclass(frozen=True)
class McConfig:
    seed: int
    trials: int
    detector: object
    mixture: ErasureMixture
    workers: int = 1
    prep_error: float = 0.0  # coherent amplitude leaked into vacuum slots
    hist_bins: int = 80

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.workers < 1:
            raise ValueError("need at least one worker")
        if self.prep_error < 0.0:
            raise ValueError("prep_error is an amplitude magnitude, must be >= 0")


@dataclass(frozen=True)
class TrialRecord:
    truth: str  # "coherent" | "vacuum"
    tap_outcome: object  # bool click flag (on/off) or quadrature value (homodyne)
    accepted: bool
    verify_x: float


@dataclass
class Histogram:
    """Binned verification-quadrature counts with under/overflow bins."""

    edges: np.ndarray
    counts: np.ndarray  # length len(edges) + 1: [underflow, bins..., overflow]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def densities(self) -> np.ndarray:
        """Per-bin probability density (interior bins only)."""
        widths = np.diff(self.edges)
        return self.counts[1:-1] / max(self.total, 1) / widths


@dataclass
class McResult:
    config: McConfig
    n_coherent: int
    n_accepted_coherent: int
    n_vacuum: int
    n_accepted_vacuum: int
    hist_all: Histogram
    hist_accepted: Histogram

    @property
    def trials(self) -> int:
        return self.n_coherent + self.n_vacuum

    @property
    def n_accepted(self) -> int:
        return self.n_accepted_coherent + self.n_accepted_vacuum

    @property
    def p_accept_hat(self) -> float | None:
        if self.n_coherent == 0:
            return None
        return self.n_accepted_coherent / self.n_coherent

    @property
    def e_hat(self) -> float | None:
        if self.n_vacuum == 0:
            return None
        return self.n_accepted_vacuum / self.n_vacuum

    @property
    def p_s_hat(self) -> float:
        return self.n_accepted / self.trials

    @property
    def g_hat(self) -> float | None:
        """Empirical gain p'/p; None (with zero accepted trials) is reported
        rather than raised so sweeps can proceed."""
        if self.n_accepted == 0 or self.n_coherent == 0:
            return None
        p_prime = self.n_accepted_coherent / self.n_accepted
        p_emp = self.n_coherent / self.trials
        return p_prime / p_emp

    def stderr(self, which: str) -> float | None:
        """Exact binomial standard error of an estimate ('p_accept', 'e',
        'p_s') or a delta-method error for 'g'."""
        def binom(k, n):
            if n == 0:
                return None
            q = k / n
            return math.sqrt(q * (1.0 - q) / n)

        if which == "p_accept":
            return binom(self.n_accepted_coherent, self.n_coherent)
        if which == "e":
            return binom(self.n_accepted_vacuum, self.n_vacuum)
        if which == "p_s":
            return binom(self.n_accepted, self.trials)
        if which == "g":
            g = self.g_hat
            if g is None or g == 0.0:
                return None
            pp = self.n_accepted_coherent / self.n_accepted
            pe = self.n_coherent / self.trials
            var = 0.0
            if 0.0 < pp < 1.0:
                var += (1.0 - pp) / (pp * self.n_accepted)
            if 0.0 < pe < 1.0:
                var += (1.0 - pe) / (pe * self.trials)
            return abs(g) * math.sqrt(var)
        raise ValueError(f"unknown estimate {which!r}")

    @property
    def hist_rejected(self) -> Histogram:
        return Histogram(self.hist_all.edges, self.hist_all.counts - self.hist_accepted.counts)


def _hist_edges(cfg: McConfig) -> np.ndarray:
    mean = cfg.mixture.transmitted_amplitude.magnitude
    lo = -5.0 * _QUAD_SD
    hi = mean + 5.0 * _QUAD_SD
    return np.linspace(lo, hi, cfg.hist_bins + 1)


def _block_uniforms(seed: int, block: int, n: int) -> np.ndarray:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(block)], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.random((n, 4))


def _simulate_block(cfg: McConfig, block: int, edges: np.ndarray):
    start = block * BLOCK_SIZE
    n = min(BLOCK_SIZE, cfg.trials - start)
    u = _block_uniforms(cfg.seed, block, n)

    mix = cfg.mixture
    truth = u[:, 0] < mix.p
    sqrt_r = math.sqrt(mix.tap_reflectivity)
    sqrt_t = math.sqrt(mix.transmissivity)
    alpha = mix.alpha.magnitude
    beta_tap = np.where(truth, sqrt_r * alpha, sqrt_r * cfg.prep_error)

    det = cfg.detector
    if isinstance(det, (IdealOnOff, Apd)):
        p_sig = acceptance_probability(det, sqrt_r * alpha)
        p_vac = acceptance_probability(det, sqrt_r * cfg.prep_error)
        accepted = u[:, 1] < np.where(truth, p_sig, p_vac)
    elif isinstance(det, (HomodyneStabilized, HomodyneRandomized)):
        a = effective_displacement(det, 1.0) * beta_tap
        if isinstance(det, HomodyneRandomized):
            theta = 2.0 * np.pi * (u[:, 2] - 0.5)
            a = a * np.cos(theta)
        x_tap = a + _QUAD_SD * ndtri(np.clip(u[:, 1], _U_LO, _U_HI))
        accepted = np.abs(x_tap) > det.threshold
    else:
        raise TypeError(f"unknown detector {det!r}")

    sig_amp = np.where(truth, sqrt_t * alpha, sqrt_t * cfg.prep_error)
    verify_x = sig_amp + _QUAD_SD * ndtri(np.clip(u[:, 3], _U_LO, _U_HI))

    def hist(mask):
        idx = np.searchsorted(edges, verify_x[mask], side="right")
        return np.bincount(idx, minlength=len(edges) + 1)

    return (
        int(truth.sum()),
        int((truth & accepted).sum()),
        int((~truth).sum()),
        int((~truth & accepted).sum()),
        hist(np.ones(n, dtype=bool)),
        hist(accepted),
    )


def run_trials(cfg: McConfig) -> McResult:
    """Run the full simulation and return count-based estimates.

    Deterministic for fixed (seed, trials): blocks are generated from
    per-block Philox keys and reduced in block order, so the worker count
    cannot change any output bit.
    """
    edges = _hist_edges(cfg)
    n_blocks = (cfg.trials + BLOCK_SIZE - 1) // BLOCK_SIZE

    if cfg.workers == 1 or n_blocks == 1:
        results = [_simulate_block(cfg, b, edges) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(lambda b: _simulate_block(cfg, b, edges),
                                    range(n_blocks)))

    n_c = n_ac = n_v = n_av = 0
    h_all = np.zeros(len(edges) + 1, dtype=np.int64)
    h_acc = np.zeros(len(edges) + 1, dtype=np.int64)
    for nc, nac, nv, nav, ha, hc in results:  # fixed block order
        n_c += nc
        n_ac += nac
        n_v += nv
        n_av += nav
        h_all += ha
        h_acc += hc
    return McResult(cfg, n_c, n_ac, n_v, n_av,
                    Histogram(edges, h_all), Histogram(edges, h_acc))


def sample_trials(cfg: McConfig, n: int) -> list:
    """Materialize the first n trial records (same randomness as run_trials),
    for inspection and record-level tests."""
    n = min(n, cfg.trials)
    records = []
    block = 0
    while len(records) < n:
        u = _block_uniforms(cfg.seed, block, min(BLOCK_SIZE, cfg.trials - block * BLOCK_SIZE))
        mix = cfg.mixture
        sqrt_r = math.sqrt(mix.tap_reflectivity)
        sqrt_t = math.sqrt(mix.transmissivity)
        det = cfg.detector
        for row in u:
            if len(records) >= n:
                break
            truth = row[0] < mix.p
            amp = mix.alpha.magnitude if truth else cfg.prep_error
            beta = sqrt_r * amp
            if isinstance(det, (IdealOnOff, Apd)):
                accepted = row[1] < acceptance_probability(det, beta)
                tap_outcome = bool(accepted)
            else:
                a = effective_displacement(det, beta)
                if isinstance(det, HomodyneRandomized):
                    a = a * math.cos(2.0 * math.pi * (row[2] - 0.5))
                x_tap = a + _QUAD_SD * float(ndtri(np.clip(row[1], _U_LO, _U_HI)))
                accepted = abs(x_tap) > det.threshold
                tap_outcome = x_tap
            verify = sqrt_t * amp + _QUAD_SD * float(ndtri(np.clip(row[3], _U_LO, _U_HI)))
            records.append(TrialRecord("coherent" if truth else "vacuum",
                                       tap_outcome, bool(accepted), verify))
        block += 1
    return records


# ---------------------------------------------------------------------------
# verification-arm analysis
# ---------------------------------------------------------------------------

def theory_branches(cfg: McConfig, condition: str) -> list:
    """Weighted coherent branches of the verification-arm marginal implied by
    the simulation model, for 'all', 'accepted' or 'rejected' subsets."""
    mix = cfg.mixture
    sqrt_r = math.sqrt(mix.tap_reflectivity)
    sqrt_t = math.sqrt(mix.transmissivity)
    amp_sig = sqrt_t * mix.alpha.magnitude
    amp_leak = sqrt_t * cfg.prep_error
    p = mix.p
    if condition == "all":
        return [(p, amp_sig + 0j), (1.0 - p, amp_leak + 0j)]
    p_acc = acceptance_probability(cfg.detector, sqrt_r * mix.alpha.magnitude)
    e_eff = acceptance_probability(cfg.detector, sqrt_r * cfg.prep_error)
    if condition == "accepted":
        p_s = p * p_acc + (1.0 - p) * e_eff
        if p_s <= 0.0:
            raise ValueError("empty accepted subset in theory model")
        return [(p * p_acc / p_s, amp_sig + 0j), ((1.0 - p) * e_eff / p_s, amp_leak + 0j)]
    if condition == "rejected":
        p_r = p * (1.0 - p_acc) + (1.0 - p) * (1.0 - e_eff)
        if p_r <= 0.0:
            raise ValueError("empty rejected subset in theory model")
        return [(p * (1.0 - p_acc) / p_r, amp_sig + 0j),
                ((1.0 - p) * (1.0 - e_eff) / p_r, amp_leak + 0j)]
    raise ValueError(f"condition must be all/accepted/rejected, got {condition!r}")


@dataclass
class VerificationHistogram:
    histogram: Histogram
    expected_probs: np.ndarray  # per bin incl. under/overflow, from the model
    branches: list

    def chi2_test(self, min_expected: float = 5.0):
        return chi2_gof(self.histogram.counts, self.expected_probs, min_expected)


def verification_histogram(cfg: McConfig, condition: str = "all",
                           result: McResult | None = None) -> VerificationHistogram:
    """Histogram of verification quadratures over a subset of trials,
    together with the analytic marginal of the corresponding mixture."""
    if result is None:
        result = run_trials(cfg)
    hist = {"all": result.hist_all,
            "accepted": result.hist_accepted,
            "rejected": result.hist_rejected}[condition]
    if hist.total == 0:
        raise ValueError(f"no trials in subset {condition!r}")
    branches = theory_branches(cfg, condition)
    cdf = marginal_cdf(branches, hist.edges)
    probs = np.concatenate([[cdf[0]], np.diff(cdf), [1.0 - cdf[-1]]])
    return VerificationHistogram(hist, probs, branches)


def chi2_gof(counts: np.ndarray, probs: np.ndarray, min_expected: float = 5.0):
    """Pearson chi-squared goodness of fit with small-expectation pooling.

    Bins whose expected count falls below ``min_expected`` are merged into
    their neighbor (left to right).  Returns (statistic, dof, p_value).
    """
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    expected = np.asarray(probs, dtype=float) * total
    merged_c, merged_e = [], []
    acc_c = acc_e = 0.0
    for c, e in zip(counts, expected):
        acc_c += c
        acc_e += e
        if acc_e >= min_expected:
            merged_c.append(acc_c)
            merged_e.append(acc_e)
            acc_c = acc_e = 0.0
    if merged_c:
        merged_c[-1] += acc_c
        merged_e[-1] += acc_e
    c = np.array(merged_c)
    e = np.array(merged_e)
    if len(c) < 2:
        raise ValueError("too few populated bins for a chi-squared test")
    stat = float(np.sum((c - e) ** 2 / e))
    dof = len(c) - 1
    return stat, dof, float(_chi2_dist.sf(stat, dof))


def calibrate_prep_error(det, tap_reflectivity: float, error_target: float) -> float:
    """Residual vacuum-slot amplitude that makes the measured error
    probability hit ``error_target`` for this detector and tap, found by a
    bracketed root search.  Requires error_target >= the detector's intrinsic
    error probability."""
    base = error_probability(det)
    if error_target < base:
        raise ValueError(
            f"target error {error_target} below intrinsic detector error {base}"
        )
    if error_target == base:
        return 0.0
    sqrt_r = math.sqrt(tap_reflectivity)

    def f(amp):
        return acceptance_probability(det, sqrt_r * amp) - error_target

    hi = 1.0
    while f(hi) < 0.0 and hi < 1e3:
        hi *= 2.0
    return float(brentq(f, 0.0, hi, xtol=1e-12))
