"""Brute-force truncated-Fock-space reference implementation.

Everything here is deliberately direct and dense: states live on a photon
number grid 0..n_max per mode, beam splitters act block-exactly within each
total-photon sector, and detector POVMs are applied as explicit matrices.
This module is the numerical authority the Gaussian calculus is validated
against; it has no performance ambitions and supports at most three modes
(pure states) or two modes (density operators).

Quadrature moments are reported in the covariance-matrix convention of
:mod:`vacfilter.gaussian` (vacuum variance 1); quadrature-interval POVMs take
their bounds in the homodyne convention (vacuum variance 1/4).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

TRUNCATION_GUARD = 1e-10


class TruncationError(ValueError):
    """The requested state does not fit the photon-number cutoff."""


@dataclass
class FockState:
    """State on a truncated Fock grid: either a pure amplitude tensor ``vec``
    of shape (n_max+1,)^m or a density tensor ``rho`` of shape
    (n_max+1,)^(2m) with ket axes first.  ``deficit`` accumulates probability
    lost to the cutoff by construction or beam-splitter truncation."""

    n_max: int
    vec: np.ndarray | None = None
    rho: np.ndarray | None = None
    deficit: float = 0.0

    @property
    def n_modes(self) -> int:
        if self.vec is not None:
            return self.vec.ndim
        return self.rho.ndim // 2

    @property
    def is_pure(self) -> bool:
        return self.vec is not None

    def trace(self) -> float:
        if self.vec is not None:
            return float(np.vdot(self.vec, self.vec).real)
        m = self.n_modes
        return float(np.einsum(self.rho, list(range(m)) * 2).real)


def _poisson_tail(mean: float, n_max: int) -> float:
    n = np.arange(n_max + 1)
    if mean == 0.0:
        return 0.0
    log_terms = n * np.log(mean) - mean - gammaln(n + 1)
    return float(max(0.0, 1.0 - np.exp(log_terms).sum()))


def vacuum_state(n_max: int, n_modes: int = 1) -> FockState:
    vec = np.zeros((n_max + 1,) * n_modes, dtype=complex)
    vec[(0,) * n_modes] = 1.0
    return FockState(n_max, vec=vec)


def number_state(ns, n_max: int) -> FockState:
    ns = tuple(int(n) for n in np.atleast_1d(ns))
    if any(n < 0 or n > n_max for n in ns):
        raise TruncationError(f"photon numbers {ns} outside cutoff {n_max}")
    vec = np.zeros((n_max + 1,) * len(ns), dtype=complex)
    vec[ns] = 1.0
    return FockState(n_max, vec=vec)


def coherent_state(alpha: complex, n_max: int) -> FockState:
    """|alpha> = e^{-|alpha|^2/2} sum alpha^n / sqrt(n!) |n>.

    Fails if the Poisson tail beyond the cutoff exceeds 1e-10 (guard
    |alpha|^2 <= n_max / 4 comfortably satisfies this).
    """
    mean = abs(alpha) ** 2
    tail = _poisson_tail(mean, n_max)
    if tail > TRUNCATION_GUARD:
        raise TruncationError(
            f"cutoff {n_max} too small for |alpha|^2 = {mean:.3f} (tail {tail:.2e})"
        )
    n = np.arange(n_max + 1)
    log_mag = 0.5 * (n * np.log(mean) if mean > 0 else np.zeros(n_max + 1)) - 0.5 * gammaln(n + 1)
    amps = np.exp(log_mag - 0.5 * mean) * np.exp(1j * np.angle(alpha) * n)
    if mean == 0.0:
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[0] = 1.0
    return FockState(n_max, vec=amps.astype(complex), deficit=tail)


def tmsv_state(V: float, n_max: int) -> FockState:
    """Two-mode squeezed vacuum of quadrature variance V, via
    tanh r = sqrt((V-1)/(V+1)): sqrt(1-lam^2) sum lam^n |nn>."""
    if V < 1.0:
        raise ValueError(f"two-mode squeezing variance must be >= 1, got {V}")
    lam = np.sqrt((V - 1.0) / (V + 1.0))
    tail = float(lam ** (2 * (n_max + 1)))
    if tail > TRUNCATION_GUARD:
        raise TruncationError(f"cutoff {n_max} too small for V = {V} (tail {tail:.2e})")
    vec = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    n = np.arange(n_max + 1)
    vec[n, n] = np.sqrt(1.0 - lam * lam) * lam ** n
    return FockState(n_max, vec=vec, deficit=tail)


def thermal_state(n_bar: float, n_max: int) -> FockState:
    """Thermal state of mean photon number n_bar (quadrature variance
    2 n_bar + 1), stored as a diagonal density tensor."""
    if n_bar < 0.0:
        raise ValueError(f"mean photon number must be >= 0, got {n_bar}")
    n = np.arange(n_max + 1)
    probs = n_bar ** n / (n_bar + 1.0) ** (n + 1)
    tail = float(max(0.0, 1.0 - probs.sum()))
    if tail > TRUNCATION_GUARD:
        raise TruncationError(f"cutoff {n_max} too small for n_bar = {n_bar}")
    rho = np.diag(probs.astype(complex))
    return FockState(n_max, rho=rho, deficit=tail)


def tensor(a: FockState, b: FockState) -> FockState:
    """Tensor product of two pure states (density products are handled by the
    callers by decomposing into pure components)."""
    if not (a.is_pure and b.is_pure):
        raise ValueError("tensor products are implemented for pure states only")
    if a.n_max != b.n_max:
        raise ValueError("cutoffs differ")
    vec = np.tensordot(a.vec, b.vec, axes=0)
    return FockState(a.n_max, vec=vec, deficit=a.deficit + b.deficit)


# ---------------------------------------------------------------------------
# single-mode operators and their application
# ---------------------------------------------------------------------------

def lowering_matrix(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, n_max + 1)), 1).astype(complex)


def _apply_axis(op: np.ndarray, tensor_: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(op, tensor_, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def apply_mode_operator(state: FockState, op: np.ndarray, mode: int) -> FockState:
    """Left-apply a single-mode operator: |psi> -> op|psi>, rho -> op rho op†.

    The operator is not assumed unitary; no renormalization is performed.
    """
    if state.is_pure:
        return FockState(state.n_max, vec=_apply_axis(op, state.vec, mode),
                         deficit=state.deficit)
    m = state.n_modes
    rho = _apply_axis(op, state.rho, mode)
    rho = _apply_axis(op.conj(), rho, m + mode)
    return FockState(state.n_max, rho=rho, deficit=state.deficit)


def displace(state: FockState, mode: int, alpha: complex) -> FockState:
    """Displacement via the exponential of the truncated generator
    alpha a† - alpha* a (exactly unitary on the truncated grid)."""
    a = lowering_matrix(state.n_max)
    d = expm(alpha * a.conj().T - np.conj(alpha) * a)
    return apply_mode_operator(state, d, mode)


def phase_rotate(state: FockState, mode: int, phi: float) -> FockState:
    """Phase-space rotation exp(i phi n) (x,p) -> (x cos - p sin, x sin + p cos)."""
    d = np.diag(np.exp(1j * phi * np.arange(state.n_max + 1)))
    return apply_mode_operator(state, d, mode)


# ---------------------------------------------------------------------------
# beam splitter, block-exact in total photon number
# ---------------------------------------------------------------------------

def _bs_blocks(theta: float, n_total_max: int) -> list:
    """Rotation matrices of exp(theta (a†b - a b†)) within each sector of
    total photon number n; sector n has dimension n+1 and the generator is
    tridiagonal with elements sqrt((k+1)(n-k))."""
    blocks = []
    for n in range(n_total_max + 1):
        k = np.arange(n)
        off = np.sqrt((k + 1.0) * (n - k))
        g = np.zeros((n + 1, n + 1))
        g[k + 1, k] = theta * off
        g[k, k + 1] = -theta * off
        blocks.append(expm(g))
    return blocks


def fock_beamsplitter(state: FockState, mode_i: int, mode_j: int,
                      transmissivity: float) -> FockState:
    """Beam splitter with the same convention as the Gaussian module:
    mode_i <- sqrt(T) mode_i + sqrt(1-T) mode_j,
    mode_j <- -sqrt(1-T) mode_i + sqrt(T) mode_j.

    Exact within every total-photon sector that fits the cutoff; sectors with
    n > n_max lose the amplitudes rotated past the grid, which is added to
    the reported deficit.
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {transmissivity}")
    if mode_i == mode_j:
        raise ValueError("beam splitter needs two distinct modes")
    theta = np.arccos(np.clip(np.sqrt(transmissivity), 0.0, 1.0))
    blocks = _bs_blocks(theta, 2 * state.n_max)
    if state.is_pure:
        vec, lost = _bs_apply(state.vec, mode_i, mode_j, blocks, state.n_max)
        return FockState(state.n_max, vec=vec, deficit=state.deficit + lost)
    m = state.n_modes
    rho, lost_k = _bs_apply(state.rho, mode_i, mode_j, blocks, state.n_max)
    rho, _ = _bs_apply(rho, m + mode_i, m + mode_j,
                       [b.conj() for b in blocks], state.n_max)
    tr_after = float(np.einsum(rho, list(range(m)) * 2).real)
    return FockState(state.n_max, rho=rho,
                     deficit=state.deficit + max(0.0, 1.0 - state.deficit - tr_after))


def _bs_apply(tensor_: np.ndarray, ax_i: int, ax_j: int, blocks: list, n_max: int):
    work = np.moveaxis(tensor_, (ax_i, ax_j), (0, 1))
    shape = work.shape
    work = work.reshape(shape[0], shape[1], -1).copy()
    lost = 0.0
    for n in range(2 * n_max + 1):
        k0, k1 = max(0, n - n_max), min(n, n_max)
        ks = np.arange(k0, k1 + 1)
        sub = work[ks, n - ks, :]
        full = np.zeros((n + 1, sub.shape[1]), dtype=complex)
        full[ks] = sub
        rotated = blocks[n] @ full
        if n > n_max:
            outside = np.concatenate([rotated[:k0], rotated[k1 + 1:]])
            lost += float(np.sum(np.abs(outside) ** 2))
        work[ks, n - ks, :] = rotated[ks]
    work = work.reshape(shape)
    return np.moveaxis(work, (0, 1), (ax_i, ax_j)), lost


# ---------------------------------------------------------------------------
# detector POVMs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoClick:
    """On/off detector stays silent: diag (1-p_d)(1-eta)^n."""
    eta: float
    dark_prob: float = 0.0


@dataclass(frozen=True)
class Click:
    """On/off detector fires: 1 - NoClick."""
    eta: float
    dark_prob: float = 0.0


@dataclass(frozen=True)
class QuadratureInterval:
    """Quadrature outcome within [lo, hi], in homodyne units (vacuum
    variance 1/4).  Built from harmonic-oscillator eigenfunction overlaps."""
    lo: float
    hi: float
    quad_points: int = 400


def _povm_matrix(povm, n_max: int) -> np.ndarray:
    if isinstance(povm, (NoClick, Click)):
        n = np.arange(n_max + 1)
        d = (1.0 - povm.dark_prob) * (1.0 - povm.eta) ** n
        if isinstance(povm, Click):
            d = 1.0 - d
        return np.diag(d.astype(complex))
    if isinstance(povm, QuadratureInterval):
        if not povm.lo < povm.hi:
            raise ValueError("quadrature interval must have lo < hi")
        xs, ws = np.polynomial.legendre.leggauss(povm.quad_points)
        xs = 0.5 * (povm.hi - povm.lo) * xs + 0.5 * (povm.hi + povm.lo)
        ws = 0.5 * (povm.hi - povm.lo) * ws
        psi = oscillator_wavefunctions(n_max, xs)
        return (psi * ws) @ psi.T.astype(complex)
    raise TypeError(f"unknown POVM {povm!r}")


def oscillator_wavefunctions(n_max: int, x) -> np.ndarray:
    """Matrix psi[n, k] of number-state wavefunctions at points x, in the
    homodyne convention: psi_0(x) = (2/pi)^(1/4) exp(-x^2)."""
    x = np.asarray(x, dtype=float)
    u = np.sqrt(2.0) * x
    psi = np.zeros((n_max + 1, x.size))
    psi[0] = np.pi ** -0.25 * np.exp(-0.5 * u * u)
    if n_max >= 1:
        psi[1] = np.sqrt(2.0) * u * psi[0]
    for n in range(1, n_max):
        psi[n + 1] = (np.sqrt(2.0) * u * psi[n] - np.sqrt(n) * psi[n - 1]) / np.sqrt(n + 1.0)
    return 2.0 ** 0.25 * psi


def povm_expectation(state: FockState, mode: int, povm):
    """Probability of a POVM outcome on one mode and the conditioned state
    (same mode count; conditioning uses the Kraus operator sqrt(Pi)).

    Raises on zero-probability conditioning.
    """
    pi = _povm_matrix(povm, state.n_max)
    evals, evecs = np.linalg.eigh(pi)
    evals = np.clip(evals.real, 0.0, None)
    kraus = (evecs * np.sqrt(evals)) @ evecs.conj().T
    updated = apply_mode_operator(state, kraus, mode)
    prob = updated.trace()
    if prob <= 0.0:
        raise ValueError("zero-probability POVM outcome; conditioning undefined")
    if updated.is_pure:
        vec = updated.vec / np.sqrt(prob)
        return float(prob), FockState(state.n_max, vec=vec, deficit=state.deficit)
    return float(prob), FockState(state.n_max, rho=updated.rho / prob, deficit=state.deficit)


# ---------------------------------------------------------------------------
# moments (reported in the vacuum-variance-1 convention)
# ---------------------------------------------------------------------------

def _expectation(state: FockState, ops_by_mode: dict) -> complex:
    """<prod_k O_k> with one (already multiplied) matrix per involved mode."""
    if state.is_pure:
        work = state.vec
        for mode, op in ops_by_mode.items():
            work = _apply_axis(op, work, mode)
        return complex(np.vdot(state.vec, work))
    m = state.n_modes
    work = state.rho
    for mode, op in ops_by_mode.items():
        work = _apply_axis(op, work, mode)
    return complex(np.einsum(work, list(range(m)) * 2))


def quadrature_matrices(n_max: int):
    a = lowering_matrix(n_max)
    x = a + a.conj().T
    p = 1j * (a.conj().T - a)
    return x, p


def mean_vector(state: FockState) -> np.ndarray:
    """Quadrature means (x1, p1, ...) with x = a + a† (vacuum variance 1)."""
    x, p = quadrature_matrices(state.n_max)
    out = np.zeros(2 * state.n_modes)
    for mode in range(state.n_modes):
        out[2 * mode] = _expectation(state, {mode: x}).real
        out[2 * mode + 1] = _expectation(state, {mode: p}).real
    return out


def covariance_matrix(state: FockState) -> np.ndarray:
    """Symmetrized quadrature covariance matrix in vacuum-variance-1 units."""
    x, p = quadrature_matrices(state.n_max)
    quads = [(k // 2, x if k % 2 == 0 else p) for k in range(2 * state.n_modes)]
    mean = mean_vector(state)
    dim = 2 * state.n_modes
    cm = np.zeros((dim, dim))
    for i in range(dim):
        mode_i, op_i = quads[i]
        for j in range(i, dim):
            mode_j, op_j = quads[j]
            if mode_i == mode_j:
                sym = 0.5 * (op_i @ op_j + op_j @ op_i)
                val = _expectation(state, {mode_i: sym}).real
            else:
                val = _expectation(state, {mode_i: op_i, mode_j: op_j}).real
            cm[i, j] = cm[j, i] = val - mean[i] * mean[j]
    return cm


def mean_photon(state: FockState, mode: int) -> float:
    a = lowering_matrix(state.n_max)
    return _expectation(state, {mode: a.conj().T @ a}).real


def reduced_density(state: FockState, keep_mode: int) -> np.ndarray:
    """Single-mode reduced density matrix (for pure multimode states)."""
    if not state.is_pure:
        if state.n_modes == 1:
            return state.rho
        raise ValueError("reduced_density of mixed states supports one mode only")
    work = np.moveaxis(state.vec, keep_mode, 0)
    flat = work.reshape(work.shape[0], -1)
    return flat @ flat.conj().T


def von_neumann_entropy(state: FockState) -> float:
    """Entropy in bits; zero for pure states by construction."""
    if state.is_pure:
        return 0.0
    m = state.n_modes
    dim = (state.n_max + 1) ** m
    rho = state.rho.reshape(dim, dim)
    evals = np.linalg.eigvalsh(rho).real
    evals = evals[evals > 1e-15]
    return float(-(evals * np.log2(evals)).sum())


def fidelity(a: FockState, b: FockState) -> float:
    """|<a|b>|^2 for pure states."""
    if not (a.is_pure and b.is_pure):
        raise ValueError("fidelity implemented for pure states only")
    return float(abs(np.vdot(a.vec, b.vec)) ** 2)
