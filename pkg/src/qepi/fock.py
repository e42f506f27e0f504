"""Truncated Fock-space states and the quadrature operator algebra.

A state of ``n`` bosonic modes is a dense density matrix on the tensor
product of per-mode spaces spanned by ``|0>, ..., |d_k - 1>``.  Mode 0 is
the most significant tensor factor (``np.kron`` order).

Truncation is never silent: constructors refuse inputs whose mass beyond
the cutoff exceeds ``TOL.tail`` and only renormalize below that threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Literal, Sequence

import numpy as np

from .conventions import LEDGER, TOL, TruncationError


@dataclass(frozen=True)
class FockCutoff:
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("at least one mode is required")
        if any(d < 2 for d in dims):
            raise ValueError(f"every mode needs at least 2 Fock levels, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def single(cls, d: int) -> "FockCutoff":
        return cls((d,))

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))


def _as_cutoff(cutoff: FockCutoff | int | Sequence[int]) -> FockCutoff:
    if isinstance(cutoff, FockCutoff):
        return cutoff
    if isinstance(cutoff, (int, np.integer)):
        return FockCutoff.single(int(cutoff))
    return FockCutoff(tuple(cutoff))


@dataclass(frozen=True)
class QuadratureIndex:
    mode: int
    kind: Literal["Q", "P"]

    def __post_init__(self) -> None:
        if self.kind not in ("Q", "P"):
            raise ValueError(f"kind must be 'Q' or 'P', got {self.kind!r}")
        if self.mode < 0:
            raise ValueError("mode must be nonnegative")

    @property
    def position(self) -> int:
        """Index into R = (Q_1, P_1, ..., Q_n, P_n)."""
        return 2 * self.mode + (0 if self.kind == "Q" else 1)


def all_quadratures(n_modes: int) -> list[QuadratureIndex]:
    return [QuadratureIndex(m, k) for m in range(n_modes) for k in ("Q", "P")]


@dataclass(frozen=True, eq=False)
class TruncatedState:
    """Density matrix on a truncated Fock space.

    ``validate=False`` skips the Hermiticity / trace / positivity checks;
    it is used internally for intermediate results that are checked by the
    caller, e.g. backwards diffusion in finite differences.
    """

    rho: np.ndarray
    cutoff: FockCutoff
    validate: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        cutoff = _as_cutoff(self.cutoff)
        object.__setattr__(self, "cutoff", cutoff)
        rho = np.array(self.rho, dtype=complex)
        D = cutoff.total
        if rho.shape != (D, D):
            raise ValueError(f"rho has shape {rho.shape}, cutoff requires {(D, D)}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        if self.validate:
            check_state(rho)

    @property
    def n_modes(self) -> int:
        return self.cutoff.n_modes

    @property
    def dims(self) -> tuple[int, ...]:
        return self.cutoff.dims

    @property
    def dim(self) -> int:
        return self.cutoff.total

    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho, self.rho)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(hermitize(self.rho))

    def populations(self, mode: int = 0) -> np.ndarray:
        """Photon-number distribution of one mode."""
        reduced = partial_trace(self, [mode]) if self.n_modes > 1 else self
        return np.clip(np.diag(reduced.rho).real, 0.0, None)

    def to_json(self) -> str:
        return json.dumps(state_to_dict(self))


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def check_state(rho: np.ndarray, tol=TOL) -> None:
    herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    if herm > tol.herm:
        raise ValueError(f"density matrix is not Hermitian (defect {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol.trace:
        raise ValueError(f"density matrix trace {tr!r} differs from 1")
    lo = np.linalg.eigvalsh(hermitize(rho))[0]
    if lo < -tol.psd:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")


# --- single-mode building blocks ------------------------------------------

@lru_cache(maxsize=64)
def _annihilation(d: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(complex)
    a.setflags(write=False)
    return a


def annihilation(d: int) -> np.ndarray:
    return _annihilation(int(d)).copy()


def single_mode_quadratures(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated Q = (a + a^dag) and P = -i (a - a^dag), so [Q, P] = 2i below the top level."""
    a = _annihilation(int(d))
    scale = math.sqrt(LEDGER.commutator_scale / 2)
    Q = scale * (a + a.conj().T)
    P = -1j * scale * (a - a.conj().T)
    return Q, P


def _embed_operator(op: np.ndarray, mode: int, dims: Sequence[int]) -> np.ndarray:
    if len(dims) == 1:
        return op
    left = int(np.prod(dims[:mode])) if mode > 0 else 1
    right = int(np.prod(dims[mode + 1:])) if mode + 1 < len(dims) else 1
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def quadrature_operator(i: QuadratureIndex, cutoff) -> np.ndarray:
    """Matrix of the quadrature ``R_i`` on the full truncated space.

    The canonical commutator holds exactly on levels ``0..d-2`` of the
    mode; the top level carries the truncation defect.
    """
    cutoff = _as_cutoff(cutoff)
    if i.mode >= cutoff.n_modes:
        raise ValueError(f"mode {i.mode} out of range for {cutoff.n_modes} modes")
    Q, P = single_mode_quadratures(cutoff.dims[i.mode])
    return _embed_operator(Q if i.kind == "Q" else P, i.mode, cutoff.dims)


def number_operator(cutoff, mode: int = 0) -> np.ndarray:
    cutoff = _as_cutoff(cutoff)
    n = np.diag(np.arange(cutoff.dims[mode], dtype=float)).astype(complex)
    return _embed_operator(n, mode, cutoff.dims)


def displacement_generator(i: QuadratureIndex, cutoff) -> np.ndarray:
    """Hermitian ``G`` with ``D_{R_i}(theta) = exp(-i theta G)`` shifting ``<R_i>`` by ``theta``."""
    cutoff = _as_cutoff(cutoff)
    conj = QuadratureIndex(i.mode, "P" if i.kind == "Q" else "Q")
    R = quadrature_operator(conj, cutoff)
    sign = 1.0 if i.kind == "Q" else -1.0
    return sign * R / LEDGER.commutator_scale


def _hermitian_expm(G: np.ndarray, theta: float) -> np.ndarray:
    w, v = np.linalg.eigh(G)
    return (v * np.exp(-1j * theta * w)) @ v.conj().T


def displacement_defect(i: QuadratureIndex, theta: float, d: int,
                        probe_levels: int | None = None, pad: int = 40) -> float:
    """Largest column deviation between the truncated displacement and the
    displacement computed on a padded space, over input levels below ``probe_levels``."""
    if probe_levels is None:
        probe_levels = max(1, d // 2)
    single = QuadratureIndex(0, i.kind)
    U = _hermitian_expm(displacement_generator(single, d), theta)
    U_pad = _hermitian_expm(displacement_generator(single, d + pad), theta)
    exact = U_pad[:, :probe_levels]
    approx = np.zeros_like(exact)
    approx[:d] = U[:, :probe_levels]
    return float(np.max(np.linalg.norm(exact - approx, axis=0)))


def displacement_along(i: QuadratureIndex, theta: float, cutoff,
                       probe_levels: int | None = None, tol=TOL) -> np.ndarray:
    """Unitary displacement of the quadrature ``R_i`` by ``theta``.

    Built as the exponential of the truncated conjugate quadrature, so it is
    exactly unitary and ``D(a) D(b) = D(a + b)`` on the truncated space.
    Raises :class:`TruncationError` if it deviates from the untruncated
    displacement by more than ``tol.leak`` on the probed low levels.
    """
    cutoff = _as_cutoff(cutoff)
    d = cutoff.dims[i.mode]
    if theta == 0:
        return np.eye(cutoff.total, dtype=complex)
    defect = displacement_defect(i, theta, d, probe_levels)
    if defect > tol.leak:
        raise TruncationError(
            f"displacement by {theta} leaks past cutoff {d} (defect {defect:.2e})",
            tail_mass=defect, suggested_cutoff=d + max(10, int(4 * abs(theta)) + 10))
    return _hermitian_expm(displacement_generator(i, cutoff), theta)


def phase_space_displacement(shift: Sequence[float], d: int, pad: int = 0) -> np.ndarray:
    """Single-mode displacement moving ``(<Q>, <P>)`` by ``shift``.

    With ``pad > 0`` the exponential is taken on ``d + pad`` levels and the
    result is returned uncropped, so callers can measure leakage.
    """
    n = d + pad
    Q, P = single_mode_quadratures(n)
    q, p = shift
    G = (q * P - p * Q) / LEDGER.commutator_scale
    return _hermitian_expm(G, 1.0)


# --- constructors -----------------------------------------------------------

def thermal_tail_mass(N: float, d: int) -> float:
    if N <= 0:
        return 0.0
    return float((N / (N + 1.0)) ** d)


def required_cutoff(N: float, tail_tol: float = TOL.tail) -> int:
    """Smallest cutoff leaving less than ``tail_tol`` of a thermal(N) distribution behind."""
    if N <= 0:
        return 2
    q = N / (N + 1.0)
    return max(2, int(math.ceil(math.log(tail_tol) / math.log(q))) + 1)


def _truncated_thermal_entropy(N: float, d: int) -> float:
    q = N / (N + 1.0)
    p = q ** np.arange(d)
    p /= p.sum()
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def thermal_auto_cutoff(N: float, tail_tol: float = TOL.tail) -> int:
    """Smallest cutoff whose tail mass and renormalized entropy deficit are both below ``tail_tol``.

    The entropy deficit is roughly ``tail * log(1/tail)``, so the tail test
    alone leaves entropies off by about twenty times ``tail_tol``.
    """
    d = required_cutoff(N, tail_tol)
    if N <= 0:
        return d
    exact = (N + 1) * math.log(N + 1) - N * math.log(N)
    while exact - _truncated_thermal_entropy(N, d) >= tail_tol:
        d += 1
    return d


def make_fock(k: int, cutoff) -> TruncatedState:
    cutoff = _as_cutoff(cutoff)
    if cutoff.n_modes != 1:
        raise ValueError("make_fock builds single-mode states; use tensor() for more")
    d = cutoff.dims[0]
    if not 0 <= k < d:
        raise TruncationError(f"photon number {k} needs cutoff > {k}, got {d}",
                              suggested_cutoff=k + 1)
    rho = np.zeros((d, d), dtype=complex)
    rho[k, k] = 1.0
    return TruncatedState(rho, cutoff)


def make_thermal(N: float, cutoff=None, tol=TOL) -> TruncatedState:
    """Thermal state with mean photon number ``N``; cutoff chosen from ``tol.tail`` if omitted."""
    if N < 0:
        raise ValueError("mean photon number must be nonnegative")
    if cutoff is None:
        cutoff = thermal_auto_cutoff(N, tol.tail)
    cutoff = _as_cutoff(cutoff)
    d = cutoff.dims[0]
    tail = thermal_tail_mass(N, d)
    if tail >= tol.tail:
        raise TruncationError(
            f"thermal({N}) leaves tail mass {tail:.2e} beyond cutoff {d}",
            tail_mass=tail, suggested_cutoff=required_cutoff(N, tol.tail))
    if N == 0:
        p = np.zeros(d)
        p[0] = 1.0
    else:
        p = (N / (N + 1.0)) ** np.arange(d)
        p /= p.sum()
    return TruncatedState(np.diag(p).astype(complex), cutoff)


def make_coherent(alpha: complex, cutoff, tol=TOL) -> TruncatedState:
    """Coherent state ``|alpha>``; ``<Q> = 2 Re(alpha)``, ``<P> = 2 Im(alpha)``."""
    cutoff = _as_cutoff(cutoff)
    d = cutoff.dims[0]
    n = np.arange(d)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    mag = abs(alpha)
    if mag == 0:
        amp = np.zeros(d, dtype=complex)
        amp[0] = 1.0
    else:
        logs = -0.5 * mag**2 + n * math.log(mag) - 0.5 * log_fact
        amp = np.exp(logs) * np.exp(1j * np.angle(alpha) * n)
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amp) ** 2)))
    if tail >= tol.tail:
        raise TruncationError(
            f"coherent state |{alpha}> leaves tail mass {tail:.2e} beyond cutoff {d}",
            tail_mass=tail, suggested_cutoff=int(mag**2 + 10 * mag + 10))
    amp /= np.linalg.norm(amp)
    return TruncatedState(np.outer(amp, amp.conj()), cutoff)


def random_state(cutoff, rank: int | None = None, seed: int | None = None) -> TruncatedState:
    """Seeded random state ``G G^dag / tr`` with ``G`` a complex Gaussian ``D x rank`` matrix.

    ``rank=None`` gives full rank.
    """
    cutoff = _as_cutoff(cutoff)
    D = cutoff.total
    rank = D if rank is None else int(rank)
    if not 1 <= rank <= D:
        raise ValueError(f"rank must be in [1, {D}], got {rank}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((D, rank)) + 1j * rng.standard_normal((D, rank))
    rho = G @ G.conj().T
    rho = hermitize(rho / np.trace(rho).real)
    return TruncatedState(rho, cutoff)


# --- structural operations --------------------------------------------------

def tensor(a: TruncatedState, b: TruncatedState) -> TruncatedState:
    return TruncatedState(np.kron(a.rho, b.rho), FockCutoff(a.dims + b.dims),
                          validate=False)


def partial_trace(state: TruncatedState, keep: Iterable[int]) -> TruncatedState:
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one mode")
    n = state.n_modes
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"modes {keep} out of range for {n} modes")
    if keep == list(range(n)):
        return state
    dims = state.dims
    t = state.rho.reshape(dims + dims)
    traced = [m for m in range(n) if m not in keep]
    # einsum over repeated ket/bra labels for the traced modes
    letters = "abcdefghijklmnopqrstuvwxyz"
    ket = [letters[m] for m in range(n)]
    bra = [letters[m].upper() if m in keep else letters[m] for m in range(n)]
    out = [letters[m] for m in keep] + [letters[m].upper() for m in keep]
    red = np.einsum("".join(ket + bra) + "->" + "".join(out), t)
    kd = tuple(dims[m] for m in keep)
    D = int(np.prod(kd))
    return TruncatedState(hermitize(red.reshape(D, D)), FockCutoff(kd), validate=False)


def embed(state: TruncatedState, cutoff) -> TruncatedState:
    """Zero-pad a state onto a larger cutoff (per mode)."""
    cutoff = _as_cutoff(cutoff)
    if cutoff.n_modes != state.n_modes:
        raise ValueError("mode count mismatch")
    if any(new < old for new, old in zip(cutoff.dims, state.dims)):
        raise ValueError(f"embed cannot shrink {state.dims} to {cutoff.dims}; use truncate")
    if cutoff.dims == state.dims:
        return state
    big = np.zeros(cutoff.dims + cutoff.dims, dtype=complex)
    sl = tuple(slice(0, d) for d in state.dims)
    big[sl + sl] = state.rho.reshape(state.dims + state.dims)
    return TruncatedState(big.reshape(cutoff.total, cutoff.total), cutoff, validate=False)


def truncate(state: TruncatedState, cutoff, tol=TOL) -> tuple[TruncatedState, float]:
    """Project onto a smaller cutoff and renormalize; returns ``(state, discarded mass)``.

    Refuses when the discarded mass is at least ``tol.tail``.
    """
    cutoff = _as_cutoff(cutoff)
    if cutoff.dims == state.dims:
        return state, 0.0
    if any(new > old for new, old in zip(cutoff.dims, state.dims)):
        return embed(state, cutoff), 0.0
    t = state.rho.reshape(state.dims + state.dims)
    sl = tuple(slice(0, d) for d in cutoff.dims)
    small = t[sl + sl].reshape(cutoff.total, cutoff.total)
    kept = float(np.trace(small).real)
    lost = max(0.0, state.trace() - kept)
    if lost >= tol.tail:
        raise TruncationError(f"truncating to {cutoff.dims} discards mass {lost:.2e}",
                              tail_mass=lost)
    return TruncatedState(hermitize(small / kept), cutoff, validate=False), lost


def top_level_mass(state: TruncatedState, levels: int = 1) -> float:
    """Population held in the top ``levels`` Fock levels of any mode."""
    worst = 0.0
    for m in range(state.n_modes):
        p = state.populations(m)
        worst = max(worst, float(p[-levels:].sum()))
    return worst


# --- expectation values -----------------------------------------------------

def expectation(state: TruncatedState, op: np.ndarray) -> complex:
    return complex(np.trace(state.rho @ op))


def mean_photon_number(state: TruncatedState, mode: int | None = None) -> float:
    modes = range(state.n_modes) if mode is None else [mode]
    return float(sum(expectation(state, number_operator(state.cutoff, m)).real for m in modes))


def mean_energy(state: TruncatedState) -> float:
    """``tr[H rho]`` with ``H = sum_k (Q_k^2 + P_k^2)/2 = sum_k (2 n_k + 1)``.

    Evaluated through the number operator so the truncation edge does not
    bias the result.
    """
    return 2.0 * mean_photon_number(state) + state.n_modes


def moments(state: TruncatedState) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and symmetrized covariance matrix of the quadratures.

    ``gamma_ij = <{dR_i, dR_j}>/2``; the vacuum gives the identity.
    """
    Rs = [quadrature_operator(q, state.cutoff) for q in all_quadratures(state.n_modes)]
    mean = np.array([expectation(state, R).real for R in Rs])
    n2 = len(Rs)
    gamma = np.empty((n2, n2))
    for j in range(n2):
        for k in range(j, n2):
            v = expectation(state, Rs[j] @ Rs[k] + Rs[k] @ Rs[j]).real / 2 - mean[j] * mean[k]
            gamma[j, k] = gamma[k, j] = v
    return mean, gamma


# --- serialization ----------------------------------------------------------

def state_to_dict(state: TruncatedState) -> dict:
    """Row-major dense matrix with real/imag parts interleaved."""
    flat = state.rho.reshape(-1)
    inter = np.empty(2 * flat.size)
    inter[0::2] = flat.real
    inter[1::2] = flat.imag
    return {
        "dims": list(state.dims),
        "layout": "row-major, interleaved real/imag",
        "data": inter.tolist(),
        "conventions": LEDGER.to_dict(),
    }


def state_from_dict(obj: dict) -> TruncatedState:
    dims = tuple(obj["dims"])
    D = int(np.prod(dims))
    inter = np.asarray(obj["data"], dtype=float)
    rho = (inter[0::2] + 1j * inter[1::2]).reshape(D, D)
    return TruncatedState(rho, FockCutoff(dims))


def state_from_json(text: str) -> TruncatedState:
    return state_from_dict(json.loads(text))


__all__ = [
    "FockCutoff", "QuadratureIndex", "TruncatedState", "all_quadratures",
    "annihilation", "quadrature_operator", "number_operator", "displacement_generator",
    "displacement_along", "displacement_defect", "phase_space_displacement",
    "make_fock", "make_thermal", "make_coherent", "random_state", "required_cutoff", "thermal_auto_cutoff",
    "thermal_tail_mass", "tensor", "partial_trace", "embed", "truncate", "top_level_mass",
    "expectation", "mean_photon_number", "mean_energy", "moments",
    "state_to_dict", "state_from_dict", "state_from_json", "hermitize", "check_state",
]
