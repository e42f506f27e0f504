"""Beam-splitter combination and the additive noise channels built on it.

The beam splitter conserves total photon number, so it is exact in Fock
space when the output modes are allowed ``d_x + d_y - 1`` levels.  That is
the default output cutoff; a smaller one can be requested, in which case
the discarded mass is measured and must stay below ``TOL.tail``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.special import gammaln

from .conventions import LEDGER, TOL, TruncationError
from .fock import (
    FockCutoff,
    TruncatedState,
    embed,
    hermitize,
    make_fock,
    make_thermal,
    mean_photon_number,
    phase_space_displacement,
    required_cutoff,
    tensor,
    truncate,
)

ChannelKind = Literal["pure_loss", "thermal", "classical_noise", "amplifier"]

_PARAMS = {
    "pure_loss": {"lambda"},
    "thermal": {"lambda", "N_E"},
    "classical_noise": {"nu"},
    "amplifier": {"G"},
}


@dataclass(frozen=True)
class ChannelSpec:
    kind: ChannelKind
    lam: float | None = None
    N_E: float | None = None
    nu: float | None = None
    G: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _PARAMS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        given = {k for k, v in self._fields().items() if v is not None}
        needed = _PARAMS[self.kind]
        if given != needed:
            raise ValueError(f"{self.kind} takes parameters {sorted(needed)}, got {sorted(given)}")
        if self.lam is not None and not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        if self.N_E is not None and self.N_E < 0:
            raise ValueError("N_E must be nonnegative")
        if self.nu is not None and not self.nu > 0:
            raise ValueError("nu must be positive")
        if self.G is not None and self.G < 1:
            raise ValueError("gain must be at least 1")

    def _fields(self) -> dict:
        return {"lambda": self.lam, "N_E": self.N_E, "nu": self.nu, "G": self.G}

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self._fields()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "ChannelSpec":
        return cls(kind=obj["kind"], lam=obj.get("lambda"), N_E=obj.get("N_E"),
                   nu=obj.get("nu"), G=obj.get("G"))

    @classmethod
    def from_json(cls, text: str) -> "ChannelSpec":
        return cls.from_dict(json.loads(text))


# --- beam splitter ----------------------------------------------------------

@lru_cache(maxsize=256)
def _photon_block(n_total: int, lam: float) -> np.ndarray:
    """Beam-splitter unitary on the ``n_total``-photon block, basis ``|k, n_total - k>``."""
    k = np.arange(n_total)
    off = np.sqrt((k + 1.0) * (n_total - k))
    gen = np.diag(off, -1) - np.diag(off, 1)
    angle = math.acos(math.sqrt(lam))
    return sla.expm(angle * gen)


@lru_cache(maxsize=32)
def beam_splitter_unitary(d_x: int, d_y: int, lam: float) -> np.ndarray:
    """Tensor ``U[m_z, m_w, n_x, n_y]`` of the beam splitter restricted to inputs below the cutoffs.

    Output mode ``z`` carries ``sqrt(lam) R^X + sqrt(1-lam) R^Y`` and ``w``
    carries ``sqrt(lam) R^Y - sqrt(1-lam) R^X``.  Both output modes have
    ``d_x + d_y - 1`` levels, which holds every reachable photon number.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    M = d_x + d_y - 1
    U = np.zeros((M, M, d_x, d_y))
    for n in range(M):
        block = _photon_block(n, float(lam))
        kin = np.arange(max(0, n - d_y + 1), min(n, d_x - 1) + 1)
        kout = np.arange(n + 1)
        U[kout[:, None], n - kout[:, None], kin[None, :], n - kin[None, :]] = block[np.ix_(kout, kin)]
    U.setflags(write=False)
    return U


def _check_pair(x: TruncatedState, y: TruncatedState) -> None:
    if x.n_modes != y.n_modes:
        raise ValueError(f"inputs have {x.n_modes} and {y.n_modes} modes")


def _is_diagonal(rho: np.ndarray) -> bool:
    return not np.any(rho[~np.eye(rho.shape[0], dtype=bool)])


def _output_diagonal_y(rho_x: np.ndarray, p_y: np.ndarray, lam: float) -> np.ndarray:
    """``Z`` arm when ``Y`` is diagonal in the Fock basis.

    For ``Y = |j><j|`` and a fixed photon number ``m_w`` on the discarded
    arm, the output is ``diag(a) rho_x[shifted] diag(a)^*`` with ``a`` read off
    the photon-number blocks, so no two-mode tensor is formed.
    """
    dx, dy = rho_x.shape[0], p_y.size
    M = dx + dy - 1
    blocks = [_photon_block(n, lam) for n in range(M)]
    Z = np.zeros((M, M), dtype=complex)
    for j in np.flatnonzero(p_y):
        for mw in range(M):
            lo, hi = max(0, j - mw), min(M - mw, j - mw + dx)
            if lo >= hi:
                continue
            mz = np.arange(lo, hi)
            nx = mz + mw - j
            a = np.array([blocks[z + mw][z, n] for z, n in zip(mz, nx)])
            Z[lo:hi, lo:hi] += p_y[j] * np.outer(a, a.conj()) * rho_x[np.ix_(nx, nx)]
    return Z


def _product_output_single(x: TruncatedState, y: TruncatedState, lam: float) -> np.ndarray:
    dx, dy = x.dims[0], y.dims[0]
    # the Z marginal depends only on sqrt(lam) R^X + sqrt(1-lam) R^Y, so the arms may be swapped
    if _is_diagonal(y.rho):
        return hermitize(_output_diagonal_y(x.rho, np.diag(y.rho).real.copy(), lam))
    if _is_diagonal(x.rho):
        return hermitize(_output_diagonal_y(y.rho, np.diag(x.rho).real.copy(), 1.0 - lam))
    U = beam_splitter_unitary(dx, dy, lam)
    M = U.shape[0]
    Um = U.reshape(M * M, dx * dy)
    T = Um @ np.kron(x.rho, y.rho)
    Z = T.reshape(M, M * dx * dy) @ Um.reshape(M, M * dx * dy).conj().T
    return hermitize(Z)


def beam_splitter_joint(joint: TruncatedState, lam: float) -> TruncatedState:
    """Apply ``B_lam`` to a (possibly entangled) state on ``X (n modes) + Y (n modes)``.

    Modes ``j`` and ``n + j`` are mixed; the result is ordered
    ``(Z_1..Z_n, W_1..W_n)``.
    """
    if joint.n_modes % 2:
        raise ValueError("joint state needs an even number of modes (X arm then Y arm)")
    n = joint.n_modes // 2
    dims = joint.dims
    t = joint.rho.reshape(dims + dims)
    nm = 2 * n
    for j in range(n):
        U = beam_splitter_unitary(dims[j], dims[n + j], lam)
        for side in (0, 1):
            off = side * nm
            # contract U's input legs with axes (j, n+j) on this side
            t = np.tensordot(U if side == 0 else U.conj(), t,
                             axes=([2, 3], [off + j, off + n + j]))
            # new axes 0, 1 are the outputs; move them back into place
            t = np.moveaxis(t, [0, 1], [off + j, off + n + j])
    out_dims = tuple(dims[j] + dims[n + j] - 1 for j in range(n)) * 2
    D = int(np.prod(out_dims))
    return TruncatedState(hermitize(t.reshape(D, D)), FockCutoff(out_dims), validate=False)


def beam_splitter_outputs(x: TruncatedState, y: TruncatedState, lam: float) -> tuple[TruncatedState, TruncatedState]:
    """Both output arms ``(Z, W)`` of the beam splitter on the product input."""
    from .fock import partial_trace

    _check_pair(x, y)
    joint = beam_splitter_joint(tensor(x, y), lam)
    n = x.n_modes
    return partial_trace(joint, range(n)), partial_trace(joint, range(n, 2 * n))


def beam_splitter_output(x: TruncatedState, y: TruncatedState, lam: float,
                         out_cutoff=None, tol=TOL) -> TruncatedState:
    """``X boxplus_lam Y``: the ``Z`` arm of the beam splitter on ``x (x) y``.

    Exact on the default output cutoff ``d_x + d_y - 1`` per mode.
    """
    _check_pair(x, y)
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    if x.n_modes == 1:
        Z = _product_output_single(x, y, float(lam))
        M = Z.shape[0]
        out = TruncatedState(Z, FockCutoff((M,)), validate=False)
    else:
        out, _ = beam_splitter_outputs(x, y, lam)
    if out_cutoff is not None:
        out, _ = truncate(out, out_cutoff, tol)
    return out


# --- Kraus channels -----------------------------------------------------------

def _log_binom(n: np.ndarray, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def apply_pure_loss(state: TruncatedState, eta: float) -> TruncatedState:
    """Pure-loss channel ``E_{eta, 0}`` on a single mode (exact; output cutoff unchanged)."""
    if state.n_modes != 1:
        raise ValueError("pure loss acts on single-mode states")
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    d = state.dims[0]
    rho = state.rho
    if eta == 1.0:
        return state
    out = np.zeros_like(rho)
    n = np.arange(d, dtype=float)
    for l in range(d):
        m = n[l:]
        if eta == 0.0:
            c = np.where(m == l, 1.0, 0.0)
        else:
            logc = _log_binom(m, np.full_like(m, l)) + (m - l) * math.log(eta)
            logc += l * math.log1p(-eta) if eta < 1 else (0.0 if l == 0 else -np.inf)
            c = np.exp(0.5 * logc)
        out[: d - l, : d - l] += np.outer(c, c) * rho[l:, l:]
    return TruncatedState(hermitize(out), state.cutoff, validate=False)


def apply_amplifier(state: TruncatedState, G: float, out_cutoff: int | None = None,
                    tol=TOL) -> TruncatedState:
    """Phase-insensitive amplifier ``A_G`` (``gamma -> G gamma + (G-1) I``) on a single mode."""
    if state.n_modes != 1:
        raise ValueError("the amplifier acts on single-mode states")
    if G < 1:
        raise ValueError("gain must be at least 1")
    d = state.dims[0]
    if G == 1.0:
        return state if out_cutoff is None else embed(state, out_cutoff)
    if out_cutoff is None:
        N_out = G * (mean_photon_number(state) + 1) - 1
        out_cutoff = max(d, required_cutoff(N_out, tol.tail) + d)
    M = int(out_cutoff)
    out = np.zeros((M, M), dtype=complex)
    n = np.arange(d, dtype=float)
    for l in range(M):
        logc = _log_binom(n + l, np.full_like(n, l)) - (n + 1) * math.log(G) + l * math.log1p(-1.0 / G)
        c = np.exp(0.5 * logc)
        hi = min(d, M - l)
        if hi <= 0:
            break
        out[l:l + hi, l:l + hi] += np.outer(c[:hi], c[:hi]) * state.rho[:hi, :hi]
    lost = 1.0 - float(np.trace(out).real)
    if lost >= tol.tail:
        raise TruncationError(f"amplifier output leaks {lost:.2e} past cutoff {M}",
                              tail_mass=lost, suggested_cutoff=2 * M)
    out /= np.trace(out).real
    return TruncatedState(hermitize(out), FockCutoff((M,)), validate=False)


def loss_amplifier_parameters(lam: float, N_E: float) -> tuple[float, float]:
    """``(G, a)`` with ``E_{lam, N_E} = A_G o E_{a, 0}``."""
    G = (1.0 - lam) * N_E + 1.0
    return G, lam / G


def apply_thermal(state: TruncatedState, lam: float, N_E: float, env_cutoff: int | None = None,
                  method: Literal["auto", "beam_splitter", "kraus"] = "auto",
                  out_cutoff: int | None = None, tol=TOL) -> TruncatedState:
    """Thermal noise channel ``E_{lam, N_E}`` on a single mode.

    ``beam_splitter`` mixes with a truncated thermal environment; ``kraus``
    uses the loss-then-amplify decomposition and scales to large ``N_E``.
    ``auto`` picks the beam splitter when the environment cutoff is small.
    """
    ChannelSpec("thermal", lam=lam, N_E=N_E)
    if env_cutoff is None:
        env_cutoff = required_cutoff(N_E, tol.tail)
    if method == "auto":
        method = "beam_splitter" if env_cutoff <= 48 else "kraus"
    if method == "beam_splitter":
        env = make_thermal(N_E, env_cutoff, tol)
        return beam_splitter_output(state, env, lam, out_cutoff=out_cutoff, tol=tol)
    if method != "kraus":
        raise ValueError(f"unknown method {method!r}")
    G, a = loss_amplifier_parameters(lam, N_E)
    lossy = apply_pure_loss(state, a)
    return apply_amplifier(lossy, G, out_cutoff, tol)


# --- classical noise ------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    order: int = 21

    def nodes(self, variance: float) -> tuple[np.ndarray, np.ndarray]:
        """Product Gauss-Hermite nodes (shape ``(k, 2)``) and weights for an
        isotropic normal of the given per-axis variance."""
        x, w = np.polynomial.hermite.hermgauss(self.order)
        s = math.sqrt(2.0 * variance)
        pts = np.array([(s * a, s * b) for a in x for b in x])
        wts = np.array([wa * wb for wa in w for wb in w]) / math.pi
        return pts, wts


def apply_classical_noise(state: TruncatedState, nu: float, rule: QuadratureRule = QuadratureRule(),
                          out_cutoff: int | None = None, pad: int = 20, tol=TOL) -> TruncatedState:
    """Classical noise channel ``E_nu``: a Gaussian mixture of displacements.

    The displacement distribution has per-quadrature variance
    ``LEDGER.noise_variance_per_nu * nu``, so the vacuum is mapped to the
    thermal state with mean photon number ``nu``.  Displacements are taken on
    ``out_cutoff + pad`` levels; the weighted mass that ends above
    ``out_cutoff`` is the leakage, which must stay below ``tol.tail``.
    """
    if state.n_modes != 1:
        raise ValueError("classical noise is implemented for single-mode states")
    if not nu > 0:
        raise ValueError("nu must be positive")
    d = state.dims[0]
    if out_cutoff is None:
        out_cutoff = max(d, required_cutoff(mean_photon_number(state) + nu, tol.tail))
    M = int(out_cutoff)
    work = M + pad
    rho = embed(state, max(work, d)).rho if work >= d else state.rho
    pts, wts = rule.nodes(LEDGER.noise_variance_per_nu * nu)
    acc = np.zeros((work, work), dtype=complex)
    for shift, w in zip(pts, wts):
        if w < 1e-300:
            continue
        U = phase_space_displacement(shift, work)
        acc += w * (U @ rho @ U.conj().T)
    kept = float(np.trace(acc[:M, :M]).real)
    lost = float(np.trace(acc).real) - kept
    if lost >= tol.tail:
        raise TruncationError(
            f"classical noise nu={nu} leaks {lost:.2e} past cutoff {M}",
            tail_mass=lost, suggested_cutoff=required_cutoff(mean_photon_number(state) + nu, tol.tail / 10) + 10)
    out = acc[:M, :M] / kept
    return TruncatedState(hermitize(out), FockCutoff((M,)), validate=False)


def trace_distance(a: TruncatedState | np.ndarray, b: TruncatedState | np.ndarray) -> float:
    """``||a - b||_1 / 2``; states on different cutoffs are zero-padded to a common one."""
    ra = a.rho if isinstance(a, TruncatedState) else np.asarray(a)
    rb = b.rho if isinstance(b, TruncatedState) else np.asarray(b)
    if ra.shape != rb.shape:
        if isinstance(a, TruncatedState) and isinstance(b, TruncatedState) and a.n_modes == b.n_modes:
            dims = tuple(max(p, q) for p, q in zip(a.dims, b.dims))
            ra, rb = embed(a, dims).rho, embed(b, dims).rho
        else:
            raise ValueError("cannot compare states of different shapes")
    w = np.linalg.eigvalsh(hermitize(ra - rb))
    return 0.5 * float(np.sum(np.abs(w)))


@dataclass
class LimitReport:
    lambdas: list[float]
    N_Es: list[float]
    nu: float
    distances: list[float]
    photon_thermal: list[float]
    photon_classical: float
    monotone: bool

    def to_dict(self) -> dict:
        return asdict(self)


def limit_consistency_check(lambda_seq: Sequence[float], N_E_seq: Sequence[float], nu: float,
                            probe: TruncatedState | None = None, cutoff: int = 30,
                            tol=TOL) -> LimitReport:
    """Distance between ``E_{lam_k, N_E_k}`` and ``E_nu`` along a sequence with ``(1 - lam_k) N_E_k = nu``."""
    for lam, ne in zip(lambda_seq, N_E_seq):
        if not math.isclose((1.0 - lam) * ne, nu, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"(1 - {lam}) * {ne} != {nu}")
    if probe is None:
        probe = make_fock(1, 3)  # non-Gaussian, so the distances are not all zero
    probe = embed(probe, max(probe.dims[0], cutoff))
    ref = apply_classical_noise(probe, nu, out_cutoff=cutoff, tol=tol)
    dists, photons = [], []
    for lam, ne in zip(lambda_seq, N_E_seq):
        out = apply_thermal(probe, lam, ne, method="kraus", out_cutoff=cutoff, tol=tol)
        dists.append(trace_distance(out, ref))
        photons.append(mean_photon_number(out))
    monotone = all(b < a for a, b in zip(dists, dists[1:]))
    return LimitReport(list(lambda_seq), list(N_E_seq), nu, dists, photons,
                       mean_photon_number(ref), monotone)


def apply_channel(state: TruncatedState, spec: ChannelSpec, **kw) -> TruncatedState:
    if spec.kind == "pure_loss":
        return apply_pure_loss(state, spec.lam)
    if spec.kind == "thermal":
        return apply_thermal(state, spec.lam, spec.N_E, **kw)
    if spec.kind == "classical_noise":
        return apply_classical_noise(state, spec.nu, **kw)
    return apply_amplifier(state, spec.G, **kw)
