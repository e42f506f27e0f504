"""Quantum diffusion semigroup ``exp(tL)`` with ``L(rho) = -1/4 sum_i [R_i, [R_i, rho]]``.

With ``[Q, P] = 2i`` the Liouvillean reads
``L(rho) = a rho a^dag + a^dag rho a - {a a^dag + a^dag a, rho}/2`` per mode.
It maps the ``k``-th diagonal of ``rho`` (entries ``rho[j+k, j]``) to
itself through a real symmetric tridiagonal matrix, so the exact
exponential of the truncated superoperator is a set of ``d`` small
eigendecompositions, cached per cutoff.  The Gaussian-displacement average
(:func:`qepi.channels.apply_classical_noise`) is the independent backend.

Covariances grow as ``gamma -> gamma + LEDGER.diffusion_rate * t * I``, so a
vacuum input becomes thermal with mean photon number ``t``.  The often
quoted asymptotic ``(t - 1)/2`` corresponds to a different normalization of
the quadratures and is not used here.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .conventions import LEDGER, TOL, TruncationError
from .fock import (
    FockCutoff,
    TruncatedState,
    all_quadratures,
    embed,
    hermitize,
    mean_photon_number,
    quadrature_operator,
    required_cutoff,
    top_level_mass,
)
from .information import fisher_total, von_neumann_entropy


def liouvillean_apply(state: TruncatedState | np.ndarray, cutoff=None) -> np.ndarray:
    """``L(rho)`` built literally from the truncated quadrature matrices."""
    if isinstance(state, TruncatedState):
        rho, cutoff = state.rho, state.cutoff
    else:
        rho = np.asarray(state)
    out = np.zeros_like(rho, dtype=complex)
    for q in all_quadratures(_n_modes(cutoff)):
        R = quadrature_operator(q, cutoff)
        c = R @ rho - rho @ R
        out -= 0.25 * (R @ c - c @ R)
    return out


def _n_modes(cutoff) -> int:
    if isinstance(cutoff, FockCutoff):
        return cutoff.n_modes
    if isinstance(cutoff, (int, np.integer)):
        return 1
    return len(cutoff)


@lru_cache(maxsize=64)
def _offset_blocks(d: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Eigendecompositions of the generator restricted to each diagonal offset ``k``."""
    n = np.arange(d, dtype=float)
    s = 2 * n + 1
    s[-1] = d - 1  # a a^dag loses its top entry under truncation
    blocks = []
    for k in range(d):
        m = d - k
        j = np.arange(m, dtype=float)
        diag = -0.5 * (s[k:] + s[:m])
        off = np.sqrt((j[:-1] + k + 1) * (j[:-1] + 1))
        if m == 1:
            w, V = diag.copy(), np.ones((1, 1))
        else:
            w, V = eigh_tridiagonal(diag, off)
        w.setflags(write=False)
        V.setflags(write=False)
        blocks.append((w, V))
    return tuple(blocks)


def _propagate_single(rho: np.ndarray, d: int, t: float) -> np.ndarray:
    """Apply ``exp(tL)`` on axis pair (0, 1) of an array shaped ``(d, d, ...)``."""
    out = np.empty_like(rho)
    rest = rho.shape[2:]
    for k, (w, V) in enumerate(_offset_blocks(d)):
        m = d - k
        e = np.exp(t * w)[:, None]
        j = np.arange(m)
        lower = rho[j + k, j].reshape(m, -1)
        out[j + k, j] = (V @ (e * (V.T @ lower))).reshape((m,) + rest)
        if k:
            upper = rho[j, j + k].reshape(m, -1)
            out[j, j + k] = (V @ (e * (V.T @ upper))).reshape((m,) + rest)
    return out


def propagate(rho: np.ndarray, dims: Sequence[int], t: float) -> np.ndarray:
    """``exp(tL)`` applied to a density matrix on the given per-mode cutoffs (any real ``t``)."""
    dims = tuple(dims)
    n = len(dims)
    D = int(np.prod(dims))
    arr = np.asarray(rho, dtype=complex).reshape(dims + dims)
    for mode in range(n):
        # bring (ket_mode, bra_mode) to the front
        arr = np.moveaxis(arr, [mode, n + mode], [0, 1])
        arr = _propagate_single(arr, dims[mode], t)
        arr = np.moveaxis(arr, [0, 1], [mode, n + mode])
    return hermitize(arr.reshape(D, D))


def max_safe_time(state: TruncatedState, tol=TOL) -> float:
    """Conservative diffusion time before a thermal-like tail reaches the cutoff.

    Treats the state as thermal with its own mean photon number; photon
    number grows at ``diffusion_rate / 2`` per unit time.
    """
    d = min(state.dims)
    q = tol.tail ** (1.0 / d)
    N_max = q / (1.0 - q)
    per_mode = mean_photon_number(state) / state.n_modes
    return max(0.0, (N_max - per_mode) / (LEDGER.diffusion_rate / 2))


def evolve(state: TruncatedState, t: float, backend: Literal["superoperator", "displacement"] = "superoperator",
           cutoff=None, tol=TOL, **kw) -> TruncatedState:
    """``exp(tL)(rho)``.

    ``cutoff`` zero-pads the input first.  Raises :class:`TruncationError`
    when the evolved state holds at least ``tol.tail`` in the top Fock level.
    """
    if t < 0:
        raise ValueError("diffusion time must be nonnegative")
    if cutoff is not None:
        state = embed(state, cutoff)
    if t == 0:
        return state
    if backend == "superoperator":
        rho = propagate(state.rho, state.dims, t)
        out = TruncatedState(rho, state.cutoff, validate=False)
    elif backend == "displacement":
        from .channels import apply_classical_noise

        nu = LEDGER.diffusion_rate * t / LEDGER.noise_variance_per_nu
        out = apply_classical_noise(state, nu, out_cutoff=state.dims[0], tol=tol, **kw)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    edge = top_level_mass(out)
    if edge >= tol.tail:
        need = required_cutoff(mean_photon_number(out) / out.n_modes, tol.tail)
        raise TruncationError(f"diffusion to t={t} pushes {edge:.2e} into the top level of cutoff {state.dims}",
                              tail_mass=edge, suggested_cutoff=max(need, max(state.dims) + 10))
    return out


def smooth(state: TruncatedState, epsilon: float, cutoff=None, tol=TOL) -> TruncatedState:
    """Short diffusion making the state full rank; identical to ``evolve(state, epsilon)``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return evolve(state, epsilon, cutoff=cutoff, tol=tol)


def calibrate_diffusion_rate(t: float = 0.25, cutoff: int = 40) -> float:
    """Per-quadrature covariance growth rate measured on the evolved vacuum."""
    from .fock import make_fock, moments

    vac = make_fock(0, cutoff)
    _, g = moments(evolve(vac, t))
    return float((np.mean(np.diag(g)) - LEDGER.vacuum_variance) / t)


# --- proof diagnostics --------------------------------------------------------

@dataclass
class DiffusionTrace:
    times: list[float]
    entropies: list[float]
    fisher_totals: list[float]
    diagnostic: Literal["s_curve", "h_curve", "plain"]
    values: list[float]
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
        if not all(math.isfinite(s) for s in self.entropies):
            raise ValueError("entropies must be finite")

    def non_increasing(self, slack: float = 1e-9) -> bool:
        return all(b <= a + slack for a, b in zip(self.values, self.values[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "entropy_nats", "fisher_total", self.diagnostic])
        for t, s, j, v in zip(self.times, self.entropies, self.fisher_totals, self.values):
            w.writerow([repr(float(t)), repr(float(s)), repr(float(j)), repr(float(v))])
        return buf.getvalue()


def _working_cutoff(states: Sequence[TruncatedState], t: float, tol) -> int:
    """Cutoff holding ``exp(tL)`` of every state to ``tol.tail``, rounded up to a multiple of 8."""
    N = max(mean_photon_number(s) / s.n_modes for s in states)
    base = max(max(s.dims) for s in states)
    d = max(base + 10, required_cutoff(N + t * LEDGER.diffusion_rate / 2 + 1, tol.tail))
    return 8 * math.ceil(d / 8)


def _fit(state: TruncatedState, cutoff: int, tol) -> TruncatedState:
    if all(d <= cutoff for d in state.dims):
        return embed(state, (cutoff,) * state.n_modes)
    from .fock import truncate

    out, _ = truncate(state, (cutoff,) * state.n_modes, tol)
    return out


def _trace(states: dict[str, TruncatedState], times: Sequence[float], cutoff: int | None,
           with_fisher: str | None, step: float, tol) -> tuple[dict[str, list[float]], list[float], list[int]]:
    """Entropies along the semigroup; ``cutoff=None`` sizes the space separately for each time."""
    ent = {k: [] for k in states}
    fis, used = [], []
    for t in times:
        d = _working_cutoff(list(states.values()), t, tol) if cutoff is None else cutoff
        used.append(d)
        for k, s in states.items():
            ev = evolve(_fit(s, d, tol), t, tol=tol)
            ent[k].append(von_neumann_entropy(ev))
            if k == with_fisher:
                fis.append(fisher_total(ev, step, tol).total if t > 0 else math.nan)
        if with_fisher is None:
            fis.append(math.nan)
    return ent, fis, used


def s_curve(x: TruncatedState, y: TruncatedState, lam: float, times: Sequence[float],
            cutoff: int | None = None, with_fisher: bool = False, step: float = 1e-2,
            tol=TOL) -> DiffusionTrace:
    """``s(t) = S(e^{tL} Z) - lam S(e^{tL} x) - (1 - lam) S(e^{tL} y)`` with ``Z = x boxplus_lam y``.

    With ``cutoff=None`` each time point gets its own truncation, sized so the
    evolved states keep less than ``tol.tail`` outside it.
    """
    from .channels import beam_splitter_output

    z = beam_splitter_output(x, y, lam)
    ent, fis, used = _trace({"z": z, "x": x, "y": y}, times, cutoff, "z" if with_fisher else None, step, tol)
    vals = [sz - lam * sx - (1 - lam) * sy for sz, sx, sy in zip(ent["z"], ent["x"], ent["y"])]
    return DiffusionTrace(list(times), ent["z"], fis, "s_curve", vals,
                          {"entropy_x": ent["x"], "entropy_y": ent["y"], "lambda": lam, "cutoffs": used})


def h_curve(x: TruncatedState, y: TruncatedState, times: Sequence[float], cutoff: int | None = None,
            tol=TOL) -> DiffusionTrace:
    """Ratio ``[e^{S(x_t)}/2 + e^{S(y_t)}/2] / e^{S(Z_t)}`` at ``lam = 1/2``, both inputs diffused for ``t``."""
    from .channels import beam_splitter_output

    z = beam_splitter_output(x, y, 0.5)
    ent, fis, used = _trace({"z": z, "x": x, "y": y}, times, cutoff, None, 0.0, tol)
    n = x.n_modes
    vals = [(0.5 * math.exp(sx / n) + 0.5 * math.exp(sy / n)) / math.exp(sz / n)
            for sz, sx, sy in zip(ent["z"], ent["x"], ent["y"])]
    return DiffusionTrace(list(times), ent["z"], fis, "h_curve", vals,
                          {"entropy_x": ent["x"], "entropy_y": ent["y"], "cutoffs": used})


def commutation_defect(x: TruncatedState, y: TruncatedState, lam: float, t: float, cutoff: int) -> float:
    """Trace distance between ``e^{tL}(x boxplus y)`` and ``(e^{tL} x) boxplus (e^{tL} y)``."""
    from .channels import beam_splitter_output, trace_distance

    xt, yt = evolve(x, t, cutoff=cutoff), evolve(y, t, cutoff=cutoff)
    rhs = beam_splitter_output(xt, yt, lam)
    z = beam_splitter_output(x, y, lam)
    lhs = evolve(z, t, cutoff=rhs.dims[0])
    return trace_distance(lhs, rhs)
