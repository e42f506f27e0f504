"""Characteristic functions and Wigner functions of truncated states.

``W_xi = exp(i xi^T J R)`` with ``J = [[0, 1], [-1, 0]]`` per mode, so
``W_xi`` displaces ``(<Q>, <P>)`` by ``-2 xi``.  The Wigner function is
normalized over ``dq dp`` and equals ``wigner_norm * <D Pi D^dag>`` with
``Pi = (-1)^n`` the parity; it is evaluated from the Fock-basis Laguerre
closed form through a normalized three-term recurrence that stays finite
for large cutoffs and radii.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .conventions import LEDGER, TOL
from .fock import TruncatedState, mean_photon_number, phase_space_displacement

DEFAULT_EXTENT = 6.0
DEFAULT_POINTS = 241


@dataclass(frozen=True)
class PhaseSpacePoint:
    xi: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "xi", tuple(float(v) for v in self.xi))
        if len(self.xi) % 2 or not self.xi:
            raise ValueError("a phase-space point has 2n coordinates")

    @property
    def n_modes(self) -> int:
        return len(self.xi) // 2


def characteristic_function(state: TruncatedState, xi, pad: int = 30) -> complex:
    """``chi(xi) = tr rho W_xi``; each mode's displacement is built on ``d + pad`` levels."""
    xi = PhaseSpacePoint(xi.xi if isinstance(xi, PhaseSpacePoint) else xi).xi
    if len(xi) != 2 * state.n_modes:
        raise ValueError(f"xi must have {2 * state.n_modes} entries")
    c = LEDGER.commutator_scale
    blocks = []
    for k, d in enumerate(state.dims):
        shift = (-c * xi[2 * k], -c * xi[2 * k + 1])
        U = phase_space_displacement(shift, d, pad=pad)
        blocks.append(U[:d, :d])
    W = reduce(np.kron, blocks)
    return complex(np.sum(state.rho.T * W))


def _laguerre_table(x: np.ndarray, d: int) -> np.ndarray:
    """``f[k, n] = sqrt(n!/(n+k)!) x^{k/2} e^{-x/2} L_n^k(x)`` for ``n + k < d``.

    Uses the recurrence for the normalized functions, which never forms
    the large Laguerre values or factorials themselves.
    """
    out = np.zeros((d, d) + x.shape)
    logx = np.log(np.where(x > 0, x, 1.0))
    for k in range(d):
        m = d - k
        if k == 0:
            f0 = np.exp(-0.5 * x)
        else:
            f0 = np.where(x > 0, np.exp(0.5 * k * logx - 0.5 * x - 0.5 * gammaln(k + 1)), 0.0)
        out[k, 0] = f0
        if m > 1:
            out[k, 1] = (1 + k - x) * f0 / math.sqrt(k + 1)
        for j in range(1, m - 1):
            out[k, j + 1] = ((2 * j + 1 + k - x) * out[k, j]
                             - math.sqrt(j * (j + k)) * out[k, j - 1]) / math.sqrt((j + 1) * (j + k + 1))
    return out


def wigner_values(state: TruncatedState, q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Wigner function at arbitrary points (broadcast ``q`` against ``p``)."""
    if state.n_modes != 1:
        raise ValueError("Wigner functions are provided for single-mode states")
    q, p = np.broadcast_arrays(np.asarray(q, float), np.asarray(p, float))
    d = state.cutoff.total
    x = q * q + p * p
    phase = (q + 1j * p) / np.where(x > 0, np.sqrt(x), 1.0)
    f = _laguerre_table(x, d)
    rho = state.rho
    sign = (-1.0) ** np.arange(d)
    diag = np.tensordot(sign * np.real(np.diag(rho)), f[0], axes=(0, 0))
    if np.max(np.abs(np.imag(np.diag(rho)))) > 1e-10:
        raise ValueError("density matrix diagonal has an imaginary part above 1e-10")
    total = diag.astype(float)
    ph_k = np.ones(q.shape, dtype=complex)
    for k in range(1, d):
        ph_k = ph_k * phase
        n = np.arange(d - k)
        term = np.tensordot(sign[n] * rho[n, n + k], f[k, : d - k], axes=(0, 0))
        total += 2 * np.real(term * ph_k)
    return LEDGER.wigner_norm * total


def wigner_parity(state: TruncatedState, q: float, p: float, pad: int = 40) -> float:
    """Direct ``wigner_norm * tr[rho D(q,p) Pi D(q,p)^dag]``; pointwise oracle for :func:`wigner_values`."""
    d = state.cutoff.total
    U = phase_space_displacement((q, p), d, pad=pad)
    parity = (-1.0) ** np.arange(d + pad)
    M = (U * parity) @ U.conj().T
    return float(LEDGER.wigner_norm * np.real(np.sum(state.rho.T * M[:d, :d])))


@dataclass(frozen=True, eq=False)
class WignerGrid:
    q_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray
    warnings: tuple[str, ...] = field(default=())

    @property
    def cell_area(self) -> float:
        return float((self.q_axis[1] - self.q_axis[0]) * (self.p_axis[1] - self.p_axis[0]))

    @property
    def integral(self) -> float:
        return float(self.values.sum() * self.cell_area)

    @property
    def minimum(self) -> float:
        return float(self.values.min())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"# q_min={self.q_axis[0]!r} q_max={self.q_axis[-1]!r} nq={self.q_axis.size} "
                    f"p_min={self.p_axis[0]!r} p_max={self.p_axis[-1]!r} np={self.p_axis.size} "
                    f"wigner_norm={LEDGER.wigner_norm!r}"])
        w.writerow(["q", "p", "W"])
        for i, qv in enumerate(self.q_axis):
            for j, pv in enumerate(self.p_axis):
                w.writerow([repr(float(qv)), repr(float(pv)), repr(float(self.values[i, j]))])
        return buf.getvalue()


def suggested_extent(state: TruncatedState, rel: float = 1e-6) -> float:
    """Half-width at which a thermal state of the same energy falls below ``rel`` of its peak."""
    var = 2 * mean_photon_number(state) + 1
    r = math.sqrt(2 * var * math.log(1 / rel))
    q, p = _mean_qp(state)
    return max(DEFAULT_EXTENT, r + max(abs(q), abs(p)))


def _mean_qp(state: TruncatedState) -> tuple[float, float]:
    from .fock import moments

    mean, _ = moments(state)
    return float(mean[0]), float(mean[1])


def wigner_grid(state: TruncatedState, q_axis: Sequence[float] | None = None,
                p_axis: Sequence[float] | None = None, points: int = DEFAULT_POINTS,
                auto_extent: bool = True, tol=TOL) -> WignerGrid:
    """Wigner function on a rectangular grid, indexed ``values[i_q, j_p]``.

    Without explicit axes the grid is ``[-L, L]^2`` with ``L`` the larger
    of 6 and :func:`suggested_extent`.  Boundary values above ``1e-6`` of the
    peak and normalization errors above ``tol.grid`` are reported in
    ``warnings`` (and emitted through :mod:`warnings`).
    """
    if q_axis is None or p_axis is None:
        L = suggested_extent(state) if auto_extent else DEFAULT_EXTENT
        axis = np.linspace(-L, L, points)
        q_axis = axis if q_axis is None else q_axis
        p_axis = axis if p_axis is None else p_axis
    q_axis = np.asarray(q_axis, float)
    p_axis = np.asarray(p_axis, float)
    qq, pp = np.meshgrid(q_axis, p_axis, indexing="ij")
    vals = wigner_values(state, qq, pp)
    notes = []
    peak = np.max(np.abs(vals))
    edge = max(np.abs(vals[[0, -1], :]).max(), np.abs(vals[:, [0, -1]]).max())
    if edge > 1e-6 * peak:
        notes.append(f"grid boundary reaches {edge / peak:.1e} of the peak; widen the axes")
    grid = WignerGrid(q_axis, p_axis, vals, ())
    if abs(grid.integral - 1) > tol.grid:
        notes.append(f"grid integral {grid.integral:.6f} differs from 1 by more than {tol.grid}")
    for n in notes:
        warnings.warn(n, RuntimeWarning, stacklevel=2)
    return WignerGrid(q_axis, p_axis, vals, tuple(notes))
