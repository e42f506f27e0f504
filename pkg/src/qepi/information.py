"""Entropies, divergence, and the divergence-based Fisher information of displacement families.

All logarithms are natural.  The Fisher information of a family
``rho_theta`` at ``theta = 0`` is the second derivative of
``theta -> S(rho_0 || rho_theta)``; for displacements along a quadrature
it is estimated with a five-point central stencil, refined by Richardson
extrapolation when the step looks too coarse.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .conventions import LEDGER, TOL, NotFullRankError
from .fock import (
    QuadratureIndex,
    TruncatedState,
    all_quadratures,
    displacement_generator,
    hermitize,
)


def _eigh(state_or_matrix) -> tuple[np.ndarray, np.ndarray]:
    rho = state_or_matrix.rho if isinstance(state_or_matrix, TruncatedState) else state_or_matrix
    return np.linalg.eigh(hermitize(rho))


def entropy_of_spectrum(p: np.ndarray, floor: float = TOL.eig_floor) -> float:
    p = p[p > floor]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(state: TruncatedState | np.ndarray, floor: float = TOL.eig_floor) -> float:
    """Entropy in nats; eigenvalues at or below ``floor`` contribute zero."""
    rho = state.rho if isinstance(state, TruncatedState) else state
    return entropy_of_spectrum(np.linalg.eigvalsh(hermitize(rho)), floor)


def _clamped_log(w: np.ndarray, clamp: float) -> np.ndarray:
    return np.log(np.maximum(w, clamp))


def relative_entropy(rho: TruncatedState | np.ndarray, sigma: TruncatedState | np.ndarray,
                     tol=TOL) -> float:
    """``S(rho || sigma) = tr rho (ln rho - ln sigma)`` in nats.

    Returns ``math.inf`` when ``rho`` puts more than ``tol.supp`` weight
    outside the support of ``sigma`` (eigenvalues above ``tol.log_clamp``).
    """
    r = rho.rho if isinstance(rho, TruncatedState) else np.asarray(rho)
    s = sigma.rho if isinstance(sigma, TruncatedState) else np.asarray(sigma)
    wr = np.linalg.eigvalsh(hermitize(r))
    ws, vs = np.linalg.eigh(hermitize(s))
    weights = np.real(np.einsum("ij,ik,kj->j", vs.conj(), hermitize(r), vs))
    off = ws <= tol.log_clamp
    if np.sum(weights[off]) > tol.supp:
        return math.inf
    cross = float(np.sum(weights * _clamped_log(ws, tol.log_clamp)))
    return max(0.0, -entropy_of_spectrum(wr, tol.eig_floor) - cross)


def _require_full_rank(w: np.ndarray, v: np.ndarray, G: np.ndarray, tol) -> None:
    """Reject states whose displacement pushes weight into the numerical null space.

    Eigenvalues below ``tol.eig_floor`` are tolerated as long as the
    generator couples them only to negligible weight (a thermal tail far
    up the Fock ladder); a rank-deficient state such as a Fock state is not.
    """
    null = w <= tol.eig_floor
    if not null.any():
        return
    Gr = v.conj().T @ G @ v
    leak = float(np.sum(np.abs(Gr[np.ix_(~null, null)]) ** 2 * w[~null, None]))
    if leak > tol.supp:
        raise NotFullRankError(
            f"state is numerically rank deficient ({int(null.sum())} eigenvalues <= {tol.eig_floor:.0e}, "
            f"coupled weight {leak:.2e}); divergence-based Fisher information needs a full-rank state, "
            "use diffusion.smooth()")


class _Divergence:
    """``theta -> S(rho || U(theta) rho U(theta)^dag)`` for ``U = exp(-i theta G)``.

    The logarithm of the displaced state is the displaced logarithm, so a
    single eigendecomposition of ``rho`` serves every ``theta``.
    """

    def __init__(self, rho: np.ndarray, G: np.ndarray, tol) -> None:
        w, v = np.linalg.eigh(hermitize(rho))
        _require_full_rank(w, v, G, tol)
        self.rho = hermitize(rho)
        self.neg_entropy = -entropy_of_spectrum(w, tol.eig_floor)
        self.log_rho = (v * _clamped_log(w, tol.log_clamp)) @ v.conj().T
        gw, gv = np.linalg.eigh(hermitize(G))
        self.gw, self.gv = gw, gv
        # work in G's eigenbasis: U is diagonal there
        self.rho_g = gv.conj().T @ self.rho @ gv
        self.log_g = gv.conj().T @ self.log_rho @ gv

    def __call__(self, theta: float) -> float:
        if theta == 0:
            return 0.0
        ph = np.exp(-1j * theta * self.gw)
        # tr[rho U log(rho) U^dag] with U = diag(ph) in G's basis
        cross = np.real(np.sum(self.rho_g.T * (ph[:, None] * self.log_g * ph.conj()[None, :])))
        return self.neg_entropy - float(cross)


def _stencil(f, h: float) -> float:
    return (-f(2 * h) + 16 * f(h) + 16 * f(-h) - f(-2 * h)) / (12 * h * h)


@dataclass(frozen=True)
class FisherEstimate:
    value: float
    coarse: float
    condition: float
    refined: bool


def _fisher_fd(rho: np.ndarray, G: np.ndarray, step: float, tol, refine_above: float = 1e-4) -> FisherEstimate:
    f = _Divergence(rho, G, tol)
    fine = _stencil(f, step)
    coarse = _stencil(f, 2 * step)
    condition = abs(fine - coarse) / max(abs(fine), 1e-300)
    if condition > refine_above:
        return FisherEstimate(fine + (fine - coarse) / 15.0, coarse, condition, True)
    return FisherEstimate(fine, coarse, condition, False)


def fisher_along(state: TruncatedState, i: QuadratureIndex, step: float = 1e-2,
                 speed: float = 1.0, tol=TOL) -> float:
    """Divergence-based Fisher information of ``theta -> D_{R_i}(speed * theta) rho D^dag``.

    The state must be full rank; smooth it first otherwise.
    """
    G = speed * displacement_generator(i, state.cutoff)
    return _fisher_fd(state.rho, G, step, tol).value


def fisher_generator(state: TruncatedState, G: np.ndarray, step: float = 1e-2, tol=TOL) -> float:
    """Fisher information of the unitary family ``exp(-i theta G) rho exp(i theta G)``."""
    return _fisher_fd(state.rho, G, step, tol).value


def fisher_analytic(state: TruncatedState, G: np.ndarray, tol=TOL) -> float:
    """Closed form ``sum_jk |G_jk|^2 (p_j - p_k)(ln p_j - ln p_k)`` in the eigenbasis of ``rho``.

    Equal to ``tr([G, [G, rho]] ln rho)``; an independent check on the stencil.
    """
    w, v = _eigh(state)
    _require_full_rank(w, v, G, tol)
    Gr = v.conj().T @ G @ v
    lw = _clamped_log(w, tol.log_clamp)
    dp = w[:, None] - w[None, :]
    dl = lw[:, None] - lw[None, :]
    return float(np.sum(np.abs(Gr) ** 2 * dp * dl))


@dataclass(frozen=True)
class FisherResult:
    per_quadrature: dict[str, float]
    total: float
    step: float
    condition: float
    refined: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _label(q: QuadratureIndex) -> str:
    return f"{q.kind}{q.mode + 1}"


def fisher_total(state: TruncatedState, step: float = 1e-2, tol=TOL) -> FisherResult:
    """``J~(rho)``: the Fisher informations summed over all ``2n`` quadrature displacements."""
    per, cond, refined = {}, 0.0, False
    for q in all_quadratures(state.n_modes):
        est = _fisher_fd(state.rho, displacement_generator(q, state.cutoff), step, tol)
        per[_label(q)] = est.value
        cond = max(cond, est.condition)
        refined = refined or est.refined
    return FisherResult(per, float(sum(per.values())), step, cond, refined)


# --- identities and inequalities ------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    lhs: float
    rhs: float
    value: float
    kind: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["tolerances"] = TOL.to_dict()
        out["conventions"] = LEDGER.to_dict()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def entropy_rate(state: TruncatedState, dt: float = 1e-3) -> float:
    """Central difference of ``t -> S(exp(tL) rho)`` at ``t = 0``.

    The backward point uses ``exp(-dt L)``, well defined on the truncated space.
    """
    from .diffusion import propagate

    plus = von_neumann_entropy(propagate(state.rho, state.dims, dt))
    minus = von_neumann_entropy(propagate(state.rho, state.dims, -dt))
    return (plus - minus) / (2 * dt)


def de_bruijn_check(state: TruncatedState, dt: float = 1e-3, step: float = 1e-2,
                    tol=TOL) -> CheckResult:
    """Compare the entropy production rate with ``debruijn_scale * J~``; ``value`` is the relative error."""
    lhs = entropy_rate(state, dt)
    rhs = LEDGER.debruijn_scale * fisher_total(state, step, tol).total
    rel = abs(lhs - rhs) / max(abs(rhs), 1e-300)
    return CheckResult(lhs, rhs, rel, "de_bruijn_relative_error", {"dt": dt, "step": step})


def calibrate_debruijn_scale(N: float = 1.0, cutoff: int = 60, dt: float = 1e-3,
                             step: float = 1e-2) -> float:
    """Ratio ``dS/dt / J~`` measured on a thermal state."""
    from .fock import make_thermal

    st = make_thermal(N, cutoff)
    return entropy_rate(st, dt) / fisher_total(st, step).total


def _combined(x: TruncatedState, y: TruncatedState, lam: float, tol) -> TruncatedState:
    from .channels import beam_splitter_output

    cut = tuple(max(a, b) for a, b in zip(x.dims, y.dims))
    return beam_splitter_output(x, y, lam, out_cutoff=cut, tol=tol)


def stam_check(x: TruncatedState, y: TruncatedState, step: float = 1e-2, tol=TOL) -> CheckResult:
    """Margin ``2/J~(Z) - 1/J~(x) - 1/J~(y)`` with ``Z = x boxplus_{1/2} y``.

    ``Z`` is kept on the input cutoff so its Fisher information is well
    conditioned; the discarded mass must stay below ``tol.tail``.
    """
    z = _combined(x, y, 0.5, tol)
    jx, jy, jz = (fisher_total(s, step, tol).total for s in (x, y, z))
    lhs, rhs = 2.0 / jz, 1.0 / jx + 1.0 / jy
    return CheckResult(lhs, rhs, lhs - rhs, "stam_margin", {"J_x": jx, "J_y": jy, "J_z": jz, "step": step})


def convexity_check(x: TruncatedState, y: TruncatedState, lam: float, step: float = 1e-2,
                    tol=TOL) -> CheckResult:
    """Margin ``lam J~(x) + (1 - lam) J~(y) - J~(x boxplus_lam y)``."""
    z = _combined(x, y, lam, tol)
    jx, jy, jz = (fisher_total(s, step, tol).total for s in (x, y, z))
    rhs = lam * jx + (1 - lam) * jy
    return CheckResult(jz, rhs, rhs - jz, "convexity_margin",
                       {"J_x": jx, "J_y": jy, "J_z": jz, "lambda": lam, "step": step})


# --- Fisher information properties ---------------------------------------------

def fisher_additivity_defect(x: TruncatedState, y: TruncatedState, step: float = 1e-2, tol=TOL) -> float:
    """``J~(x (x) y) - J~(x) - J~(y)``; zero for product states."""
    from .fock import tensor

    joint = fisher_total(tensor(x, y), step, tol).total
    return joint - fisher_total(x, step, tol).total - fisher_total(y, step, tol).total


def fisher_data_processing_margin(state: TruncatedState, t: float, step: float = 1e-2, tol=TOL) -> float:
    """``J~(rho) - J~(exp(tL) rho)``; nonnegative because diffusion commutes with displacements."""
    from .diffusion import evolve

    return fisher_total(state, step, tol).total - fisher_total(evolve(state, t, tol=tol), step, tol).total


def fisher_reparametrization_ratio(state: TruncatedState, c: float, i: QuadratureIndex | None = None,
                                   step: float = 1e-2, tol=TOL) -> float:
    """``J(theta -> rho_{c theta}) / (c^2 J(theta -> rho_theta))``; equals one."""
    i = i or QuadratureIndex(0, "Q")
    return fisher_along(state, i, step, speed=c, tol=tol) / (c * c * fisher_along(state, i, step, tol=tol))
