"""Covariance-matrix description of Gaussian states and channels.

Used as an analytic oracle for the Fock-space code.  Covariances follow
the package convention: ``gamma_ij = <{dR_i, dR_j}>/2``, vacuum ``gamma = I``,
uncertainty relation ``gamma + i Omega >= 0`` with
``Omega = [[0, 1], [-1, 0]]`` per mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bounds import g
from .channels import ChannelSpec, loss_amplifier_parameters
from .conventions import LEDGER, TOL


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]])) * (LEDGER.commutator_scale / 2)


@dataclass(frozen=True, eq=False)
class CovarianceState:
    mean: np.ndarray
    gamma: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        gamma = np.asarray(self.gamma, dtype=float)
        if gamma.shape != (mean.size, mean.size) or mean.size % 2:
            raise ValueError(f"mean of length {mean.size} does not match gamma {gamma.shape}")
        if not np.allclose(gamma, gamma.T, atol=1e-12):
            raise ValueError("gamma must be symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "gamma", 0.5 * (gamma + gamma.T))
        if self.validate:
            lo = np.linalg.eigvalsh(self.gamma + 1j * symplectic_form(self.n_modes))[0]
            if lo < -1e-9:
                raise ValueError(f"covariance violates the uncertainty relation (min eigenvalue {lo:.3e})")

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "gamma": self.gamma.tolist(),
                "conventions": LEDGER.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "CovarianceState":
        return cls(np.array(obj["mean"]), np.array(obj["gamma"]))


def vacuum_cov(n_modes: int = 1) -> CovarianceState:
    return CovarianceState(np.zeros(2 * n_modes), LEDGER.vacuum_variance * np.eye(2 * n_modes))


def thermal_cov(N: float, n_modes: int = 1) -> CovarianceState:
    return CovarianceState(np.zeros(2 * n_modes), (2 * N + 1) * np.eye(2 * n_modes))


def coherent_cov(alpha: complex) -> CovarianceState:
    return CovarianceState(np.array([2 * alpha.real, 2 * alpha.imag]), np.eye(2))


def direct_sum(a: CovarianceState, b: CovarianceState) -> CovarianceState:
    n = a.gamma.shape[0] + b.gamma.shape[0]
    gamma = np.zeros((n, n))
    k = a.gamma.shape[0]
    gamma[:k, :k], gamma[k:, k:] = a.gamma, b.gamma
    return CovarianceState(np.concatenate([a.mean, b.mean]), gamma)


def symplectic_eigenvalues(cov: CovarianceState) -> np.ndarray:
    """The ``n`` symplectic eigenvalues, from the spectrum of ``i Omega gamma`` (which comes in +- pairs)."""
    ev = np.linalg.eigvals(1j * symplectic_form(cov.n_modes) @ cov.gamma)
    return np.sort(np.abs(ev.real))[::2]


def gaussian_entropy(cov: CovarianceState) -> float:
    """Entropy in nats, ``sum_k g((nu_k - 1)/2)``."""
    nus = symplectic_eigenvalues(cov)
    if np.any(nus < 1 - 1e-9):
        raise ValueError(f"symplectic eigenvalues {nus} violate the uncertainty relation")
    return float(sum(g(max(0.0, (nu - 1) / 2)) for nu in nus))


def oracle_beam_splitter(a: CovarianceState, b: CovarianceState, lam: float) -> CovarianceState:
    if a.n_modes != b.n_modes:
        raise ValueError("beam splitter needs equal mode counts")
    s, c = np.sqrt(lam), np.sqrt(1 - lam)
    return CovarianceState(s * a.mean + c * b.mean, lam * a.gamma + (1 - lam) * b.gamma)


def oracle_channel(cov: CovarianceState, spec: ChannelSpec) -> CovarianceState:
    I = np.eye(cov.gamma.shape[0])
    if spec.kind == "pure_loss":
        lam = spec.lam
        return CovarianceState(np.sqrt(lam) * cov.mean, lam * cov.gamma + (1 - lam) * I)
    if spec.kind == "thermal":
        lam, ne = spec.lam, spec.N_E
        return CovarianceState(np.sqrt(lam) * cov.mean, lam * cov.gamma + (1 - lam) * (2 * ne + 1) * I)
    if spec.kind == "classical_noise":
        return CovarianceState(cov.mean, cov.gamma + LEDGER.noise_variance_per_nu * spec.nu * I)
    G = spec.G
    return CovarianceState(np.sqrt(G) * cov.mean, G * cov.gamma + (G - 1) * I)


def loss_amplifier_composition(cov: CovarianceState, lam: float, N_E: float) -> CovarianceState:
    """``A_G o E_{a,0}`` with ``G = (1-lam) N_E + 1`` and ``a = lam / G``."""
    G, a = loss_amplifier_parameters(lam, N_E)
    lossy = oracle_channel(cov, ChannelSpec("pure_loss", lam=a))
    return oracle_channel(lossy, ChannelSpec("amplifier", G=G))


def oracle_diffusion(cov: CovarianceState, t: float) -> CovarianceState:
    if t < 0:
        raise ValueError("diffusion time must be nonnegative")
    return CovarianceState(cov.mean, cov.gamma + LEDGER.diffusion_rate * t * np.eye(cov.gamma.shape[0]))


def cross_validate(state, cov: CovarianceState, tol: float = 1e-6) -> dict:
    """Compare a Fock-space state with a covariance description of the same Gaussian state."""
    from .fock import moments
    from .information import von_neumann_entropy

    mean, gamma = moments(state)
    s_fock = von_neumann_entropy(state)
    s_gauss = gaussian_entropy(cov)
    report = {
        "mean_error": float(np.max(np.abs(mean - cov.mean))),
        "gamma_error": float(np.max(np.abs(gamma - cov.gamma))),
        "entropy_fock": s_fock,
        "entropy_gaussian": s_gauss,
        "entropy_error": abs(s_fock - s_gauss),
        "tolerance": tol,
    }
    report["discrepancies"] = [k for k in ("mean_error", "gamma_error", "entropy_error") if report[k] > tol]
    report["ok"] = not report["discrepancies"]
    return report


def gaussian_to_fock(cov: CovarianceState, cutoff: int, pad: int = 40, tol=TOL):
    """Single-mode Gaussian state in the Fock basis (thermal, squeezed, rotated, displaced).

    Built on ``cutoff + pad`` levels and truncated; refuses if more than
    ``tol.tail`` is lost.
    """
    from scipy.linalg import expm

    from .fock import TruncatedState, annihilation, hermitize, phase_space_displacement, truncate

    if cov.n_modes != 1:
        raise ValueError("only single-mode Gaussian states are supported")
    nu = float(symplectic_eigenvalues(cov)[0])
    N = max(0.0, (nu - 1) / 2)
    reduced = cov.gamma / nu
    w, v = np.linalg.eigh(reduced)
    r = -0.25 * np.log(w[1] / w[0])  # stretch Q, squeeze P
    phi = np.arctan2(v[1, 1], v[0, 1])  # direction of the large-variance axis
    M = cutoff + pad
    n = np.arange(M)
    p = (N / (N + 1)) ** n if N > 0 else (n == 0).astype(float)
    rho = np.diag(p / p.sum()).astype(complex)
    a = annihilation(M)
    Sq = expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))
    Rot = np.diag(np.exp(1j * phi * n))
    U = phase_space_displacement(cov.mean, M) @ Rot @ Sq
    big = TruncatedState(hermitize(U @ rho @ U.conj().T), M, validate=False)
    out, _ = truncate(big, cutoff, tol)
    return out


@dataclass
class OracleCase:
    name: str
    report: dict

    @property
    def ok(self) -> bool:
        return self.report["ok"]


def default_gaussian_inputs() -> dict[str, CovarianceState]:
    """Thermal, displaced and squeezed-thermal test inputs."""
    theta = 0.4
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    squeezed = R @ np.diag([1.6 * np.exp(0.5), 1.6 * np.exp(-0.5)]) @ R.T
    return {
        "thermal_0.5": thermal_cov(0.5),
        "coherent": coherent_cov(0.5 + 0.3j),
        "squeezed_thermal": CovarianceState(np.array([0.3, -0.2]), squeezed),
    }


def oracle_suite(cutoff: int = 40, specs: Sequence[ChannelSpec] | None = None, t: float = 0.3,
                 tol: float = 1e-6) -> list[OracleCase]:
    """Every Fock-space channel against the covariance oracle on Gaussian inputs.

    Covers the channels in ``specs`` (thermal through both routes), the
    diffusion semigroup at time ``t`` and the beam splitter on input pairs.
    """
    from .channels import apply_channel, apply_thermal, beam_splitter_output
    from .diffusion import evolve
    from .fock import truncate

    if specs is None:
        specs = [ChannelSpec("pure_loss", lam=0.6), ChannelSpec("thermal", lam=0.7, N_E=0.8),
                 ChannelSpec("amplifier", G=1.5), ChannelSpec("classical_noise", nu=0.4)]
    inputs = default_gaussian_inputs()
    fock = {k: gaussian_to_fock(c, cutoff) for k, c in inputs.items()}
    cases = []
    for name, cov in inputs.items():
        st = fock[name]
        for spec in specs:
            expected = oracle_channel(cov, spec)
            if spec.kind == "thermal":
                for method in ("beam_splitter", "kraus"):
                    out = apply_thermal(st, spec.lam, spec.N_E, method=method,
                                        out_cutoff=cutoff if method == "beam_splitter" else None)
                    cases.append(OracleCase(f"{spec.kind}[{method}]:{name}", cross_validate(out, expected, tol)))
            else:
                out = apply_channel(st, spec)
                cases.append(OracleCase(f"{spec.kind}:{name}", cross_validate(out, expected, tol)))
        out = evolve(st, t, cutoff=cutoff + 20)
        cases.append(OracleCase(f"diffusion:{name}", cross_validate(out, oracle_diffusion(cov, t), tol)))
    names = list(inputs)
    for a, b in zip(names, names[1:] + names[:1]):
        for lam in (0.3, 0.5):
            z = beam_splitter_output(fock[a], fock[b], lam)
            z, _ = truncate(z, cutoff)
            cases.append(OracleCase(f"beam_splitter[{lam}]:{a}+{b}",
                                    cross_validate(z, oracle_beam_splitter(inputs[a], inputs[b], lam), tol)))
    return cases
