"""Phase-space normalization constants and numerical tolerances.

Quadratures are normalized so that ``[Q, P] = 2i``.  With this choice the
vacuum has unit variance in every quadrature, ``H = (Q^2 + P^2)/2`` equals
``2 a^dag a + 1`` and a covariance matrix ``gamma`` of a thermal state with
mean photon number ``N`` is ``(2N + 1) I``.

Every other constant in the package (diffusion rate, de Bruijn scale,
Wigner normalization, classical-noise displacement width) follows from the
commutator and is recorded once in :data:`LEDGER`.  The calibration helpers
in :mod:`qepi.diffusion` and :mod:`qepi.information` recompute the
calibrated entries from scratch; the test suite checks that they agree.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class ConventionLedger:
    commutator_scale: float = 2.0
    vacuum_variance: float = 1.0
    # dS/dt at t=0 equals debruijn_scale * (sum of displacement Fisher informations)
    debruijn_scale: float = 1.0
    # per-quadrature covariance growth rate under exp(tL)
    diffusion_rate: float = 2.0
    # W(0, 0) = wigner_norm * <parity>
    wigner_norm: float = 1.0 / (2.0 * math.pi)
    # classical noise E_nu adds noise_variance_per_nu * nu to every quadrature variance
    noise_variance_per_nu: float = 2.0

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value}")
        if not math.isclose(self.vacuum_variance, self.commutator_scale / 2):
            raise ValueError("vacuum_variance must equal commutator_scale / 2")

    def to_dict(self) -> dict:
        return asdict(self)


LEDGER = ConventionLedger()


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10
    trace: float = 1e-10
    psd: float = 1e-10
    # tail mass allowed beyond a Fock cutoff before a constructor refuses
    tail: float = 1e-8
    # displacement leakage budget
    leak: float = 1e-8
    eig_floor: float = 1e-14
    log_clamp: float = 1e-13
    supp: float = 1e-9
    fd: float = 1e-6
    grid: float = 1e-3

    def to_dict(self) -> dict:
        return asdict(self)


TOL = Tolerances()


class TruncationError(ValueError):
    """Raised when a Fock cutoff is too small for the requested operation."""

    def __init__(self, message: str, *, tail_mass: float | None = None,
                 suggested_cutoff: int | None = None) -> None:
        super().__init__(message)
        self.tail_mass = tail_mass
        self.suggested_cutoff = suggested_cutoff


class NotFullRankError(ValueError):
    """Raised when a Fisher-information routine receives a rank-deficient state."""
