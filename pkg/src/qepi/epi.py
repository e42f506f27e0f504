"""Entropy-inequality margins for beam-splitter outputs.

For ``Z = X boxplus_lam Y`` on ``n`` modes:

* linear form: ``S(Z) - lam S(X) - (1-lam) S(Y) >= 0`` for every ``lam``;
* power form at ``lam = 1/2``: ``e^{S(Z)/n} - e^{S(X)/n}/2 - e^{S(Y)/n}/2 >= 0``;
* power form at general ``lam``: ``e^{S(Z)/n} - lam e^{S(X)/n} - (1-lam) e^{S(Y)/n}``,
  which is unproven.  It is reported and flagged, never asserted.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .channels import beam_splitter_output
from .fock import TruncatedState
from .information import von_neumann_entropy


@dataclass(frozen=True)
class EpiMargins:
    lam: float
    S_x: float
    S_y: float
    S_z: float
    linear: float
    power_half: float | None
    power_general: float
    label: str = ""

    @property
    def probe_negative(self) -> bool:
        return self.power_general < 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["power_general_unproven"] = True
        return out


def margins_from_entropies(S_x: float, S_y: float, S_z: float, lam: float, n_modes: int = 1,
                           label: str = "") -> EpiMargins:
    ex, ey, ez = (math.exp(s / n_modes) for s in (S_x, S_y, S_z))
    linear = S_z - lam * S_x - (1 - lam) * S_y
    half = ez - 0.5 * ex - 0.5 * ey if lam == 0.5 else None
    general = ez - lam * ex - (1 - lam) * ey
    return EpiMargins(lam, S_x, S_y, S_z, linear, half, general, label)


def epi_margins(x: TruncatedState, y: TruncatedState, lam: float, label: str = "") -> EpiMargins:
    """Entropy margins with ``Z`` computed exactly on the full output cutoff."""
    z = beam_splitter_output(x, y, lam)
    return margins_from_entropies(von_neumann_entropy(x), von_neumann_entropy(y), von_neumann_entropy(z),
                                  lam, x.n_modes, label)


def epi_margins_half(x: TruncatedState, y: TruncatedState, label: str = "") -> EpiMargins:
    return epi_margins(x, y, 0.5, label)
