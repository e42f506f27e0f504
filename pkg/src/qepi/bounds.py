"""Closed-form classical-capacity bounds for thermal-noise and classical-noise channels.

Every bound is a scalar function of the transmissivity ``lam``, the
environment photon number ``N_E`` (or the classical noise ``nu``) and the
mean signal photon number ``N``; values are in nats.  Bounds that rest on
the unproven entropy inequality for general ``lam`` carry
``conditional=True`` in every serialized output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

LN2 = math.log(2.0)
CONDITION = "conditional on the unproven EPI for general lambda"


def g(x):
    """``(x+1) ln(x+1) - x ln x``; the entropy of a thermal state with mean photon number ``x``."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("g is defined for x >= 0")
    safe = np.where(arr < 1e-12, 1.0, arr)
    val = np.where(arr < 1e-12, 0.0, (safe + 1) * np.log1p(safe) - safe * np.log(safe))
    return float(val) if np.ndim(val) == 0 else val


def g_prime(x):
    """``ln((x+1)/x)``, also the Fisher information ``J~`` of a thermal state."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("g' is defined for x > 0")
    val = np.log1p(1.0 / arr)
    return float(val) if np.ndim(val) == 0 else val


def _check(lam: float, N_E: float, N: float) -> None:
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if N_E < 0 or N < 0:
        raise ValueError("photon numbers must be nonnegative")


def holevo_lb(lam: float, N_E: float, N: float) -> float:
    """Coherent-state Holevo information ``g(lam N + (1-lam) N_E) - g((1-lam) N_E)``."""
    _check(lam, N_E, N)
    return g(lam * N + (1 - lam) * N_E) - g((1 - lam) * N_E)


def additive_extension_ub(lam: float, N_E: float, N: float) -> float:
    """``g(lam N / ((1-lam) N_E + 1))``: pure-loss capacity after splitting off an amplifier."""
    _check(lam, N_E, N)
    return g(lam * N / ((1 - lam) * N_E + 1))


def epi_ub(lam: float, N_E: float, N: float) -> float:
    """``g(lam N + (1-lam) N_E) - (1-lam) g(N_E)``."""
    _check(lam, N_E, N)
    return g(lam * N + (1 - lam) * N_E) - (1 - lam) * g(N_E)


def half_epi_ub(N_E: float, N: float) -> float:
    """``g((N + N_E)/2) - ln(1 + e^{g(N_E)}) + ln 2``, the entropy-power bound at ``lam = 1/2``."""
    _check(0.5, N_E, N)
    return g(0.5 * (N + N_E)) - math.log1p(math.exp(g(N_E))) + LN2


def conjectured_ub(lam: float, N_E: float, N: float) -> float:
    """``g(lam N + (1-lam) N_E) - ln(lam + (1-lam) e^{g(N_E)})``; conditional."""
    _check(lam, N_E, N)
    return g(lam * N + (1 - lam) * N_E) - math.log(lam + (1 - lam) * math.exp(g(N_E)))


def classical_noise_bounds(nu: float, N: float) -> tuple[float, float]:
    """``(g(N+nu) - g(nu), g(N+nu) - ln(1 + e nu))``; the upper value is conditional."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    if N < 0:
        raise ValueError("N must be nonnegative")
    top = g(N + nu)
    return top - g(nu), top - math.log1p(math.e * nu)


def classical_noise_limit(nu: float, lams: Sequence[float]) -> list[float]:
    """``(1-lam) e^{g(N_E)}`` along ``(1-lam) N_E = nu``; tends to ``e nu`` as ``lam -> 1``."""
    return [(1 - lam) * math.exp(g(nu / (1 - lam))) for lam in lams]


@dataclass(frozen=True)
class SmaxComponents:
    s_max: float
    s_min_epi: float
    s_min_half_epi: float | None

    @property
    def epi_ub(self) -> float:
        return self.s_max - self.s_min_epi

    @property
    def half_epi_ub(self) -> float | None:
        return None if self.s_min_half_epi is None else self.s_max - self.s_min_half_epi


def smax_ub_components(lam: float, N_E: float, N: float) -> SmaxComponents:
    """Maximal output entropy and the entropy-inequality lower bounds on minimal output entropy.

    ``s_min_half_epi`` exists only at ``lam = 1/2``.
    """
    _check(lam, N_E, N)
    s_max = g(lam * N + (1 - lam) * N_E)
    half = math.log1p(math.exp(g(N_E))) - LN2 if lam == 0.5 else None
    return SmaxComponents(s_max, (1 - lam) * g(N_E), half)


# --- identities and curves -----------------------------------------------------

IDENTITIES = ("holevo_lb", "additive_extension_ub", "epi_ub", "half_epi_ub",
              "conjectured_ub", "smax_ub", "cn_lb", "cn_ub")
CONDITIONAL_IDS = frozenset({"conjectured_ub", "cn_ub"})
LOWER_IDS = frozenset({"holevo_lb", "cn_lb"})


@dataclass(frozen=True)
class BoundIdentity:
    id: str
    formula: str

    def __post_init__(self) -> None:
        if self.id not in IDENTITIES:
            raise ValueError(f"unknown bound {self.id!r}; choose from {IDENTITIES}")

    @property
    def conditional(self) -> bool:
        return self.id in CONDITIONAL_IDS


FORMULAS = {
    "holevo_lb": "g(lam N + (1-lam) N_E) - g((1-lam) N_E)",
    "additive_extension_ub": "g(lam N / ((1-lam) N_E + 1))",
    "epi_ub": "g(lam N + (1-lam) N_E) - (1-lam) g(N_E)",
    "half_epi_ub": "g((N + N_E)/2) - ln(1 + e^g(N_E)) + ln 2",
    "conjectured_ub": "g(lam N + (1-lam) N_E) - ln(lam + (1-lam) e^g(N_E))",
    "smax_ub": "S_max - S_min lower bound = g(lam N + (1-lam) N_E) - (1-lam) g(N_E)",
    "cn_lb": "g(N + nu) - g(nu)",
    "cn_ub": "g(N + nu) - ln(1 + e nu)",
}


def identity(name: str) -> BoundIdentity:
    if name not in FORMULAS:
        raise ValueError(f"unknown bound {name!r}; choose from {IDENTITIES}")
    return BoundIdentity(name, FORMULAS[name])


def evaluate(name: str, N: float, lam: float = 0.5, N_E: float = 0.0, nu: float | None = None) -> float:
    if name == "holevo_lb":
        return holevo_lb(lam, N_E, N)
    if name == "additive_extension_ub":
        return additive_extension_ub(lam, N_E, N)
    if name == "epi_ub":
        return epi_ub(lam, N_E, N)
    if name == "half_epi_ub":
        if lam != 0.5:
            raise ValueError("half_epi_ub is only defined at lambda = 1/2")
        return half_epi_ub(N_E, N)
    if name == "conjectured_ub":
        return conjectured_ub(lam, N_E, N)
    if name == "smax_ub":
        return smax_ub_components(lam, N_E, N).epi_ub
    if name in ("cn_lb", "cn_ub"):
        if nu is None:
            raise ValueError(f"{name} needs nu")
        lb, ub = classical_noise_bounds(nu, N)
        return lb if name == "cn_lb" else ub
    raise ValueError(f"unknown bound {name!r}")


def default_identities(lam: float, nu: float | None) -> tuple[str, ...]:
    if nu is not None:
        return ("cn_lb", "cn_ub")
    ids = ["holevo_lb", "additive_extension_ub", "epi_ub", "conjectured_ub"]
    if lam == 0.5:
        ids.insert(3, "half_epi_ub")
    return tuple(ids)


@dataclass
class BoundCurve:
    lam: float | None
    N_E: float | None
    nu: float | None
    n_grid: list[float]
    values_nats: dict[str, list[float]]
    ordering: dict[str, float] = field(default_factory=dict)
    sweep: str = "N"

    @property
    def values_bits(self) -> dict[str, list[float]]:
        return {k: [v / LN2 for v in vals] for k, vals in self.values_nats.items()}

    def ordering_ok(self, slack: float = 1e-12) -> bool:
        return all(v >= -slack for v in self.ordering.values())

    def to_rows(self) -> list[list]:
        bits = self.values_bits
        rows = []
        for name, vals in self.values_nats.items():
            for x, v, b in zip(self.n_grid, vals, bits[name]):
                rows.append([x, name, v, b, name in CONDITIONAL_IDS])
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.sweep, "identity", "nats", "bits", "conditional_flag"])
        for x, name, v, b, c in self.to_rows():
            w.writerow([repr(float(x)), name, repr(float(v)), repr(float(b)), str(c).lower()])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam, "N_E": self.N_E, "nu": self.nu, "sweep": self.sweep,
            "grid": self.n_grid, "values_nats": self.values_nats, "values_bits": self.values_bits,
            "conditional": {k: (k in CONDITIONAL_IDS) for k in self.values_nats},
            "condition": CONDITION, "ordering_min_margin": self.ordering,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _ordering(values: dict[str, list[float]]) -> dict[str, float]:
    lower = [k for k in values if k in LOWER_IDS]
    out = {}
    for lo in lower:
        for k, vals in values.items():
            if k in LOWER_IDS:
                continue
            if lo == "cn_lb" and not k.startswith("cn_"):
                continue
            if lo == "holevo_lb" and k.startswith("cn_"):
                continue
            out[f"{k}-{lo}"] = float(min(u - l for u, l in zip(vals, values[lo])))
    return out


def curve(identities: Iterable[str] | None, n_grid: Sequence[float], lam: float = 0.5, N_E: float = 0.0,
          nu: float | None = None) -> BoundCurve:
    """Evaluate bounds over a photon-number grid with UB-minus-LB ordering margins."""
    ids = tuple(identities) if identities else default_identities(lam, nu)
    grid = [float(n) for n in n_grid]
    values = {name: [evaluate(name, n, lam, N_E, nu) for n in grid] for name in ids}
    return BoundCurve(lam, N_E, nu, grid, values, _ordering(values))


def lambda_sweep(identities: Iterable[str] | None, lams: Sequence[float], N: float, N_E: float) -> BoundCurve:
    """Bounds as a function of transmissivity at fixed ``N`` and ``N_E``."""
    ids = tuple(identities) if identities else ("holevo_lb", "additive_extension_ub", "epi_ub", "conjectured_ub")
    grid = [float(l) for l in lams]
    values = {}
    for name in ids:
        if name == "half_epi_ub":
            values[name] = [half_epi_ub(N_E, N) if l == 0.5 else math.nan for l in grid]
        else:
            values[name] = [evaluate(name, N, l, N_E) for l in grid]
    return BoundCurve(None, N_E, None, grid, values, _ordering(values), sweep="lambda")


# --- gap scans -----------------------------------------------------------------

@dataclass(frozen=True)
class GapScan:
    supremum: float
    argmax: tuple[float, float]
    claimed: float
    units: str

    @property
    def holds(self) -> bool:
        return self.supremum <= self.claimed


def _argmax(gap: np.ndarray, a: np.ndarray, b: np.ndarray) -> tuple[float, tuple[float, float]]:
    i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
    return float(gap[i, j]), (float(a[i]), float(b[j]))


def half_epi_gap_scan(N_grid: Sequence[float] | None = None,
                      N_E_grid: Sequence[float] | None = None) -> GapScan:
    """Largest ``half_epi_ub - holevo_lb`` at ``lam = 1/2``, in bits; ``argmax`` is ``(N, N_E)``."""
    N = np.linspace(0, 50, 501) if N_grid is None else np.asarray(N_grid, float)
    NE = np.linspace(0, 10, 201) if N_E_grid is None else np.asarray(N_E_grid, float)
    n, ne = np.meshgrid(N, NE, indexing="ij")
    # same closed forms as half_epi_ub and holevo_lb, on the whole grid at once
    ub = g(0.5 * (n + ne)) - np.log1p(np.exp(g(ne))) + LN2
    lb = g(0.5 * n + 0.5 * ne) - g(0.5 * ne)
    best, arg = _argmax((ub - lb) / LN2, N, NE)
    return GapScan(best, arg, 0.06, "bits")


def classical_noise_gap_scan(nu_grid: Sequence[float] | None = None,
                             N_grid: Sequence[float] | None = None) -> GapScan:
    """Largest ``cn_ub - cn_lb``, in nats; ``argmax`` is ``(N, nu)``."""
    NU = np.linspace(0.01, 10, 1000) if nu_grid is None else np.asarray(nu_grid, float)
    N = np.linspace(0, 50, 51) if N_grid is None else np.asarray(N_grid, float)
    if np.any(NU <= 0):
        raise ValueError("nu must be positive")
    n, nu = np.meshgrid(N, NU, indexing="ij")
    top = g(n + nu)
    gap = (top - np.log1p(np.e * nu)) - (top - g(nu))
    best, arg = _argmax(gap, N, NU)
    return GapScan(best, arg, 0.11, "nats")
