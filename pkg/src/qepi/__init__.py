"""Quantum entropy power inequalities and capacity bounds for bosonic channels, in truncated Fock space."""

from .conventions import LEDGER, TOL, ConventionLedger, NotFullRankError, Tolerances, TruncationError

__all__ = ["LEDGER", "TOL", "ConventionLedger", "Tolerances", "TruncationError", "NotFullRankError"]
