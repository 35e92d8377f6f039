"""Finite-size security analysis and simulation of a three-party quantum digital signature scheme."""

from .analysis import AnalysisOptions, SecurityReport, analyze, required_signature_length
from .channel import ChannelParams, DecoySettings, expected_statistics
from .errors import (
    ConfigurationError,
    DomainError,
    EstimationError,
    GammaDomainError,
    InfeasibleError,
    InsufficientCountsError,
    QDSError,
)
from .estimation import CountStatistics, FiniteSizeEstimates, estimate
from .kgp import run_kgp
from .protocol import Declaration, KeyString, PartyId, SymmetrisedKey, Verdict, symmetrise, verify
from .security import AdversaryStrategy, SecurityParams

__all__ = [
    "AdversaryStrategy",
    "AnalysisOptions",
    "ChannelParams",
    "ConfigurationError",
    "CountStatistics",
    "Declaration",
    "DecoySettings",
    "DomainError",
    "EstimationError",
    "FiniteSizeEstimates",
    "GammaDomainError",
    "InfeasibleError",
    "InsufficientCountsError",
    "KeyString",
    "PartyId",
    "QDSError",
    "SecurityParams",
    "SecurityReport",
    "SymmetrisedKey",
    "Verdict",
    "analyze",
    "estimate",
    "expected_statistics",
    "required_signature_length",
    "run_kgp",
    "symmetrise",
    "verify",
]
