"""Three-party signature protocol: keys, symmetrisation and verification."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


class PartyId(enum.IntEnum):
    ALICE = 0
    BOB = 1
    CHARLIE = 2


RECIPIENTS = (PartyId.BOB, PartyId.CHARLIE)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True, eq=False)
class KeyString:
    """A key held by ``origin`` for message slot ``message_slot``.

    ``forward_positions``, when set, records which half of the key its holder
    hands to the other recipient during symmetrisation.
    """

    bits: np.ndarray
    origin: PartyId
    message_slot: int = 0
    forward_positions: np.ndarray | None = None

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or np.any(bits > 1):
            raise DomainError("key bits must be a 1-d sequence of 0/1")
        object.__setattr__(self, "bits", bits)
        if self.message_slot not in (0, 1):
            raise DomainError("message slot must be 0 or 1")
        if self.forward_positions is not None:
            fwd = np.asarray(self.forward_positions, dtype=np.int64)
            if len(fwd) != len(bits) // 2 or len(np.unique(fwd)) != len(fwd):
                raise DomainError("forward_positions must be L/2 distinct positions")
            object.__setattr__(self, "forward_positions", fwd)

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True, eq=False)
class SymmetrisedKey:
    """A recipient's key after symmetrisation.

    Element ``i`` has value ``bits[i]``; ``forwarded[i]`` tells whether it was
    received from the other recipient, and ``positions[i]`` is its index in
    the original key it came from.
    """

    holder: PartyId
    bits: np.ndarray
    forwarded: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        L = len(self.bits)
        if len(self.forwarded) != L or len(self.positions) != L:
            raise DomainError("symmetrised key arrays must have equal length")
        if int(self.forwarded.sum()) * 2 != L:
            raise DomainError("exactly half the elements must be forwarded")
        for mask in (self.forwarded, ~self.forwarded):
            seen = np.zeros(L, dtype=bool)
            pos = self.positions[mask]
            seen[pos] = True
            if np.count_nonzero(seen) != len(pos):
                raise DomainError("positions must be unique within each provenance class")

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def direct(self) -> np.ndarray:
        return ~self.forwarded


@dataclass(frozen=True, eq=False)
class Declaration:
    """A signed message ``(m, Sig_m)`` with ``Sig_m = (A^B_m, A^C_m)``."""

    message: int
    signature: tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        if self.message not in (0, 1):
            raise DomainError("message must be a single bit")
        halves = tuple(np.asarray(h, dtype=np.uint8) for h in self.signature)
        if len(halves) != 2 or len(halves[0]) != len(halves[1]):
            raise DomainError("signature must consist of two halves of equal length")
        object.__setattr__(self, "signature", halves)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    mismatches_direct: int
    mismatches_forwarded: int
    threshold_used: float


def _split_half(key: KeyString, rng: np.random.Generator) -> np.ndarray:
    if key.forward_positions is not None:
        return key.forward_positions
    L = len(key)
    mask = np.zeros(L, dtype=bool)
    mask[rng.permutation(L)[: L // 2]] = True
    return np.flatnonzero(mask)


def symmetrise(bob_key: KeyString, charlie_key: KeyString, rng_seed=None) -> tuple[SymmetrisedKey, SymmetrisedKey]:
    """Exchange half of each recipient's key over the secret Bob-Charlie channel.

    Each recipient keeps the half he did not forward and appends the half
    forwarded to him. Forwarded bits are never used by the one who sent them.
    """
    L = len(bob_key)
    if len(charlie_key) != L:
        raise DomainError(f"key length mismatch: {L} vs {len(charlie_key)}")
    if L % 2:
        raise DomainError("key length must be even")
    rng = _as_rng(rng_seed)
    bob_fwd = _split_half(bob_key, rng)
    charlie_fwd = _split_half(charlie_key, rng)

    def build(holder, own: KeyString, own_fwd, other: KeyString, other_fwd) -> SymmetrisedKey:
        keep = np.ones(L, dtype=bool)
        keep[own_fwd] = False
        kept_pos = np.flatnonzero(keep)
        return SymmetrisedKey(
            holder=holder,
            bits=np.concatenate([own.bits[kept_pos], other.bits[other_fwd]]),
            forwarded=np.concatenate([np.zeros(L // 2, bool), np.ones(L // 2, bool)]),
            positions=np.concatenate([kept_pos, other_fwd]),
        )

    return (
        build(PartyId.BOB, bob_key, bob_fwd, charlie_key, charlie_fwd),
        build(PartyId.CHARLIE, charlie_key, charlie_fwd, bob_key, bob_fwd),
    )


def verify(decl: Declaration, key: SymmetrisedKey, threshold: float) -> Verdict:
    """Accept iff both provenance halves have fewer than ``threshold * L/2`` mismatches."""
    L = len(key)
    if len(decl.signature[0]) != L:
        raise DomainError("declaration and key lengths differ")
    own = 0 if key.holder == PartyId.BOB else 1
    other = 1 - own
    direct = key.direct
    expected = np.where(
        direct,
        decl.signature[own][key.positions],
        decl.signature[other][key.positions],
    )
    wrong = expected != key.bits
    m_direct = int(np.count_nonzero(wrong & direct))
    m_forwarded = int(np.count_nonzero(wrong & key.forwarded))
    limit = threshold * (L / 2)
    return Verdict(
        accepted=m_direct < limit and m_forwarded < limit,
        mismatches_direct=m_direct,
        mismatches_forwarded=m_forwarded,
        threshold_used=threshold,
    )
