"""Link-tag trajectories and duplicate-series detection.

A roadside unit hands out exactly one signed link tag per physical radio
contact, and the trust authority countersigns it.  A vehicle claiming
several identities can only relay that single tag to all of them, so the
identities accumulate byte-identical tag series; honest vehicles pick up
fresh nonces at every pass and never match anyone else's series.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Protocol

from .crypto import SignatureKeyPair, SignerDirectory, sign
from .errors import (
    AuthorizationRejectedError,
    InvalidTagError,
    SerialOrderError,
)

MATCH_LENGTH = 2
NONCE_BYTES = 8
TA_ID = "ta"


class _NonceSource(Protocol):
    def bytes(self, length: int) -> bytes: ...


@dataclass(frozen=True)
class LinkTag:
    rsu_id: str
    issue_time: float
    nonce: bytes
    rsu_signature: bytes
    ta_signature: bytes | None = None

    def signed_payload(self) -> bytes:
        """Canonical bytes the issuing RSU signs."""
        return self.rsu_id.encode() + b"|" + struct.pack(">d", self.issue_time) + b"|" + self.nonce

    def full_payload(self) -> bytes:
        """Canonical bytes the trust authority countersigns."""
        return self.signed_payload() + self.rsu_signature

    def key_bytes(self) -> bytes:
        """Byte representation used for identical-series matching."""
        return self.full_payload() + (self.ta_signature or b"")


@dataclass
class Rsu:
    """Issuing state of one roadside unit."""

    rsu_id: str
    keypair: SignatureKeyPair
    position_m: float = 0.0
    template: LinkTag | None = None

    def issue_tag(self, now: float, rng: _NonceSource) -> LinkTag:
        """Mint the single tag for one physical contact."""
        nonce = rng.bytes(NONCE_BYTES)
        unsigned = LinkTag(self.rsu_id, now, nonce, b"")
        signature = sign(self.keypair, unsigned.signed_payload())
        return replace(unsigned, rsu_signature=signature)


class RsuDirectory:
    """Registered roadside units, their neighbor links, and announcements."""

    def __init__(self, signers: SignerDirectory | None = None) -> None:
        self.signers = signers if signers is not None else SignerDirectory()
        self._neighbors: dict[str, set[str]] = {}
        self.announcements: dict[str, LinkTag] = {}

    def add_rsu(self, rsu_id: str, secret: bytes, position_m: float = 0.0) -> Rsu:
        keypair = self.signers.register(rsu_id, secret)
        self._neighbors.setdefault(rsu_id, set())
        return Rsu(rsu_id, keypair, position_m)

    def link_neighbors(self, a: str, b: str) -> None:
        self._neighbors.setdefault(a, set()).add(b)
        self._neighbors.setdefault(b, set()).add(a)

    def neighbors_of(self, rsu_id: str) -> set[str]:
        return set(self._neighbors.get(rsu_id, set()))

    def verify_tag(self, tag: LinkTag) -> bool:
        """Check the issuing RSU's signature (raises for unknown signers)."""
        return self.signers.verify(tag.rsu_id, tag.signed_payload(), tag.rsu_signature)

    def verify_countersignature(self, tag: LinkTag) -> bool:
        if tag.ta_signature is None:
            return False
        return self.signers.verify(TA_ID, tag.full_payload(), tag.ta_signature)


class TrustAuthority:
    """Countersigns RSU-issued tags after checking the issuer."""

    def __init__(self, directory: RsuDirectory, secret: bytes) -> None:
        self.directory = directory
        self.keypair = directory.signers.register(TA_ID, secret)

    def authorize(self, tag: LinkTag) -> LinkTag:
        if not self.directory.verify_tag(tag):
            raise AuthorizationRejectedError(
                f"tag from {tag.rsu_id!r} at t={tag.issue_time} fails signature check"
            )
        return replace(tag, ta_signature=sign(self.keypair, tag.full_payload()))


def broadcast_tags(rsu: Rsu, directory: RsuDirectory) -> set[tuple[str, LinkTag]]:
    """Announce this RSU's current tag template to every neighbor.

    Deployment-phase plumbing: afterwards any unit can check tags issued
    elsewhere because the announcement is on file.
    """
    if rsu.template is None:
        raise InvalidTagError(f"{rsu.rsu_id!r} has no tag template to announce")
    directory.announcements[rsu.rsu_id] = rsu.template
    return {(neighbor, rsu.template) for neighbor in directory.neighbors_of(rsu.rsu_id)}


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Serially ordered link tags accumulated by one claimed identity."""

    identity: str
    tags: list[LinkTag] = field(default_factory=list)


def append_tag(trajectory: Trajectory, tag: LinkTag, directory: RsuDirectory) -> Trajectory:
    """Validate and append one tag, preserving strict serial order."""
    if not directory.verify_tag(tag):
        raise InvalidTagError(f"tag from {tag.rsu_id!r} fails the issuer check")
    if not directory.verify_countersignature(tag):
        raise InvalidTagError(f"tag from {tag.rsu_id!r} lacks a valid countersignature")
    if trajectory.tags and tag.issue_time <= trajectory.tags[-1].issue_time:
        raise SerialOrderError(
            f"tag at t={tag.issue_time} does not follow t={trajectory.tags[-1].issue_time}"
        )
    trajectory.tags.append(tag)
    return trajectory


def detect_duplicate_series(
    trajectories: Iterable[Trajectory],
    match_length: int = MATCH_LENGTH,
) -> list[frozenset[str]]:
    """Group identities whose trailing tag series are byte-identical.

    Only identities holding at least ``match_length`` tags participate;
    byte-identical suffixes are an equivalence relation, so grouping by the
    suffix key already is the transitive closure of pairwise matches.
    Groups come back deterministically ordered by their smallest member.
    """
    if match_length < 1:
        raise ValueError("match_length must be at least 1")
    by_suffix: dict[bytes, set[str]] = {}
    for trajectory in trajectories:
        if len(trajectory.tags) < match_length:
            continue
        suffix = b"".join(tag.key_bytes() for tag in trajectory.tags[-match_length:])
        by_suffix.setdefault(suffix, set()).add(trajectory.identity)
    groups = [frozenset(ids) for ids in by_suffix.values() if len(ids) >= 2]
    return sorted(groups, key=lambda g: sorted(g))


# ---------------------------------------------------------------------------
# trajectory serialization
# ---------------------------------------------------------------------------

def export_trajectories(trajectories: Iterable[Trajectory], path: str | Path) -> None:
    """One JSON record per tag, grouped by identity in serial order."""
    with open(path, "w") as handle:
        for trajectory in trajectories:
            for tag in trajectory.tags:
                record = {
                    "identity": trajectory.identity,
                    "rsu_id": tag.rsu_id,
                    "issue_time": tag.issue_time,
                    "nonce": tag.nonce.hex(),
                    "sig": tag.rsu_signature.hex(),
                    "ta_sig": tag.ta_signature.hex() if tag.ta_signature else None,
                }
                handle.write(json.dumps(record, sort_keys=True) + "\n")


def load_trajectories(path: str | Path) -> list[Trajectory]:
    trajectories: dict[str, Trajectory] = {}
    with open(path) as handle:
        for line in handle:
            record = json.loads(line)
            tag = LinkTag(
                rsu_id=record["rsu_id"],
                issue_time=record["issue_time"],
                nonce=bytes.fromhex(record["nonce"]),
                rsu_signature=bytes.fromhex(record["sig"]),
                ta_signature=bytes.fromhex(record["ta_sig"]) if record["ta_sig"] else None,
            )
            trajectories.setdefault(record["identity"], Trajectory(record["identity"])).tags.append(tag)
    return list(trajectories.values())
