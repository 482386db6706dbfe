"""Relying-party validation in both modes, with exact operation accounting.

Standard mode walks the certificate chain: the ROA is checked under its
end-entity key, the end-entity certificate under the issuing CA's RC, and
every RC under its parent until the self-signed root, which is matched
against a pinned digest instead of being signature-verified. That costs
depth + 1 signature verifications and fetches every non-root RC per
validation (the root is cached, as deployments do).

Identity mode never walks a chain: the registration record is checked
first (cheap policy before expensive crypto), the signer's public key is
resolved from (id, R) and the local matrix, and the single ROA signature
is verified. One signature verification at any depth; after the matrix
is cached, the only bytes fetched per validation are one directory
record.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from datetime import datetime, timezone

from .key_center import RegistrationTable
from .mldsa import verify
from .pk_resolver import FileResolver, NOT_FOUND, OnlineResolver, RHO_MISMATCH
from .rpki_objects import (
    MODE_IPKPQ,
    MODE_STANDARD,
    Repository,
    ResourceCert,
    RoaObject,
    rc_path,
    sha_digest,
)

VALID = "valid"
INVALID = "invalid"

REASON_BAD_SIGNATURE = "bad-signature"
REASON_CHAIN_BROKEN = "chain-broken"
REASON_INR_VIOLATION = "inr-violation"
REASON_REGISTRATION_INVALID = "registration-invalid"
REASON_EXPIRED = "expired"
REASON_RHO_MISMATCH = "rho-mismatch"
REASON_NOT_FOUND = "not-found"


@dataclass
class ValidationReport:
    verdict: str = VALID
    reason: str | None = None
    sig_verifies_performed: int = 0
    objects_fetched: int = 0
    bytes_fetched: int = 0
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.verdict == VALID

    def fail(self, reason: str) -> "ValidationReport":
        self.verdict = INVALID
        self.reason = reason
        return self

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "sig_verifies_performed": self.sig_verifies_performed,
            "objects_fetched": self.objects_fetched,
            "bytes_fetched": self.bytes_fetched,
            "wall_time": self.wall_time,
        }


class StandardValidator:
    """Chain validation rooted at a digest-pinned trust anchor."""

    def __init__(self, repo: Repository, trust_anchor_digest: bytes,
                 cache_full_chain: bool = False):
        self.repo = repo
        self.trust_anchor_digest = trust_anchor_digest
        self.cache_full_chain = cache_full_chain
        self._cache: dict[str, bytes] = {}

    def _fetch_rc(self, name: str, report: ValidationReport) -> ResourceCert | None:
        path = rc_path(name)
        cached = self._cache.get(path)
        if cached is None:
            try:
                raw = self.repo.get(path)
            except KeyError:
                return None
            report.objects_fetched += 1
            report.bytes_fetched += len(raw)
        else:
            raw = cached
        cert = ResourceCert.decode(raw)
        is_root = cert.issuer_name == cert.subject_name
        if self.cache_full_chain or is_root:
            self._cache[path] = raw
        return cert

    def validate(self, roa: RoaObject, now: int) -> ValidationReport:
        report = ValidationReport()
        start = time.perf_counter()
        try:
            self._validate(roa, now, report)
        finally:
            report.wall_time = time.perf_counter() - start
        return report

    def _verify_sig(self, pk: bytes, obj, report: ValidationReport) -> bool:
        report.sig_verifies_performed += 1
        return verify(pk, obj.to_be_signed(), b"", obj.signature)

    def _validate(self, roa: RoaObject, now: int, report: ValidationReport) -> None:
        if roa.mode != MODE_STANDARD or roa.ee_cert is None or roa.ee_pk is None:
            report.fail(REASON_CHAIN_BROKEN)
            return
        if not self._verify_sig(roa.ee_pk, roa, report):
            report.fail(REASON_BAD_SIGNATURE)
            return

        ee = roa.ee_cert
        if ee.spki != roa.ee_pk:
            report.fail(REASON_CHAIN_BROKEN)
            return
        if not (ee.valid_from <= now <= ee.valid_to):
            report.fail(REASON_EXPIRED)
            return
        if not ee.inr.contains(roa.inr):
            report.fail(REASON_INR_VIOLATION)
            return

        child: ResourceCert = ee
        seen: set[str] = set()
        while True:
            issuer_name = child.issuer_name
            if issuer_name in seen:
                report.fail(REASON_CHAIN_BROKEN)
                return
            seen.add(issuer_name)
            issuer_rc = self._fetch_rc(issuer_name, report)
            if issuer_rc is None:
                report.fail(REASON_NOT_FOUND)
                return
            if issuer_rc.subject_name != issuer_name or issuer_rc.mode != MODE_STANDARD:
                report.fail(REASON_CHAIN_BROKEN)
                return
            if not (issuer_rc.valid_from <= now <= issuer_rc.valid_to):
                report.fail(REASON_EXPIRED)
                return
            if not issuer_rc.inr.contains(child.inr):
                report.fail(REASON_INR_VIOLATION)
                return
            if not self._verify_sig(issuer_rc.spki, child, report):
                report.fail(REASON_CHAIN_BROKEN)
                return
            if issuer_rc.issuer_name == issuer_rc.subject_name:
                # reached the self-signed root: compare against the pinned anchor
                if sha_digest(issuer_rc.encode()) != self.trust_anchor_digest:
                    report.fail(REASON_CHAIN_BROKEN)
                return
            child = issuer_rc


class IpkpqValidator:
    """Chain-free validation via registration policy plus seed-consistent keys."""

    def __init__(self, resolver: FileResolver | OnlineResolver,
                 registration_table: RegistrationTable):
        self.resolver = resolver
        self.registration_table = registration_table

    def validate(self, roa: RoaObject, now) -> ValidationReport:
        report = ValidationReport()
        start = time.perf_counter()
        try:
            self._validate(roa, now, report)
        finally:
            report.wall_time = time.perf_counter() - start
        return report

    def _validate(self, roa: RoaObject, now, report: ValidationReport) -> None:
        if isinstance(now, (int, float)):
            now = datetime.fromtimestamp(now, timezone.utc)
        if roa.mode != MODE_IPKPQ or roa.signer_r is None:
            report.fail(REASON_REGISTRATION_INVALID)
            return
        record = self.registration_table.get(roa.signer_name)
        if record is None or record.status != "active":
            report.fail(REASON_REGISTRATION_INVALID)
            return
        if not (record.valid_from <= now <= record.valid_to):
            report.fail(REASON_EXPIRED)
            return

        fetched0 = self.resolver.bytes_fetched
        objects0 = self.resolver.objects_fetched
        status, resolved = self.resolver.resolve_detail(roa.signer_name, roa.signer_r)
        report.bytes_fetched += self.resolver.bytes_fetched - fetched0
        report.objects_fetched += self.resolver.objects_fetched - objects0
        if status == NOT_FOUND:
            report.fail(REASON_NOT_FOUND)
            return
        if status == RHO_MISMATCH:
            report.fail(REASON_RHO_MISMATCH)
            return

        report.sig_verifies_performed += 1
        if not verify(resolved.pk, roa.to_be_signed(), b"", roa.signature):
            report.fail(REASON_BAD_SIGNATURE)
            return


def validate_standard(roa: RoaObject, repo: Repository,
                      trust_anchor_digest: bytes, now: int) -> ValidationReport:
    return StandardValidator(repo, trust_anchor_digest).validate(roa, now)


def validate_ipkpq(roa: RoaObject, resolver, registration_table: RegistrationTable,
                   now) -> ValidationReport:
    return IpkpqValidator(resolver, registration_table).validate(roa, now)
