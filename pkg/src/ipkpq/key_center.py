"""The registry-side authority: sealed seeds, registration records, File_PK.

The private seed matrix and all per-registration secrets live in a
:class:`SealedStore`, an in-process stand-in for an HSM. Nothing in the
store is ever written out in plaintext; persistence goes through an
AES-GCM container keyed by a file the store owner controls. Tests reach
sealed material only through the explicitly named ``inspect_for_tests``
hook.

Registration state is an append-only log, one JSON object per line, and
the last line for an id is authoritative (the same last-wins idiom as
File_PK records). The registration secret rho'_r never appears in the
published table.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from . import pk_directory
from .errors import ConflictError, ParameterError, StateError
from .mldsa.params import LEVELS, MlDsaLevel
from .seed_fabric import (
    EntropySource,
    SeedMatrixPriv,
    SeedMatrixPub,
    gen_matrices,
    validate_identity,
)

# Record lifecycle: registered -> active (key committed) -> renewing -> active ...
# revoked is terminal for validation purposes.
STATUS_REGISTERED = "registered"
STATUS_ACTIVE = "active"
STATUS_RENEWING = "renewing"
STATUS_REVOKED = "revoked"

_TIME_FMT = "%Y-%m-%dT%H:%M:%SZ"


def format_time(t: datetime) -> str:
    return t.astimezone(timezone.utc).strftime(_TIME_FMT)


def parse_time(s: str) -> datetime:
    return datetime.strptime(s, _TIME_FMT).replace(tzinfo=timezone.utc)


@dataclass(frozen=True)
class RegistrationRecord:
    attributes: str
    id: str
    R: bytes | None
    valid_from: datetime
    valid_to: datetime
    status: str = STATUS_REGISTERED

    def is_active(self, now: datetime) -> bool:
        return (self.status == STATUS_ACTIVE
                and self.valid_from <= now <= self.valid_to)

    def to_json(self) -> str:
        return json.dumps({
            "attributes": self.attributes,
            "id": self.id,
            "R": self.R.hex() if self.R is not None else None,
            "valid_from": format_time(self.valid_from),
            "valid_to": format_time(self.valid_to),
            "status": self.status,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RegistrationRecord":
        obj = json.loads(line)
        return cls(
            attributes=obj["attributes"],
            id=obj["id"],
            R=bytes.fromhex(obj["R"]) if obj["R"] else None,
            valid_from=parse_time(obj["valid_from"]),
            valid_to=parse_time(obj["valid_to"]),
            status=obj["status"],
        )


class RegistrationTable:
    """Read-side view of the published registration log."""

    def __init__(self, records: dict[str, RegistrationRecord] | None = None):
        self._records = dict(records or {})

    @classmethod
    def from_jsonl(cls, text: str) -> "RegistrationTable":
        records: dict[str, RegistrationRecord] = {}
        for line in text.splitlines():
            if line.strip():
                rec = RegistrationRecord.from_json(line)
                records[rec.id] = rec
        return cls(records)

    def get(self, id_: str) -> RegistrationRecord | None:
        return self._records.get(id_)

    def __len__(self) -> int:
        return len(self._records)


class SealedStore:
    """Simulated HSM: private matrix, center seeds, per-registration secrets."""

    def __init__(self, priv_matrix: SeedMatrixPriv, kc_rho: bytes,
                 kc_rho_prime: bytes, kc_k: bytes,
                 reg_secrets: dict[str, bytes] | None = None):
        self._priv_matrix = priv_matrix
        self._kc_rho = kc_rho
        self._kc_rho_prime = kc_rho_prime
        self._kc_k = kc_k
        self._reg_secrets = dict(reg_secrets or {})
        self._lock = threading.Lock()

    @classmethod
    def generate(cls, m: int, h: int, rng: EntropySource) -> tuple["SealedStore", SeedMatrixPub]:
        priv, pub = gen_matrices(m, h, rng)
        return cls(priv, rng(32), rng(64), rng(32)), pub

    @property
    def kc_rho(self) -> bytes:
        return self._kc_rho

    @property
    def priv_matrix(self) -> SeedMatrixPriv:
        return self._priv_matrix

    def new_reg_secret(self, id_: str, rng: EntropySource) -> None:
        with self._lock:
            self._reg_secrets[id_] = rng(64)

    def reg_secret(self, id_: str) -> bytes:
        with self._lock:
            try:
                return self._reg_secrets[id_]
            except KeyError:
                raise StateError(f"no registration secret sealed for {id_!r}") from None

    def inspect_for_tests(self) -> dict:
        """Test-only: the key-center view an escrow attacker would hold."""
        with self._lock:
            return {
                "priv_matrix": self._priv_matrix,
                "kc_rho": self._kc_rho,
                "kc_rho_prime": self._kc_rho_prime,
                "kc_K": self._kc_k,
                "reg_secrets": dict(self._reg_secrets),
            }

    def export_encrypted(self, key: bytes, m: int, h: int) -> bytes:
        """Encrypted backup blob; the only export path for sealed material."""
        payload = json.dumps({
            "m": m,
            "h": h,
            "priv_matrix": self._priv_matrix.to_bytes().hex(),
            "kc_rho": self._kc_rho.hex(),
            "kc_rho_prime": self._kc_rho_prime.hex(),
            "kc_K": self._kc_k.hex(),
            "reg_secrets": {k: v.hex() for k, v in self._reg_secrets.items()},
        }).encode()
        nonce = secrets.token_bytes(12)
        return nonce + AESGCM(key).encrypt(nonce, payload, b"ipkpq-sealed-store")

    @classmethod
    def import_encrypted(cls, key: bytes, blob: bytes) -> "SealedStore":
        obj = json.loads(AESGCM(key).decrypt(blob[:12], blob[12:], b"ipkpq-sealed-store"))
        priv = SeedMatrixPriv.from_bytes(obj["m"], obj["h"], bytes.fromhex(obj["priv_matrix"]))
        return cls(
            priv,
            bytes.fromhex(obj["kc_rho"]),
            bytes.fromhex(obj["kc_rho_prime"]),
            bytes.fromhex(obj["kc_K"]),
            {k: bytes.fromhex(v) for k, v in obj["reg_secrets"].items()},
        )


class KeyCenter:
    """Single-writer authority over the sealed store, records, and File_PK."""

    def __init__(self, level: MlDsaLevel):
        self.level = level
        self.store: SealedStore | None = None
        self.pub_matrix: SeedMatrixPub | None = None
        self.file_pk: bytes | None = None
        self._log: list[RegistrationRecord] = []
        self._current: dict[str, RegistrationRecord] = {}
        self._lock = threading.RLock()

    # -- lifecycle -----------------------------------------------------

    def init(self, m: int, h: int, rng: EntropySource = secrets.token_bytes) -> None:
        with self._lock:
            if self.store is not None:
                raise StateError("key center is already initialized")
            self.store, self.pub_matrix = SealedStore.generate(m, h, rng)
            header = pk_directory.FilePkHeader(self.level, m, h)
            self.file_pk = pk_directory.create(header, self.pub_matrix)

    def _require_init(self) -> None:
        if self.store is None:
            raise StateError("key center is not initialized")

    # -- registration --------------------------------------------------

    def register(self, attributes: str, id_: str, valid_from: datetime,
                 valid_to: datetime,
                 rng: EntropySource = secrets.token_bytes) -> RegistrationRecord:
        self._require_init()
        validate_identity(id_)
        if valid_from >= valid_to:
            raise ParameterError("valid_from must precede valid_to")
        with self._lock:
            existing = self._current.get(id_)
            if existing is not None and existing.status != STATUS_REVOKED:
                raise ConflictError(f"{id_!r} already has an active registration")
            record = RegistrationRecord(attributes, id_, None, valid_from, valid_to)
            self.store.new_reg_secret(id_, rng)
            self._append(record)
            return record

    def renew(self, id_: str, new_valid_to: datetime,
              rng: EntropySource = secrets.token_bytes) -> RegistrationRecord:
        """Open a re-key window: fresh registration secret, extended validity."""
        self._require_init()
        with self._lock:
            record = self._lookup(id_)
            if record.status == STATUS_REVOKED:
                raise StateError(f"{id_!r} is revoked; register anew instead")
            if new_valid_to <= record.valid_from:
                raise ParameterError("renewed validity must extend past valid_from")
            self.store.new_reg_secret(id_, rng)
            updated = replace(record, status=STATUS_RENEWING, valid_to=new_valid_to)
            self._append(updated)
            return updated

    def revoke(self, id_: str) -> RegistrationRecord:
        self._require_init()
        with self._lock:
            record = self._lookup(id_)
            updated = replace(record, status=STATUS_REVOKED)
            self._append(updated)
            return updated

    def record(self, id_: str) -> RegistrationRecord | None:
        with self._lock:
            return self._current.get(id_)

    def _lookup(self, id_: str) -> RegistrationRecord:
        record = self._current.get(id_)
        if record is None:
            raise StateError(f"unknown id {id_!r}")
        return record

    def _append(self, record: RegistrationRecord) -> None:
        self._log.append(record)
        self._current[record.id] = record

    # -- protocol hooks (called by the keygen protocol) ------------------

    def keygen_allowed(self, id_: str) -> RegistrationRecord:
        record = self._lookup(id_)
        if record.status not in (STATUS_REGISTERED, STATUS_RENEWING):
            raise StateError(
                f"{id_!r} is {record.status}; key generation needs a fresh or "
                f"renewing registration")
        return record

    def finalize_r(self, id_: str, r_value: bytes) -> None:
        with self._lock:
            record = self._lookup(id_)
            self._append(replace(record, R=r_value))

    def commit_pk(self, id_: str, pk: bytes) -> None:
        with self._lock:
            record = self._lookup(id_)
            self.file_pk = pk_directory.append_record(self.file_pk, id_, pk)
            self._append(replace(record, status=STATUS_ACTIVE))

    # -- publication -----------------------------------------------------

    def publish_file_pk(self) -> bytes:
        self._require_init()
        with self._lock:
            return self.file_pk

    def publish_registration_table(self) -> str:
        """JSON-lines log; sealed registration secrets are not part of it."""
        with self._lock:
            return "\n".join(rec.to_json() for rec in self._log) + ("\n" if self._log else "")

    def registration_table(self) -> RegistrationTable:
        with self._lock:
            return RegistrationTable(self._current)

    # -- persistence -----------------------------------------------------

    _SEAL_KEY_FILE = "hsm.key"
    _SEALED_FILE = "sealed.bin"
    _FILE_PK = "file_pk.bin"
    _REG_TABLE = "registration_table.jsonl"
    _META = "center.json"

    def save(self, directory: str | Path) -> None:
        self._require_init()
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        key_path = directory / self._SEAL_KEY_FILE
        if key_path.exists():
            key = bytes.fromhex(key_path.read_text().strip())
        else:
            key = secrets.token_bytes(32)
            key_path.write_text(key.hex() + "\n")
            os.chmod(key_path, 0o600)
        with self._lock:
            (directory / self._SEALED_FILE).write_bytes(
                self.store.export_encrypted(key, self.pub_matrix.m, self.pub_matrix.h))
            (directory / self._FILE_PK).write_bytes(self.file_pk)
            (directory / self._REG_TABLE).write_text(self.publish_registration_table())
            (directory / self._META).write_text(json.dumps({
                "level": self.level.number,
                "m": self.pub_matrix.m,
                "h": self.pub_matrix.h,
            }) + "\n")

    @classmethod
    def load(cls, directory: str | Path) -> "KeyCenter":
        directory = Path(directory)
        meta = json.loads((directory / cls._META).read_text())
        center = cls(LEVELS[meta["level"]])
        key = bytes.fromhex((directory / cls._SEAL_KEY_FILE).read_text().strip())
        center.store = SealedStore.import_encrypted(
            key, (directory / cls._SEALED_FILE).read_bytes())
        center.file_pk = (directory / cls._FILE_PK).read_bytes()
        center.pub_matrix = pk_directory.extract_matrix(center.file_pk)
        for line in (directory / cls._REG_TABLE).read_text().splitlines():
            if line.strip():
                center._append(RegistrationRecord.from_json(line))
        return center

    @classmethod
    def exists(cls, directory: str | Path) -> bool:
        return (Path(directory) / cls._META).exists()


def init_center(m: int, h: int, level: MlDsaLevel | None = None,
                rng: EntropySource = secrets.token_bytes) -> KeyCenter:
    """Generate matrices, seal the private side, start an empty File_PK."""
    from .mldsa.params import L44

    center = KeyCenter(level or L44)
    center.init(m, h, rng)
    return center
