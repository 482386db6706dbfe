"""Identity-based ML-DSA public-key management and a chain-free RPKI pipeline.

The pieces, bottom up:

    mldsa             FIPS 204 signatures with a seed-component keygen entry
    seed_fabric       seed matrices and the identity-to-seed mapping
    key_center        registry authority: sealed store, registrations, File_PK
    keygen_protocol   two-party collaborative key generation
    pk_directory      the published directory file (matrix + key records)
    pk_resolver       self-service key resolution, offline and online
    rpki_objects      RC/ROA/manifest model and issuance in both modes
    chain_validator   relying-party validation with op/byte accounting
    bench             generation/verification/overhead benchmark harness
    cli               the ``ipkpq`` command-line tool
"""

from .errors import (
    AuthorizationError,
    ConflictError,
    DecodeError,
    IpkpqError,
    ParameterError,
    StateError,
    TransportError,
)

__version__ = "0.1.0"

__all__ = [
    "AuthorizationError",
    "ConflictError",
    "DecodeError",
    "IpkpqError",
    "ParameterError",
    "StateError",
    "TransportError",
    "__version__",
]
