"""Exception types shared across the simulator."""


class KhalasiError(Exception):
    """Base class for all simulator errors."""


class DomainError(KhalasiError):
    """A position or time was queried outside a field's valid domain."""


class GridLoadError(KhalasiError):
    """A gridded-field file is malformed, truncated, or non-finite."""


class ReconstructionError(KhalasiError):
    """Gram factorization failed even after jitter escalation."""


class SpawnError(KhalasiError):
    """A spawn layout could not produce a valid start/goal pair."""


class CalibrationError(KhalasiError):
    """A calibration routine failed to converge or cross the domain."""


class ProtocolError(KhalasiError):
    """An external policy violated the wire protocol."""


class ConfigError(KhalasiError):
    """A config file or override contained unknown or invalid keys."""
