"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """A configuration value violates its documented constraints."""


class SegmentationFault(RuntimeError):
    """A trace reference fell outside the core's segment and all shared regions.

    This signals a workload-generation bug, not a simulated program error.
    """


class CacheUsageError(RuntimeError):
    """An operation was applied to a cache kind that does not support it."""


class MailboxOpenError(KeyError):
    """The requested mailbox name is not registered in the system config."""


class CalibrationError(RuntimeError):
    """Calibration could not produce parameters meeting its contract."""


class ResourceFitRefusal(RuntimeError):
    """A simulation was requested for a config the budget cannot accommodate."""
