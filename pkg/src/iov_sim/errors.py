"""Exception types shared across the simulator."""


class SimError(Exception):
    """Base class for simulator errors."""


class ConfigurationError(SimError):
    """A parameter or config file violates a documented invariant."""


class NodeNotFoundError(SimError):
    """A node id does not exist in the topology."""


class InvalidLinkError(SimError):
    """A link quantity was requested for a geometrically invalid link."""


class DeadLinkError(SimError):
    """A link with zero capacity cannot carry traffic."""


class MetricDomainError(SimError):
    """An input to the hop metric fell outside its contracted domain."""
