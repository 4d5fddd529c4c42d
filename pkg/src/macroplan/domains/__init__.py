"""Benchmark domains: generative models plus their feature and action maps."""


class InvalidAction(ValueError):
    """Action id outside the domain's action space."""


class InvalidAtom(ValueError):
    """Atom does not name any action of the domain."""


def discretize_percent(fraction: float) -> int:
    """Map a fraction in [0,1] to the nearest multiple of 10 (half rounds up)."""
    return int(fraction * 10.0 + 0.5) * 10
