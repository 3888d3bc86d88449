"""Numerical tolerances.

The active set lives in a :class:`contextvars.ContextVar`, so overrides
made with :func:`use_tolerances` stay local to the calling thread or task.
"""

import contextlib
import contextvars
import dataclasses


@dataclasses.dataclass(frozen=True)
class Tolerances:
    pmf: float = 1e-9      # distribution validation, water-level snapping
    num: float = 1e-12     # clamping of information quantities
    eq: float = 1e-9       # equality of conditional probabilities
    lp: float = 1e-9       # LP feasibility / residuals
    pivot: float = 1e-11   # simplex pivot eligibility
    endpoint: float = 1e-9  # I(Z;Y) = I(X;Y) test in the greedy chain


_current = contextvars.ContextVar("uptradeoff_tolerances", default=Tolerances())


def tol():
    """Return the active :class:`Tolerances`."""
    return _current.get()


@contextlib.contextmanager
def use_tolerances(**overrides):
    token = _current.set(dataclasses.replace(_current.get(), **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
