"""Global configuration: dimension bounds for exhaustive basis enumeration."""

from __future__ import annotations

import os

# Basis enumeration is refused above this composite dimension unless the
# caller passes an explicit bound.  Overridable via the BCT_MAX_DIM env var.
DEFAULT_MAX_DIM = 4096

# The universal-processor systems are much larger than anything a user
# enumerates by hand (dims (3,3) already need a 7776-label basis), so the
# dilation module carries its own default.
DILATION_MAX_DIM = 262144


def max_dim() -> int:
    env = os.environ.get("BCT_MAX_DIM")
    if env is not None:
        value = int(env)
        if value <= 0:
            raise ValueError("BCT_MAX_DIM must be positive")
        return value
    return DEFAULT_MAX_DIM
