"""Backend switch for the compiled kernels.

Set ``GAUSSNORM_DISABLE_NUMBA=1`` before import to force the pure-numpy
kernels even when numba is installed.
"""

import os

ENV_FLAG = "GAUSSNORM_DISABLE_NUMBA"


def numba_disabled():
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not numba_disabled()
