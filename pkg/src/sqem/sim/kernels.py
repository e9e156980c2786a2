"""Kernel dispatch: numba-compiled when available, numpy otherwise.

Set ``SQEM_USE_NUMBA=0`` before import to force the numpy path.
"""

import logging
import os

from . import _kernels_numpy

log = logging.getLogger(__name__)

_FLAG = os.environ.get("SQEM_USE_NUMBA", "1").strip().lower()

if _FLAG in ("0", "false", "no", "off"):
    _impl = _kernels_numpy
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as _impl

        BACKEND = "numba"
    except ImportError:  # numba missing or broken
        log.info("numba unavailable, using numpy kernels")
        _impl = _kernels_numpy
        BACKEND = "numpy"

apply_unitary_1q = _impl.apply_unitary_1q
apply_unitary_2q = _impl.apply_unitary_2q
depolarize_1q = _impl.depolarize_1q
depolarize_2q = _impl.depolarize_2q
pauli_channel_1q = _impl.pauli_channel_1q
readout_flip = _impl.readout_flip
bitwise_marginals = _impl.bitwise_marginals
hellinger_dense = _impl.hellinger_dense
recombine_update = _impl.recombine_update
recombine_loop = _impl.recombine_loop
