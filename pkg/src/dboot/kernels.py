"""Backend selection for the numeric inner loops.

The compiled extension ``dboot._ckernels`` is preferred.  Setting the
environment variable ``DBOOT_PURE_PYTHON=1`` before import forces the numpy
fallback; so does a missing or broken build.  Both backends expose the same
four functions:

``grad_rows(X, y, theta, family)``
    per-datum gradient rows, shape ``(n, d)``.
``block_mean_gradients(X, y, theta, family, block)``
    mean gradient of each consecutive block of rows, shape ``(n // block, d)``;
    a block's result does not depend on which other blocks are present.
``weighted_moments(X, y, w, theta, family)``
    weighted mean loss, gradient and (exactly symmetric) Hessian.
``multiplier_stats(E, Q, norm, coord)``
    for each row ``e_b`` of ``E``, the norm of ``Q @ e_b``.
"""

import os

import numpy as np

from . import _pykernels

LINEAR = _pykernels.LINEAR
LOGISTIC = _pykernels.LOGISTIC
NORM_SUP = _pykernels.NORM_SUP
NORM_COORD = _pykernels.NORM_COORD
NORM_L2 = _pykernels.NORM_L2

_impl = _pykernels
BACKEND = "python"
if os.environ.get("DBOOT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def grad_rows(X, y, theta, family, *, impl=None):
    impl = impl or _impl
    return impl.grad_rows(_f64(X), _f64(y), _f64(theta), int(family))


def block_mean_gradients(X, y, theta, family, block, *, impl=None):
    impl = impl or _impl
    return impl.block_mean_gradients(_f64(X), _f64(y), _f64(theta), int(family), int(block))


def weighted_moments(X, y, w, theta, family, *, impl=None):
    impl = impl or _impl
    X = _f64(X)
    w = np.ones(X.shape[0]) if w is None else _f64(w)
    return impl.weighted_moments(X, _f64(y), w, _f64(theta), int(family))


def multiplier_stats(E, Q, norm, coord=0, *, impl=None):
    impl = impl or _impl
    return impl.multiplier_stats(_f64(E), _f64(Q), int(norm), int(coord))


def implementations():
    """Return ``{name: module}`` for every backend importable right now."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
