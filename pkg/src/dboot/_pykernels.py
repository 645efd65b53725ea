"""Numpy implementations of the hot loops, used when the extension is absent."""

import numpy as np
from scipy.special import expit

LINEAR = 0
LOGISTIC = 1
NORM_SUP = 0
NORM_COORD = 1
NORM_L2 = 2


def _log1pexp(z):
    return np.logaddexp(0.0, z)


def grad_rows(X, y, theta, family):
    z = X @ theta
    r = z - y if family == LINEAR else expit(z) - y
    return X * r[:, None]


def weighted_moments(X, y, w, theta, family):
    z = X @ theta
    wn = w / w.sum()
    if family == LINEAR:
        r = z - y
        with np.errstate(over="ignore"):  # inf loss at a diverged iterate, as in the C kernel
            loss = float(wn @ (0.5 * r * r))
        c = wn
    else:
        s = expit(z)
        r = s - y
        loss = float(wn @ (_log1pexp(z) - y * z))
        c = wn * s * (1.0 - s)
    grad = X.T @ (wn * r)
    hess = (X * c[:, None]).T @ X
    hess = 0.5 * (hess + hess.T)
    return loss, grad, hess


def multiplier_stats(E, Q, norm, coord):
    V = E @ Q.T
    if norm == NORM_COORD:
        return np.abs(V[:, coord])
    if norm == NORM_L2:
        return np.sqrt(np.einsum("ij,ij->i", V, V))
    return np.abs(V).max(axis=1)


def block_mean_gradients(X, y, theta, family, block):
    n = X.shape[0]
    if block < 1 or n % block:
        raise ValueError("block size must divide the number of rows")
    rows = grad_rows(X, y, theta, family)
    return np.array([rows[s:s + block].sum(axis=0) / block for s in range(0, n, block)]).reshape(n // block, X.shape[1])
