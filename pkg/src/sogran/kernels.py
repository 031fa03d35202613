"""Numeric kernels behind the SOM and fuzzy-system hot loops.

Two interchangeable backends compute the same arithmetic:

* ``numba`` -- explicit loops compiled with ``@njit`` (default when numba
  is importable),
* ``numpy`` -- vectorized fallback with no compilation step.

Selection happens once at import time through the ``SOGRAN_BACKEND``
environment variable: ``auto`` (default), ``numba`` (require numba, raise
if missing) or ``numpy`` (force the fallback). ``benchmarks/bench_kernels.py``
times the two paths against each other.
"""

from __future__ import annotations

import os

import numpy as np

BACKEND_ENV_VAR = "SOGRAN_BACKEND"


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _assign_bmus_numpy(codebook, data):
    diff = data[:, None, :] - codebook[None, :, :]
    d2 = (diff * diff).sum(axis=2)
    idx = np.argmin(d2, axis=1)
    return idx.astype(np.int64), d2[np.arange(data.shape[0]), idx]


def _som_epoch_numpy(codebook, data, order, grid_d2, t0, time_scale, lr0, sigma0):
    for s in range(order.shape[0]):
        x = data[order[s]]
        decay = np.exp(-(t0 + s) / time_scale)
        lr = lr0 * decay
        sigma = sigma0 * decay
        delta = codebook - x
        d2 = (delta * delta).sum(axis=1)
        best = int(np.argmin(d2))
        h = np.exp(-grid_d2[:, best] / (2.0 * sigma * sigma))
        codebook += (lr * h)[:, None] * (x - codebook)


def _fis_firing_numpy(centers, widths, x_rows):
    diff = x_rows[:, None, :] - centers[None, :, :]
    expo = (diff * diff / (2.0 * widths * widths)[None, :, :]).sum(axis=2)
    return np.exp(-expo)


def _fis_premise_gradient_numpy(centers, widths, coeffs, x_rows, targets):
    n = x_rows.shape[0]
    firing = _fis_firing_numpy(centers, widths, x_rows)
    linear = x_rows @ coeffs[:, 1:].T + coeffs[:, 0]
    total = firing.sum(axis=1)
    live = total > 0.0
    safe_total = np.where(live, total, 1.0)
    out = (firing * linear).sum(axis=1) / safe_total
    err = np.where(live, out - targets, 0.0)
    # per-sample, per-rule factor shared by both parameter gradients
    amp = (err * 2.0 / n)[:, None] * (linear - out[:, None]) * firing / safe_total[:, None]
    diff = x_rows[:, None, :] - centers[None, :, :]
    grad_c = np.einsum("kr,kri->ri", amp, diff / (widths * widths)[None, :, :])
    grad_w = np.einsum("kr,kri->ri", amp, diff * diff / (widths ** 3)[None, :, :])
    return grad_c, grad_w


# ---------------------------------------------------------------------------
# loop bodies (compiled by numba when that backend is active)
# ---------------------------------------------------------------------------

def _assign_bmus_loops(codebook, data):
    n = data.shape[0]
    n_units = codebook.shape[0]
    dim = codebook.shape[1]
    idx = np.empty(n, dtype=np.int64)
    dist = np.empty(n, dtype=np.float64)
    for k in range(n):
        best = 0
        best_d2 = np.inf
        for i in range(n_units):
            acc = 0.0
            for j in range(dim):
                diff = data[k, j] - codebook[i, j]
                acc += diff * diff
            if acc < best_d2:
                best_d2 = acc
                best = i
        idx[k] = best
        dist[k] = best_d2
    return idx, dist


def _som_epoch_loops(codebook, data, order, grid_d2, t0, time_scale, lr0, sigma0):
    n_units = codebook.shape[0]
    dim = codebook.shape[1]
    for s in range(order.shape[0]):
        k = order[s]
        decay = np.exp(-(t0 + s) / time_scale)
        lr = lr0 * decay
        sigma = sigma0 * decay
        best = 0
        best_d2 = np.inf
        for i in range(n_units):
            acc = 0.0
            for j in range(dim):
                diff = codebook[i, j] - data[k, j]
                acc += diff * diff
            if acc < best_d2:
                best_d2 = acc
                best = i
        denom = 2.0 * sigma * sigma
        for i in range(n_units):
            a = lr * np.exp(-grid_d2[i, best] / denom)
            for j in range(dim):
                codebook[i, j] += a * (data[k, j] - codebook[i, j])


def _fis_firing_loops(centers, widths, x_rows):
    n = x_rows.shape[0]
    n_rules = centers.shape[0]
    dim = centers.shape[1]
    firing = np.empty((n, n_rules), dtype=np.float64)
    for k in range(n):
        for r in range(n_rules):
            acc = 0.0
            for i in range(dim):
                diff = x_rows[k, i] - centers[r, i]
                acc += diff * diff / (2.0 * widths[r, i] * widths[r, i])
            firing[k, r] = np.exp(-acc)
    return firing


def _fis_premise_gradient_loops(centers, widths, coeffs, x_rows, targets):
    n = x_rows.shape[0]
    n_rules = centers.shape[0]
    dim = centers.shape[1]
    grad_c = np.zeros((n_rules, dim), dtype=np.float64)
    grad_w = np.zeros((n_rules, dim), dtype=np.float64)
    firing = np.empty(n_rules, dtype=np.float64)
    linear = np.empty(n_rules, dtype=np.float64)
    for k in range(n):
        total = 0.0
        weighted = 0.0
        for r in range(n_rules):
            acc = 0.0
            f = coeffs[r, 0]
            for i in range(dim):
                diff = x_rows[k, i] - centers[r, i]
                acc += diff * diff / (2.0 * widths[r, i] * widths[r, i])
                f += coeffs[r, i + 1] * x_rows[k, i]
            firing[r] = np.exp(-acc)
            linear[r] = f
            total += firing[r]
            weighted += firing[r] * f
        if total <= 0.0:
            continue
        out = weighted / total
        err = out - targets[k]
        for r in range(n_rules):
            amp = err * 2.0 / n * (linear[r] - out) * firing[r] / total
            for i in range(dim):
                diff = x_rows[k, i] - centers[r, i]
                w = widths[r, i]
                grad_c[r, i] += amp * diff / (w * w)
                grad_w[r, i] += amp * diff * diff / (w * w * w)
    return grad_c, grad_w


_LOOP_BODIES = {
    "assign_bmus": _assign_bmus_loops,
    "som_epoch": _som_epoch_loops,
    "fis_firing": _fis_firing_loops,
    "fis_premise_gradient": _fis_premise_gradient_loops,
}

_NUMPY_IMPLS = {
    "assign_bmus": _assign_bmus_numpy,
    "som_epoch": _som_epoch_numpy,
    "fis_firing": _fis_firing_numpy,
    "fis_premise_gradient": _fis_premise_gradient_numpy,
}

_numba_cache: dict | None = None


def compile_numba_kernels():
    """Compile (once) and return the numba versions of every kernel.

    Raises ImportError if numba is not installed. Used by the active
    backend at import time and by the benchmark/agreement tests, which
    need both paths regardless of the configured backend.
    """
    global _numba_cache
    if _numba_cache is None:
        from numba import njit

        _numba_cache = {
            name: njit(cache=True)(fn) for name, fn in _LOOP_BODIES.items()
        }
    return _numba_cache


def _select_backend() -> str:
    choice = os.environ.get(BACKEND_ENV_VAR, "auto").strip().lower() or "auto"
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"{BACKEND_ENV_VAR} must be 'auto', 'numba' or 'numpy', got {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _select_backend()

if BACKEND == "numba":
    _active = compile_numba_kernels()
else:
    _active = _NUMPY_IMPLS

assign_bmus = _active["assign_bmus"]
som_epoch = _active["som_epoch"]
fis_firing = _active["fis_firing"]
fis_premise_gradient = _active["fis_premise_gradient"]


def quantization_error(codebook, data) -> float:
    """Mean squared distance from each data row to its best matching unit."""
    _, d2 = assign_bmus(codebook, data)
    return float(np.mean(d2))
