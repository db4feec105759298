"""Dense state-vector kernels.

Two interchangeable backends are provided: numba-compiled loops and a
vectorised numpy path. The active one is chosen at import time; set
``SPINQNET_DISABLE_NUMBA=1`` to force numpy (also used automatically
when numba is not importable).

All kernels operate on 2-D complex arrays of shape ``(dim, ncols)`` so the
same code serves a single state (one column) and a full operator (one
column per basis vector). Bit ``j`` of a row index is qubit ``j``.
"""

import os
import types

import numpy as np

_DISABLED = os.environ.get("SPINQNET_DISABLE_NUMBA", "").strip().lower() in (
    "1", "true", "yes", "on",
)

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    numba = None
    HAS_NUMBA = False


# ---------------------------------------------------------------------------
# numpy implementations

def _np_apply_1q(psi, u, t):
    dim, m = psi.shape
    view = psi.reshape(dim >> (t + 1), 2, 1 << t, m)
    view[...] = np.einsum("ab,xbyc->xayc", u, view)


def _np_apply_2q(psi, u, t0, t1):
    # u's own basis index is b0 + 2*b1, with b0 the bit of t0
    dim, m = psi.shape
    n = dim.bit_length() - 1
    tensor = psi.reshape((2,) * n + (m,))
    ax0, ax1 = n - 1 - t0, n - 1 - t1
    u4 = u.reshape(2, 2, 2, 2)  # (out_b1, out_b0, in_b1, in_b0)
    moved = np.tensordot(u4, tensor, axes=((2, 3), (ax1, ax0)))
    moved = np.moveaxis(moved, (0, 1), (ax1, ax0))
    psi[...] = moved.reshape(dim, m)


def _np_marginal(psi, targets):
    dim = psi.shape[0]
    weights = np.abs(psi[:, 0]) ** 2
    idx = np.arange(dim)
    key = np.zeros(dim, dtype=np.int64)
    for pos, t in enumerate(targets):
        key |= ((idx >> t) & 1) << pos
    return np.bincount(key, weights=weights, minlength=1 << len(targets))


def _np_project(psi, targets, outcome):
    dim = psi.shape[0]
    idx = np.arange(dim)
    keep = np.ones(dim, dtype=bool)
    for pos, t in enumerate(targets):
        keep &= ((idx >> t) & 1) == ((outcome >> pos) & 1)
    psi[~keep, :] = 0.0


def _np_diag_phase(psi, phases):
    psi *= phases[:, None]


numpy_kernels = types.SimpleNamespace(
    name="numpy",
    apply_1q=_np_apply_1q,
    apply_2q=_np_apply_2q,
    marginal=_np_marginal,
    project=_np_project,
    diag_phase=_np_diag_phase,
)


# ---------------------------------------------------------------------------
# numba implementations

if HAS_NUMBA:
    @numba.njit(cache=True)
    def _nb_apply_1q(psi, u, t):
        dim, m = psi.shape
        bit = 1 << t
        u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
        for i in range(dim):
            if i & bit:
                continue
            j = i | bit
            for c in range(m):
                a0 = psi[i, c]
                a1 = psi[j, c]
                psi[i, c] = u00 * a0 + u01 * a1
                psi[j, c] = u10 * a0 + u11 * a1

    @numba.njit(cache=True)
    def _nb_apply_2q(psi, u, t0, t1):
        dim, m = psi.shape
        b0 = 1 << t0
        b1 = 1 << t1
        idx = np.empty(4, dtype=np.int64)
        amp = np.empty(4, dtype=np.complex128)
        for i in range(dim):
            if (i & b0) or (i & b1):
                continue
            idx[0] = i
            idx[1] = i | b0
            idx[2] = i | b1
            idx[3] = i | b0 | b1
            for c in range(m):
                for r in range(4):
                    amp[r] = psi[idx[r], c]
                for r in range(4):
                    acc = 0j
                    for s in range(4):
                        acc += u[r, s] * amp[s]
                    psi[idx[r], c] = acc

    @numba.njit(cache=True)
    def _nb_marginal(psi, targets):
        dim = psi.shape[0]
        k = targets.shape[0]
        out = np.zeros(1 << k, dtype=np.float64)
        for i in range(dim):
            a = psi[i, 0]
            w = a.real * a.real + a.imag * a.imag
            if w == 0.0:
                continue
            key = 0
            for pos in range(k):
                key |= ((i >> targets[pos]) & 1) << pos
            out[key] += w
        return out

    @numba.njit(cache=True)
    def _nb_project(psi, targets, outcome):
        dim, m = psi.shape
        k = targets.shape[0]
        for i in range(dim):
            for pos in range(k):
                if ((i >> targets[pos]) & 1) != ((outcome >> pos) & 1):
                    for c in range(m):
                        psi[i, c] = 0.0
                    break

    @numba.njit(cache=True)
    def _nb_diag_phase(psi, phases):
        dim, m = psi.shape
        for i in range(dim):
            p = phases[i]
            for c in range(m):
                psi[i, c] *= p

    numba_kernels = types.SimpleNamespace(
        name="numba",
        apply_1q=_nb_apply_1q,
        apply_2q=_nb_apply_2q,
        marginal=_nb_marginal,
        project=_nb_project,
        diag_phase=_nb_diag_phase,
    )
else:  # pragma: no cover
    numba_kernels = None


def available_backends():
    names = ["numpy"]
    if numba_kernels is not None:
        names.append("numba")
    return names


def get_backend(name=None):
    """Return a kernel namespace by name, or the active one."""
    if name is None:
        return active
    if name == "numba":
        if numba_kernels is None:
            raise RuntimeError("numba backend requested but numba is not installed")
        return numba_kernels
    if name == "numpy":
        return numpy_kernels
    raise ValueError(f"unknown kernel backend {name!r}")


active = numpy_kernels if (_DISABLED or numba_kernels is None) else numba_kernels
