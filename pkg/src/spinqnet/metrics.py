"""Entanglement and polarisation measures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import core
from .core import PureState, QubitRef
from .errors import DegenerateSamplesError, DimensionMismatchError, InvalidStateError

EIG_CLIP = 1e-10


def _spectrum(rho) -> np.ndarray:
    w = np.linalg.eigvalsh(rho)
    if np.min(w) < -EIG_CLIP:
        raise InvalidStateError(f"density matrix has eigenvalue {np.min(w):.3g} < 0")
    return np.clip(w, 0.0, None)


def von_neumann_entropy(rho) -> float:
    """Base-2 entropy; 0·log 0 := 0."""
    w = _spectrum(np.asarray(rho, dtype=np.complex128))
    w = w[w > 0.0]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def entanglement_entropy(state: PureState, subset: Sequence[QubitRef]) -> float:
    """Entropy (ebits) of ``subset`` against the rest of the register."""
    return von_neumann_entropy(core.reduced_density(state, subset))


def schmidt_coefficients(state: PureState, subset: Sequence[QubitRef]) -> np.ndarray:
    w = np.linalg.eigvalsh(core.reduced_density(state, subset))[::-1]
    return np.sqrt(np.clip(w, 0.0, None))


def schmidt_rank(state: PureState, subset: Sequence[QubitRef], tol: float = 1e-10) -> int:
    return int(np.sum(schmidt_coefficients(state, subset) > tol))


def factor_out(state: PureState, keep: Sequence[QubitRef], tol: float = 1e-9) -> np.ndarray:
    """Pure state vector of ``keep`` when the register is a product across that cut.

    Basis bit ``i`` of the result is ``keep[i]``. The phase is fixed so the
    rest of the register carries a real positive leading amplitude.
    """
    keep = list(keep)
    flats = core._keep_flats(state, keep)
    n = state.n_qubits
    tensor = state.amplitudes.reshape((2,) * n)
    kept_axes = [n - 1 - q for q in reversed(flats)]
    rest_axes = [a for a in range(n) if a not in kept_axes]
    mat = np.transpose(tensor, kept_axes + rest_axes).reshape(1 << len(flats), -1)
    _, s, vh = np.linalg.svd(mat)
    if s.size > 1 and s[1] > tol:
        raise InvalidStateError("state is entangled across the requested cut")
    rest = vh[0].conj()  # the rest of the register, as a ket
    j = int(np.argmax(np.abs(rest)))
    rest = rest * np.exp(-1j * np.angle(rest[j]))
    vec = mat @ rest.conj()
    return vec / np.linalg.norm(vec)


# ---------------------------------------------------------------------------
# concurrence

_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def check_density(rho, tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise InvalidStateError("density matrix does not have unit trace")
    if np.min(np.linalg.eigvalsh(rho)) < -tol:
        raise InvalidStateError("density matrix is not positive semidefinite")
    return rho


CONCURRENCE_EIG_FLOOR = 1e-14


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The λ_i (square roots of the spectrum of ρ·ρ̃) are computed as the
    singular values of τ = Wᵀ(σy⊗σy)W with ρ = W W†. Eigenvalues of ρ below
    ``CONCURRENCE_EIG_FLOOR`` are treated as zero; otherwise their square
    roots (~1e-8 from roundoff) would leak into the small λ_i.
    """
    rho = check_density(rho)
    if rho.shape != (4, 4):
        raise DimensionMismatchError("concurrence needs a 4x4 density matrix")
    w, v = np.linalg.eigh(rho)
    w = np.where(w > CONCURRENCE_EIG_FLOOR, w, 0.0)
    W = v * np.sqrt(w)
    lam = np.linalg.svd(W.T @ _YY @ W, compute_uv=False)
    return float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def pure_concurrence(amplitudes) -> float:
    a, b, c, d = np.asarray(amplitudes, dtype=np.complex128)
    return float(2 * abs(a * d - b * c))


# ---------------------------------------------------------------------------
# polarisation fit

@dataclass(frozen=True)
class PolarizationFit:
    degree: float
    theta0: float
    residual: float
    offset: float
    amplitude: float

    def predict(self, theta):
        return self.offset + self.amplitude * np.cos(np.asarray(theta) - self.theta0) ** 2


def _linear_fit(theta, p, theta0):
    design = np.column_stack([np.ones_like(theta), np.cos(theta - theta0) ** 2])
    coef, *_ = np.linalg.lstsq(design, p, rcond=None)
    res = p - design @ coef
    return coef, float(res @ res)


def fit_polarization(samples: Sequence[tuple[float, float]], grid: int = 90) -> PolarizationFit:
    """Least-squares fit of ``p(θ) = a + b·cos²(θ - θ0)`` with ``b >= 0``.

    θ0 is located by a coarse scan followed by golden-section refinement;
    ``(a, b)`` are solved linearly at every trial θ0. ``residual`` is the RMS
    deviation and θ0 is reported in [0, π).
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 4:
        raise DegenerateSamplesError("need at least 4 (theta, p) samples")
    theta, p = arr[:, 0], arr[:, 1]
    distinct = np.unique(np.round(np.mod(theta, math.pi), 12))
    if distinct.size < 3:
        raise DegenerateSamplesError("need at least 3 distinct angles (mod pi)")

    def sse(t0):
        return _linear_fit(theta, p, t0)[1]

    # the loss has period π/2 (b changes sign), so scan one period
    step = (math.pi / 2) / grid
    trial = np.arange(grid) * step
    losses = np.array([sse(t) for t in trial])
    best = float(trial[int(np.argmin(losses))])
    try:
        opt = minimize_scalar(sse, bracket=(best - step, best, best + step), method="golden",
                              options={"xtol": 1e-12})
        if opt.fun <= sse(best):
            best = float(opt.x)
    except ValueError:
        pass  # flat loss (e.g. constant data); keep the scan minimum
    coef, _ = _linear_fit(theta, p, best)
    if coef[1] < 0:
        best += math.pi / 2
        coef, _ = _linear_fit(theta, p, best)
    a, b = float(coef[0]), float(coef[1])
    res = p - (a + b * np.cos(theta - best) ** 2)
    p_max, p_min = a + b, a
    denom = p_max + p_min
    degree = (p_max - p_min) / denom if denom > 0 else 0.0
    return PolarizationFit(
        degree=float(min(max(degree, 0.0), 1.0)),
        theta0=_mod_pi(best),
        residual=float(np.sqrt(np.mean(res ** 2))),
        offset=a,
        amplitude=b,
    )


def _mod_pi(angle: float) -> float:
    """Representative in [0, π); guards against -ε mapping to π by rounding."""
    t = float(np.mod(angle, math.pi))
    return 0.0 if t >= math.pi else t


def angle_distance_mod_pi(a: float, b: float) -> float:
    d = math.remainder(a - b, math.pi)
    return abs(d)
