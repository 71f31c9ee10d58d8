"""Discrete-time state-space surrogate mapping (T_ref, n_occ, T_ext) to power.

Identification fits an ARX model by linear least squares and realises it in
observer canonical form, so the state dimension equals the model order and
the three inputs share one denominator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import fractional_matrix_power
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import _json
from .exceptions import (
    ConstantTruth,
    InsufficientData,
    LengthMismatch,
    RankDeficient,
    StepMismatch,
    UnstableModel,
    ZeroScale,
)
from .timeseries import TimeSeries, Unit

__all__ = [
    "INPUT_LABELS",
    "StateSpaceModel",
    "FitReport",
    "StateSpaceRegressor",
    "simulate",
    "simulate_array",
    "identify",
    "r_squared",
    "nmae",
    "arx_to_state_space",
    "project_poles",
]

INPUT_LABELS = ("T_ref", "n_occ", "T_ext")
MODES = ("heating", "cooling")
POLE_RADIUS = 0.995


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """x(k+1) = A x(k) + B u(k);  P(k) = C x(k) + D u(k), with P in kW.

    ``u = (T_ref, n_occ, T_ext)``.  ``ts`` is the sampling step in minutes.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    ts: float
    mode: str = "heating"

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n) or n < 1:
            raise ValueError(f"A must be square, got shape {A.shape}")
        B = np.asarray(self.B, dtype=float).reshape(n, 3)
        C = np.asarray(self.C, dtype=float).reshape(n)
        D = np.asarray(self.D, dtype=float).reshape(3)
        for name, arr in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if float(self.ts) <= 0:
            raise ValueError("ts must be > 0 minutes")
        object.__setattr__(self, "ts", float(self.ts))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        rho = self.spectral_radius
        if rho >= 1.0:
            raise UnstableModel(f"spectral radius {rho:.6g} >= 1")

    @property
    def order(self):
        return self.A.shape[0]

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(np.linalg.eigvals(self.A))))

    def __eq__(self, other):
        if not isinstance(other, StateSpaceModel):
            return NotImplemented
        return (self.ts == other.ts and self.mode == other.mode
                and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in "ABCD"))

    def __hash__(self):
        return hash((self.ts, self.mode, self.A.tobytes(), self.B.tobytes()))

    def steady_state(self, u):
        """State at which a constant input ``u`` holds the model still."""
        u = np.asarray(u, dtype=float).reshape(3)
        return np.linalg.solve(np.eye(self.order) - self.A, self.B @ u)

    def resample(self, new_ts):
        """Rediscretise under zero-order-hold inputs.

        Integer multiples of ``ts`` are exact; other ratios go through a
        fractional matrix power and must stay real.
        """
        new_ts = float(new_ts)
        if new_ts == self.ts:
            return self
        ratio = new_ts / self.ts
        f = round(ratio)
        if f >= 1 and abs(ratio - f) < 1e-12:
            A_new = np.linalg.matrix_power(self.A, int(f))
        else:
            A_new = fractional_matrix_power(self.A, ratio)
            if np.max(np.abs(np.imag(A_new))) > 1e-9:
                raise StepMismatch(f"cannot rediscretise from {self.ts} to {new_ts} min: "
                                   "A has eigenvalues on the negative real axis")
            A_new = np.real(A_new)
        eye = np.eye(self.order)
        B_new = (eye - A_new) @ np.linalg.solve(eye - self.A, self.B)
        return StateSpaceModel(A_new, B_new, self.C, self.D, new_ts, self.mode)

    def to_dict(self):
        return {
            "order": self.order,
            "ts": self.ts,
            "mode": self.mode,
            "inputs": list(INPUT_LABELS),
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        n = int(d["order"])
        model = cls(
            A=np.asarray(d["A"], dtype=float).reshape(n, n),
            B=np.asarray(d["B"], dtype=float).reshape(n, 3),
            C=d["C"],
            D=d["D"],
            ts=d["ts"],
            mode=d.get("mode", "heating"),
        )
        return model

    def save(self, path):
        _json.dump(self.to_dict(), path)

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def simulate_array(model, U, x0=None, clip=True, return_state=False):
    """Run the recursion over an ``(N, 3)`` input array.

    With ``clip=False`` the raw linear output is returned (used by the
    linearity checks); the state itself is never clipped.
    """
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[1] != 3:
        raise LengthMismatch(f"inputs must have shape (N, 3), got {U.shape}")
    n = model.order
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float).reshape(n)
    BU = U @ model.B.T
    A = model.A
    X = np.empty((U.shape[0], n))
    if n == 1:
        a, xs = A[0, 0], x[0]
        col = BU[:, 0]
        for k in range(U.shape[0]):
            X[k, 0] = xs
            xs = a * xs + col[k]
        x = np.array([xs])
    else:
        for k in range(U.shape[0]):
            X[k] = x
            x = A @ x + BU[k]
    y = X @ model.C + U @ model.D
    if clip:
        y = np.maximum(y, 0.0)
    if return_state:
        return y, x
    return y


def simulate(model, inputs, x0=None):
    """Simulate over three aligned ``TimeSeries`` (T_ref, n_occ, T_ext).

    Returns a kW ``TimeSeries`` clipped at zero from below.
    """
    inputs = list(inputs)
    if len(inputs) != 3:
        raise LengthMismatch(f"expected 3 input series {INPUT_LABELS}, got {len(inputs)}")
    for label, s in zip(INPUT_LABELS, inputs):
        if s.step != model.ts:
            raise StepMismatch(f"{label} step {s.step} min != model ts {model.ts} min")
    if len({len(s) for s in inputs}) != 1:
        raise LengthMismatch(f"input lengths differ: {[len(s) for s in inputs]}")
    U = np.column_stack([s.values for s in inputs])
    y = simulate_array(model, U, x0)
    return TimeSeries(inputs[0].start, model.ts, y, Unit.KW)


# -- metrics -----------------------------------------------------------------

def _pair(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=float).ravel()
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    if y_true.shape != y_pred.shape:
        raise LengthMismatch(f"{y_true.size} true values vs {y_pred.size} predictions")
    return y_true, y_pred


def r_squared(y_true, y_pred):
    """Coefficient of determination, 1 - SSE/SST."""
    y_true, y_pred = _pair(y_true, y_pred)
    if y_true.size < 2:
        raise InsufficientData("R^2 needs at least two samples")
    sst = np.sum((y_true - y_true.mean()) ** 2)
    if sst == 0:
        raise ConstantTruth("R^2 is undefined for a constant reference signal")
    return float(1.0 - np.sum((y_true - y_pred) ** 2) / sst)


def nmae(y_true, y_pred):
    """Mean absolute error as a percentage of max |y_true|."""
    y_true, y_pred = _pair(y_true, y_pred)
    scale = np.max(np.abs(y_true)) if y_true.size else 0.0
    if scale == 0:
        raise ZeroScale("nMAE is undefined when every true value is zero")
    return float(100.0 * np.mean(np.abs(y_true - y_pred)) / scale)


# -- identification ------------------------------------------------------------

def arx_regressors(U, y, order):
    """Rows ``[-y(k-1) .. -y(k-n), u(k), u(k-1) .. u(k-n)]`` for k >= n."""
    N = len(y)
    n = order
    cols = [-y[n - i:N - i] for i in range(1, n + 1)]
    for i in range(0, n + 1):
        cols.extend(U[n - i:N - i, j] for j in range(3))
    return np.column_stack(cols), y[n:]


def arx_to_state_space(a, b, ts, mode="heating", check_stability=True):
    """Observer canonical realisation of ``A(q) y = B(q) u``.

    ``a`` holds ``a_1..a_n`` (leading 1 implied), ``b`` is ``(n+1, 3)`` with
    row i the input coefficients at lag i.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).reshape(-1, 3)
    n = a.size
    A = np.zeros((n, n))
    A[:, 0] = -a
    A[np.arange(n - 1), np.arange(1, n)] = 1.0
    B = b[1:] - np.outer(a, b[0])
    C = np.zeros(n)
    C[0] = 1.0
    if not check_stability:
        return A, B, C, b[0]
    return StateSpaceModel(A, B, C, b[0], ts, mode)


def project_poles(a, radius=POLE_RADIUS):
    """Pull roots of ``z^n + a_1 z^(n-1) + ... + a_n`` inside ``radius``.

    Angles are kept, so complex pairs stay conjugate.  Returns the new
    coefficients and whether anything moved.
    """
    a = np.asarray(a, dtype=float)
    roots = np.roots(np.concatenate(([1.0], a)))
    mags = np.abs(roots)
    outside = mags >= 1.0
    if not np.any(outside):
        return a.copy(), False
    roots = np.where(outside, radius * roots / np.where(mags == 0, 1, mags), roots)
    return np.real(np.poly(roots))[1:], True


def _check_excitation(Phi_u, tol=1e-8):
    norms = np.linalg.norm(Phi_u, axis=0)
    scaled = Phi_u / np.where(norms == 0, 1.0, norms)
    sv = np.linalg.svd(scaled, compute_uv=False)
    if sv[0] == 0 or sv[-1] < tol * sv[0]:
        rank = int(np.sum(sv > tol * max(sv[0], 1e-300)))
        raise RankDeficient(
            f"input regressors have numerical rank {rank} < {Phi_u.shape[1]}; "
            "the inputs are not exciting enough"
        )


@dataclass(frozen=True)
class FitReport:
    r2: float
    nmae_percent: float
    n_validation: int
    order: int
    projected: bool = False

    def to_dict(self):
        return {
            "r2": self.r2,
            "nmae_percent": self.nmae_percent,
            "n_validation": self.n_validation,
            "order": self.order,
            "projected": self.projected,
        }


class StateSpaceRegressor(RegressorMixin, BaseEstimator):
    """ARX least-squares identification wrapped as a scikit-learn regressor.

    ``X`` columns are (T_ref, n_occ, T_ext); ``y`` is power in kW.  ``predict``
    is a free run from the zero state, clipped at zero.

    Parameters
    ----------
    order : int, default=2
        Model order n (1, 2 or 3).
    ts : float, default=60
        Sampling step in minutes.
    mode : {"heating", "cooling"}
    pole_radius : float, default=0.995
        Unstable poles are moved radially onto this circle.
    """

    def __init__(self, order=2, ts=60.0, mode="heating", pole_radius=POLE_RADIUS):
        self.order = order
        self.ts = ts
        self.mode = mode
        self.pole_radius = pole_radius

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if X.shape[1] != 3:
            raise ValueError(f"expected 3 input columns {INPUT_LABELS}, got {X.shape[1]}")
        n = int(self.order)
        if n not in (1, 2, 3):
            raise ValueError(f"order must be 1, 2 or 3, got {self.order!r}")
        if X.shape[0] < 50 * n:
            raise InsufficientData(f"order {n} needs at least {50 * n} samples, got {X.shape[0]}")
        Phi, target = arx_regressors(X, y, n)
        _check_excitation(Phi[:, n:])
        # over-parameterised output lags (order above the truth) get the
        # minimum-norm solution rather than an error
        theta = np.linalg.lstsq(Phi, target, rcond=None)[0]
        a = theta[:n]
        b = theta[n:].reshape(n + 1, 3)
        a_stable, moved = project_poles(a, self.pole_radius)
        self.arx_a_ = a
        self.arx_b_ = b
        self.projected_ = moved
        self.model_ = arx_to_state_space(a_stable, b, self.ts, self.mode)
        self.n_features_in_ = 3
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return simulate_array(self.model_, X)


def identify(X, y, order=2, split_fraction=0.7, ts=60.0, mode="heating"):
    """Fit on the leading split, then score a free run on the held-out tail.

    The free run starts from the zero state at the first sample of the record,
    so the identification span doubles as warm-up; a further ``10 * order``
    validation samples are also left out of the metrics.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[1] != 3:
        raise LengthMismatch(f"inputs must have shape (N, 3), got {X.shape}")
    if X.shape[0] != y.size:
        raise LengthMismatch(f"{X.shape[0]} input rows vs {y.size} outputs")
    if not 0.5 < split_fraction < 0.95:
        raise ValueError(f"split_fraction must lie in (0.5, 0.95), got {split_fraction}")
    if y.size < 50 * order:
        raise InsufficientData(f"order {order} needs at least {50 * order} samples, got {y.size}")
    n_id = int(round(split_fraction * y.size))
    est = StateSpaceRegressor(order=order, ts=ts, mode=mode).fit(X[:n_id], y[:n_id])
    y_hat = est.predict(X)
    start = n_id + 10 * order
    if y.size - start < 2:
        raise InsufficientData("validation split too short after warm-up")
    report = FitReport(
        r2=r_squared(y[start:], y_hat[start:]),
        nmae_percent=nmae(y[start:], y_hat[start:]),
        n_validation=int(y.size - start),
        order=int(order),
        projected=bool(est.projected_),
    )
    return est.model_, report
