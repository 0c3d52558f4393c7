"""Stacked recurrent one-step motion predictor.

Architecture: per-step affine input projection with ReLU, a stack of LSTM
layers unrolled over the history window, and an affine read-out from the
final hidden state to the six motion channels. The network always predicts a
single step ahead; longer horizons come from feeding predictions back in
(append the prediction, drop the oldest sample, run again).

Everything is plain numpy in float64, deterministic for a fixed seed, with
an analytic backward pass through the full unrolled stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit  # numerically stable sigmoid

from ..dynamics import ValidationError
from .data import N_CHANNELS, WINDOW_LENGTH

MODEL_VERSION = 1


@dataclass
class RecurrentModel:
    """Weights plus the standardization constants the weights assume."""

    layers: int
    hidden: int
    params: dict[str, np.ndarray]
    mean: np.ndarray
    std: np.ndarray
    seed: int
    version: int = MODEL_VERSION
    window: int = WINDOW_LENGTH

    def param_order(self) -> list[str]:
        keys = ["W_in", "b_in"]
        for l in range(self.layers):
            keys += [f"Wx{l}", f"Wh{l}", f"b{l}"]
        keys += ["W_out", "b_out"]
        return keys

    def check_shapes(self) -> None:
        h = self.hidden
        expected = {"W_in": (h, N_CHANNELS), "b_in": (h,),
                    "W_out": (N_CHANNELS, h), "b_out": (N_CHANNELS,)}
        for l in range(self.layers):
            expected[f"Wx{l}"] = (4 * h, h)
            expected[f"Wh{l}"] = (4 * h, h)
            expected[f"b{l}"] = (4 * h,)
        for key, shape in expected.items():
            if key not in self.params or self.params[key].shape != shape:
                raise ValidationError(f"parameter {key} missing or not {shape}")
        if self.std.shape != (N_CHANNELS,) or np.any(self.std <= 0):
            raise ValidationError("model standardization scales must be positive")


def init_model(layers: int = 2, hidden: int = 32, seed: int = 0,
               mean: np.ndarray | None = None,
               std: np.ndarray | None = None,
               window: int = WINDOW_LENGTH) -> RecurrentModel:
    """Glorot-uniform weights, zero biases except a +1 forget-gate bias."""
    rng = np.random.default_rng(seed)

    def glorot(rows: int, cols: int) -> np.ndarray:
        limit = np.sqrt(6.0 / (rows + cols))
        return rng.uniform(-limit, limit, size=(rows, cols))

    params: dict[str, np.ndarray] = {
        "W_in": glorot(hidden, N_CHANNELS),
        "b_in": np.zeros(hidden),
        "W_out": glorot(N_CHANNELS, hidden),
        "b_out": np.zeros(N_CHANNELS),
    }
    for l in range(layers):
        params[f"Wx{l}"] = glorot(4 * hidden, hidden)
        params[f"Wh{l}"] = glorot(4 * hidden, hidden)
        b = np.zeros(4 * hidden)
        b[hidden:2 * hidden] = 1.0  # open forget gates at start of training
        params[f"b{l}"] = b
    model = RecurrentModel(
        layers=layers, hidden=hidden, params=params,
        mean=np.zeros(N_CHANNELS) if mean is None else np.asarray(mean, dtype=float),
        std=np.ones(N_CHANNELS) if std is None else np.asarray(std, dtype=float),
        seed=seed, window=window)
    model.check_shapes()
    return model


def _forward_core(model: RecurrentModel, X: np.ndarray, need_cache: bool):
    B, T, D = X.shape
    h = model.hidden
    L = model.layers
    p = model.params
    A = X @ p["W_in"].T + p["b_in"]
    U = np.maximum(A, 0.0)
    hs = [np.zeros((B, h)) for _ in range(L)]
    cs = [np.zeros((B, h)) for _ in range(L)]
    cache = None
    if need_cache:
        cache = {"X": X, "U": U,
                 "I": np.empty((L, T, B, h)), "F": np.empty((L, T, B, h)),
                 "G": np.empty((L, T, B, h)), "O": np.empty((L, T, B, h)),
                 "C": np.empty((L, T, B, h)), "H": np.empty((L, T, B, h))}
    for t in range(T):
        inp = U[:, t]
        for l in range(L):
            z = inp @ p[f"Wx{l}"].T + hs[l] @ p[f"Wh{l}"].T + p[f"b{l}"]
            i = expit(z[:, :h])
            f = expit(z[:, h:2 * h])
            g = np.tanh(z[:, 2 * h:3 * h])
            o = expit(z[:, 3 * h:])
            c_new = f * cs[l] + i * g
            h_new = o * np.tanh(c_new)
            if need_cache:
                cache["I"][l, t] = i
                cache["F"][l, t] = f
                cache["G"][l, t] = g
                cache["O"][l, t] = o
                cache["C"][l, t] = c_new
                cache["H"][l, t] = h_new
            cs[l] = c_new
            hs[l] = h_new
            inp = h_new
    Y = hs[L - 1] @ p["W_out"].T + p["b_out"]
    return Y, cache


def forward_batch(model: RecurrentModel, windows: np.ndarray) -> np.ndarray:
    """One-step predictions for a (B, T, 6) stack of standardized windows."""
    windows = np.asarray(windows, dtype=float)
    if windows.ndim != 3 or windows.shape[2] != N_CHANNELS:
        raise ValidationError("forward_batch expects (B, T, 6) windows")
    Y, _ = _forward_core(model, windows, need_cache=False)
    return Y


def forward(model: RecurrentModel, window: np.ndarray) -> np.ndarray:
    """One-step-ahead prediction from a full standardized window."""
    window = np.asarray(window, dtype=float)
    if window.ndim != 2 or window.shape[1] != N_CHANNELS:
        raise ValidationError("forward expects a (T, 6) window")
    if window.shape[0] < model.window:
        raise ValidationError(
            f"window is cold: {window.shape[0]} < {model.window} samples")
    return forward_batch(model, window[None])[0]


def forward_with_cache(model: RecurrentModel, windows: np.ndarray):
    windows = np.asarray(windows, dtype=float)
    return _forward_core(model, windows, need_cache=True)


def backward(model: RecurrentModel, cache: dict, dY: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of a loss with upstream derivative dY (B, 6) at the read-out.

    Full backpropagation through time across the unrolled stack; the loss
    only taps the final step's top hidden state, gradients flow back through
    the cell and hidden chains.
    """
    p = model.params
    h = model.hidden
    L = model.layers
    X, U = cache["X"], cache["U"]
    I, F, G, O, C, H = (cache[k] for k in "IFGOCH")
    B, T, _ = X.shape

    grads = {k: np.zeros_like(v) for k, v in p.items()}
    grads["W_out"] = dY.T @ H[L - 1, T - 1]
    grads["b_out"] = dY.sum(axis=0)

    dh = [np.zeros((B, h)) for _ in range(L)]
    dc = [np.zeros((B, h)) for _ in range(L)]
    dh[L - 1] = dY @ p["W_out"]
    dU = np.zeros_like(U)

    for t in range(T - 1, -1, -1):
        for l in range(L - 1, -1, -1):
            i, f, g, o = I[l, t], F[l, t], G[l, t], O[l, t]
            c = C[l, t]
            c_prev = C[l, t - 1] if t > 0 else 0.0
            h_prev = H[l, t - 1] if t > 0 else np.zeros((B, h))
            tc = np.tanh(c)
            do = dh[l] * tc
            dct = dc[l] + dh[l] * o * (1.0 - tc * tc)
            di = dct * g
            df = dct * c_prev
            dg = dct * i
            dz = np.concatenate([di * i * (1 - i), df * f * (1 - f),
                                 dg * (1 - g * g), do * o * (1 - o)], axis=1)
            inp = U[:, t] if l == 0 else H[l - 1, t]
            grads[f"Wx{l}"] += dz.T @ inp
            grads[f"Wh{l}"] += dz.T @ h_prev
            grads[f"b{l}"] += dz.sum(axis=0)
            dinp = dz @ p[f"Wx{l}"]
            dc[l] = dct * f
            dh[l] = dz @ p[f"Wh{l}"]  # flows to step t-1
            if l == 0:
                dU[:, t] += dinp
            else:
                dh[l - 1] += dinp  # same-step contribution to the layer below

    dA = dU * (U > 0)
    grads["W_in"] = dA.reshape(-1, h).T @ X.reshape(-1, X.shape[2])
    grads["b_in"] = dA.sum(axis=(0, 1))
    return grads


def mse(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Batch cost: squared residuals summed over the batch (and channels)."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValidationError(
            f"prediction/target length mismatch: {predictions.shape} vs {targets.shape}")
    return float(np.sum((predictions - targets) ** 2))


def iterated_predict(model: RecurrentModel, window: np.ndarray,
                     horizon: int = 50) -> np.ndarray:
    """Roll the one-step predictor forward by feeding predictions back.

    Each round appends the newest prediction and drops the oldest sample, so
    every call sees a window of constant length. Returns (horizon, 6).
    """
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    rollout = iterated_predict_batch(model, np.asarray(window, dtype=float)[None],
                                     horizon)
    return rollout[0]


def iterated_predict_batch(model: RecurrentModel, windows: np.ndarray,
                           horizon: int = 50) -> np.ndarray:
    """Batched rollout, shape (B, horizon, 6)."""
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    w = np.array(windows, dtype=float)
    if w.ndim != 3 or w.shape[1] < model.window:
        raise ValidationError("rollout needs warm (B, T>=window, 6) inputs")
    out = np.empty((w.shape[0], horizon, w.shape[2]))
    for k in range(horizon):
        y = forward_batch(model, w)
        out[:, k] = y
        w = np.concatenate([w[:, 1:], y[:, None]], axis=1)
    return out
