"""Single-feature stateful LSTM trained with Adam, in float64 numpy.

Cell update for input ``x`` and carried state ``(c, h)``, with ``v = [h, x]``::

    f = sigmoid(W_f v + b_f)    i = sigmoid(W_i v + b_i)
    g = tanh(W_g v + b_g)       o = sigmoid(W_o v + b_o)
    c' = f * c + i * g          h' = o * tanh(c')
    yhat = W_y . h' + b_y

Training follows the stateful one-sample-per-update protocol: each pair is
one Adam step on a one-step-truncated gradient, the state carries across
pairs, and states reset at the end of every epoch.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import core
from .core import TimeSeries
from .errors import (
    ContractError,
    DataError,
    DivergenceError,
    DomainError,
    NumericError,
    ForecastError,
    RollcastError,
)
from .rng import SplitMix64
from .runs import ForecastRun, Method

GATES = ("f", "i", "g", "o")
GATE_NAMES = {"f": "forget", "i": "input", "g": "candidate", "o": "output"}
PARAM_NAMES = ("W_f", "W_i", "W_g", "W_o", "b_f", "b_i", "b_g", "b_o", "W_y", "b_y")


def _sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(eq=False)
class LstmNetwork:
    neurons: int
    input_dim: int
    params: dict
    cell_state: np.ndarray = None
    hidden_state: np.ndarray = None

    def __post_init__(self):
        if self.cell_state is None:
            self.cell_state = np.zeros(self.neurons)
        if self.hidden_state is None:
            self.hidden_state = np.zeros(self.neurons)

    def reset_states(self):
        self.cell_state = np.zeros(self.neurons)
        self.hidden_state = np.zeros(self.neurons)

    def copy(self) -> "LstmNetwork":
        return copy.deepcopy(self)

    def n_parameters(self) -> int:
        return sum(np.size(p) for p in self.params.values())


def _param_property(name):
    return property(lambda self: self.params[name], doc=f"Parameter {name}.")


for _name in PARAM_NAMES:
    setattr(LstmNetwork, _name, _param_property(_name))


@dataclass
class AdamState:
    m: dict
    v: dict
    step: int = 0
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def fresh(cls, params: dict, **hyper) -> "AdamState":
        zeros = {k: np.zeros_like(np.asarray(p, dtype=np.float64)) for k, p in params.items()}
        return cls(m=zeros, v={k: z.copy() for k, z in zeros.items()}, **hyper)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1
    neurons: int = 4
    seed: int = 7
    batch_size: int = 1
    shuffle: bool = False

    def __post_init__(self):
        if self.shuffle:
            raise DomainError("shuffle must stay False: training order is the time order")
        for name in ("epochs", "neurons", "batch_size"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")

    def summary(self) -> str:
        return (f"LSTM(neurons={self.neurons}) epochs={self.epochs} "
                f"batch_size={self.batch_size} seed={self.seed}")


@dataclass(eq=False)
class FittedLstm:
    """A trained network with the scaler fitted on its differenced training data."""

    network: LstmNetwork
    scaler: core.ScaleParams
    optimizer: AdamState
    epoch_losses: list = field(default_factory=list)
    resets: int = 0


def init_network(neurons: int = 4, input_dim: int = 1, seed: int = 7) -> LstmNetwork:
    if neurons < 1 or input_dim < 1:
        raise DomainError(f"need neurons >= 1 and input_dim >= 1, got {neurons}, {input_dim}")
    rng = SplitMix64(seed)
    bound = 1.0 / np.sqrt(input_dim + neurons)
    params = {}
    for gate in GATES:
        params[f"W_{gate}"] = rng.uniform(-bound, bound, (neurons, neurons + input_dim))
    for gate in GATES:
        params[f"b_{gate}"] = np.zeros(neurons)
    params["b_f"] = np.ones(neurons)
    params["W_y"] = rng.uniform(-bound, bound, (neurons,))
    params["b_y"] = np.zeros(())
    return LstmNetwork(neurons, input_dim, params)


def _as_input(x, input_dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != input_dim:
        raise ContractError(f"expected input of {input_dim} components, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite network input")
    return x


def _cell(params, x, c_prev, h_prev):
    v = np.concatenate([h_prev, x])
    act = {}
    for gate in GATES:
        z = params[f"W_{gate}"] @ v + params[f"b_{gate}"]
        if not np.all(np.isfinite(z)):
            raise NumericError(f"non-finite pre-activation in {GATE_NAMES[gate]} gate")
        act[gate] = np.tanh(z) if gate == "g" else _sigmoid(z)
    c = act["f"] * c_prev + act["i"] * act["g"]
    if not np.all(np.isfinite(c)):
        raise NumericError("non-finite cell state")
    tc = np.tanh(c)
    h = act["o"] * tc
    y = float(params["W_y"] @ h + params["b_y"])
    if not np.isfinite(y):
        raise NumericError("non-finite output of dense layer")
    return y, c, h, (v, act, tc)


def forward(net: LstmNetwork, x, stateful: bool = True):
    """One step from the carried state; returns ``(yhat, (c', h'))``."""
    x = _as_input(x, net.input_dim)
    y, c, h, _ = _cell(net.params, x, net.cell_state, net.hidden_state)
    if stateful:
        net.cell_state, net.hidden_state = c, h
    return y, (c, h)


def _bptt(params, inputs, targets, c0, h0):
    """Mean squared error over the sequence and its exact gradients."""
    T = len(inputs)
    c, h = c0, h0
    cache = []
    loss = 0.0
    for x, target in zip(inputs, targets):
        y, c_new, h_new, (v, act, tc) = _cell(params, x, c, h)
        cache.append((c, v, act, tc, h_new, y - target))
        loss += (y - target) ** 2
        c, h = c_new, h_new
    loss /= T

    grads = {k: np.zeros_like(p, dtype=np.float64) for k, p in params.items()}
    n = h0.size
    dh_next = np.zeros(n)
    dc_next = np.zeros(n)
    for c_prev, v, act, tc, h, err in reversed(cache):
        dy = 2.0 * err / T
        grads["W_y"] += dy * h
        grads["b_y"] += dy
        dh = dy * params["W_y"] + dh_next
        f, i, g, o = act["f"], act["i"], act["g"], act["o"]
        dc = dh * o * (1.0 - tc * tc) + dc_next
        dpre = {
            "f": dc * c_prev * f * (1.0 - f),
            "i": dc * g * i * (1.0 - i),
            "g": dc * i * (1.0 - g * g),
            "o": dh * tc * o * (1.0 - o),
        }
        dv = np.zeros_like(v)
        for gate in GATES:
            grads[f"W_{gate}"] += np.outer(dpre[gate], v)
            grads[f"b_{gate}"] += dpre[gate]
            dv += params[f"W_{gate}"].T @ dpre[gate]
        dh_next = dv[:n]
        dc_next = dc * f
    return loss, grads, (c, h)


def compute_gradients(net: LstmNetwork, pairs, initial_state=None):
    """Full-BPTT gradients of the sequence-mean squared error.

    States start from zero unless ``initial_state=(c, h)`` is given; the
    network's own carried state is left untouched. Returns ``(loss, grads)``.
    """
    if len(pairs) == 0:
        raise ContractError("compute_gradients needs a non-empty sequence")
    inputs = [_as_input(x, net.input_dim) for x, _ in pairs]
    targets = [float(y) for _, y in pairs]
    if initial_state is None:
        c0, h0 = np.zeros(net.neurons), np.zeros(net.neurons)
    else:
        c0, h0 = (np.asarray(s, dtype=np.float64) for s in initial_state)
    loss, grads, _ = _bptt(net.params, inputs, targets, c0, h0)
    if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
        raise NumericError("overflow while back-propagating")
    return loss, grads


def adam_step(params: dict, grads: dict, state: AdamState):
    """Bias-corrected Adam update; returns new ``(params, state)``."""
    if params.keys() != grads.keys() or params.keys() != state.m.keys():
        raise ContractError("params, gradients and Adam moments name different parameters")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_params, new_m, new_v = {}, {}, {}
    for k, p in params.items():
        g = np.asarray(grads[k], dtype=np.float64)
        p = np.asarray(p, dtype=np.float64)
        if g.shape != p.shape or state.m[k].shape != p.shape or state.v[k].shape != p.shape:
            raise ContractError(
                f"shape mismatch for {k}: param {p.shape}, grad {g.shape}, "
                f"moments {state.m[k].shape}/{state.v[k].shape}"
            )
        m = b1 * state.m[k] + (1.0 - b1) * g
        v = b2 * state.v[k] + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        new_params[k] = p - state.alpha * m_hat / (np.sqrt(v_hat) + state.epsilon)
        new_m[k], new_v[k] = m, v
    new_state = AdamState(new_m, new_v, t, state.alpha, b1, b2, state.epsilon)
    return new_params, new_state


def _check_finite_params(params, epoch, step):
    for k, p in params.items():
        if not np.all(np.isfinite(p)):
            raise DivergenceError(
                f"parameter {k} became non-finite at epoch {epoch}, step {step}",
                epoch=epoch, step=step,
            )


def prepare_training_data(train: TimeSeries):
    """Difference once, fit the scaler, and build lag-1 pairs on the scaled changes."""
    if len(train) < 4:
        raise DataError(f"{train.name}: need at least 3 differenced training values")
    diffs = core.difference(train, 1)
    scaler = core.fit_scaler(diffs)
    scaled = core.apply_scaler(scaler, diffs.values)
    return scaler, core.to_supervised(scaled, 1)


def fit_lstm(train: TimeSeries, config: TrainConfig = TrainConfig()) -> FittedLstm:
    scaler, pairs = prepare_training_data(train)
    net = init_network(config.neurons, 1, config.seed)
    opt = AdamState.fresh(net.params)
    fitted = FittedLstm(net, scaler, opt)

    for epoch in range(config.epochs):
        total = 0.0
        for b0 in range(0, len(pairs), config.batch_size):
            batch = pairs[b0 : b0 + config.batch_size]
            acc = None
            for x, y in batch:
                x = np.asarray(x, dtype=np.float64)
                try:
                    loss, grads, state = _bptt(
                        net.params, [x], [y], net.cell_state, net.hidden_state
                    )
                except NumericError as exc:
                    raise DivergenceError(
                        f"{train.name}: {exc} at epoch {epoch}, step {b0}",
                        epoch=epoch, step=b0,
                    ) from exc
                if not np.isfinite(loss):
                    raise DivergenceError(
                        f"{train.name}: non-finite loss at epoch {epoch}, step {b0}",
                        epoch=epoch, step=b0,
                    )
                total += loss
                net.cell_state, net.hidden_state = state
                if acc is None:
                    acc = grads
                else:
                    for k in acc:
                        acc[k] += grads[k]
            if len(batch) > 1:
                acc = {k: g / len(batch) for k, g in acc.items()}
            net.params, opt = adam_step(net.params, acc, opt)
            _check_finite_params(net.params, epoch, b0)
        fitted.epoch_losses.append(total / len(pairs))
        net.reset_states()
        fitted.resets += 1

    fitted.optimizer = opt
    return fitted


def forecast_lstm(net: LstmNetwork, x) -> float:
    """One stateful step; the caller un-scales and un-differences."""
    return forward(net, x)[0]


def _prime(net: LstmNetwork, scaled_inputs):
    for x in scaled_inputs:
        forward(net, [x])


def rolling_lstm(
    series: TimeSeries,
    config: TrainConfig = TrainConfig(),
    fraction: float = 0.70,
    refit: bool = False,
) -> ForecastRun:
    """Train on the training split, prime the state, then walk the test split.

    Each forecast feeds the last observed change and predicts the next one,
    which is un-scaled and added to the last observed value. With
    ``refit=True`` the network is retrained on the grown history before
    every forecast.
    """
    parts = core.split(series, fraction)
    raw = series.values
    n_train = len(parts.train)
    diffs = np.diff(raw)

    def trained_on(n_hist):
        fitted = fit_lstm(TimeSeries(raw[:n_hist], name=series.name), config)
        net = fitted.network.copy()
        net.reset_states()
        # the last training change is the first forecast input, not a priming one
        _prime(net, core.apply_scaler(fitted.scaler, diffs[: n_hist - 2]))
        return net, fitted.scaler

    net, scaler = trained_on(n_train)
    predictions = []
    for i in range(len(parts.test)):
        last = n_train + i - 1
        try:
            if refit and i > 0:
                net, scaler = trained_on(n_train + i)
            x = core.apply_scaler(scaler, diffs[last - 1])
            yhat = forecast_lstm(net, [x])
            predictions.append(core.inverse_difference(
                float(raw[last]), float(core.invert_scaler(scaler, yhat))
            ))
        except RollcastError as exc:
            raise ForecastError(
                f"{series.name}: rolling LSTM failed at test step {i}: {exc}", step=i
            ) from exc
    summary = config.summary() + f" fraction={fraction}" + (" refit" if refit else "")
    return ForecastRun.build(series.name, Method.LSTM, parts.test.values, predictions, summary)


CHECKPOINT_MAGIC = "rollcast-lstm-checkpoint 1"


def save_network(net: LstmNetwork, path) -> None:
    """Write every array as ``name dims...`` followed by hex floats, one row per line."""
    lines = [CHECKPOINT_MAGIC, f"neurons {net.neurons}", f"input_dim {net.input_dim}"]
    arrays = dict(net.params)
    arrays["cell_state"] = net.cell_state
    arrays["hidden_state"] = net.hidden_state
    for name, arr in arrays.items():
        arr = np.asarray(arr, dtype=np.float64)
        lines.append(" ".join([name, str(arr.ndim)] + [str(s) for s in arr.shape]))
        rows = arr.reshape(1, -1) if arr.ndim < 2 else arr
        for row in rows:
            lines.append(" ".join(float(v).hex() for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_network(path) -> LstmNetwork:
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or lines[0] != CHECKPOINT_MAGIC:
        raise ContractError(f"{path}: not a rollcast LSTM checkpoint")
    neurons = int(lines[1].split()[1])
    input_dim = int(lines[2].split()[1])
    arrays = {}
    k = 3
    while k < len(lines):
        head = lines[k].split()
        name, ndim = head[0], int(head[1])
        shape = tuple(int(s) for s in head[2 : 2 + ndim])
        nrows = shape[0] if ndim == 2 else 1
        flat = [float.fromhex(tok) for line in lines[k + 1 : k + 1 + nrows] for tok in line.split()]
        arrays[name] = np.array(flat, dtype=np.float64).reshape(shape)
        k += 1 + nrows
    cell = arrays.pop("cell_state")
    hidden = arrays.pop("hidden_state")
    if set(arrays) != set(PARAM_NAMES):
        raise ContractError(f"{path}: checkpoint parameters {sorted(arrays)} incomplete")
    params = {name: arrays[name] for name in PARAM_NAMES}
    return LstmNetwork(neurons, input_dim, params, cell, hidden)
