"""Small feed-forward network trained by plain mini-batch gradient descent.

Used both as the value approximator (state -> scalar) and the policy
approximator (state -> action). Inputs pass through a per-dimension affine
map into [-1, 1]; outputs pass through an affine map (identity for value
nets, action-bounds map plus clamp for policy nets). Hidden activations are
tanh, the output layer is linear.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class TrainSample:
    """One regression pair: network input and target output vector."""

    input: np.ndarray
    target: np.ndarray


@dataclass
class TrainSettings:
    learning_rate: float = 1e-3
    epochs: int = 50
    batch_size: int = 32
    buffer_cap: int = 10_000


class Mlp:
    """Multilayer perceptron with explicit weights and exact backprop.

    layer_sizes includes the input and output dimensions. Weights are drawn
    uniformly in [-1, 1] scaled by 1/sqrt(fan_in); biases start at zero.
    """

    def __init__(
        self,
        layer_sizes: list[int],
        seed: int,
        in_center: Optional[np.ndarray] = None,
        in_half: Optional[np.ndarray] = None,
        out_center: Optional[np.ndarray] = None,
        out_half: Optional[np.ndarray] = None,
        out_clip: Optional[np.ndarray] = None,
    ):
        layer_sizes = [int(n) for n in layer_sizes]
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output layers")
        if any(n <= 0 for n in layer_sizes):
            raise ValueError(f"layer sizes must be positive, got {layer_sizes}")
        self.layer_sizes = layer_sizes
        rng = np.random.default_rng(seed)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            scale = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-scale, scale, size=(fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out))
        d_in, d_out = layer_sizes[0], layer_sizes[-1]
        self.in_center = np.zeros(d_in) if in_center is None else np.asarray(in_center, dtype=float)
        self.in_half = np.ones(d_in) if in_half is None else np.asarray(in_half, dtype=float)
        self.out_center = np.zeros(d_out) if out_center is None else np.asarray(out_center, dtype=float)
        self.out_half = np.ones(d_out) if out_half is None else np.asarray(out_half, dtype=float)
        self.out_clip = None if out_clip is None else np.asarray(out_clip, dtype=float)

    @property
    def in_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_dim(self) -> int:
        return self.layer_sizes[-1]

    def _check_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValueError(f"input shape {x.shape} incompatible with input dim {self.in_dim}")
        return x

    def _activations(self, x_batch: np.ndarray) -> list[np.ndarray]:
        """Layer outputs for a (B, in_dim) batch, after input scaling."""
        a = (x_batch - self.in_center) / self.in_half
        acts = [a]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            a = z if i == last else np.tanh(z)
            acts.append(a)
        return acts

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Unclamped output for a single input vector."""
        batch = self._activations(self._check_batch(x))[-1]
        return self.out_center + self.out_half * batch[0]

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        return self.out_center + self.out_half * self._activations(self._check_batch(x))[-1]

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Forward pass with the output clamp applied (if configured)."""
        y = self.forward(x)
        if self.out_clip is not None:
            y = np.clip(y, self.out_clip[:, 0], self.out_clip[:, 1])
        return y

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        y = self.forward_batch(x)
        if self.out_clip is not None:
            y = np.clip(y, self.out_clip[:, 0], self.out_clip[:, 1])
        return y

    # -- training ---------------------------------------------------------

    def _batch_loss_grads(self, x: np.ndarray, t: np.ndarray):
        """Mean loss 0.5*||y - t||^2 over the batch and mean parameter grads.

        The clamp never enters training; targets are assumed reachable by
        the affine output map.
        """
        acts = self._activations(x)
        y = self.out_center + self.out_half * acts[-1]
        err = y - t
        loss = 0.5 * float(np.mean(np.sum(err * err, axis=1)))
        batch = x.shape[0]
        delta = (err * self.out_half) / batch
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        for i in reversed(range(len(self.weights))):
            grads_w[i] = delta.T @ acts[i]
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i]) * (1.0 - acts[i] * acts[i])
        return loss, grads_w, grads_b

    def gradient(self, sample: TrainSample):
        """Exact gradient of 0.5*||forward(x) - target||^2 per parameter.

        Returns (grads_w, grads_b) lists matching weights/biases shapes.
        """
        x = self._check_batch(sample.input)
        t = np.asarray(sample.target, dtype=float).reshape(1, -1)
        if t.shape[1] != self.out_dim:
            raise ValueError(f"target dim {t.shape[1]} != output dim {self.out_dim}")
        _, gw, gb = self._batch_loss_grads(x, t)
        return gw, gb

    def loss(self, samples: list[TrainSample]) -> float:
        x = np.stack([np.asarray(s.input, dtype=float) for s in samples])
        t = np.stack([np.asarray(s.target, dtype=float).ravel() for s in samples])
        loss, _, _ = self._batch_loss_grads(self._check_batch(x), t)
        return loss

    def train(
        self,
        samples: list[TrainSample],
        learning_rate: float,
        epochs: int,
        batch_size: int,
        rng: np.random.Generator,
    ) -> float:
        """Mini-batch gradient descent on mean squared error.

        Mutates the network in place and returns the final-epoch mean loss.
        Reproducible for a fixed rng state and sample order.
        """
        if not samples:
            raise ValueError("empty sample set")
        if learning_rate < 0:
            raise ValueError("learning rate must be nonnegative")
        x = self._check_batch(np.stack([np.asarray(s.input, dtype=float) for s in samples]))
        t = np.stack([np.asarray(s.target, dtype=float).ravel() for s in samples])
        if t.shape[1] != self.out_dim:
            raise ValueError(f"target dim {t.shape[1]} != output dim {self.out_dim}")
        n = x.shape[0]
        final_loss = None
        for _ in range(epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            for start in range(0, n, batch_size):
                idx = order[start : start + batch_size]
                loss, gw, gb = self._batch_loss_grads(x[idx], t[idx])
                epoch_loss += loss * idx.size
                if learning_rate > 0:
                    for i in range(len(self.weights)):
                        self.weights[i] -= learning_rate * gw[i]
                        self.biases[i] -= learning_rate * gb[i]
            final_loss = epoch_loss / n
        if final_loss is None or learning_rate == 0:
            final_loss, _, _ = self._batch_loss_grads(x, t)
        return final_loss

    # -- persistence -------------------------------------------------------

    def save(self, path) -> None:
        """Self-describing text checkpoint, 17 significant digits."""
        lines = ["qrrt-mlp 1", "layers " + " ".join(str(n) for n in self.layer_sizes)]

        def vec(tag, v):
            lines.append(tag + " " + " ".join("%.17g" % x for x in np.ravel(v)))

        vec("in_center", self.in_center)
        vec("in_half", self.in_half)
        vec("out_center", self.out_center)
        vec("out_half", self.out_half)
        if self.out_clip is None:
            lines.append("out_clip none")
        else:
            vec("out_clip", self.out_clip)
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            lines.append(f"weight {i} {w.shape[0]} {w.shape[1]}")
            for row in w:
                lines.append(" ".join("%.17g" % x for x in row))
            vec(f"bias {i}", b)
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")

    @classmethod
    def load(cls, path) -> "Mlp":
        lines = Path(path).read_text(encoding="ascii").splitlines()
        if not lines or lines[0] != "qrrt-mlp 1":
            raise ValueError(f"{path}: not a network checkpoint")
        i = 1
        layer_sizes = [int(n) for n in lines[i].split()[1:]]
        i += 1
        net = cls(layer_sizes, seed=0)

        def parse_vec(line, tag):
            parts = line.split()
            if parts[: len(tag.split())] != tag.split():
                raise ValueError(f"{path}: expected {tag!r}, got {line!r}")
            return np.array([float(x) for x in parts[len(tag.split()) :]])

        net.in_center = parse_vec(lines[i], "in_center"); i += 1
        net.in_half = parse_vec(lines[i], "in_half"); i += 1
        net.out_center = parse_vec(lines[i], "out_center"); i += 1
        net.out_half = parse_vec(lines[i], "out_half"); i += 1
        if lines[i].strip() == "out_clip none":
            net.out_clip = None
        else:
            net.out_clip = parse_vec(lines[i], "out_clip").reshape(-1, 2)
        i += 1
        for layer in range(len(layer_sizes) - 1):
            head = lines[i].split(); i += 1
            if head[0] != "weight" or int(head[1]) != layer:
                raise ValueError(f"{path}: malformed weight header {head}")
            rows, cols = int(head[2]), int(head[3])
            w = np.array([[float(x) for x in lines[i + r].split()] for r in range(rows)])
            i += rows
            if w.shape != (rows, cols):
                raise ValueError(f"{path}: weight block shape {w.shape} != ({rows}, {cols})")
            net.weights[layer] = w
            net.biases[layer] = parse_vec(lines[i], f"bias {layer}"); i += 1
        return net


class AdaptiveNet:
    """An Mlp retrained in batches as new samples arrive.

    Value nets keep a replay buffer of the most recent samples (capped) and
    retrain on the whole buffer; policy nets retrain on the fresh batch only,
    since each policy batch already covers every state group in the tree.
    """

    def __init__(self, mlp: Mlp, settings: TrainSettings, replay: bool = True):
        self.mlp = mlp
        self.settings = settings
        self.replay = replay
        self.buffer: list[TrainSample] = []
        self.last_loss = float("nan")

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.mlp.predict(x)

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        return self.mlp.predict_batch(x)

    def value(self, x: np.ndarray) -> float:
        """Scalar convenience accessor for 1-output nets."""
        return float(self.predict(x)[0])

    def retrain(self, samples: list[TrainSample], rng: np.random.Generator) -> float:
        if not samples:
            self.last_loss = float("nan")
            return self.last_loss
        cap = self.settings.buffer_cap
        if self.replay:
            self.buffer.extend(samples)
            if len(self.buffer) > cap:
                self.buffer = self.buffer[-cap:]
            train_set = self.buffer
        else:
            train_set = samples[-cap:]
        self.last_loss = self.mlp.train(
            train_set,
            self.settings.learning_rate,
            self.settings.epochs,
            self.settings.batch_size,
            rng,
        )
        return self.last_loss


def value_net_for(
    state_bounds: np.ndarray,
    hidden: list[int],
    seed: int,
    upper_bound: float = 0.0,
    init_bias: float = 0.0,
) -> Mlp:
    """Value approximator: scaled state in, scalar out.

    Predictions are capped at upper_bound (the terminal reward): with
    nonpositive rewards no state can be worth more than reaching the goal,
    so anything above it is approximation error. Training is unaffected by
    the cap. init_bias sets the initial output everywhere; a negative
    floor makes unexplored regions look costly, so greedy machinery
    prefers states with observed returns.
    """
    lo, hi = state_bounds[:, 0], state_bounds[:, 1]
    net = Mlp(
        [state_bounds.shape[0], *hidden, 1],
        seed,
        in_center=(lo + hi) / 2.0,
        in_half=(hi - lo) / 2.0,
        out_clip=np.array([[-np.inf, upper_bound]]),
    )
    net.biases[-1][:] = init_bias
    return net


def policy_net_for(state_bounds: np.ndarray, action_bounds: np.ndarray, hidden: list[int], seed: int) -> Mlp:
    """Policy approximator: scaled state in, bounded action out."""
    slo, shi = state_bounds[:, 0], state_bounds[:, 1]
    alo, ahi = action_bounds[:, 0], action_bounds[:, 1]
    return Mlp(
        [state_bounds.shape[0], *hidden, action_bounds.shape[0]],
        seed,
        in_center=(slo + shi) / 2.0,
        in_half=(shi - slo) / 2.0,
        out_center=(alo + ahi) / 2.0,
        out_half=(ahi - alo) / 2.0,
        out_clip=action_bounds,
    )
