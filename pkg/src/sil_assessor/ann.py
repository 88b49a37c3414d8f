"""Single-hidden-layer network challenge for the certification pipeline.

The model is F(x) = sum_i v_i * phi(w_i . x + b_i) with a logistic sigmoid
phi, trained full-batch with Adam.  The decision rule is sign-based: Right
iff F(x) > 0, ties Left, mirroring the inclusive-Left rule of the Gaussian
classifier.  The network never certifies itself: its statistical evidence is
an exact one-sided binomial bound on held-out misclassifications, which
feeds the same budget verdict as the analytic pipeline.

Cross-entropy is the default training cost (labels 0/1 through an output
sigmoid used for training only); squared error on the raw output is kept
for regression-style fits such as the approximation desk check.  A gate of
axis-aligned inhibit boxes can veto the network in regions where a simpler
rule must win.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .classifier import Label
from .statdist import _invert_cdf, binomial_tail

MODEL_SCHEMA_VERSION = 1


class Activation(enum.Enum):
    SIGMOID = "sigmoid"


class CostKind(enum.Enum):
    CROSS_ENTROPY = "cross_entropy"
    SQUARED_ERROR = "squared_error"


class StopReason(enum.Enum):
    CONVERGED = "converged"
    EPOCH_LIMIT = "epoch_limit"


class Decision(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    REJECT = "reject"


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class AnnModel:
    """Immutable network parameters; safe to share across threads."""

    n_nodes: int
    input_dim: int
    hidden_weights: np.ndarray  # N x d
    offsets: np.ndarray         # N
    output_weights: np.ndarray  # N
    activation: Activation = Activation.SIGMOID
    cost: CostKind = CostKind.CROSS_ENTROPY
    seed: int | None = None     # training seed, kept for reproducible reload

    def __post_init__(self):
        if self.n_nodes < 1 or self.input_dim < 1:
            raise ValueError("n_nodes and input_dim must be positive")
        w = np.asarray(self.hidden_weights, dtype=float)
        b = np.asarray(self.offsets, dtype=float)
        v = np.asarray(self.output_weights, dtype=float)
        if w.shape != (self.n_nodes, self.input_dim):
            raise ValueError(f"hidden_weights shape {w.shape} != "
                             f"({self.n_nodes}, {self.input_dim})")
        if b.shape != (self.n_nodes,) or v.shape != (self.n_nodes,):
            raise ValueError("offsets and output_weights must have length n_nodes")
        if not (np.isfinite(w).all() and np.isfinite(b).all() and np.isfinite(v).all()):
            raise ValueError("model parameters must be finite")
        for arr, name in ((w, "hidden_weights"), (b, "offsets"), (v, "output_weights")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class PointSet2D:
    """Labeled planar points; the challenge's data format."""

    points: np.ndarray          # M x 2
    labels: tuple[Label, ...]

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must be M x 2, got shape {pts.shape}")
        if len(self.labels) != pts.shape[0]:
            raise ValueError(f"{pts.shape[0]} points but {len(self.labels)} labels")
        if not np.isfinite(pts).all():
            raise ValueError("point coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class TrainReport:
    final_cost: float
    epochs_run: int
    train_accuracy: float
    stop_reason: StopReason

    def __post_init__(self):
        if not (0.0 <= self.train_accuracy <= 1.0):
            raise ValueError("train_accuracy must lie in [0, 1]")


@dataclass(frozen=True)
class Hyperparameters:
    """Full-batch Adam settings with a patience stop.

    Training stops early once the best cost has not improved by at least
    ``tol`` for ``patience`` consecutive epochs; the returned model is the
    best-cost iterate, which keeps terminal optimizer oscillation out of
    the reported parameters.  The learning rate decays exponentially to
    ``lr_final_fraction`` of its initial value across ``max_epochs``.
    """

    learning_rate: float = 0.05
    max_epochs: int = 4000
    patience: int = 500
    tol: float = 1e-10
    lr_final_fraction: float | None = 0.01
    init_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.lr_final_fraction is not None and not (0.0 < self.lr_final_fraction <= 1.0):
            raise ValueError("lr_final_fraction must lie in (0, 1]")
        if self.init_scale <= 0.0:
            raise ValueError("init_scale must be positive")


@dataclass(frozen=True)
class GateRule:
    """Axis-aligned inhibit boxes with an absolute-priority fallback."""

    boxes: tuple[tuple[tuple[float, float], ...], ...]
    fallback: Decision = Decision.REJECT

    def __post_init__(self):
        norm = []
        for box in self.boxes:
            axes = tuple((float(lo), float(hi)) for lo, hi in box)
            for lo, hi in axes:
                if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                    raise ValueError(f"malformed box axis ({lo}, {hi})")
            norm.append(axes)
        object.__setattr__(self, "boxes", tuple(norm))

    def contains(self, x: Sequence[float]) -> bool:
        for box in self.boxes:
            if len(box) != len(x):
                raise ValueError(f"box has {len(box)} axes but point has {len(x)}")
            if all(lo <= xi <= hi for (lo, hi), xi in zip(box, x)):
                return True
        return False


# ---------------------------------------------------------------------------
# forward pass and decisions

def _hidden(X: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _sigmoid(X @ w.T + b)


def forward_batch(model: AnnModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ValueError(f"expected M x {model.input_dim} inputs, got shape {X.shape}")
    return _hidden(X, model.hidden_weights, model.offsets) @ model.output_weights


def forward(model: AnnModel, x: Sequence[float]) -> float:
    """Network output F(x) = sum_i v_i * phi(w_i . x + b_i)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.input_dim,):
        raise ValueError(f"expected a point of dimension {model.input_dim}, "
                         f"got shape {x.shape}")
    return float(forward_batch(model, x[None, :])[0])


def decide(model: AnnModel, x: Sequence[float]) -> Decision:
    # Right iff F(x) > 0; ties go Left
    return Decision.RIGHT if forward(model, x) > 0.0 else Decision.LEFT


def gated_decide(model: AnnModel, gate: GateRule, x: Sequence[float]) -> Decision:
    """Gate precedence is absolute: inside any inhibit box the fallback wins."""
    if gate.contains(x):
        return gate.fallback
    return decide(model, x)


# ---------------------------------------------------------------------------
# cost, gradients, training

def _targets(labels: Sequence[Label], cost: CostKind) -> np.ndarray:
    # cross-entropy trains on 0/1 through an output sigmoid; squared error
    # regresses the raw output onto +-1 so sign(F) stays the decision rule
    if cost is CostKind.CROSS_ENTROPY:
        return np.array([1.0 if lab is Label.RIGHT else 0.0 for lab in labels])
    return np.array([1.0 if lab is Label.RIGHT else -1.0 for lab in labels])


def _cost_and_flow(F: np.ndarray, t: np.ndarray, cost: CostKind) -> tuple[float, np.ndarray]:
    """Cost value and dC/dF per sample."""
    m = F.size
    if cost is CostKind.CROSS_ENTROPY:
        # softplus form: -[y ln s(F) + (1-y) ln(1-s(F))] = softplus(F) - y F
        c = float(np.mean(np.logaddexp(0.0, F) - t * F))
        return c, (_sigmoid(F) - t) / m
    c = float(np.mean((F - t) ** 2))
    return c, 2.0 * (F - t) / m


def _gradients(X: np.ndarray, H: np.ndarray, v: np.ndarray,
               flow: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    gv = H.T @ flow
    back = (flow[:, None] * H * (1.0 - H)) * v   # M x N
    return back.T @ X, back.sum(axis=0), gv


def _cost_at(X: np.ndarray, t: np.ndarray, cost: CostKind,
             w: np.ndarray, b: np.ndarray, v: np.ndarray) -> float:
    return _cost_and_flow(_hidden(X, w, b) @ v, t, cost)[0]


def _init_params(n_nodes: int, dim: int, hp: Hyperparameters
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(hp.seed)))
    r = hp.init_scale / math.sqrt(dim)
    w = rng.uniform(-r, r, size=(n_nodes, dim))
    b = rng.uniform(-r, r, size=n_nodes)
    v = rng.uniform(-r, r, size=n_nodes)
    return w, b, v


def _fit(X: np.ndarray, t: np.ndarray, n_nodes: int, cost: CostKind,
         hp: Hyperparameters) -> tuple[np.ndarray, np.ndarray, np.ndarray,
                                       float, int, StopReason]:
    w, b, v = _init_params(n_nodes, X.shape[1], hp)
    best_cost = _cost_at(X, t, cost, w, b, v)
    best = (w.copy(), b.copy(), v.copy())
    best_epoch = 0
    if hp.max_epochs == 0:
        return (*best, best_cost, 0, StopReason.EPOCH_LIMIT)

    moments = [np.zeros_like(p) for p in (w, b, v)]
    seconds = [np.zeros_like(p) for p in (w, b, v)]
    b1, b2, eps = 0.9, 0.999, 1e-8
    epochs_run = hp.max_epochs
    reason = StopReason.EPOCH_LIMIT
    for epoch in range(1, hp.max_epochs + 1):
        lr = hp.learning_rate
        if hp.lr_final_fraction is not None:
            lr *= hp.lr_final_fraction ** (epoch / hp.max_epochs)
        H = _hidden(X, w, b)
        c, flow = _cost_and_flow(H @ v, t, cost)
        if c < best_cost - hp.tol:
            best_cost = c
            best = (w.copy(), b.copy(), v.copy())
            best_epoch = epoch
        if epoch - best_epoch > hp.patience:
            epochs_run, reason = epoch, StopReason.CONVERGED
            break
        grads = _gradients(X, H, v, flow)
        for p, g, mom, sec in zip((w, b, v), grads, moments, seconds):
            mom *= b1
            mom += (1.0 - b1) * g
            sec *= b2
            sec += (1.0 - b2) * g * g
            p -= lr * (mom / (1.0 - b1 ** epoch)) / (
                np.sqrt(sec / (1.0 - b2 ** epoch)) + eps)
    return (*best, best_cost, epochs_run, reason)


def train(data: PointSet2D, n_nodes: int, cost: CostKind = CostKind.CROSS_ENTROPY,
          hyperparameters: Hyperparameters = Hyperparameters()
          ) -> tuple[AnnModel, TrainReport]:
    """Fit the network to a labeled point set; deterministic given the seed."""
    if len(data) == 0:
        raise ValueError("training data is empty")
    present = set(data.labels)
    if len(present) < 2:
        raise ValueError(f"training data contains a single class: {present}")
    t = _targets(data.labels, cost)
    w, b, v, final_cost, epochs_run, reason = _fit(
        data.points, t, n_nodes, cost, hyperparameters)
    model = AnnModel(n_nodes=n_nodes, input_dim=2, hidden_weights=w, offsets=b,
                     output_weights=v, cost=cost, seed=hyperparameters.seed)
    F = forward_batch(model, data.points)
    want_right = np.array([lab is Label.RIGHT for lab in data.labels])
    accuracy = float(np.mean((F > 0.0) == want_right))
    report = TrainReport(final_cost=final_cost, epochs_run=epochs_run,
                         train_accuracy=accuracy, stop_reason=reason)
    return model, report


def gradient_check(model: AnnModel, data: PointSet2D, step: float = 1e-5) -> float:
    """Worst |analytic - central finite difference| over all parameters."""
    X = data.points
    t = _targets(data.labels, model.cost)
    w = model.hidden_weights.copy()
    b = model.offsets.copy()
    v = model.output_weights.copy()
    H = _hidden(X, w, b)
    _, flow = _cost_and_flow(H @ v, t, model.cost)
    analytic = _gradients(X, H, v, flow)

    worst = 0.0
    for arr, grad in zip((w, b, v), analytic):
        flat = arr.reshape(-1)
        gflat = np.asarray(grad).reshape(-1)
        for i in range(flat.size):
            kept = flat[i]
            flat[i] = kept + step
            hi = _cost_at(X, t, model.cost, w, b, v)
            flat[i] = kept - step
            lo = _cost_at(X, t, model.cost, w, b, v)
            flat[i] = kept
            worst = max(worst, abs((hi - lo) / (2.0 * step) - gflat[i]))
    return worst


# ---------------------------------------------------------------------------
# universal-approximation desk check

_APPROX_HP = Hyperparameters(learning_rate=0.05, max_epochs=30000, patience=2000,
                             tol=1e-12, lr_final_fraction=0.01, init_scale=1.0, seed=3)


def approximation_check(target: Callable[[float], float],
                        n_nodes_schedule: Sequence[int],
                        grid_points: int = 512,
                        hyperparameters: Hyperparameters = _APPROX_HP
                        ) -> dict[int, float]:
    """Sup-norm error of 1-input fits to ``target`` on [0, 1], per node count.

    Regression uses squared error on the raw output.  Errors are expected
    to be nonincreasing in N up to optimization noise; a jump discontinuity
    in the target leaves a plateau the bounded continuous units cannot
    remove.
    """
    grid = np.linspace(0.0, 1.0, grid_points)
    X = grid[:, None]
    t = np.array([float(target(x)) for x in grid])
    out: dict[int, float] = {}
    for n_nodes in n_nodes_schedule:
        w, b, v, _, _, _ = _fit(X, t, n_nodes, CostKind.SQUARED_ERROR,
                                hyperparameters)
        F = _hidden(X, w, b) @ v
        out[n_nodes] = float(np.max(np.abs(F - t)))
    return out


# ---------------------------------------------------------------------------
# held-out statistical evidence

def clopper_pearson_upper(k: int, n: int, gamma: float) -> float:
    """Exact one-sided upper confidence bound for a binomial proportion.

    Smallest p with P(Bin(n, p) <= k) <= gamma; the chance that the bound
    sits below the true error probability is at most gamma.
    """
    if n < 1:
        raise ValueError("need at least one trial")
    if not 0 <= k <= n:
        raise ValueError(f"failure count {k} outside [0, {n}]")
    if not (0.0 < gamma < 0.5):
        raise ValueError(f"gamma must lie in (0, 0.5), got {gamma!r}")
    if k == n:
        return 1.0
    if k == 0:
        return 1.0 - gamma ** (1.0 / n)
    # binomial_tail is strictly decreasing in p here, so flip it into an
    # increasing pseudo-CDF and reuse the bracketing inverter
    return _invert_cdf(lambda p: 1.0 - binomial_tail(k, n, p), 1.0 - gamma,
                       0.0, 1.0)


def heldout_error_bound(model: AnnModel, heldout: PointSet2D, gamma: float,
                        dangerous: "Label | str" = Label.LEFT) -> tuple[float, int, int]:
    """One-sided exact binomial bound on the dangerous misclassification rate.

    The dangerous event is the joint one: the true class is ``dangerous``
    and the network decides the other way.  Every held-out point is a
    trial.  Returns (bound, failures, trials); the caller attests that the
    held-out set is disjoint from training.
    """
    if len(heldout) == 0:
        raise ValueError("held-out set is empty")
    dangerous = Label(dangerous) if isinstance(dangerous, str) else dangerous
    F = forward_batch(model, heldout.points)
    decided_right = F > 0.0
    failures = 0
    for went_right, lab in zip(decided_right, heldout.labels):
        if lab is dangerous:
            wrong = bool(went_right) if dangerous is Label.LEFT else not went_right
            failures += wrong
    n = len(heldout)
    return clopper_pearson_upper(failures, n, gamma), failures, n


def gated_heldout_failures(model: AnnModel, gate: GateRule, heldout: PointSet2D,
                           dangerous: Label = Label.LEFT) -> int:
    """Dangerous failure count on ``heldout`` with the gate applied."""
    failures = 0
    for x, lab in zip(heldout.points, heldout.labels):
        if lab is not dangerous:
            continue
        got = gated_decide(model, gate, x)
        wrong = (got is Decision.RIGHT) if dangerous is Label.LEFT \
            else (got is Decision.LEFT)
        failures += wrong
    return failures


# ---------------------------------------------------------------------------
# serialization

def model_to_json(model: AnnModel) -> str:
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "n_nodes": model.n_nodes,
        "input_dim": model.input_dim,
        "hidden_weights": model.hidden_weights.tolist(),
        "offsets": model.offsets.tolist(),
        "output_weights": model.output_weights.tolist(),
        "activation": model.activation.value,
        "cost": model.cost.value,
        "seed": model.seed,
    }
    return json.dumps(doc, sort_keys=True)


def model_from_json(text: str) -> AnnModel:
    doc = json.loads(text)
    version = doc.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise ValueError(f"unsupported model schema version {version!r}")
    return AnnModel(
        n_nodes=int(doc["n_nodes"]),
        input_dim=int(doc["input_dim"]),
        hidden_weights=np.array(doc["hidden_weights"], dtype=float),
        offsets=np.array(doc["offsets"], dtype=float),
        output_weights=np.array(doc["output_weights"], dtype=float),
        activation=Activation(doc["activation"]),
        cost=CostKind(doc["cost"]),
        seed=None if doc.get("seed") is None else int(doc["seed"]),
    )


# ---------------------------------------------------------------------------
# deterministic scenario data used by scripts, tests, and the CLI demo

def separable_set(n_per_class: int = 100, margin: float = 0.5,
                  seed: int = 42) -> PointSet2D:
    """Two uniform blobs separated by ``2 * margin`` along x1."""
    if margin <= 0.0:
        raise ValueError("margin must be positive")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    left = rng.uniform([-2.0, -2.0], [-margin / 2.0 - 1e-9, 2.0],
                       size=(n_per_class, 2))
    right = rng.uniform([margin / 2.0, -2.0], [2.0, 2.0], size=(n_per_class, 2))
    labels = (Label.LEFT,) * n_per_class + (Label.RIGHT,) * n_per_class
    return PointSet2D(points=np.vstack([left, right]), labels=labels)


def rings_set(n_per_class: int = 200, seed: int = 7) -> PointSet2D:
    """Disk (Left) inside an annulus (Right); no linear separator exists."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    theta = rng.uniform(0.0, 2.0 * math.pi, size=2 * n_per_class)
    radius = np.concatenate([rng.uniform(0.0, 1.0, size=n_per_class),
                             rng.uniform(1.5, 2.5, size=n_per_class)])
    pts = np.c_[radius * np.cos(theta), radius * np.sin(theta)]
    labels = (Label.LEFT,) * n_per_class + (Label.RIGHT,) * n_per_class
    return PointSet2D(points=pts, labels=labels)
