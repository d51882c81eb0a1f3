"""Mini-batch training loop with seeded shuffling and best-model tracking."""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from ..core import SampleWindowPair
from ..errors import EmptyDataset
from .model import (
    NetConfig,
    PwDRecNetParams,
    backward,
    forward_batch,
    init_params,
    padded_length,
)
from .ops import mse_loss
from .optim import RmspropState, rmsprop_step


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 128
    seed: int = 0
    val_fraction: float = 0.1
    lr: float = 1e-3
    rho: float = 0.9
    eps: float = 1e-8


def _stack(dataset: list[SampleWindowPair]):
    """Stack windows into X (N, 1, Lp) and Y (N, C, L); zero right-pad X."""
    L = dataset[0].x.size
    Lp = padded_length(L)
    X = np.zeros((len(dataset), 1, Lp))
    Y = np.stack([p.y for p in dataset])
    for i, p in enumerate(dataset):
        X[i, 0, :L] = p.x
    return X, Y, L


def _loss_on(params, X, Y, L):
    pred, _ = forward_batch(params, X)
    loss, _ = mse_loss(pred[:, :, :L], Y)
    return loss


def train(dataset: list[SampleWindowPair], net_config: NetConfig,
          config: TrainConfig):
    """Train the reconstruction net; returns (best_params, log).

    A seeded fraction of the dataset is held out for validation and the
    parameters with the lowest validation MSE are returned. The log has
    one {"epoch", "train_loss", "val_loss"} entry per epoch.
    """
    if not dataset:
        raise EmptyDataset("training requires at least one window")
    X, Y, L = _stack(dataset)
    n = len(dataset)

    rng = np.random.default_rng(config.seed)
    perm = rng.permutation(n)
    n_val = int(round(config.val_fraction * n)) if n >= 2 else 0
    n_val = min(n_val, n - 1)
    val_idx, train_idx = perm[:n_val], perm[n_val:]

    params = init_params(net_config, seed=config.seed)
    state = RmspropState(lr=config.lr, rho=config.rho, eps=config.eps)

    best = copy.deepcopy(params)
    best_val = np.inf
    log = []
    for epoch in range(config.epochs):
        order = train_idx[rng.permutation(train_idx.size)]
        epoch_loss, n_batches = 0.0, 0
        for lo in range(0, order.size, config.batch_size):
            idx = order[lo:lo + config.batch_size]
            pred, cache = forward_batch(params, X[idx])
            loss, dpred = mse_loss(pred[:, :, :L], Y[idx])
            grad_out = np.zeros_like(pred)
            grad_out[:, :, :L] = dpred
            grads = backward(params, cache, grad_out)
            rmsprop_step(params, grads, state)
            epoch_loss += loss
            n_batches += 1
        train_loss = epoch_loss / n_batches
        if n_val > 0:
            val_loss = _loss_on(params, X[val_idx], Y[val_idx], L)
        else:
            val_loss = _loss_on(params, X[train_idx], Y[train_idx], L)
        log.append({"epoch": epoch, "train_loss": train_loss,
                    "val_loss": val_loss})
        if val_loss < best_val:
            best_val = val_loss
            best = copy.deepcopy(params)
    return best, log
