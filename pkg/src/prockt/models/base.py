"""Shared model machinery: embeddings, fusion, readout heads.

Position t of the output predicts step t+1: the probability of answering
question t+1 correctly and, in the statuskt variant, the four
proficiency ratios of step t+1. Inputs at position t never include
anything from step t+1 except the identity of its question and concept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import nn
from ..data.batches import Batch
from ..data.schema import DIMENSIONS
from .config import ModelConfig

LOGIT_CLAMP = 15.0


@dataclass
class Predictions:
    r_pred: nn.Tensor              # (B, T), P(next answer correct)
    mp_pred: nn.Tensor | None      # (B, T, 4) in the statuskt variant, else None


def shift_left(ids: np.ndarray) -> np.ndarray:
    """ids[t] -> ids[t+1]; the last position becomes padding (0)."""
    out = np.zeros_like(ids)
    out[:, :-1] = ids[:, 1:]
    return out


class KTModel:
    """Base class: owns parameters, embeddings, fusion, and heads."""

    def __init__(self, config: ModelConfig):
        self.config = config
        self.params: dict[str, nn.Tensor] = {}
        d = config.embed_dim
        self._add("embed.question", (config.num_questions + 1, d), fan_in=d)
        self._add("embed.concept", (config.num_concepts + 1, d), fan_in=d)
        self._add("embed.response", (2, d), fan_in=d)
        self._add("head.correct.weight", (2 * d, 1))
        self._add_zeros("head.correct.bias", (1,))
        if config.variant == "statuskt":
            self._add("mp.proj.weight", (8, d))
            self._add_zeros("mp.proj.bias", (d,))
            for dim in DIMENSIONS:
                self._add(f"head.mp.{dim}.weight", (2 * d, 1))
                self._add_zeros(f"head.mp.{dim}.bias", (1,))

    def _add(self, name: str, shape: tuple[int, ...], fan_in: int | None = None) -> None:
        self.params[name] = nn.init.uniform_fan_in(self.config.seed, name, shape, fan_in)

    def _add_zeros(self, name: str, shape: tuple[int, ...]) -> None:
        self.params[name] = nn.init.zeros(shape)

    def _add_ones(self, name: str, shape: tuple[int, ...]) -> None:
        self.params[name] = nn.init.ones(shape)

    def parameters(self) -> dict[str, nn.Tensor]:
        return self.params

    def load_params(self, params: dict[str, nn.Tensor]) -> None:
        missing = set(self.params) - set(params)
        if missing:
            raise KeyError(f"checkpoint missing parameters: {sorted(missing)}")
        for name in self.params:
            if tuple(params[name].shape) != tuple(self.params[name].shape):
                raise nn.ShapeError(
                    f"parameter {name}: checkpoint shape {params[name].shape} "
                    f"!= model shape {self.params[name].shape}")
            self.params[name].data = params[name].data.copy()

    def num_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    # -- shared forward pieces -------------------------------------------

    def _check_batch(self, batch: Batch) -> None:
        if batch.max_len != self.config.max_len:
            raise nn.ShapeError(
                f"batch max_len {batch.max_len} != model max_len {self.config.max_len}")

    def interaction_embedding(self, batch: Batch) -> nn.Tensor:
        """e_t = question + concept + response embeddings (+ fused ratios)."""
        e = nn.add(
            nn.add(nn.embedding_lookup(self.params["embed.question"], batch.question_ids),
                   nn.embedding_lookup(self.params["embed.concept"], batch.concept_ids)),
            nn.embedding_lookup(self.params["embed.response"], batch.correctness))
        if self.config.variant == "statuskt":
            fused = nn.add(nn.matmul(nn.as_tensor(batch.mp_inputs), self.params["mp.proj.weight"]),
                           self.params["mp.proj.bias"])
            e = nn.add(e, fused)
        return e

    def next_question_embedding(self, batch: Batch) -> nn.Tensor:
        nq = shift_left(batch.question_ids)
        nc = shift_left(batch.concept_ids)
        return nn.add(nn.embedding_lookup(self.params["embed.question"], nq),
                      nn.embedding_lookup(self.params["embed.concept"], nc))

    def readout(self, state: nn.Tensor, next_q: nn.Tensor) -> Predictions:
        z = nn.concat([state, next_q], axis=-1)
        r_logit = nn.add(nn.matmul(z, self.params["head.correct.weight"]),
                         self.params["head.correct.bias"])
        r_pred = nn.sigmoid(nn.clamp(r_logit, -LOGIT_CLAMP, LOGIT_CLAMP))[..., 0]
        mp_pred = None
        if self.config.variant == "statuskt":
            cols = []
            for dim in DIMENSIONS:
                logit = nn.add(nn.matmul(z, self.params[f"head.mp.{dim}.weight"]),
                               self.params[f"head.mp.{dim}.bias"])
                cols.append(nn.sigmoid(nn.clamp(logit, -LOGIT_CLAMP, LOGIT_CLAMP)))
            mp_pred = nn.concat(cols, axis=-1)
        return Predictions(r_pred=r_pred, mp_pred=mp_pred)

    def forward(self, batch: Batch, training: bool = False,
                rng: np.random.Generator | None = None) -> Predictions:
        raise NotImplementedError


def layer_norm(x: nn.Tensor, gain: nn.Tensor, bias: nn.Tensor, eps: float = 1e-5) -> nn.Tensor:
    mu = nn.mean(x, axis=-1, keepdims=True)
    centered = nn.add(x, nn.mul(mu, -1.0))
    var = nn.mean(nn.mul(centered, centered), axis=-1, keepdims=True)
    inv = nn.power(nn.add(var, eps), -0.5)
    return nn.add(nn.mul(nn.mul(centered, inv), gain), bias)
