"""Padded, next-step-shifted training batches.

Position t of every array describes step t of a window; targets at
position t describe step t+1 (next-step prediction). Proficiency inputs
at position t always come from step t itself, never from the target
step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .schema import DIMENSIONS, Problem, StudentSequence

MP_IMPUTE = 0.5  # neutral midpoint for absent dimensions (mask bit 0)


@dataclass
class Vocab:
    """String id -> contiguous positive index; 0 is reserved for padding."""

    question_index: dict[str, int]
    concept_index: dict[str, int]

    @classmethod
    def from_problems(cls, problems: dict[str, Problem]) -> "Vocab":
        qindex = {pid: i + 1 for i, pid in enumerate(sorted(problems))}
        concepts = sorted({kc for p in problems.values() for kc in p.kc_ids})
        cindex = {kc: i + 1 for i, kc in enumerate(concepts)}
        return cls(question_index=qindex, concept_index=cindex)

    @property
    def num_questions(self) -> int:
        return len(self.question_index)

    @property
    def num_concepts(self) -> int:
        return len(self.concept_index)


@dataclass
class Batch:
    question_ids: np.ndarray    # (B, T) int64, 0 = padding
    concept_ids: np.ndarray     # (B, T) int64, 0 = padding
    correctness: np.ndarray     # (B, T) int64 in {0, 1}
    mp_inputs: np.ndarray       # (B, T, 8): 4 ratio values then 4 mask bits
    targets_correct: np.ndarray  # (B, T) float, correctness of step t+1
    targets_mp: np.ndarray      # (B, T, 4), ratios of step t+1
    target_mp_mask: np.ndarray  # (B, T, 4), present bits of step t+1
    valid_mask: np.ndarray      # (B, T), 1 where step t is real

    @property
    def target_mask(self) -> np.ndarray:
        """1 where position t has a real next step to predict."""
        shifted = np.zeros_like(self.valid_mask)
        shifted[:, :-1] = self.valid_mask[:, 1:]
        return self.valid_mask * shifted

    @property
    def max_len(self) -> int:
        return self.question_ids.shape[1]


def _mp_features(rec) -> tuple[np.ndarray, np.ndarray]:
    values = np.full(4, MP_IMPUTE)
    mask = np.zeros(4)
    if rec.mp is not None:
        for i, d in enumerate(DIMENSIONS):
            if rec.mp.present[d]:
                values[i] = rec.mp.values[d]
                mask[i] = 1.0
    return values, mask


def make_batches(sequences: list[StudentSequence], problems: dict[str, Problem],
                 vocab: Vocab, max_len: int = 200, batch_size: int = 16) -> list[Batch]:
    """Window, shift, pad, and group sequences into batches.

    Sequences longer than ``max_len`` are chunked into consecutive
    windows; the last real position of each window carries no target.
    """
    if max_len < 2:
        raise ValueError(f"max_len must be >= 2, got {max_len}")
    windows = []
    for seq in sequences:
        for start in range(0, len(seq.steps), max_len):
            windows.append(seq.steps[start:start + max_len])

    batches = []
    for b0 in range(0, len(windows), batch_size):
        group = windows[b0:b0 + batch_size]
        B = len(group)
        q = np.zeros((B, max_len), dtype=np.int64)
        c = np.zeros((B, max_len), dtype=np.int64)
        r = np.zeros((B, max_len), dtype=np.int64)
        mp_in = np.zeros((B, max_len, 8))
        tgt_r = np.zeros((B, max_len))
        tgt_mp = np.zeros((B, max_len, 4))
        tgt_mp_mask = np.zeros((B, max_len, 4))
        valid = np.zeros((B, max_len))
        for bi, steps in enumerate(group):
            for t, rec in enumerate(steps):
                problem = problems[rec.problem_id]
                q[bi, t] = vocab.question_index[rec.problem_id]
                c[bi, t] = vocab.concept_index[problem.kc_ids[0]]
                r[bi, t] = rec.correct
                values, mask = _mp_features(rec)
                mp_in[bi, t, :4] = values
                mp_in[bi, t, 4:] = mask
                valid[bi, t] = 1.0
                if t + 1 < len(steps):
                    nxt = steps[t + 1]
                    tgt_r[bi, t] = nxt.correct
                    nvalues, nmask = _mp_features(nxt)
                    tgt_mp[bi, t] = nvalues
                    tgt_mp_mask[bi, t] = nmask
        batches.append(Batch(question_ids=q, concept_ids=c, correctness=r,
                             mp_inputs=mp_in, targets_correct=tgt_r,
                             targets_mp=tgt_mp, target_mp_mask=tgt_mp_mask,
                             valid_mask=valid))
    return batches
