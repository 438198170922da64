"""Hierarchy-constrained linear-chain CRF: scoring, exact inference, decoding.

All scores live in log space.  A label sequence y of length l is scored

    score(y) = start[y_0] + sum_i z[i, y_i] + sum_{i>=1} T[y_{i-1}, y_i]

and the chain distribution is p(y) = exp(score(y)) / Z.  The forward
recursion computes log Z with log-sum-exp; forward-backward yields exact
node and edge posteriors; Viterbi swaps sum for max.  Everything runs in
double precision.

Hierarchy knowledge enters through initialization.  Label pairs whose
levels can follow each other in the chain schedule start at 0; every
other pair starts at a penalty.  Two regimes:

  * ``faithful`` — the penalty is a finite, learnable tau_soft, matching
    a setup where transitions are trained rather than clamped;
  * ``strict`` — the penalty is the effectively forbidden tau_hard and
    frozen; transitions within legal level pairs are additionally
    restricted to parent/child edges (and, across the level-1 -> level-D
    iteration boundary, to descendants of the level-1 label), and each
    position is masked to labels of its scheduled level.  Decoded
    per-level readouts are then guaranteed to form a root-to-leaf path.

Viterbi ties are broken toward the lexicographically smallest label-id
sequence: the best-score table is built backward, and the sequence is
then grown front-to-back always taking the smallest label that still
attains the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .chain import ChainSchedule
from .emission import EmissionMatrix
from .errors import (
    DimensionMismatch,
    InvalidArgument,
    LengthMismatch,
    NumericalError,
)
from .taxonomy import Taxonomy, legal_level_pairs

FAITHFUL = "faithful"
STRICT = "strict"
MODES = (FAITHFUL, STRICT)

TAU_SOFT = -10.0
TAU_HARD = -1e30


@dataclass
class CrfParams:
    transitions: np.ndarray  # (m, m) log-space score for y_prev -> y
    start: np.ndarray  # (m,) log-space score of the first label
    mode: str = FAITHFUL
    frozen_mask: np.ndarray | None = None  # (m, m) bool, True = never updated
    frozen_start: np.ndarray | None = None  # (m,) bool
    levels: np.ndarray | None = None  # (m,) taxonomy level per label id
    tau_soft: float = TAU_SOFT
    tau_hard: float = TAU_HARD

    def __post_init__(self):
        m = self.transitions.shape[0]
        if self.transitions.shape != (m, m) or self.start.shape != (m,):
            raise DimensionMismatch(
                f"transitions {self.transitions.shape} and start {self.start.shape} disagree"
            )
        if self.frozen_mask is None:
            self.frozen_mask = np.zeros((m, m), dtype=bool)
        if self.frozen_start is None:
            self.frozen_start = np.zeros(m, dtype=bool)

    @property
    def m(self) -> int:
        return self.start.shape[0]

    def clone(self) -> "CrfParams":
        return CrfParams(
            transitions=self.transitions.copy(),
            start=self.start.copy(),
            mode=self.mode,
            frozen_mask=self.frozen_mask.copy(),
            frozen_start=self.frozen_start.copy(),
            levels=None if self.levels is None else self.levels.copy(),
            tau_soft=self.tau_soft,
            tau_hard=self.tau_hard,
        )


@dataclass(frozen=True)
class DecodeResult:
    sequence: tuple[int, ...]  # best label per chain position
    per_level: tuple[int, ...]  # readout: label at the last position of each level
    score: float  # unnormalized score of `sequence`
    log_partition: float


def init_transitions(
    tax: Taxonomy,
    schedule: ChainSchedule,
    mode: str = FAITHFUL,
    tau_soft: float = TAU_SOFT,
    tau_hard: float = TAU_HARD,
) -> CrfParams:
    """Transition/start scores encoding the hierarchy, per the mode rules above."""
    if mode not in MODES:
        raise InvalidArgument(f"mode must be one of {MODES}, got {mode!r}")
    if not (tau_hard < tau_soft < 0.0):
        raise InvalidArgument(
            f"tau ordering violated: need tau_hard < tau_soft < 0, got {tau_hard}, {tau_soft}"
        )
    m = tax.m
    lv = np.array(tax.levels, dtype=np.int64)
    pairs = legal_level_pairs(tax, schedule)

    legal = np.zeros((m, m), dtype=bool)
    for u, v in pairs:
        legal |= np.outer(lv == u, lv == v)

    if mode == FAITHFUL:
        T = np.where(legal, 0.0, tau_soft)
        frozen = np.zeros((m, m), dtype=bool)
    else:
        allowed = np.zeros((m, m), dtype=bool)
        parent = np.array([-1 if n.parent is None else n.parent for n in tax.nodes])
        anc1 = np.array([tax.level1_ancestor(i) for i in range(m)])
        for u, v in pairs:
            if v == u + 1:
                # descend one level: successor must be a child of the predecessor
                for b in range(m):
                    if lv[b] == v and parent[b] >= 0:
                        allowed[parent[b], b] = True
            elif v == u - 1:
                # climb one level: successor must be the predecessor's parent
                for a in range(m):
                    if lv[a] == u and parent[a] >= 0:
                        allowed[a, parent[a]] = True
            else:
                # iteration boundary (1, D): restart anywhere below the same
                # level-1 label (for D == 1 this pins the label itself)
                for b in range(m):
                    if lv[b] == v:
                        allowed[anc1[b], b] = True
        T = np.where(allowed, 0.0, tau_hard)
        frozen = ~allowed

    first_level = schedule.levels[0]
    start_legal = lv == first_level
    if mode == FAITHFUL:
        start = np.where(start_legal, 0.0, tau_soft)
        frozen_start = np.zeros(m, dtype=bool)
    else:
        start = np.where(start_legal, 0.0, tau_hard)
        frozen_start = ~start_legal

    return CrfParams(
        transitions=T.astype(np.float64),
        start=start.astype(np.float64),
        mode=mode,
        frozen_mask=frozen,
        frozen_start=frozen_start,
        levels=lv,
        tau_soft=tau_soft,
        tau_hard=tau_hard,
    )


def _effective_logits(z: EmissionMatrix, params: CrfParams, schedule: ChainSchedule | None = None):
    """Emission logits with the strict per-position level mask folded in."""
    logits = z.logits
    if logits.shape[1] != params.m:
        raise DimensionMismatch(f"logits have {logits.shape[1]} labels, params have {params.m}")
    if params.mode == STRICT:
        sched = schedule if schedule is not None else z.schedule
        if sched is None:
            raise InvalidArgument("strict mode needs the chain schedule to mask positions")
        if sched.l != logits.shape[0]:
            raise LengthMismatch(f"schedule l={sched.l} vs {logits.shape[0]} logit rows")
        if params.levels is None:
            raise InvalidArgument("strict mode needs per-label levels on CrfParams")
        wanted = np.asarray(sched.levels)[:, None]  # (l, 1)
        mask = np.where(params.levels[None, :] == wanted, 0.0, params.tau_hard)
        logits = logits + mask
    return logits


def _score_raw(Z: np.ndarray, y, params: CrfParams) -> float:
    l = Z.shape[0]
    if len(y) != l:
        raise LengthMismatch(f"sequence has length {len(y)}, emissions have {l} positions")
    score = params.start[y[0]] + Z[0, y[0]]
    for i in range(1, l):
        score = score + params.transitions[y[i - 1], y[i]] + Z[i, y[i]]
    return float(score)


def sequence_score(z: EmissionMatrix, y, params: CrfParams) -> float:
    """Unnormalized log-space score of one label sequence."""
    return _score_raw(_effective_logits(z, params), y, params)


def _forward(Z: np.ndarray, params: CrfParams) -> np.ndarray:
    l = Z.shape[0]
    alphas = np.empty_like(Z)
    alphas[0] = params.start + Z[0]
    for i in range(1, l):
        alphas[i] = Z[i] + logsumexp(alphas[i - 1][:, None] + params.transitions, axis=0)
    return alphas


def _backward(Z: np.ndarray, params: CrfParams) -> np.ndarray:
    l = Z.shape[0]
    betas = np.zeros_like(Z)
    for i in range(l - 2, -1, -1):
        betas[i] = logsumexp(params.transitions + (Z[i + 1] + betas[i + 1])[None, :], axis=1)
    return betas


def _log_partition_raw(Z: np.ndarray, params: CrfParams) -> float:
    out = float(logsumexp(_forward(Z, params)[-1]))
    if np.isnan(out):
        raise NumericalError("log_partition is NaN")
    return out


def log_partition(z: EmissionMatrix, params: CrfParams) -> float:
    """log sum over all m^l sequences of exp(score), by the forward recursion."""
    return _log_partition_raw(_effective_logits(z, params), params)


def posterior_marginals(z: EmissionMatrix, params: CrfParams):
    """Exact node (l, m) and edge (l-1, m, m) posteriors via forward-backward."""
    Z = _effective_logits(z, params)
    l, m = Z.shape
    alphas = _forward(Z, params)
    betas = _backward(Z, params)
    logz = float(logsumexp(alphas[-1]))
    if np.isnan(logz):
        raise NumericalError("partition is NaN in forward-backward")
    node = np.exp(alphas + betas - logz)
    edge = np.empty((max(l - 1, 0), m, m))
    for i in range(l - 1):
        edge[i] = np.exp(
            alphas[i][:, None] + params.transitions + (Z[i + 1] + betas[i + 1])[None, :] - logz
        )
    if np.isnan(node).any() or np.isnan(edge).any():
        raise NumericalError("NaN in posterior marginals")
    return node, edge


def nll_and_grads(z: EmissionMatrix, y_gold, params: CrfParams):
    """Negative log-likelihood of the gold sequence and its exact gradients.

    Gradients are expected counts minus observed counts; entries under a
    frozen mask are zeroed so optimizers cannot move them.
    """
    Z = _effective_logits(z, params)
    l, m = Z.shape
    if len(y_gold) != l:
        raise LengthMismatch(f"gold sequence has length {len(y_gold)}, expected {l}")
    node, edge = posterior_marginals(z, params)
    nll = log_partition(z, params) - sequence_score(z, y_gold, params)
    if np.isnan(nll):
        raise NumericalError("nll is NaN")

    grad_z = node.copy()
    grad_z[np.arange(l), y_gold] -= 1.0

    grad_T = edge.sum(axis=0) if l > 1 else np.zeros((m, m))
    for i in range(1, l):
        grad_T[y_gold[i - 1], y_gold[i]] -= 1.0
    grad_T[params.frozen_mask] = 0.0

    grad_start = node[0].copy()
    grad_start[y_gold[0]] -= 1.0
    grad_start[params.frozen_start] = 0.0

    return float(nll), grad_z, grad_T, grad_start


def decode(z: EmissionMatrix, params: CrfParams, schedule: ChainSchedule) -> DecodeResult:
    """Viterbi max-decode with deterministic lexicographic tie-breaking.

    best[i][a] is the best score of any suffix starting at position i in
    label a; walking forward and always taking the first (= smallest id)
    label attaining the optimum yields the lexicographically smallest
    argmax sequence.
    """
    Z = _effective_logits(z, params, schedule)
    l, m = Z.shape
    if schedule.l != l:
        raise LengthMismatch(f"schedule l={schedule.l} vs {l} emission rows")

    best = np.empty_like(Z)
    best[l - 1] = Z[l - 1]
    for i in range(l - 2, -1, -1):
        best[i] = Z[i] + (params.transitions + best[i + 1][None, :]).max(axis=1)

    first = params.start + best[0]
    if np.isnan(first).any():
        raise NumericalError("NaN in Viterbi trellis")
    sequence = [int(np.argmax(first))]
    for i in range(1, l):
        step = params.transitions[sequence[-1]] + best[i]
        sequence.append(int(np.argmax(step)))

    per_level = [-1] * schedule.depth
    for i, level in enumerate(schedule.levels):
        per_level[level - 1] = sequence[i]

    return DecodeResult(
        sequence=tuple(sequence),
        per_level=tuple(per_level),
        score=_score_raw(Z, sequence, params),
        log_partition=_log_partition_raw(Z, params),
    )


def argmax_decode(z: EmissionMatrix, tax: Taxonomy, schedule: ChainSchedule) -> DecodeResult:
    """Chain-free baseline: per-position argmax among the position's own level.

    Drops all transition structure — each slot independently takes the
    best label of the level the schedule puts there, then the usual
    last-occurrence readout applies.  Score/partition are those of the
    factorized (independent-slot) model, so score <= log_partition still
    holds.
    """
    logits = z.logits
    l = logits.shape[0]
    if schedule.l != l:
        raise LengthMismatch(f"schedule l={schedule.l} vs {l} emission rows")
    by_level = {v: np.array(tax.ids_at_level(v)) for v in set(schedule.levels)}
    sequence = []
    score = 0.0
    logz = 0.0
    for i, level in enumerate(schedule.levels):
        ids = by_level[level]
        row = logits[i, ids]
        sequence.append(int(ids[int(np.argmax(row))]))
        score += float(row.max())
        logz += float(logsumexp(row))
    per_level = [-1] * schedule.depth
    for i, level in enumerate(schedule.levels):
        per_level[level - 1] = sequence[i]
    return DecodeResult(
        sequence=tuple(sequence), per_level=tuple(per_level), score=score, log_partition=logz
    )
