"""Mini-batch training for the chained-CRF classifier.

Two parameter groups learn at different speeds: the hashed-feature label
weights (a stand-in for a fine-tuned encoder, so it needs a much larger
step) and the CRF transition/start scores.  Optimization is plain Adam
with a deterministic seeded shuffle and serial batch reduction, so a
(seed, data, config) triple always reproduces the same parameters bit
for bit.  Early stopping watches dev Micro-F1 and restores the best
snapshot.

The trained model round-trips through a small versioned binary file:
magic, a canonical JSON header (dims, schedule, mode, seed, config,
taxonomy hash), then the U / T / start arrays as little-endian f64.
"""
from __future__ import annotations

import json
import random
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .chain import ChainSchedule, build_schedule, golden_sequence
from .emission import (
    DEFAULT_DIM,
    EmissionMatrix,
    FeatureVector,
    VerbalizerParams,
    emit,
    hash_features,
    init_verbalizer,
    load_emissions,
)
from .errors import (
    DivergenceError,
    EmptyDataset,
    FormatError,
    InvalidArgument,
    NumericalError,
    TruncationError,
    ValidationError,
)
from .fewshot import Example
from .icrf import FAITHFUL, MODES, CrfParams, argmax_decode, decode, init_transitions, nll_and_grads
from .metrics import evaluate
from .taxonomy import Taxonomy

__all__ = [
    "TrainConfig",
    "SurrogateEmitter",
    "FileEmitter",
    "fit",
    "predict_sets",
    "save_model",
    "load_model",
    "MODEL_MAGIC",
    "MODEL_VERSION",
]

MODEL_MAGIC = b"ICRFMODL"
MODEL_VERSION = 1
_MODEL_HEADER = struct.Struct("<8sIQ")


@dataclass(frozen=True)
class TrainConfig:
    seed: int
    epochs: int = 20
    batch_size: int = 8
    lr: float = 1e-4
    lr_features: float = 1e-2
    patience: int = 5
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    mode: str = FAITHFUL
    no_icrf: bool = False

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise InvalidArgument(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise InvalidArgument(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience < 1:
            raise InvalidArgument(f"patience must be >= 1, got {self.patience}")
        if self.lr <= 0 or self.lr_features <= 0:
            raise InvalidArgument("learning rates must be positive")
        if self.mode not in MODES:
            raise InvalidArgument(f"mode must be one of {MODES}, got {self.mode!r}")


class SurrogateEmitter:
    """Trainable emission route: hashed bag-of-words times label weights."""

    trainable = True

    def __init__(self, tax: Taxonomy, r: int = DEFAULT_DIM, gain: float = 1.0):
        self.params = init_verbalizer(tax, r, gain=gain)
        self.r = r
        self._cache: dict[str, FeatureVector] = {}

    @classmethod
    def from_params(cls, params: VerbalizerParams) -> "SurrogateEmitter":
        """Wrap already-trained weights (e.g. read back from a model file)."""
        self = cls.__new__(cls)
        self.params = params
        self.r = params.weight.shape[1]
        self._cache = {}
        return self

    def features(self, ex: Example) -> FeatureVector:
        fv = self._cache.get(ex.id)
        if fv is None:
            fv = hash_features(ex.text, self.r)
            self._cache[ex.id] = fv
        return fv

    def logits(self, ex: Example, schedule: ChainSchedule) -> EmissionMatrix:
        return emit(self.features(ex), self.params, schedule)


class FileEmitter:
    """Fixed per-example logits read from an emissions file; never trained."""

    trainable = False
    params = None

    def __init__(self, path, schedule: ChainSchedule, tax: Taxonomy):
        self._store: dict[str, EmissionMatrix] = {}
        for ex_id, mat in load_emissions(path, schedule=schedule, expected_m=tax.m):
            self._store[ex_id] = mat

    def __len__(self) -> int:
        return len(self._store)

    def logits(self, ex: Example, schedule: ChainSchedule) -> EmissionMatrix:
        try:
            return self._store[ex.id]
        except KeyError:
            raise InvalidArgument(f"no emissions stored for example id {ex.id!r}") from None


class _Adam:
    def __init__(self, shape, lr: float, b1: float, b2: float, eps: float):
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.t = 0

    def step(self, param: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        self.m = self.b1 * self.m + (1.0 - self.b1) * grad
        self.v = self.b2 * self.v + (1.0 - self.b2) * grad * grad
        m_hat = self.m / (1.0 - self.b1**self.t)
        v_hat = self.v / (1.0 - self.b2**self.t)
        param -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _per_level_ce(z: np.ndarray, gold, tax: Taxonomy, schedule: ChainSchedule):
    """Chain-free objective: independent softmax over each slot's own level."""
    loss = 0.0
    grad = np.zeros_like(z)
    for i, level in enumerate(schedule.levels):
        ids = tax.ids_at_level(level)
        row = z[i, ids]
        lse = logsumexp(row)
        grad[i, ids] = np.exp(row - lse)
        grad[i, gold[i]] -= 1.0
        loss += lse - z[i, gold[i]]
    return float(loss), grad


def predict_sets(examples, emitter, crf, tax, schedule, no_icrf: bool = False):
    """Decode every example into (predicted per-level set, gold set) pairs."""
    out = []
    for ex in examples:
        z = emitter.logits(ex, schedule)
        if no_icrf:
            res = argmax_decode(z, tax, schedule)
        else:
            res = decode(z, crf, schedule)
        out.append((set(res.per_level), set(ex.path)))
    return out


def _dev_micro(dev, emitter, crf, tax, schedule, config) -> float:
    samples = predict_sets(dev, emitter, crf, tax, schedule, no_icrf=config.no_icrf)
    return evaluate(samples, tax).micro_f1


def fit(
    train: list[Example],
    dev: list[Example],
    emitter,
    tax: Taxonomy,
    schedule: ChainSchedule,
    config: TrainConfig,
):
    """Train emissions + CRF jointly; returns (VerbalizerParams | None, CrfParams, log)."""
    if not train:
        raise EmptyDataset("training set is empty")
    crf = init_transitions(tax, schedule, config.mode)
    golden = [golden_sequence(ex.path, schedule) for ex in train]

    adam_T = _Adam(crf.transitions.shape, config.lr, config.beta1, config.beta2, config.adam_eps)
    adam_S = _Adam(crf.start.shape, config.lr, config.beta1, config.beta2, config.adam_eps)
    adam_U = None
    if emitter.trainable:
        adam_U = _Adam(
            emitter.params.weight.shape,
            config.lr_features,
            config.beta1,
            config.beta2,
            config.adam_eps,
        )

    rng = random.Random(config.seed)
    order = list(range(len(train)))
    log: list[dict] = []
    best_micro = -1.0
    best_snap = None
    stale = 0

    for epoch in range(1, config.epochs + 1):
        rng.shuffle(order)
        epoch_loss = 0.0
        for lo in range(0, len(order), config.batch_size):
            batch = order[lo : lo + config.batch_size]
            g_T = np.zeros_like(crf.transitions)
            g_S = np.zeros_like(crf.start)
            g_U = np.zeros_like(emitter.params.weight) if adam_U is not None else None
            loss = 0.0
            for idx in batch:
                ex = train[idx]
                try:
                    # ValidationError here means the trained feature weights
                    # pushed a logit out of float range — divergence, not bad input.
                    z = emitter.logits(ex, schedule)
                    if config.no_icrf:
                        nll, g_z = _per_level_ce(z.logits, golden[idx], tax, schedule)
                    else:
                        nll, g_z, g_T_i, g_S_i = nll_and_grads(z, golden[idx], crf)
                        g_T += g_T_i
                        g_S += g_S_i
                except (NumericalError, ValidationError) as exc:
                    raise DivergenceError(
                        f"loss for example {ex.id!r} diverged in epoch {epoch}: {exc}"
                    ) from exc
                loss += nll
                if g_U is not None:
                    fv = emitter.features(ex)
                    g_U[:, fv.indices] += np.outer(g_z.sum(axis=0), fv.weights)
            n = len(batch)
            loss /= n
            if not np.isfinite(loss):
                raise DivergenceError(f"training loss became non-finite in epoch {epoch}")
            epoch_loss += loss * n
            if not config.no_icrf:
                adam_T.step(crf.transitions, g_T / n)
                adam_S.step(crf.start, g_S / n)
            if adam_U is not None:
                adam_U.step(emitter.params.weight, g_U / n)

        record = {"epoch": epoch, "train_nll": epoch_loss / len(order)}
        if dev:
            try:
                micro = _dev_micro(dev, emitter, crf, tax, schedule, config)
            except (NumericalError, ValidationError) as exc:
                raise DivergenceError(
                    f"held-out scoring diverged after epoch {epoch}: {exc}"
                ) from exc
            record["dev_micro_f1"] = micro
            if micro > best_micro:
                best_micro = micro
                best_snap = _snapshot(emitter, crf)
                stale = 0
            else:
                stale += 1
        log.append(record)
        if dev and stale >= config.patience:
            break

    if best_snap is not None:
        _restore(emitter, crf, best_snap)
    return emitter.params, crf, log


def _snapshot(emitter, crf: CrfParams):
    return {
        "U": None if emitter.params is None else emitter.params.weight.copy(),
        "T": crf.transitions.copy(),
        "start": crf.start.copy(),
    }


def _restore(emitter, crf: CrfParams, snap) -> None:
    if snap["U"] is not None:
        emitter.params.weight[...] = snap["U"]
    crf.transitions[...] = snap["T"]
    crf.start[...] = snap["start"]


# -- model persistence ----------------------------------------------------


def save_model(
    path,
    verbalizer: VerbalizerParams | None,
    crf: CrfParams,
    tax: Taxonomy,
    schedule: ChainSchedule,
    config: TrainConfig,
) -> None:
    """Write a versioned binary model file; byte-identical for identical runs."""
    U = (
        np.zeros((tax.m, 0))
        if verbalizer is None
        else np.asarray(verbalizer.weight, dtype=np.float64)
    )
    header = {
        "dims": {"m": tax.m, "r": int(U.shape[1]), "l": schedule.l},
        "depth": schedule.depth,
        "iterations": schedule.iterations,
        "mode": crf.mode,
        "tau_soft": crf.tau_soft,
        "tau_hard": crf.tau_hard,
        "seed": config.seed,
        "config": asdict(config),
        "taxonomy_hash": tax.content_hash(),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MODEL_HEADER.pack(MODEL_MAGIC, MODEL_VERSION, len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(U, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(crf.transitions, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(crf.start, dtype="<f8").tobytes())


def load_model(path, tax: Taxonomy):
    """Read a model file back into (VerbalizerParams, CrfParams, schedule, header)."""
    raw = Path(path).read_bytes()
    if len(raw) < _MODEL_HEADER.size:
        raise FormatError("model file shorter than its fixed header")
    magic, version, blob_len = _MODEL_HEADER.unpack_from(raw)
    if magic != MODEL_MAGIC:
        raise FormatError(f"bad model magic {magic!r}")
    if version != MODEL_VERSION:
        raise FormatError(f"unsupported model version {version}")
    off = _MODEL_HEADER.size
    if len(raw) < off + blob_len:
        raise TruncationError("model header JSON truncated")
    header = json.loads(raw[off : off + blob_len].decode("utf-8"))
    off += blob_len

    if header["taxonomy_hash"] != tax.content_hash():
        raise ValidationError("model was trained against a different taxonomy")
    m, r = header["dims"]["m"], header["dims"]["r"]
    schedule = build_schedule(header["depth"], header["iterations"])

    def take(count):
        nonlocal off
        nbytes = count * 8
        if len(raw) < off + nbytes:
            raise TruncationError("model parameter payload truncated")
        arr = np.frombuffer(raw[off : off + nbytes], dtype="<f8").astype(np.float64)
        off += nbytes
        return arr

    U = take(m * r).reshape(m, r)
    T = take(m * m).reshape(m, m)
    start = take(m)
    if off != len(raw):
        raise FormatError(f"{len(raw) - off} trailing bytes after model payload")

    crf = init_transitions(tax, schedule, header["mode"])
    crf.transitions[...] = T
    crf.start[...] = start
    return VerbalizerParams(weight=U), crf, schedule, header
