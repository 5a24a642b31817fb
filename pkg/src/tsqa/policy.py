"""Candidate extraction and a hand-differentiated answer-selection policy.

Answers are selected, not generated: every distinct fact object mentioned
in the context becomes a candidate, plus one reserved empty candidate
that realizes abstention.  A two-layer perceptron scores candidates from
features built on the fused text+time embeddings; a linear value head
reads a pooled state vector.  All gradients are written out analytically,
including the scatter back into the shared embedding tables, so training
needs no autodiff framework.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .config import FeatureConfig
from .facts import FactIndex, ResolutionError, _subseq_at, infer_question_pair, mine_proximal, mine_remote
from .features import (
    EmbeddingTables,
    FusedSequence,
    TemporalMask,
    Vocabulary,
    build_mask,
    concat_masks,
    dilate,
    fuse,
)
from .fileio import write_atomic
from .intervals import MonthInterval
from .metrics import normalize_answer
from .tagger import parse_question_time, tag, tokenize

# Interval features saturate at ten years so far-apart periods stop
# dominating the scale.
_GAP_CLAMP_MONTHS = 120.0


# ---------------------------------------------------------------------------
# Candidates.


@dataclass(frozen=True)
class Candidate:
    """One answer option; empty text is the abstain option."""

    text: str
    tok_start: Optional[int] = None  # context token span, half-open
    tok_end: Optional[int] = None
    fact_interval: Optional[MonthInterval] = None

    @property
    def is_empty(self) -> bool:
        return self.text == ""


@dataclass
class CandidateSet:
    candidates: list[Candidate]

    def __post_init__(self) -> None:
        texts = [c.text for c in self.candidates]
        if len(set(texts)) != len(texts):
            raise ValueError("duplicate candidate texts")
        if texts.count("") != 1:
            raise ValueError("exactly one empty candidate required")

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def __getitem__(self, i: int) -> Candidate:
        return self.candidates[i]

    @property
    def texts(self) -> list[str]:
        return [c.text for c in self.candidates]

    @property
    def empty_index(self) -> int:
        return next(i for i, c in enumerate(self.candidates) if c.is_empty)


def extract_candidates(record, index: FactIndex, ctx_tokens=None) -> CandidateSet:
    """Candidates = distinct objects of facts whose subject is mentioned
    in the context, each with its first context mention, ordered by
    mention position; the empty candidate comes last."""
    if ctx_tokens is None:
        ctx_tokens = tokenize(record.context)
    low = [t.text.lower() for t in ctx_tokens]

    present: set[str] = set()
    for subject in index.subjects:
        toks = [t.text.lower() for t in tokenize(subject)]
        if toks and _subseq_at(low, toks) is not None:
            present.add(subject)

    found: dict[str, tuple[int, int, MonthInterval]] = {}
    for fact in index.facts:
        if fact.subject not in present:
            continue
        if fact.object in found:
            # Same object again: keep the chronologically first interval.
            start, end, iv = found[fact.object]
            if fact.interval.lo < iv.lo:
                found[fact.object] = (start, end, fact.interval)
            continue
        toks = [t.text.lower() for t in tokenize(fact.object)]
        pos = _subseq_at(low, toks) if toks else None
        if pos is None:
            continue
        found[fact.object] = (pos, pos + len(toks), fact.interval)

    ordered = sorted(found.items(), key=lambda kv: (kv[1][0], kv[1][1], kv[0]))
    cands = [Candidate(text, s, e, iv) for text, (s, e, iv) in ordered]
    cands.append(Candidate(""))
    return CandidateSet(cands)


# ---------------------------------------------------------------------------
# Record compilation: everything static per record, computed once.


@dataclass
class CompiledRecord:
    id: str
    question_type: object
    gold_answers: list[str]
    spec: object
    token_ids: np.ndarray  # question tokens then context tokens
    bits: np.ndarray  # dilated temporal mask over the same axis
    question_len: int
    candidates: CandidateSet
    gold_index: int  # -1 when the gold matches no candidate
    window_pos: list[np.ndarray]  # per candidate, fused-row indices
    interval_feats: np.ndarray  # (K, 3): overlap, gap, presence
    density: np.ndarray  # (K,) mask density in the mention window
    pooled_extra: np.ndarray  # (3,) question-interval summary
    q_interval: Optional[MonthInterval]  # from the question or its event
    subject: Optional[str]
    relation: Optional[str]
    remote_pool: list[str]
    proximal_pool: list[str]


def _window_positions(
    tok_start: int, tok_end: int, question_len: int, total: int, window: int
) -> np.ndarray:
    lo = max(0, question_len + tok_start - window)
    hi = min(total - 1, question_len + tok_end - 1 + window)
    return np.arange(lo, hi + 1)


def _interval_row(q_iv: Optional[MonthInterval], c_iv: Optional[MonthInterval]) -> np.ndarray:
    if q_iv is None or c_iv is None:
        return np.zeros(3)
    overlap = q_iv.overlap_months(c_iv) / q_iv.length_months()
    if c_iv.lo > q_iv.hi:
        gap = float(c_iv.lo - q_iv.hi)
    elif c_iv.hi < q_iv.lo:
        gap = -float(q_iv.lo - c_iv.hi)
    else:
        gap = 0.0
    gap = float(np.clip(gap, -_GAP_CLAMP_MONTHS, _GAP_CLAMP_MONTHS)) / _GAP_CLAMP_MONTHS
    return np.array([overlap, gap, 1.0])


def compile_record(
    record, index: Optional[FactIndex], vocab: Vocabulary, config: FeatureConfig
) -> CompiledRecord:
    idx = index if index is not None else FactIndex(record.facts)
    q_tokens = tokenize(record.question)
    ctx_tokens = tokenize(record.context)
    spec = record.time_spec
    if spec is None:
        spec = parse_question_time(q_tokens, tag(q_tokens))

    q_mask = dilate(build_mask(len(q_tokens), tag(q_tokens)), config.window)
    c_mask = dilate(build_mask(len(ctx_tokens), tag(ctx_tokens)), config.window)
    bits = concat_masks(q_mask, c_mask).bits
    token_ids = np.concatenate([vocab.encode(q_tokens), vocab.encode(ctx_tokens)])
    n_q, total = len(q_tokens), len(token_ids)

    candidates = extract_candidates(record, idx, ctx_tokens)

    # The question's own interval, resolving era references through the
    # fact store.  Deliberately never fall back to the gold fact here:
    # features must not encode which candidate is correct.
    q_iv = spec.interval
    if q_iv is None and spec.event_name:
        try:
            q_iv = idx.event_interval(spec.event_name)
        except ResolutionError:
            q_iv = None

    window_pos = []
    rows = []
    density = np.zeros(len(candidates))
    for k, cand in enumerate(candidates):
        if cand.is_empty or cand.tok_start is None:
            window_pos.append(np.arange(0))
            rows.append(np.zeros(3))
            continue
        pos = _window_positions(cand.tok_start, cand.tok_end, n_q, total, config.window)
        window_pos.append(pos)
        rows.append(_interval_row(q_iv, cand.fact_interval))
        if pos.size:
            density[k] = float(bits[pos].mean())
    interval_feats = np.stack(rows) if rows else np.zeros((0, 3))

    if q_iv is None:
        pooled_extra = np.array([0.0, 0.0, 1.0 if spec.event_name else 0.0])
    else:
        scaled = min(float(q_iv.length_months()), _GAP_CLAMP_MONTHS) / _GAP_CLAMP_MONTHS
        pooled_extra = np.array([1.0, scaled, 1.0 if spec.event_name else 0.0])

    gold_index = -1
    norm_texts = [normalize_answer(t) for t in candidates.texts]
    for gold in record.gold_answers:
        g = normalize_answer(gold)
        if g == "":
            gold_index = candidates.empty_index
            break
        if g in norm_texts:
            gold_index = norm_texts.index(g)
            break

    subject, relation = infer_question_pair(record.question, idx)
    gold = record.gold_answers[0] if record.gold_answers else ""
    mine_iv = q_iv
    if mine_iv is None and gold:
        # Mining may anchor on the gold fact's own period (the reward side
        # already knows the gold answer).
        own = [f for f in idx.facts if f.object == gold]
        if subject is not None:
            own = [f for f in own if f.subject == subject] or own
        if own:
            mine_iv = min(own, key=lambda f: f.interval.lo).interval
    remote_pool: list[str] = []
    proximal_pool: list[str] = []
    if subject is not None and relation is not None and mine_iv is not None:
        remote_pool = mine_remote(subject, relation, gold, mine_iv, idx)
        proximal_pool = mine_proximal(subject, relation, gold, mine_iv, idx)

    return CompiledRecord(
        id=record.id,
        question_type=record.question_type,
        gold_answers=list(record.gold_answers),
        spec=spec,
        token_ids=token_ids,
        bits=bits,
        question_len=n_q,
        candidates=candidates,
        gold_index=gold_index,
        window_pos=window_pos,
        interval_feats=interval_feats,
        density=density,
        pooled_extra=pooled_extra,
        q_interval=q_iv,
        subject=subject,
        relation=relation,
        remote_pool=remote_pool,
        proximal_pool=proximal_pool,
    )


def compile_dataset(
    records: Sequence, index: Optional[FactIndex], vocab: Vocabulary, config: FeatureConfig
) -> list[CompiledRecord]:
    return [compile_record(r, index, vocab, config) for r in records]


# ---------------------------------------------------------------------------
# Parameters.


@dataclass
class PolicyParams:
    text_table: np.ndarray  # (V, d)
    time_table: np.ndarray  # (2, d)
    W1: np.ndarray  # (H, F)
    b1: np.ndarray  # (H,)
    W2: np.ndarray  # (1, H)
    b2: np.ndarray  # (1,)
    Wv: np.ndarray  # (1, F̄)
    bv: np.ndarray  # (1,)

    def __post_init__(self) -> None:
        for name, t in self.named_tensors():
            if not np.isfinite(t).all():
                raise ValueError(f"non-finite values in {name}")
        if self.text_table.shape[1] != self.time_table.shape[1]:
            raise ValueError("text and time tables disagree on embedding width")
        if self.time_table.shape[0] != 2:
            raise ValueError("time table must have exactly two rows")
        if self.W1.shape[0] != self.b1.shape[0] or self.W2.shape[1] != self.W1.shape[0]:
            raise ValueError("perceptron shapes inconsistent")

    def named_tensors(self) -> list[tuple[str, np.ndarray]]:
        # Fixed order; the checkpoint format and optimizer state rely on it.
        return [
            ("text_table", self.text_table),
            ("time_table", self.time_table),
            ("W1", self.W1),
            ("b1", self.b1),
            ("W2", self.W2),
            ("b2", self.b2),
            ("Wv", self.Wv),
            ("bv", self.bv),
        ]

    def clone(self) -> "PolicyParams":
        return PolicyParams(*(t.copy() for _, t in self.named_tensors()))


def zeros_like_params(params: PolicyParams) -> PolicyParams:
    return PolicyParams(*(np.zeros_like(t) for _, t in params.named_tensors()))


@dataclass(frozen=True)
class PolicyDims:
    vocab_size: int
    embed_dim: int
    hidden: int
    feature_dim: int
    pooled_dim: int

    @classmethod
    def from_config(cls, vocab_size: int, config: FeatureConfig) -> "PolicyDims":
        fw = config.fused_width
        return cls(vocab_size, config.embed_dim, config.hidden, 2 * fw + 4, fw + 3)


def init_params(rng: np.random.Generator, dims: PolicyDims) -> PolicyParams:
    """Uniform fan-balanced weights, zero biases, and a zero time table so
    the fresh model coincides with the no-temporal baseline."""

    def uniform(shape, fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=shape)

    V, d = dims.vocab_size, dims.embed_dim
    H, F, Fb = dims.hidden, dims.feature_dim, dims.pooled_dim
    return PolicyParams(
        text_table=uniform((V, d), V, d),
        time_table=np.zeros((2, d)),
        W1=uniform((H, F), F, H),
        b1=np.zeros(H),
        W2=uniform((1, H), H, 1),
        b2=np.zeros(1),
        Wv=uniform((1, Fb), Fb, 1),
        bv=np.zeros(1),
    )


# ---------------------------------------------------------------------------
# Featurization against current parameters.


@dataclass
class RecordFeatures:
    """Per-candidate feature matrix plus the table rows that built it.

    The row bookkeeping (token id and mask bit per contributing fused row)
    is what lets backward scatter gradients into the shared tables.
    """

    feats: np.ndarray  # (K, F)
    pooled: np.ndarray  # (F̄,)
    q_ids: np.ndarray
    q_bits: np.ndarray
    win_ids: list[np.ndarray]
    win_bits: list[np.ndarray]
    mode: str
    embed_dim: int

    @property
    def fused_width(self) -> int:
        return self.embed_dim * (2 if self.mode == "concat" else 1)

    @classmethod
    def from_matrix(cls, feats: np.ndarray, pooled: np.ndarray) -> "RecordFeatures":
        """Features with no table provenance (table gradients vanish)."""
        k = feats.shape[0]
        empty = np.arange(0)
        fw = (feats.shape[1] - 4) // 2
        return cls(
            feats=np.asarray(feats, dtype=float),
            pooled=np.asarray(pooled, dtype=float),
            q_ids=empty,
            q_bits=empty,
            win_ids=[empty] * k,
            win_bits=[empty] * k,
            mode="add",
            embed_dim=fw,
        )


def effective_tables(params: PolicyParams, config: FeatureConfig) -> EmbeddingTables:
    time = params.time_table if config.temporal_fusion else np.zeros_like(params.time_table)
    return EmbeddingTables(time_table=time, text_table=params.text_table)


def featurize(
    candidate: Candidate,
    fused: FusedSequence,
    dilated: TemporalMask,
    q_interval: Optional[MonthInterval],
    window: int,
) -> np.ndarray:
    """Feature vector for a single candidate: question mean, mention-window
    mean, interval comparison, and window mask density."""
    vectors = fused.vectors
    n_q = fused.question_len
    fw = vectors.shape[1]
    a = vectors[:n_q].mean(axis=0) if n_q else np.zeros(fw)
    if candidate.is_empty or candidate.tok_start is None:
        b = np.zeros(fw)
        c = np.zeros(3)
        dens = 0.0
    else:
        pos = _window_positions(
            candidate.tok_start, candidate.tok_end, n_q, vectors.shape[0], window
        )
        b = vectors[pos].mean(axis=0) if pos.size else np.zeros(fw)
        c = _interval_row(q_interval, candidate.fact_interval)
        dens = float(dilated.bits[pos].mean()) if pos.size else 0.0
    return np.concatenate([a, b, c, [dens]])


def featurize_record(
    comp: CompiledRecord, params: PolicyParams, config: FeatureConfig
) -> RecordFeatures:
    tables = effective_tables(params, config)
    fused = fuse(comp.token_ids, TemporalMask(comp.bits), tables, comp.question_len, config.fusion_mode)
    vectors = fused.vectors
    n_q = comp.question_len
    fw = vectors.shape[1]
    k = len(comp.candidates)

    a = vectors[:n_q].mean(axis=0) if n_q else np.zeros(fw)
    feats = np.zeros((k, 2 * fw + 4))
    for i in range(k):
        pos = comp.window_pos[i]
        b = vectors[pos].mean(axis=0) if pos.size else np.zeros(fw)
        feats[i, :fw] = a
        feats[i, fw : 2 * fw] = b
        feats[i, 2 * fw : 2 * fw + 3] = comp.interval_feats[i]
        feats[i, -1] = comp.density[i]
    pooled = np.concatenate([vectors.mean(axis=0), comp.pooled_extra])

    bits_idx = comp.bits.astype(np.intp)
    return RecordFeatures(
        feats=feats,
        pooled=pooled,
        q_ids=comp.token_ids[:n_q],
        q_bits=bits_idx[:n_q],
        win_ids=[comp.token_ids[p] for p in comp.window_pos],
        win_bits=[bits_idx[p] for p in comp.window_pos],
        mode=config.fusion_mode,
        embed_dim=config.embed_dim,
    )


# ---------------------------------------------------------------------------
# Forward / backward.


@dataclass
class PolicyOutput:
    logits: np.ndarray
    probs: np.ndarray
    value: float


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def forward(params: PolicyParams, feats: np.ndarray, pooled: np.ndarray) -> PolicyOutput:
    feats = np.asarray(feats, dtype=float)
    pooled = np.asarray(pooled, dtype=float)
    if feats.ndim != 2 or feats.shape[1] != params.W1.shape[1]:
        raise ValueError(
            f"feature width {feats.shape} does not match W1 {params.W1.shape}"
        )
    if pooled.shape != (params.Wv.shape[1],):
        raise ValueError(f"pooled state width {pooled.shape} does not match Wv")
    h = np.tanh(feats @ params.W1.T + params.b1)
    logits = (h @ params.W2.T).ravel() + params.b2[0]
    value = float((params.Wv @ pooled)[0] + params.bv[0])
    return PolicyOutput(logits=logits, probs=_softmax(logits), value=value)


LOSS_KINDS = ("cross_entropy", "ppo_surrogate", "value_mse")


def loss_and_grads(
    params: PolicyParams,
    rf: RecordFeatures,
    loss_kind: str,
    loss_inputs: dict,
) -> tuple[float, PolicyParams]:
    """Scalar loss and exact gradients for one record.

    The pooled state is treated as a constant input to the value head, so
    value_mse touches only Wv and bv; the policy losses are the only path
    into the perceptron and the shared tables.
    """
    grads = zeros_like_params(params)
    if loss_kind == "value_mse":
        ret = float(loss_inputs["return"])
        v = float((params.Wv @ rf.pooled)[0] + params.bv[0])
        diff = v - ret
        grads.Wv[0, :] = 2.0 * diff * rf.pooled
        grads.bv[0] = 2.0 * diff
        return diff * diff, grads
    if loss_kind not in LOSS_KINDS:
        raise ValueError(f"unknown loss kind {loss_kind!r}")

    feats = rf.feats
    k = feats.shape[0]
    z = feats @ params.W1.T + params.b1
    h = np.tanh(z)
    logits = (h @ params.W2.T).ravel() + params.b2[0]
    probs = _softmax(logits)

    if loss_kind == "cross_entropy":
        gold = int(loss_inputs["gold_index"])
        if not 0 <= gold < k:
            raise ValueError(f"gold index {gold} outside {k} candidates")
        loss = -float(np.log(max(probs[gold], 1e-300)))
        dlogits = probs.copy()
        dlogits[gold] -= 1.0
    else:
        action = int(loss_inputs["action"])
        if not 0 <= action < k:
            raise ValueError(f"action {action} outside {k} candidates")
        logp_old = float(loss_inputs["logprob_old"])
        adv = float(loss_inputs["advantage"])
        clip = float(loss_inputs["cliprange"])
        if clip <= 0:
            raise ValueError("cliprange must be positive")
        logp_new = float(np.log(max(probs[action], 1e-300)))
        ratio = float(np.exp(logp_new - logp_old))
        clipped = float(np.clip(ratio, 1.0 - clip, 1.0 + clip))
        loss = -min(ratio * adv, clipped * adv)
        if ratio * adv <= clipped * adv:
            coef = -ratio * adv  # unclipped branch active
        else:
            coef = 0.0
        dlogits = coef * (-probs)
        dlogits[action] += coef

    dh = dlogits[:, None] * params.W2  # (K, H)
    dz = dh * (1.0 - h * h)
    grads.W2[0, :] = dlogits @ h
    grads.b2[0] = float(dlogits.sum())
    grads.W1 += dz.T @ feats
    grads.b1 += dz.sum(axis=0)
    dfeats = dz @ params.W1  # (K, F)

    _scatter_table_grads(grads, rf, dfeats)
    return loss, grads


def _scatter_table_grads(
    grads: PolicyParams, rf: RecordFeatures, dfeats: np.ndarray
) -> None:
    fw = rf.fused_width
    d = rf.embed_dim

    def route(rows_grad: np.ndarray, ids: np.ndarray, bits: np.ndarray) -> None:
        # rows_grad is the gradient shared by each contributing fused row.
        if rf.mode == "add":
            text_part, time_part = rows_grad, rows_grad
        else:
            text_part, time_part = rows_grad[:d], rows_grad[d:]
        np.add.at(grads.text_table, ids, text_part)
        np.add.at(grads.time_table, bits, time_part)

    n_q = rf.q_ids.size
    if n_q:
        g_question = dfeats[:, :fw].sum(axis=0) / n_q
        route(g_question, rf.q_ids, rf.q_bits)
    for c in range(dfeats.shape[0]):
        ids = rf.win_ids[c]
        if ids.size:
            route(dfeats[c, fw : 2 * fw] / ids.size, ids, rf.win_bits[c])


def backward(
    params: PolicyParams, rf: RecordFeatures, loss_kind: str, loss_inputs: dict
) -> PolicyParams:
    return loss_and_grads(params, rf, loss_kind, loss_inputs)[1]


def grad_check(
    params: PolicyParams,
    loss_closure: Callable[[PolicyParams], tuple[float, PolicyParams]],
    epsilon: float = 1e-5,
    seed: int = 0,
    min_coords: int = 200,
) -> float:
    """Max relative error between analytic gradients and central finite
    differences over a random coordinate subsample.

    The closure must return (loss, grads) for the given parameters; the
    finite differences reuse only its loss value.
    """
    _, analytic = loss_closure(params)
    tensors = [t for _, t in params.named_tensors()]
    grad_tensors = [t for _, t in analytic.named_tensors()]

    rng = np.random.default_rng(seed)
    coords: list[tuple[int, int]] = []
    large: list[tuple[int, int]] = []
    for ti, t in enumerate(tensors):
        if t.size <= 32:
            coords.extend((ti, j) for j in range(t.size))
        else:
            large.extend((ti, j) for j in range(t.size))
    want = max(min_coords - len(coords), 0)
    if large and want:
        picked = rng.choice(len(large), size=min(want, len(large)), replace=False)
        coords.extend(large[int(i)] for i in picked)

    worst = 0.0
    for ti, j in coords:
        t = tensors[ti]
        original = t.flat[j]
        t.flat[j] = original + epsilon
        plus = loss_closure(params)[0]
        t.flat[j] = original - epsilon
        minus = loss_closure(params)[0]
        t.flat[j] = original
        fd = (plus - minus) / (2.0 * epsilon)
        a = grad_tensors[ti].flat[j]
        err = abs(a - fd) / max(1e-6, abs(a), abs(fd))
        worst = max(worst, err)
    return worst


# ---------------------------------------------------------------------------
# Inference.


def greedy_predictions(
    compiled: Sequence[CompiledRecord], params: PolicyParams, config: FeatureConfig
) -> list[str]:
    """Argmax candidate text per record, in input order."""
    out = []
    for comp in compiled:
        rf = featurize_record(comp, params, config)
        result = forward(params, rf.feats, rf.pooled)
        out.append(comp.candidates[int(np.argmax(result.probs))].text)
    return out


# ---------------------------------------------------------------------------
# Checkpoints: versioned binary tensors plus a JSON sidecar for the
# vocabulary and feature configuration.

_MAGIC = b"TSQP"
_VERSION = 1
_HEADER = "<4sI5I"


def _sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".json")


def save_checkpoint(
    path: str | Path, params: PolicyParams, vocab: Vocabulary, config: FeatureConfig
) -> None:
    V, d = params.text_table.shape
    H, F = params.W1.shape
    Fb = params.Wv.shape[1]
    parts = [struct.pack(_HEADER, _MAGIC, _VERSION, V, d, H, F, Fb)]
    for _, t in params.named_tensors():
        parts.append(np.ascontiguousarray(t, dtype="<f8").tobytes())
    write_atomic(path, b"".join(parts))
    sidecar = {"vocab": json.loads(vocab.to_json()), "features": config.to_json_dict()}
    write_atomic(_sidecar_path(path), json.dumps(sidecar, ensure_ascii=False, indent=2) + "\n")


def load_checkpoint(path: str | Path) -> tuple[PolicyParams, Vocabulary, FeatureConfig]:
    data = Path(path).read_bytes()
    head = struct.calcsize(_HEADER)
    if len(data) < head:
        raise ValueError("checkpoint too short for its header")
    magic, version, V, d, H, F, Fb = struct.unpack_from(_HEADER, data, 0)
    if magic != _MAGIC:
        raise ValueError("not a policy checkpoint (bad magic)")
    if version != _VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    shapes = [(V, d), (2, d), (H, F), (H,), (1, H), (1,), (1, Fb), (1,)]
    expected = head + 8 * sum(int(np.prod(s)) for s in shapes)
    if len(data) != expected:
        raise ValueError(f"checkpoint size {len(data)} != expected {expected}")
    offset = head
    arrays = []
    for shape in shapes:
        count = int(np.prod(shape))
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        arrays.append(arr.astype(np.float64).reshape(shape))
        offset += 8 * count
    params = PolicyParams(*arrays)

    sidecar = json.loads(_sidecar_path(path).read_text(encoding="utf-8"))
    vocab = Vocabulary.from_json(json.dumps(sidecar["vocab"]))
    config = FeatureConfig.from_json_dict(sidecar["features"])
    return params, vocab, config
