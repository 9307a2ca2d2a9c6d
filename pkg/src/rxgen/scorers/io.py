"""Versioned scorer file container.

Layout: 8-byte magic, 4-byte big-endian header length, JSON header
``{"version", "kind"}``, then a kind-specific payload. The payload is
stable across save/load within a version: reloading a scorer reproduces
bitwise-identical distributions.
"""

from __future__ import annotations

import io
import json
import pickle
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch

from ..errors import FormatError, KindMismatchError
from .ngram import NgramScorer
from .transformer import TransformerConfig, TransformerScorer, _Seq2Seq

MAGIC = b"RXSCORER"
VERSION = 1


def save_scorer(scorer, path: str | Path) -> None:
    if scorer.kind == "ngram":
        payload = _ngram_payload(scorer)
    elif scorer.kind == "transformer":
        payload = _transformer_payload(scorer)
    else:
        raise FormatError(f"scorer kind {scorer.kind!r} cannot be serialized")
    header = json.dumps({"version": VERSION, "kind": scorer.kind}).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack(">I", len(header)))
        fh.write(header)
        fh.write(payload)


def load_scorer(path: str | Path, expected_kind: str | None = None):
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 4 or blob[: len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: not a scorer file (bad magic)")
    (header_len,) = struct.unpack(">I", blob[len(MAGIC) : len(MAGIC) + 4])
    header_end = len(MAGIC) + 4 + header_len
    if len(blob) < header_end:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(blob[len(MAGIC) + 4 : header_end].decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: unreadable header: {exc}") from exc
    if header.get("version") != VERSION:
        raise FormatError(f"{path}: unsupported version {header.get('version')}")
    kind = header.get("kind")
    if expected_kind is not None and kind != expected_kind:
        raise KindMismatchError(f"{path}: holds a {kind!r} scorer, expected {expected_kind!r}")
    payload = blob[header_end:]
    try:
        if kind == "ngram":
            return _load_ngram(payload)
        if kind == "transformer":
            return _load_transformer(payload)
    except (KeyError, ValueError, EOFError, RuntimeError, json.JSONDecodeError, pickle.UnpicklingError) as exc:
        raise FormatError(f"{path}: corrupt {kind} payload: {exc}") from exc
    raise FormatError(f"{path}: unknown scorer kind {kind!r}")


def _ngram_payload(scorer: NgramScorer) -> bytes:
    contexts = []
    for table in scorer.contexts:
        entries = {
            json.dumps(list(ctx)): (tokens.tolist(), mle.tolist())
            for ctx, (tokens, mle) in table.items()
        }
        contexts.append(entries)
    obj = {
        "order": scorer.order,
        "weights": list(scorer.weights),
        "vocab_size": scorer.vocab_size,
        "bos_id": scorer.bos_id,
        "eos_id": scorer.eos_id,
        "unigram": scorer.unigram.tolist(),
        "contexts": contexts,
    }
    return json.dumps(obj).encode("utf-8")


def _load_ngram(payload: bytes) -> NgramScorer:
    obj = json.loads(payload.decode("utf-8"))
    contexts = []
    for table in obj["contexts"]:
        entries = {}
        for ctx_json, (tokens, mle) in table.items():
            ctx = tuple(json.loads(ctx_json))
            entries[ctx] = (np.array(tokens, dtype=np.int64), np.array(mle, dtype=np.float64))
        contexts.append(entries)
    return NgramScorer(
        order=obj["order"],
        weights=obj["weights"],
        vocab_size=obj["vocab_size"],
        bos_id=obj["bos_id"],
        eos_id=obj["eos_id"],
        unigram=np.array(obj["unigram"], dtype=np.float64),
        contexts=contexts,
    )


def _transformer_payload(scorer: TransformerScorer) -> bytes:
    buffer = io.BytesIO()
    torch.save(
        {
            "config": asdict(scorer.config),
            "vocab_size": scorer.vocab_size,
            "pad_id": scorer.pad_id,
            "bos_id": scorer.bos_id,
            "eos_id": scorer.eos_id,
            "trained": scorer.trained,
            "state": scorer.model.state_dict(),
        },
        buffer,
    )
    return buffer.getvalue()


def _load_transformer(payload: bytes) -> TransformerScorer:
    obj = torch.load(io.BytesIO(payload), weights_only=True)
    config = TransformerConfig(**obj["config"])
    model = _Seq2Seq(config, obj["vocab_size"], obj["pad_id"])
    model.load_state_dict(obj["state"])
    return TransformerScorer(
        model, config, obj["vocab_size"], obj["pad_id"], obj["bos_id"], obj["eos_id"],
        trained=obj["trained"],
    )
