"""Small transformer encoders behind one pooled-embedding interface.

An encoder takes padded id tensors plus per-sequence lengths and returns
one pooled vector per sequence; the classification head is a learnable
linear transform followed by a sigmoid. Two built-ins are registered: a
bidirectional encoder pooling the leading classification token, and a
causal (generative) decoder pooling the final token. Any module exposing
``forward(ids, lengths) -> [batch, dim]``, an ``encoding_style`` and an
``output_dim`` can be registered alongside them; the registry validates
only that interface, not where the weights came from.
"""

from __future__ import annotations

from typing import Callable

import torch
from torch import nn

from modelserver.plan import Hyperparameters


class BidirectionalEncoder(nn.Module):
    """Self-attention over the whole sequence; pools the [CLS] position."""

    encoding_style = "cls"

    def __init__(self, vocab_size: int, hp: Hyperparameters):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, hp.embed_dim, padding_idx=0)
        self.position = nn.Embedding(hp.max_len, hp.embed_dim)
        layer = nn.TransformerEncoderLayer(
            d_model=hp.embed_dim,
            nhead=hp.heads,
            dim_feedforward=hp.ffn_dim,
            dropout=0.0,
            batch_first=True,
        )
        self.stack = nn.TransformerEncoder(layer, num_layers=hp.layers, enable_nested_tensor=False)
        self.output_dim = hp.embed_dim

    def forward(self, ids: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.size(1), device=ids.device).unsqueeze(0)
        hidden = self.embed(ids) + self.position(positions)
        padding_mask = torch.arange(ids.size(1), device=ids.device).unsqueeze(0) >= lengths.unsqueeze(1)
        hidden = self.stack(hidden, src_key_padding_mask=padding_mask)
        return hidden[:, 0]


class GenerativeDecoder(nn.Module):
    """Causal self-attention; pools the final (end-of-sequence) token."""

    encoding_style = "eos"

    def __init__(self, vocab_size: int, hp: Hyperparameters):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, hp.embed_dim, padding_idx=0)
        self.position = nn.Embedding(hp.max_len, hp.embed_dim)
        layer = nn.TransformerEncoderLayer(
            d_model=hp.embed_dim,
            nhead=hp.heads,
            dim_feedforward=hp.ffn_dim,
            dropout=0.0,
            batch_first=True,
        )
        self.stack = nn.TransformerEncoder(layer, num_layers=hp.layers, enable_nested_tensor=False)
        self.output_dim = hp.embed_dim

    def forward(self, ids: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        seq_len = ids.size(1)
        positions = torch.arange(seq_len, device=ids.device).unsqueeze(0)
        hidden = self.embed(ids) + self.position(positions)
        # boolean mask to match the dtype of src_key_padding_mask
        causal = torch.triu(
            torch.ones(seq_len, seq_len, dtype=torch.bool, device=ids.device), diagonal=1
        )
        padding_mask = torch.arange(seq_len, device=ids.device).unsqueeze(0) >= lengths.unsqueeze(1)
        hidden = self.stack(hidden, mask=causal, src_key_padding_mask=padding_mask)
        last = (lengths - 1).clamp(min=0)
        return hidden[torch.arange(ids.size(0), device=ids.device), last]


EncoderFactory = Callable[[int, Hyperparameters], nn.Module]

_REGISTRY: dict[str, EncoderFactory] = {
    "bidirectional-encoder": BidirectionalEncoder,
    "generative-decoder": GenerativeDecoder,
}


def register_encoder(name: str, factory: EncoderFactory) -> None:
    _REGISTRY[name] = factory


def build_encoder(name: str, vocab_size: int, hp: Hyperparameters) -> nn.Module:
    """Instantiate a registered encoder and validate its interface."""
    if name not in _REGISTRY:
        raise ValueError(f"unknown encoder {name!r}; registered: {sorted(_REGISTRY)}")
    encoder = _REGISTRY[name](vocab_size, hp)
    for attribute in ("encoding_style", "output_dim"):
        if not hasattr(encoder, attribute):
            raise TypeError(f"encoder {name!r} lacks required attribute {attribute!r}")
    if encoder.encoding_style not in ("cls", "eos"):
        raise TypeError(f"encoder {name!r} has unknown encoding style {encoder.encoding_style!r}")
    return encoder


class ScoringModel(nn.Module):
    """Encoder plus a logistic classification head over the pooled vector."""

    head_description = "learnable linear transform + sigmoid over the pooled token embedding"

    def __init__(self, encoder: nn.Module):
        super().__init__()
        self.encoder = encoder
        self.head = nn.Linear(encoder.output_dim, 1)

    def forward(self, ids: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        return self.head(self.encoder(ids, lengths)).squeeze(-1)
