"""Sentence encoders producing one vector per statement.

The exporter only needs an object with a ``hidden_size`` attribute and an
``encode(texts)`` method returning ``(matrix, n_truncated)``; this module
supplies the standard implementation, a frozen pre-trained bidirectional
transformer whose final hidden state at the sequence-start marker is the
sentence vector.  The encoder runs in evaluation mode with gradients
disabled, so encoding is deterministic for fixed weights.
"""

from __future__ import annotations

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer


class TransformerEncoder:
    """Frozen transformer wrapper: text in, start-marker hidden state out."""

    def __init__(self, model: str, max_length: int = 128):
        if max_length < 3:
            raise ValueError("max_length must leave room for the sequence markers")
        self.tokenizer = AutoTokenizer.from_pretrained(model)
        self.model = AutoModel.from_pretrained(model)
        self.model.eval()
        self.hidden_size = int(self.model.config.hidden_size)
        self.max_length = max_length

    def encode(self, texts: list[str]) -> tuple[np.ndarray, int]:
        """Encode a batch; returns the vectors and the truncation count.

        Truncation keeps the token prefix, so over-long statements lose
        their trailing clauses deterministically.
        """
        untruncated = self.tokenizer(texts, add_special_tokens=True)["input_ids"]
        n_truncated = sum(1 for ids in untruncated if len(ids) > self.max_length)
        enc = self.tokenizer(
            texts,
            padding=True,
            truncation=True,
            max_length=self.max_length,
            return_tensors="pt",
        )
        with torch.no_grad():
            out = self.model(**enc)
        vectors = out.last_hidden_state[:, 0, :].numpy().astype(np.float32)
        return vectors, n_truncated
