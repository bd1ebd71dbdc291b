"""Fixtures building a tiny randomly initialized transformer offline."""

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizer

from textembed import TransformerEncoder

from tiny_encoder import HIDDEN_SIZE, SPECIALS, WORDS


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    """Save a seeded tiny encoder + tokenizer as a loadable local model."""
    d = tmp_path_factory.mktemp("tiny-encoder")
    vocab = d / "vocab.txt"
    vocab.write_text("\n".join(SPECIALS + WORDS) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(vocab))
    config = BertConfig(
        vocab_size=len(SPECIALS) + len(WORDS),
        hidden_size=HIDDEN_SIZE,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    torch.manual_seed(0)
    model = BertModel(config)
    model.eval()
    model.save_pretrained(str(d))
    tokenizer.save_pretrained(str(d))
    return str(d)


@pytest.fixture(scope="session")
def encoder(model_dir):
    return TransformerEncoder(model_dir, max_length=32)
