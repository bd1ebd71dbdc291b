"""Fixture registration; the shared helpers live in engine_fixtures.py."""

import pytest

from pathreason import KnowledgeGraph, Verbalizer, load_graph, with_inverses

from engine_fixtures import CLINICAL_META, CLINICAL_TRIPLES, make_verbalizer


@pytest.fixture
def clinical_kg() -> KnowledgeGraph:
    return load_graph(CLINICAL_TRIPLES, CLINICAL_META)


@pytest.fixture
def clinical_kg_aug(clinical_kg) -> KnowledgeGraph:
    return with_inverses(clinical_kg)


@pytest.fixture
def clinical_verbalizer(clinical_kg_aug) -> Verbalizer:
    return make_verbalizer(clinical_kg_aug)
