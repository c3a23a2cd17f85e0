from pathlib import Path

import pytest

from bactrex.classify import BaselineClassifier
from bactrex.corpus import CorpusKind, load_corpus
from bactrex.ner import GazetteerTagger, default_gazetteer
from bactrex.pipeline import PipelineComponents
from bactrex.segment import segment

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def e2e_corpus():
    return load_corpus(FIXTURES / "e2e_corpus", CorpusKind.PASSAGE)


@pytest.fixture(scope="session")
def sentence_corpus():
    return load_corpus(FIXTURES / "sentence_corpus", CorpusKind.SENTENCE)


@pytest.fixture()
def default_components() -> PipelineComponents:
    return PipelineComponents(
        segmenter=lambda text: segment(text),
        tagger=GazetteerTagger(default_gazetteer()),
        classifier=BaselineClassifier(),
    )
