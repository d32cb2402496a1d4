import pytest

from nerport.corpus import Corpus, LabelSet, build_document


@pytest.fixture
def labels4() -> LabelSet:
    return LabelSet(("tumor_size", "tumor_site", "cancer_grade", "receptor_status"))


@pytest.fixture
def make_corpus(labels4):
    """Factory: list of (doc_id, text, entities) triples -> Corpus."""

    def build(name: str, docs, label_set: LabelSet | None = None, **kwargs) -> Corpus:
        ls = label_set or labels4
        documents = tuple(
            build_document(doc_id, "clinical_note", text, entities, ls, **kwargs)
            for doc_id, text, entities in docs
        )
        return Corpus(name, ls, documents)

    return build
