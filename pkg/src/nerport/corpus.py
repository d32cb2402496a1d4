"""Data model for annotated clinical corpora.

Documents carry raw text plus derived tokens and sentence ranges; entity
mentions are standoff character spans. All offsets index Unicode code points
of the document text. Corpora and documents are immutable after construction,
so they can be shared freely between threads.

The on-disk corpus format is one JSON record per line::

    {"id": "doc1", "doc_type": "clinical_note", "text": "...",
     "entities": [{"start": 0, "end": 7, "label": "Tumor_size"}]}

The same format holds gold corpora and prediction corpora; only gold corpora
reject overlapping mentions.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

PHENOTYPE_CATEGORIES: tuple[str, ...] = (
    "Hormone_receptor_type",
    "Hormone_receptor_status",
    "Tumor_size",
    "Tumor_site",
    "Cancer_grade",
    "Histological_type",
    "Cancer_laterality",
    "Cancer_stage",
)

DOC_TYPES: tuple[str, ...] = ("clinical_note", "pathology_report")

# Characters peeled off token edges into single-character tokens. Sentence
# punctuation, brackets and quotes only: clinically meaningful trailing
# symbols must survive, so "er+" stays one token while "tumor." splits.
PEEL_CHARS: frozenset[str] = frozenset(".,;:!?()[]{}\"'")

_SENTENCE_TERMINATORS: frozenset[str] = frozenset({".", "!", "?"})


class CorpusError(ValueError):
    """A corpus file or in-memory corpus violates the data model."""


@dataclass(frozen=True)
class LabelSet:
    """Ordered set of entity category names."""

    categories: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "categories", tuple(self.categories))
        if not self.categories:
            raise CorpusError("label set must contain at least one category")
        if len(set(self.categories)) != len(self.categories):
            raise CorpusError("label set contains duplicate categories")

    def __contains__(self, category: object) -> bool:
        return category in self.categories

    def __iter__(self) -> Iterator[str]:
        return iter(self.categories)

    def __len__(self) -> int:
        return len(self.categories)

    @classmethod
    def default(cls) -> "LabelSet":
        """The eight breast-cancer phenotype categories."""
        return cls(PHENOTYPE_CATEGORIES)


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class EntityMention:
    """A labeled character span; ``surface`` is the normalized span text."""

    doc_id: str
    start: int
    end: int
    category: str
    surface: str


@dataclass(frozen=True)
class Document:
    id: str
    doc_type: str
    text: str
    tokens: tuple[Token, ...]
    sentences: tuple[tuple[int, int], ...]
    mentions: tuple[EntityMention, ...]

    def sentence_tokens(self) -> Iterator[tuple[Token, ...]]:
        for start, end in self.sentences:
            yield self.tokens[start:end]


@dataclass(frozen=True)
class Corpus:
    name: str
    label_set: LabelSet
    documents: tuple[Document, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "documents", tuple(self.documents))
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def get(self, doc_id: str) -> Document | None:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        return None

    def mentions(self) -> Iterator[EntityMention]:
        for doc in self.documents:
            yield from doc.mentions


@dataclass(frozen=True)
class CategoryStats:
    mentions: int
    unique_surfaces: int


@dataclass(frozen=True)
class CorpusStats:
    num_documents: int
    num_sentences: int
    num_tokens: int
    num_unique_tokens: int
    avg_tokens_per_sentence: float
    per_category: Mapping[str, CategoryStats]


def tokenize(text: str) -> tuple[Token, ...]:
    """Split ``text`` into offset-bearing tokens.

    Whitespace separates chunks; leading and trailing characters from
    ``PEEL_CHARS`` are peeled off each chunk into single-character tokens.
    Deterministic, and idempotent over text rebuilt from the token texts.
    """
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        _split_chunk(text, i, j, tokens)
        i = j
    return tuple(tokens)


def _split_chunk(text: str, start: int, end: int, out: list[Token]) -> None:
    s, e = start, end
    front: list[Token] = []
    while s < e and text[s] in PEEL_CHARS:
        front.append(Token(text[s], s, s + 1))
        s += 1
    back: list[Token] = []
    while e > s and text[e - 1] in PEEL_CHARS:
        back.append(Token(text[e - 1], e - 1, e))
        e -= 1
    out.extend(front)
    if s < e:
        out.append(Token(text[s:e], s, e))
    out.extend(reversed(back))


def normalize_surface(span_text: str) -> str:
    """Case-fold, collapse whitespace runs to single spaces, and trim."""
    return " ".join(span_text.casefold().split())


def segment_sentences(
    tokens: Sequence[Token], text: str
) -> tuple[tuple[int, int], ...]:
    """Partition ``tokens`` into sentence ranges (half-open index pairs).

    A boundary falls after a token when the gap to the next token contains a
    newline, or when the token is one of ``. ! ?`` and the next token starts
    with an uppercase letter.
    """
    if not tokens:
        return ()
    ranges: list[tuple[int, int]] = []
    start = 0
    for i in range(len(tokens) - 1):
        tok, nxt = tokens[i], tokens[i + 1]
        gap = text[tok.end : nxt.start]
        if "\n" in gap or (
            tok.text in _SENTENCE_TERMINATORS and nxt.text[:1].isupper()
        ):
            ranges.append((start, i + 1))
            start = i + 1
    ranges.append((start, len(tokens)))
    return tuple(ranges)


def build_document(
    doc_id: str,
    doc_type: str,
    text: str,
    entities: Iterable[tuple[int, int, str]],
    label_set: LabelSet,
    *,
    allow_overlap: bool = False,
) -> Document:
    """Construct a validated document from raw text and entity spans.

    Tokens and sentences are derived from the text; mention surfaces are
    normalized span texts. Overlapping mentions are rejected unless
    ``allow_overlap`` is set (prediction corpora may overlap).
    """
    if not doc_id:
        raise CorpusError("document id must be non-empty")
    if doc_type not in DOC_TYPES:
        raise CorpusError(
            f"document {doc_id!r}: doc_type must be one of {DOC_TYPES}, "
            f"got {doc_type!r}"
        )
    tokens = tokenize(text)
    sentences = segment_sentences(tokens, text)
    mentions: list[EntityMention] = []
    for start, end, category in entities:
        if category not in label_set:
            raise CorpusError(
                f"document {doc_id!r}: unknown label {category!r}"
            )
        if not (isinstance(start, int) and isinstance(end, int)):
            raise CorpusError(
                f"document {doc_id!r}: mention offsets must be integers"
            )
        if not (0 <= start < end <= len(text)):
            raise CorpusError(
                f"document {doc_id!r}: mention offsets ({start}, {end}) out "
                f"of range for text of length {len(text)}"
            )
        mentions.append(
            EntityMention(doc_id, start, end, category, normalize_surface(text[start:end]))
        )
    mentions.sort(key=lambda m: (m.start, m.end, m.category))
    if not allow_overlap:
        for prev, cur in zip(mentions, mentions[1:]):
            if cur.start < prev.end:
                raise CorpusError(
                    f"document {doc_id!r}: overlapping mentions "
                    f"({prev.start}, {prev.end}, {prev.category}) and "
                    f"({cur.start}, {cur.end}, {cur.category})"
                )
    return Document(doc_id, doc_type, text, tokens, sentences, tuple(mentions))


def document_from_record(
    record: Mapping[str, object],
    label_set: LabelSet,
    *,
    allow_overlap: bool = False,
) -> Document:
    for key in ("id", "doc_type", "text"):
        if key not in record:
            raise CorpusError(f"record is missing required field {key!r}")
    entities_field = record.get("entities", [])
    if not isinstance(entities_field, list):
        raise CorpusError("field 'entities' must be a list")
    entities: list[tuple[int, int, str]] = []
    for entry in entities_field:
        if not isinstance(entry, Mapping):
            raise CorpusError("each entity must be an object")
        for key in ("start", "end", "label"):
            if key not in entry:
                raise CorpusError(f"entity is missing required field {key!r}")
        entities.append((entry["start"], entry["end"], entry["label"]))
    return build_document(
        str(record["id"]),
        str(record["doc_type"]),
        str(record["text"]),
        entities,
        label_set,
        allow_overlap=allow_overlap,
    )


def document_to_record(doc: Document) -> dict[str, object]:
    return {
        "id": doc.id,
        "doc_type": doc.doc_type,
        "text": doc.text,
        "entities": [
            {"start": m.start, "end": m.end, "label": m.category}
            for m in doc.mentions
        ],
    }


def load_corpus(
    path: str | os.PathLike[str],
    label_set: LabelSet,
    *,
    name: str | None = None,
    allow_overlap: bool = False,
) -> Corpus:
    """Load a line-formatted corpus file, validating every document.

    Errors carry the file path and 1-based line number of the offending
    record. ``allow_overlap`` admits overlapping mentions (predictions).
    """
    documents: list[Document] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed record: {exc}") from None
            if not isinstance(record, Mapping):
                raise CorpusError(f"{path}:{lineno}: record must be an object")
            try:
                documents.append(
                    document_from_record(record, label_set, allow_overlap=allow_overlap)
                )
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from None
    if name is None:
        name = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    return Corpus(name, label_set, tuple(documents))


def save_corpus(corpus: Corpus, path: str | os.PathLike[str]) -> None:
    """Write ``corpus`` in the line format read by :func:`load_corpus`."""
    with open(path, "w", encoding="utf-8") as handle:
        for doc in corpus.documents:
            json.dump(document_to_record(doc), handle, ensure_ascii=False)
            handle.write("\n")


def corpus_to_bytes(corpus: Corpus) -> bytes:
    """Serialized corpus content, used for byte-level determinism checks."""
    lines = [
        json.dumps(document_to_record(doc), ensure_ascii=False)
        for doc in corpus.documents
    ]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def concat_corpora(name: str, *corpora: Corpus) -> Corpus:
    """Concatenate corpora sharing a label set; document ids must not clash."""
    if not corpora:
        raise CorpusError("need at least one corpus")
    label_set = corpora[0].label_set
    for corpus in corpora[1:]:
        if corpus.label_set != label_set:
            raise CorpusError("cannot concatenate corpora with different label sets")
    documents: list[Document] = []
    for corpus in corpora:
        documents.extend(corpus.documents)
    return Corpus(name, label_set, tuple(documents))


def compute_stats(corpus: Corpus) -> CorpusStats:
    """Corpus-level counts: documents, sentences, tokens, unique tokens
    (case-folded), tokens per sentence, and per-category mention counts."""
    num_sentences = 0
    num_tokens = 0
    unique: set[str] = set()
    mention_counts: dict[str, int] = {c: 0 for c in corpus.label_set}
    surfaces: dict[str, set[str]] = {c: set() for c in corpus.label_set}
    for doc in corpus.documents:
        num_sentences += len(doc.sentences)
        num_tokens += len(doc.tokens)
        for token in doc.tokens:
            unique.add(token.text.casefold())
        for mention in doc.mentions:
            mention_counts[mention.category] += 1
            surfaces[mention.category].add(mention.surface)
    avg = num_tokens / num_sentences if num_sentences else 0.0
    per_category = {
        c: CategoryStats(mention_counts[c], len(surfaces[c]))
        for c in corpus.label_set
    }
    return CorpusStats(
        num_documents=len(corpus.documents),
        num_sentences=num_sentences,
        num_tokens=num_tokens,
        num_unique_tokens=len(unique),
        avg_tokens_per_sentence=avg,
        per_category=per_category,
    )


def mentions_to_bio(doc: Document) -> tuple[str, ...]:
    """Per-token BIO tags for a document's gold mentions.

    A mention whose boundary splits a token, or that covers no token at all,
    is a hard error naming the mention.
    """
    tags = ["O"] * len(doc.tokens)
    for mention in doc.mentions:
        covered = [
            i
            for i, tok in enumerate(doc.tokens)
            if tok.start < mention.end and tok.end > mention.start
        ]
        if not covered:
            raise CorpusError(
                f"document {doc.id!r}: mention ({mention.start}, {mention.end}, "
                f"{mention.category}) covers no token"
            )
        first, last = doc.tokens[covered[0]], doc.tokens[covered[-1]]
        if first.start < mention.start or last.end > mention.end:
            raise CorpusError(
                f"document {doc.id!r}: mention ({mention.start}, {mention.end}, "
                f"{mention.category}) splits a token"
            )
        tags[covered[0]] = f"B-{mention.category}"
        for i in covered[1:]:
            tags[i] = f"I-{mention.category}"
    return tuple(tags)


def bio_to_mentions(
    tags: Sequence[str],
    tokens: Sequence[Token],
    *,
    doc_id: str = "",
    text: str | None = None,
) -> tuple[EntityMention, ...]:
    """Decode BIO tags over ``tokens`` into mentions.

    An I- tag without a compatible predecessor starts a new mention (repair
    rule), so any tag sequence decodes. When ``text`` is given, surfaces are
    normalized from the original span; otherwise from space-joined tokens.
    """
    if len(tags) != len(tokens):
        raise CorpusError(
            f"tag/token length mismatch ({len(tags)} vs {len(tokens)})"
        )
    mentions: list[EntityMention] = []
    current: tuple[str, int, int] | None = None  # (category, first, last)

    def flush() -> None:
        if current is None:
            return
        category, first, last = current
        start, end = tokens[first].start, tokens[last].end
        if text is not None:
            surface = normalize_surface(text[start:end])
        else:
            surface = normalize_surface(
                " ".join(t.text for t in tokens[first : last + 1])
            )
        mentions.append(EntityMention(doc_id, start, end, category, surface))

    for i, tag in enumerate(tags):
        if tag == "O":
            flush()
            current = None
            continue
        prefix, sep, category = tag.partition("-")
        if prefix not in ("B", "I") or not sep or not category:
            raise CorpusError(f"malformed BIO tag {tag!r}")
        if prefix == "B" or current is None or current[0] != category:
            flush()
            current = (category, i, i)
        else:
            current = (category, current[1], i)
    flush()
    return tuple(mentions)


def export_conll(corpus: Corpus, path: str | os.PathLike[str]) -> None:
    """Write token/tag lines: ``#doc <id>`` headers, one ``token<TAB>tag``
    line per token, blank line after each sentence."""
    with open(path, "w", encoding="utf-8") as handle:
        for doc in corpus.documents:
            handle.write(f"#doc {doc.id}\n")
            tags = mentions_to_bio(doc)
            for start, end in doc.sentences:
                for i in range(start, end):
                    handle.write(f"{doc.tokens[i].text}\t{tags[i]}\n")
                handle.write("\n")


def import_conll(
    path: str | os.PathLike[str],
    label_set: LabelSet,
    *,
    name: str | None = None,
    doc_type: str = "clinical_note",
) -> Corpus:
    """Read a token/tag file written by :func:`export_conll`.

    Offsets are not representable in that format, so document text is
    synthesized: tokens joined with single spaces, sentences with newlines.
    Round-trips exactly for corpora produced by this package's tokenizer.
    """
    docs: list[Document] = []
    doc_id: str | None = None
    sentences: list[list[tuple[str, str]]] = []
    pending: list[tuple[str, str]] = []

    def close_sentence() -> None:
        nonlocal pending
        if pending:
            sentences.append(pending)
            pending = []

    def close_doc() -> None:
        nonlocal sentences
        if doc_id is None:
            return
        close_sentence()
        text_parts: list[str] = []
        entities: list[tuple[int, int, str]] = []
        offset = 0
        for s_index, sentence in enumerate(sentences):
            sent_tokens: list[Token] = []
            for t_index, (tok_text, _) in enumerate(sentence):
                if t_index:
                    offset += 1  # joining space
                sent_tokens.append(Token(tok_text, offset, offset + len(tok_text)))
                offset += len(tok_text)
            tags = [tag for _, tag in sentence]
            for m in bio_to_mentions(tags, sent_tokens, doc_id=doc_id):
                entities.append((m.start, m.end, m.category))
            text_parts.append(" ".join(t for t, _ in sentence))
            if s_index < len(sentences) - 1:
                offset += 1  # newline between sentences
        docs.append(
            build_document(doc_id, doc_type, "\n".join(text_parts), entities, label_set)
        )
        sentences = []

    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if line.startswith("#doc "):
                close_doc()
                doc_id = line[len("#doc ") :].strip()
                if not doc_id:
                    raise CorpusError(f"{path}:{lineno}: empty document id")
                continue
            if not line.strip():
                close_sentence()
                continue
            if doc_id is None:
                raise CorpusError(f"{path}:{lineno}: token line before any #doc header")
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise CorpusError(f"{path}:{lineno}: expected 'token<TAB>tag'")
            pending.append((parts[0], parts[1]))
    close_doc()
    if name is None:
        name = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    return Corpus(name, label_set, tuple(docs))
