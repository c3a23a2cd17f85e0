import random
from itertools import combinations

import pytest

from bactrex.corpus import (
    AnnotatedSentence,
    Corpus,
    CorpusKind,
    EntityMention,
    Relation,
    Span,
)
from bactrex.transform import (
    MARKER_A,
    MARKER_B,
    OverlappingMentions,
    enumerate_pairs,
    make_dataset,
    normalize_entity,
    read_dataset,
    tag_instance,
    write_dataset,
)

from synth import random_sentence


def brute_force_pair_keys(sentence):
    """Independent oracle: distinct unordered key pairs over all mention pairs."""
    keys = [normalize_entity(e.surface) for e in sentence.entities]
    return {
        frozenset((keys[i], keys[j]))
        for i, j in combinations(range(len(keys)), 2)
        if keys[i] != keys[j]
    }


def sentence_of(text, names, related=()):
    entities = []
    cursor = 0
    for i, name in enumerate(names):
        start = text.index(name, cursor)
        entities.append(EntityMention(f"T{i + 1}", "Bacteria", Span(start, start + len(name)), name))
        cursor = start + 1
    relations = tuple(
        Relation(f"R{k + 1}", "interacts", f"T{i + 1}", f"T{j + 1}")
        for k, (i, j) in enumerate(related)
    )
    return AnnotatedSentence(text, tuple(entities), relations, provenance="t")


class TestNormalizeEntity:
    def test_casefold(self):
        assert normalize_entity("E. coli") == "e. coli"

    def test_whitespace_and_trailing_punct(self):
        assert normalize_entity("Lactobacillus  reuteri.") == "lactobacillus reuteri"

    def test_case_variants_share_keys(self):
        assert normalize_entity("Roseburia") == normalize_entity("roseburia")

    def test_idempotent(self):
        for surface in ("E. coli", " B.  subtilis. ", "ROSEBURIA", "x,;"):
            key = normalize_entity(surface)
            assert normalize_entity(key or "x") in (key, "x")

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            normalize_entity("")


class TestEnumeratePairs:
    def test_three_unique_entities(self):
        s = sentence_of("Aa inhibits Bb and Cc.", ["Aa", "Bb", "Cc"])
        assert len(enumerate_pairs(s)) == 3

    def test_duplicate_mentions_grouped(self):
        s = sentence_of(
            "E. coli met E. COLI and B. subtilis.", ["E. coli", "E. COLI", "B. subtilis"]
        )
        pairs = enumerate_pairs(s)
        assert len(pairs) == 1
        pair = pairs[0]
        assert pair.entity_a == "b. subtilis"
        assert pair.entity_b == "e. coli"
        assert len(pair.mentions_b) == 2

    def test_single_entity_yields_nothing(self):
        s = sentence_of("Only Aa here.", ["Aa"])
        assert enumerate_pairs(s) == []

    def test_matches_brute_force_on_random_sentences(self):
        rng = random.Random(4242)
        for i in range(500):
            s = random_sentence(rng, i)
            got = {frozenset((p.entity_a, p.entity_b)) for p in enumerate_pairs(s)}
            assert got == brute_force_pair_keys(s)

    def test_deterministic_canonical_order(self):
        s = sentence_of("Zz saw Aa and Mm.", ["Zz", "Aa", "Mm"])
        pairs = enumerate_pairs(s)
        assert [(p.entity_a, p.entity_b) for p in pairs] == [
            ("aa", "mm"),
            ("aa", "zz"),
            ("mm", "zz"),
        ]


def rewrite_oracle(text, replacements):
    """Independent string-rewrite oracle: split text at span edges and join."""
    out = []
    cursor = 0
    for span, marker in sorted(replacements, key=lambda r: r[0].start):
        out.append(text[cursor : span.start])
        out.append(marker)
        cursor = span.end
    out.append(text[cursor:])
    return "".join(out)


class TestTagInstance:
    def test_example_with_relation(self):
        s = sentence_of("Lactobacillus inhibits E. coli.", ["Lactobacillus", "E. coli"], [(0, 1)])
        pair = enumerate_pairs(s)[0]
        instance = tag_instance(s, pair)
        # canonical order puts "e. coli" first, so it takes marker 1
        assert instance.tagged_text == "@BAC2$ inhibits @BAC1$."
        assert instance.label == 1

    def test_no_relation_means_zero(self):
        s = sentence_of("Aa met Bb and Cc.", ["Aa", "Bb", "Cc"], [(0, 1)])
        unrelated = [p for p in enumerate_pairs(s) if {p.entity_a, p.entity_b} == {"bb", "cc"}]
        assert tag_instance(s, unrelated[0]).label == 0

    def test_relation_direction_ignored(self):
        s = sentence_of("Aa met Bb.", ["Aa", "Bb"], [(1, 0)])
        assert tag_instance(s, enumerate_pairs(s)[0]).label == 1

    def test_every_mention_replaced(self):
        s = sentence_of("Aa met Bb, then Aa left.", ["Aa", "Bb", "Aa"])
        instance = tag_instance(s, enumerate_pairs(s)[0])
        assert instance.tagged_text.count(MARKER_A) == 2
        assert instance.tagged_text.count(MARKER_B) == 1

    def test_matches_rewrite_oracle(self):
        rng = random.Random(31337)
        for i in range(300):
            s = random_sentence(rng, i)
            for pair in enumerate_pairs(s):
                expected = rewrite_oracle(
                    s.text,
                    [(span, MARKER_A) for span in pair.mentions_a]
                    + [(span, MARKER_B) for span in pair.mentions_b],
                )
                assert tag_instance(s, pair).tagged_text == expected

    def test_marker_conservation(self):
        rng = random.Random(5150)
        for i in range(200):
            s = random_sentence(rng, i)
            for pair in enumerate_pairs(s):
                text = tag_instance(s, pair).tagged_text
                restored = text
                for span, marker in sorted(
                    [(sp, MARKER_A) for sp in pair.mentions_a]
                    + [(sp, MARKER_B) for sp in pair.mentions_b],
                    key=lambda r: r[0].start,
                ):
                    restored = restored.replace(marker, s.text[span.start : span.end], 1)
                assert restored == s.text

    def test_label_symmetry_by_exhaustive_scan(self):
        rng = random.Random(777)
        for i in range(200):
            s = random_sentence(rng, i)
            for pair in enumerate_pairs(s):
                related = any(
                    {
                        normalize_entity(s.entity_by_id(r.arg1).surface),
                        normalize_entity(s.entity_by_id(r.arg2).surface),
                    }
                    == {pair.entity_a, pair.entity_b}
                    for r in s.relations
                )
                assert tag_instance(s, pair).label == int(related)

    def test_overlapping_mentions_error(self):
        text = "Aaa Bbb"
        entities = (
            EntityMention("T1", "Bacteria", Span(0, 5), "Aaa B"),
            EntityMention("T2", "Bacteria", Span(4, 7), "Bbb"),
        )
        s = AnnotatedSentence(text, entities, (), provenance="x")
        with pytest.raises(OverlappingMentions):
            tag_instance(s, enumerate_pairs(s)[0])


class TestMakeDataset:
    def test_single_sentence_single_pair(self):
        s = sentence_of("Aa met Bb.", ["Aa", "Bb"], [(0, 1)])
        corpus = Corpus(kind=CorpusKind.SENTENCE, sentences=(s,))
        dataset = make_dataset(corpus)
        assert len(dataset) == 1
        assert dataset[0].label == 1

    def test_count_matches_brute_force(self):
        rng = random.Random(2024)
        sentences = tuple(random_sentence(rng, i) for i in range(150))
        corpus = Corpus(kind=CorpusKind.SENTENCE, sentences=sentences)
        expected = sum(len(brute_force_pair_keys(s)) for s in sentences)
        assert len(make_dataset(corpus)) == expected

    def test_requires_sentence_corpus(self):
        with pytest.raises(ValueError):
            make_dataset(Corpus(kind=CorpusKind.PASSAGE))

    def test_record_round_trip(self, tmp_path):
        s = sentence_of("Aa met Bb.", ["Aa", "Bb"], [(0, 1)])
        corpus = Corpus(kind=CorpusKind.SENTENCE, sentences=(s,))
        path = tmp_path / "data.jsonl"
        assert write_dataset(make_dataset(corpus), path) == 1
        records = read_dataset(path)
        assert records == [
            {
                "tagged_text": "@BAC1$ met @BAC2$.",
                "label": 1,
                "entity_a": "aa",
                "entity_b": "bb",
                "provenance": "t",
            }
        ]
