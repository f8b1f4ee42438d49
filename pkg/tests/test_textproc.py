import unicodedata
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vakya.errors import EmptyCorpusError, MalformedTextError, UnknownScriptError
from vakya.textproc import (
    Script,
    chunk_corpus,
    iast_alphabet,
    normalize,
    tokenize,
    transliterate,
)

from .oracles import iast_to_deva_oracle

DATA = Path(__file__).parent / "data"


class TestTransliterate:
    def test_iast_to_devanagari(self):
        assert transliterate("rāmaḥ", Script.IAST, Script.DEVANAGARI) == "रामः"

    def test_empty(self):
        assert transliterate("", Script.IAST, Script.DEVANAGARI) == ""
        assert transliterate("", Script.DEVANAGARI, Script.IAST) == ""

    def test_identity_direction(self):
        text = "haridrāmalakaṃ gṛhṇāti"
        assert transliterate(text, Script.IAST, Script.IAST) == text

    def test_devanagari_to_iast(self):
        assert transliterate("रामः", Script.DEVANAGARI, Script.IAST) == "rāmaḥ"

    def test_non_script_characters_pass_through(self):
        assert transliterate("rāma 42!", Script.IAST, Script.DEVANAGARI) == "राम 42!"

    def test_unknown_script(self):
        with pytest.raises(UnknownScriptError):
            transliterate("x", "runic", Script.IAST)

    def test_orphan_vowel_sign_reports_offset(self):
        with pytest.raises(MalformedTextError) as exc:
            transliterate("अा", Script.DEVANAGARI, Script.IAST)
        assert exc.value.offset == 1

    def test_orphan_virama_reports_offset(self):
        with pytest.raises(MalformedTextError) as exc:
            transliterate("्र", Script.DEVANAGARI, Script.IAST)
        assert exc.value.offset == 0

    def test_decomposed_input_is_composed_first(self):
        decomposed = "rāmaḥ"  # "rāmaḥ" with combining macron
        assert unicodedata.normalize("NFC", decomposed) == "rāmaḥ"
        assert transliterate(decomposed, Script.IAST, Script.DEVANAGARI) == "रामः"

    def test_fixture_forward_matches_byte_for_byte(self):
        for line in (DATA / "translit_fixture.tsv").read_text("utf-8").splitlines():
            iast, deva = line.split("\t")
            assert transliterate(iast, Script.IAST, Script.DEVANAGARI) == deva

    def test_fixture_reverse_matches_byte_for_byte(self):
        for line in (DATA / "translit_fixture.tsv").read_text("utf-8").splitlines():
            iast, deva = line.split("\t")
            assert transliterate(deva, Script.DEVANAGARI, Script.IAST) == iast

    def test_agrees_with_independent_converter_on_fixture(self):
        for line in (DATA / "translit_fixture.tsv").read_text("utf-8").splitlines():
            iast, deva = line.split("\t")
            assert iast_to_deva_oracle(iast) == deva


def iast_text(min_size=0, max_size=40):
    token = st.sampled_from(iast_alphabet() + [" "])
    return st.lists(token, min_size=min_size, max_size=max_size).map("".join)


class TestRoundTripProperties:
    @given(iast_text())
    @settings(max_examples=300)
    def test_iast_deva_iast_identity(self, text):
        deva = transliterate(text, Script.IAST, Script.DEVANAGARI)
        assert transliterate(deva, Script.DEVANAGARI, Script.IAST) == unicodedata.normalize("NFC", text)

    @given(iast_text())
    @settings(max_examples=200)
    def test_deva_iast_deva_identity(self, text):
        deva = transliterate(text, Script.IAST, Script.DEVANAGARI)
        iast = transliterate(deva, Script.DEVANAGARI, Script.IAST)
        assert transliterate(iast, Script.IAST, Script.DEVANAGARI) == deva

    @given(iast_text(min_size=1))
    @settings(max_examples=200)
    def test_token_count_preserved(self, text):
        deva = transliterate(text, Script.IAST, Script.DEVANAGARI)
        assert len(deva.split()) == len(text.split())
        assert deva.count(" ") == text.count(" ")


class TestNormalize:
    def test_whitespace_collapse(self):
        assert normalize("rāma  ḥ\n") == "rāma ḥ"

    def test_idempotent(self):
        text = normalize("  a\t\tb  c ")
        assert normalize(text) == text

    def test_composes_decomposed_vowels(self):
        assert normalize("ā") == "ā"

    def test_danda_stripping(self):
        assert normalize("rāmaḥ ।", strip_chars="।॥") == "rāmaḥ"
        assert normalize("gataḥ॥ iti", strip_chars="।॥") == "gataḥ iti"


class TestTokenize:
    def test_positions(self):
        tokens = tokenize("a b c")
        assert [(t.surface, t.index) for t in tokens] == [("a", 0), ("b", 1), ("c", 2)]

    def test_empty(self):
        assert tokenize("") == []

    def test_punctuation_stripping(self):
        tokens = tokenize("rāmaḥ, vanaṃ। gacchati")
        assert [t.surface for t in tokens] == ["rāmaḥ", "vanaṃ", "gacchati"]


class TestChunkCorpus:
    def test_no_overlap_arithmetic(self):
        chunks = chunk_corpus([f"line {i}" for i in range(10)], 2, 0)
        assert len(chunks) == 5
        assert [c.source_ref for c in chunks] == [(0, 2), (2, 4), (4, 6), (6, 8), (8, 10)]

    def test_overlap_spans(self):
        chunks = chunk_corpus([f"l{i}" for i in range(10)], 4, 2)
        assert [c.source_ref for c in chunks] == [(0, 4), (2, 6), (4, 8), (6, 10)]

    def test_short_tail(self):
        chunks = chunk_corpus(["only"], 4, 0)
        assert len(chunks) == 1
        assert chunks[0].source_ref == (0, 1)
        assert chunks[0].raw_text == "only"

    def test_ids_encode_spans_and_are_unique(self):
        chunks = chunk_corpus([str(i) for i in range(7)], 3, 1)
        ids = [c.id for c in chunks]
        assert len(set(ids)) == len(ids)
        assert ids[0] == "chunk-00000-00003"

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpusError):
            chunk_corpus([], 2, 0)

    def test_bad_overlap(self):
        with pytest.raises(ValueError):
            chunk_corpus(["a"], 2, 2)

    @given(
        st.integers(min_value=1, max_value=60),
        st.integers(min_value=1, max_value=8),
        st.integers(min_value=0, max_value=7),
    )
    def test_coverage_and_monotone_starts(self, n_lines, chunk_lines, overlap):
        if overlap >= chunk_lines:
            overlap = chunk_lines - 1
        lines = [f"l{i}" for i in range(n_lines)]
        chunks = chunk_corpus(lines, chunk_lines, overlap)
        covered = set()
        starts = []
        for c in chunks:
            start, end = c.source_ref
            covered.update(range(start, end))
            starts.append(start)
        assert covered == set(range(n_lines))
        assert starts == sorted(set(starts))
        for a, b in zip(chunks, chunks[1:]):
            shared = set(range(*a.source_ref)) & set(range(*b.source_ref))
            if b.source_ref[1] - b.source_ref[0] == chunk_lines:
                assert len(shared) == overlap
