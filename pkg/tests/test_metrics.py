from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vakya.errors import (
    LengthMismatchError,
    SentenceCountMismatchError,
    TooFewItemsError,
)
from vakya.lemma import IdentityLemmatizer, LexiconLemmatizer
from vakya.metrics import (
    EmMode,
    align_ner,
    chunked_summary,
    corpus_bleu,
    exact_match,
    ner_macro_f1,
    sentence_bleu,
)
from vakya.textproc import Script, Token

from .oracles import bleu_oracle

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def lexicon():
    return LexiconLemmatizer(DATA / "lexicon.tsv", script=Script.IAST)


class TestExactMatch:
    def test_identical(self):
        assert exact_match("rāmaḥ", ["rāmaḥ"], EmMode.INFLECTED) == 1

    def test_whitespace_and_danda_insensitive(self):
        assert exact_match("rāmaḥ ।", ["rāmaḥ"], EmMode.INFLECTED) == 1
        assert exact_match("  rāmaḥ\n", ["rāmaḥ"], EmMode.INFLECTED) == 1

    def test_wrong_answer(self):
        assert exact_match("sītā", ["rāmaḥ"], EmMode.INFLECTED) == 0

    def test_any_acceptable_matches(self):
        assert exact_match("vane", ["vanaṃ", "vane"], EmMode.INFLECTED) == 1

    def test_locative_gold_needs_lemmatized_mode(self, lexicon):
        # gold is a locative surface; the prediction lost the hyphen
        gold = ["gala-grahe"]
        assert exact_match("galagrahe", gold, EmMode.INFLECTED) == 0
        assert exact_match("galagrahe", gold, EmMode.LEMMATIZED, lemmatizer=lexicon) == 1

    def test_cross_script_prediction(self):
        assert (
            exact_match(
                "रामः", ["rāmaḥ"], EmMode.INFLECTED,
                script=Script.IAST, prediction_script=Script.DEVANAGARI,
            )
            == 1
        )

    def test_lemmatized_mode_requires_lemmatizer(self):
        with pytest.raises(ValueError):
            exact_match("x", ["x"], EmMode.LEMMATIZED)

    def test_empty_acceptable_rejected(self):
        with pytest.raises(ValueError):
            exact_match("x", [], EmMode.INFLECTED)

    def test_lemmatized_never_below_inflected(self, lexicon):
        predictions = ["rāmaḥ", "rāmam", "vane", "gacchati", "apūrvam", "sītā"]
        gold = ["rāmaḥ", "vanaṃ"]
        for pred in predictions:
            inflected = exact_match(pred, gold, EmMode.INFLECTED)
            lemmatized = exact_match(pred, gold, EmMode.LEMMATIZED, lemmatizer=lexicon)
            assert lemmatized >= inflected


class TestCorpusBleu:
    def test_identity_is_one(self):
        cands = ["the cat sat on the mat", "a quick brown fox"]
        refs = [[c] for c in cands]
        assert corpus_bleu(cands, refs) == pytest.approx(1.0)

    def test_empty_candidate_zero(self):
        assert corpus_bleu([""], [["some reference here"]]) == 0.0

    def test_two_sentence_hand_counts(self):
        # counts tallied by hand:
        #   item 1: 4/5 unigrams, 3/4 bigrams, 2/3 trigrams, 1/2 four-grams
        #   item 2: exact match, adds 4/4, 3/3, 2/2, 1/1
        cands = ["a b c d e", "x y z w"]
        refs = [["a b c d f"], ["x y z w"]]
        expected = ((8 / 9) * (6 / 7) * (4 / 5) * (2 / 3)) ** 0.25
        assert corpus_bleu(cands, refs) == pytest.approx(expected, abs=1e-12)

    def test_matches_independent_oracle(self):
        cands = [
            "the cat sat on the mat",
            "dogs bark at night",
            "a b c d e f g",
            "completely different words",
        ]
        refs = [
            ["the cat sat on a mat", "a cat sat on the mat"],
            ["dogs bark loudly at night"],
            ["a b c x e f g"],
            ["nothing shared here at all"],
        ]
        assert corpus_bleu(cands, refs) == pytest.approx(bleu_oracle(cands, refs), abs=1e-12)

    def test_zero_when_no_fourgram_overlap(self):
        assert corpus_bleu(["a b c d"], [["a x b y c z d"]]) == 0.0

    def test_brevity_penalty_applied(self):
        # all n-gram precisions are 1 but candidate is half as long
        val = corpus_bleu(["a b c d"], [["a b c d e f g h"]])
        import math

        assert val == pytest.approx(math.exp(1 - 8 / 4), abs=1e-12)

    def test_order_permutation_invariant(self):
        cands = ["one two three", "four five", "six seven eight nine"]
        refs = [["one two three"], ["four five six"], ["six seven nine"]]
        forward = corpus_bleu(cands, refs)
        backward = corpus_bleu(list(reversed(cands)), list(reversed(refs)))
        assert forward == pytest.approx(backward, abs=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            corpus_bleu(["a"], [["a"], ["b"]])
        with pytest.raises(LengthMismatchError):
            corpus_bleu(["a"], [[]])

    def test_sentence_bleu_smoothed_positive(self):
        assert 0.0 < sentence_bleu("the cat", ["the dog"]) < 0.1

    def test_sentence_bleu_identity(self):
        assert sentence_bleu("a b c d e", ["a b c d e"]) == pytest.approx(1.0)


def toks(words):
    return [Token(w, i) for i, w in enumerate(words)]


class TestAlignNer:
    def test_unique_words(self):
        alignment = align_ner(toks(["a", "b", "c"]), {"B-X": ["a"], "B-Y": ["c"]})
        assert alignment.tags == ["B-X", "O", "B-Y"]
        assert alignment.spurious == []

    def test_repeated_word_claimed_twice(self):
        alignment = align_ner(toks(["a", "b", "a"]), {"B-X": ["a", "a"]})
        assert alignment.tags == ["B-X", "O", "B-X"]
        assert alignment.spurious == []

    def test_word_absent_is_spurious(self):
        alignment = align_ner(toks(["a"]), {"B-X": ["zzz"]})
        assert alignment.tags == ["O"]
        assert alignment.spurious == [("B-X", "zzz")]

    def test_overclaimed_word_is_spurious(self):
        alignment = align_ner(toks(["a", "b"]), {"B-X": ["a"], "B-Y": ["a"]})
        assert alignment.tags == ["B-X", "O"]
        assert alignment.spurious == [("B-Y", "a")]


class TestNerMacroF1:
    def test_perfect_predictions(self):
        sentences = [toks(["rāmaḥ", "vanaṃ", "gacchati"])]
        gold = [["B-PER", "B-LOC", "O"]]
        preds = [{"B-PER": ["rāmaḥ"], "B-LOC": ["vanaṃ"]}]
        score = ner_macro_f1(sentences, gold, preds)
        assert score.macro_f1 == 1.0
        normalized = score.confusion.row_normalized()
        labels = score.confusion.labels
        for i, label in enumerate(labels):
            if sum(score.confusion.counts[i]) > 0:
                assert normalized[i][i] == 1.0

    def test_all_empty_predictions(self):
        sentences = [toks(["a", "b"]), toks(["c"])]
        gold = [["B-X", "O"], ["B-Y"]]
        preds = [{}, {}]
        score = ner_macro_f1(sentences, gold, preds)
        assert score.macro_f1 == 0.0
        labels = score.confusion.labels
        o_col = labels.index("O")
        for i, label in enumerate(labels):
            row_total = sum(score.confusion.counts[i])
            if row_total:
                assert score.confusion.counts[i][o_col] == row_total

    def test_hand_tallied_mixed_fixture(self):
        sentences = [toks(["rāmaḥ", "sītā", "vanaṃ", "gacchati"])]
        gold = [["B-PER", "B-PER", "B-LOC", "O"]]
        preds = [{"B-PER": ["rāmaḥ"], "B-LOC": ["gacchati"]}]
        score = ner_macro_f1(sentences, gold, preds)
        per = score.per_tag
        assert per["B-PER"]["precision"] == 1.0
        assert per["B-PER"]["recall"] == 0.5
        assert per["B-PER"]["f1"] == pytest.approx(2 / 3)
        assert per["B-LOC"]["f1"] == 0.0
        assert score.macro_f1 == pytest.approx(1 / 3)
        # confusion grid, hand-filled: gold PER -> {PER:1, O:1}; LOC -> {O:1}; O -> {LOC:1}
        labels = score.confusion.labels
        grid = {
            (g, p): score.confusion.counts[i][j]
            for i, g in enumerate(labels)
            for j, p in enumerate(labels)
        }
        assert grid[("PER", "PER")] == 1
        assert grid[("PER", "O")] == 1
        assert grid[("LOC", "O")] == 1
        assert grid[("O", "LOC")] == 1
        normalized = score.confusion.row_normalized()
        for i in range(len(labels)):
            if sum(score.confusion.counts[i]):
                assert sum(normalized[i]) == pytest.approx(1.0, abs=1e-9)

    def test_spurious_counts_as_fp(self):
        sentences = [toks(["a"])]
        score = ner_macro_f1(sentences, [["O"]], [{"B-Y": ["zzz"]}])
        assert score.per_tag["B-Y"]["fp"] == 1.0
        assert score.macro_f1 == 0.0
        assert score.spurious_count == 1

    def test_sentence_order_invariance(self):
        s1 = toks(["a", "b"])
        s2 = toks(["c", "d"])
        g1, g2 = ["B-X", "O"], ["O", "B-Y"]
        p1, p2 = {"B-X": ["a"]}, {"B-Y": ["c"]}
        forward = ner_macro_f1([s1, s2], [g1, g2], [p1, p2])
        backward = ner_macro_f1([s2, s1], [g2, g1], [p2, p1])
        assert forward.macro_f1 == backward.macro_f1

    def test_count_mismatch(self):
        with pytest.raises(SentenceCountMismatchError):
            ner_macro_f1([toks(["a"])], [["O"], ["O"]], [{}])
        with pytest.raises(SentenceCountMismatchError):
            ner_macro_f1([toks(["a", "b"])], [["O"]], [{}])

    def test_confusion_sums_equal_token_tallies(self):
        sentences = [toks(["a", "b", "c", "a"])]
        gold = [["B-X", "B-Y", "O", "O"]]
        preds = [{"B-X": ["a", "c"], "B-Y": ["b"]}]
        score = ner_macro_f1(sentences, gold, preds)
        assert sum(sum(row) for row in score.confusion.counts) == 4


class TestChunkedSummary:
    def test_identical_scores(self):
        summary = chunked_summary([0.7] * 10, 10)
        assert summary.per_chunk_means == [0.7] * 10
        assert summary.q3 - summary.q1 == 0.0
        assert summary.mean == pytest.approx(0.7)

    def test_alternating_means(self):
        summary = chunked_summary([0.0, 1.0] * 10, 10)
        assert summary.per_chunk_means == [0.5] * 10
        assert summary.median == 0.5

    def test_too_few_items(self):
        with pytest.raises(TooFewItemsError):
            chunked_summary([1.0] * 9, 10)

    def test_sizes_differ_by_at_most_one(self):
        summary = chunked_summary(list(range(25)), 10)
        assert sorted(set(summary.chunk_sizes)) in ([2, 3], [2], [3])
        assert sum(summary.chunk_sizes) == 25

    def test_shuffle_is_seeded(self):
        scores = [float(i) for i in range(30)]
        a = chunked_summary(scores, 10, shuffle_seed=5)
        b = chunked_summary(scores, 10, shuffle_seed=5)
        c = chunked_summary(scores, 10, shuffle_seed=6)
        assert a.per_chunk_means == b.per_chunk_means
        assert a.per_chunk_means != c.per_chunk_means

    @given(st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=10, max_size=200))
    def test_weighted_mean_equals_overall(self, scores):
        summary = chunked_summary(scores, 10)
        weighted = sum(
            m * s for m, s in zip(summary.per_chunk_means, summary.chunk_sizes)
        ) / sum(summary.chunk_sizes)
        overall = sum(scores) / len(scores)
        assert abs(weighted - overall) < 1e-12
        assert summary.mean == pytest.approx(overall, abs=1e-12)
