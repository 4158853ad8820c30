import itertools
import math
import random

import numpy as np
import pytest

from crisislink import summarize
from crisislink.summarize import SentenceSpace, SummarizerConfig

from conftest import make_article, make_post


def _sentence(words, start=0):
    return ' '.join('w{0}'.format(start + k) for k in range(words)) + '.'


def _article_of_lengths(*lengths):
    sentences = []
    start = 0
    for length in lengths:
        sentences.append(_sentence(length, start))
        start += length
    return make_article(' '.join(sentences))


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        SummarizerConfig(budget=0)
    with pytest.raises(ValueError):
        SummarizerConfig(damping=1.0)


def test_lead_fills_budget():
    summary = summarize.lead(_article_of_lengths(40, 50, 30), budget=100)
    assert summary.picked == (1, 2)
    assert summary.word_count == 90


def test_lead_whole_article():
    assert summarize.lead(_article_of_lengths(10, 20, 30), budget=100).picked == (1, 2, 3)


def test_lead_truncates_long_first_sentence():
    summary = summarize.lead(_article_of_lengths(120, 10), budget=100)
    assert summary.picked == (1,)
    assert summary.truncated
    assert summary.word_count == 100


def test_truncate_words_counts_tokens_after_cleaning():
    assert summarize.truncate_words('Help -- Nepal now', 2) == 'Help -- Nepal'


def test_centroid_single_sentence():
    summary = summarize.centroid(make_article('Quake hits Nepal.'))
    assert summary.picked == (1,)
    assert summary.method == 'centroid'


def test_centroid_ranks_off_topic_sentence_last():
    article = make_article('Nepal quake kills many. Quake in Nepal destroys homes. Football match tonight was great.')
    assert summarize.centroid(article, budget=9).picked == (1, 2)


def test_centroid_skips_duplicate_sentence():
    article = make_article('Nepal quake kills many. Nepal quake kills many. Aid arrives in Kathmandu.')
    assert summarize.centroid(article).picked == (1, 3)


def _power_oracle(weights, damping):
    size = weights.shape[0]
    totals = weights.sum(axis=1)
    transition = np.where(totals[:, None] > 0, weights / np.where(totals > 0, totals, 1.0)[:, None], 1.0 / size)
    return np.linalg.solve(np.eye(size) - damping * transition.T, np.full(size, (1.0 - damping) / size))


STAR = 'Quake flood fire. Quake rescue. Flood shelter. Fire smoke.'


def test_lexrank_hub_ranked_first():
    config = SummarizerConfig(tolerance=1e-12, max_iter=1000)
    space = SentenceSpace(make_article(STAR).sentences)
    scores = summarize.lexrank_scores(space, config)
    assert int(np.argmax(scores)) == 0

    similarity = space.similarity_matrix()
    np.fill_diagonal(similarity, 0.0)
    similarity[similarity < config.lexrank_threshold] = 0.0
    assert np.allclose(scores, _power_oracle(similarity, config.damping), atol=1e-8)

    assert summarize.lexrank(make_article(STAR), budget=3).picked == (1,)


def test_lexrank_symmetric_sentences_score_equally():
    space = SentenceSpace(make_article('Quake hits Nepal. Quake hits Nepal.').sentences)
    scores = summarize.lexrank_scores(space, SummarizerConfig())
    assert scores[0] == pytest.approx(scores[1])


def test_lexrank_one_word_budget_truncates_top_sentence():
    summary = summarize.lexrank(make_article(STAR), budget=1)
    assert summary.truncated
    assert summary.word_count == 1
    assert summary.picked == (1,)


def test_textrank_weight():
    assert summarize.textrank_weight({'a', 'b'}, {'b', 'c'}, 3, 3) == pytest.approx(1.0 / (2.0 * math.log(3)))
    assert summarize.textrank_weight({'a'}, {'a'}, 1, 3) == 0.0


def test_textrank_hub_and_single_sentence():
    config = SummarizerConfig(tolerance=1e-12, max_iter=1000)
    scores = summarize.textrank_scores(SentenceSpace(make_article(STAR).sentences), config)
    assert int(np.argmax(scores)) == 0
    assert summarize.textrank(make_article('Quake hits Nepal.')).picked == (1,)


def test_submodular_value_is_monotone_and_prefers_diversity():
    counts = [{'quak': 1, 'nepal': 1}, {'quak': 1, 'nepal': 1}, {'rescu': 1, 'team': 1}]
    weights = {'quak': 1.0, 'nepal': 1.0, 'rescu': 1.0, 'team': 1.0}
    assert summarize.submodular_value((0, 2), counts, weights) > summarize.submodular_value((0, 1), counts, weights)
    for selection in itertools.combinations(range(3), 2):
        for extra in range(3):
            if extra not in selection:
                assert summarize.submodular_value(selection + (extra,), counts, weights) >= \
                    summarize.submodular_value(selection, counts, weights)


def test_submodular_picks_diverse_sentence():
    article = make_article('Quake Nepal. Quake Nepal. Rescue team.')
    assert summarize.submodular(article, budget=4).picked == (1, 3)


def test_greedy_tfidf_covering_sentence_suffices():
    article = make_article('Quake Nepal rescue. Quake Nepal. Rescue.')
    assert summarize.greedy_tfidf(article).picked == (1,)


def test_greedy_tfidf_never_picks_stopword_sentence():
    article = make_article('Quake hits Nepal. It was what it was. Rescue teams arrive. Tents for families.')
    assert 2 not in summarize.greedy_tfidf(article).picked


def test_score_ilp_tfidf_knapsack_example():
    assert summarize.knapsack([5, 4, 3], [50, 40, 60], 100) == (0, 1)
    assert summarize.knapsack([5], [120], 100) == ()
    assert summarize.knapsack([0, 3], [1, 1], 10) == (1,)


def test_knapsack_with_budget_beyond_total_cost():
    assert summarize.knapsack([5, 4, 3], [50, 40, 60], 10 ** 11) == (0, 1, 2)
    assert summarize.knapsack([5, 0], [50, 40], 10 ** 11) == (0,)

    summary = summarize.score_ilp_tfidf(_article_of_lengths(40, 50, 30), budget=10 ** 11)
    assert summary.picked == (1, 2, 3)
    assert summary.word_count == 120


def test_knapsack_matches_enumeration():
    rng = random.Random(5)
    for _ in range(200):
        count = rng.randint(1, 15)
        values = [rng.choice([0.0, rng.uniform(0.0, 10.0)]) for _ in range(count)]
        costs = [rng.randint(1, 40) for _ in range(count)]
        budget = rng.randint(1, 150)

        picked = summarize.knapsack(values, costs, budget)
        assert sum(costs[i] for i in picked) <= budget

        masks = ((np.arange(1 << count)[:, None] >> np.arange(count)) & 1).astype(float)
        feasible = masks.dot(costs) <= budget
        best = masks[feasible].dot(values).max()
        assert sum(values[i] for i in picked) == pytest.approx(best, abs=1e-9)


def _random_coverage(rng, count):
    terms = ['t{0}'.format(i) for i in range(12)]
    term_sets = [frozenset(rng.sample(terms, rng.randint(0, 5))) for _ in range(count)]
    weights = dict((term, rng.uniform(0.1, 3.0)) for term in terms)
    return term_sets, weights


def test_max_coverage_exact_matches_enumeration():
    rng = random.Random(6)
    for _ in range(200):
        count = rng.randint(1, 12)
        term_sets, weights = _random_coverage(rng, count)
        costs = [rng.randint(1, 20) for _ in range(count)]
        budget = rng.randint(1, 60)

        picked = summarize.max_coverage_exact(term_sets, costs, budget, weights)
        assert sum(costs[i] for i in picked) <= budget

        best = 0.0
        for size in range(1, count + 1):
            for selection in itertools.combinations(range(count), size):
                if sum(costs[i] for i in selection) <= budget:
                    best = max(best, summarize.coverage_value(selection, term_sets, weights))
        assert summarize.coverage_value(picked, term_sets, weights) == pytest.approx(best, abs=1e-9)


def test_budgeted_greedy_approximation_on_unit_costs():
    rng = random.Random(7)
    for _ in range(200):
        count = rng.randint(1, 10)
        term_sets, weights = _random_coverage(rng, count)
        counts = [dict((term, rng.randint(1, 3)) for term in terms) for terms in term_sets]
        budget = rng.randint(1, count)

        def value(selection):
            return summarize.submodular_value(selection, counts, weights)

        picked = summarize.budgeted_greedy(value, [1] * count, budget)
        assert len(picked) <= budget

        optimum = max(value(selection) for selection in itertools.combinations(range(count), budget))
        assert value(picked) >= (1.0 - 1.0 / math.e) * optimum - 1e-9


def test_ilp_budget_whole_article_fits():
    article = make_article('Quake hits Nepal. Rescue teams arrive. Tents for families.')
    assert summarize.ilp_budget(article).picked == (1, 2, 3)


def test_ilp_budget_matches_enumeration():
    article = make_article('Quake destroys Kathmandu temples today. Rescue teams search rubble. '
                           'Aid flights reach Kathmandu airport. Quake survivors need tents and water.')
    budget = 10
    summary = summarize.ilp_budget(article, budget=budget)
    space = SentenceSpace(article.sentences)
    weights = summarize._idf_weights(space)

    best = 0.0
    for size in range(1, 5):
        for selection in itertools.combinations(range(4), size):
            if sum(space.words[i] for i in selection) <= budget:
                best = max(best, summarize.coverage_value(selection, space.terms, weights))

    picked = [i - 1 for i in summary.picked]
    assert summary.word_count <= budget
    assert summarize.coverage_value(picked, space.terms, weights) == pytest.approx(best)
    assert not summary.approximate


def test_ilp_budget_covers_at_least_as_much_as_submodular_on_unit_costs():
    rng = random.Random(23)
    vocabulary = ['w{0}'.format(i) for i in range(8)]
    for _ in range(100):
        count = rng.randint(2, 12)
        article = make_article(' '.join(rng.choice(vocabulary) + '.' for _ in range(count)))
        space = SentenceSpace(article.sentences)
        assert space.words == [1] * count
        weights = summarize._idf_weights(space)
        budget = rng.randint(1, count)

        exact = summarize.ilp_budget(article, budget=budget)
        greedy = summarize.submodular(article, budget=budget)
        assert exact.word_count <= budget
        assert summarize.coverage_value([i - 1 for i in exact.picked], space.terms, weights) >= \
            summarize.coverage_value([i - 1 for i in greedy.picked], space.terms, weights) - 1e-9


def test_ilp_budget_flags_approximation_above_cap():
    article = make_article('Quake destroys Kathmandu temples today. Rescue teams search rubble. '
                           'Aid flights reach Kathmandu airport. Quake survivors need tents and water.')
    summary = summarize.ilp_budget(article, budget=10, config=SummarizerConfig(exact_cap=2))
    assert summary.approximate
    assert summary.method == 'ilp_budget'
    assert summary.word_count <= 10


def test_title_pool():
    article = make_article('Rain fell all day. The quake struck at noon. Shops were closed. '
                           'Nepal counts the dead. Roads are open.', title='Quake hits Nepal')
    space = SentenceSpace(article.sentences)
    assert summarize.title_pool(article, space) == [1, 3]


def test_title_reduction_falls_back_to_full_document():
    article = make_article('Quake hits Nepal. Rescue teams arrive. Tents for families.', title='Weather report')
    summary = summarize.title_reduction(article, budget=5)
    assert summary.method == 'title_reduction'
    assert summary.picked == summarize.greedy_tfidf(article, budget=5).picked


def test_title_reduction_keeps_title_sentence_in_pool():
    article = make_article('Quake hits Nepal. Rescue teams arrive. Tents for families.', title='Quake hits Nepal.')
    space = SentenceSpace(article.sentences)
    assert 0 in summarize.title_pool(article, space)


def test_every_summarizer_respects_budget(fixture_articles):
    for article in fixture_articles:
        for budget in (1, 20, 100):
            for summary in summarize.summarize_article(article, config=SummarizerConfig(budget=budget)):
                assert summary.word_count <= budget
                assert list(summary.picked) == sorted(set(summary.picked))
                assert all(1 <= i <= len(article.sentences) for i in summary.picked)
                if summary.truncated:
                    assert len(summary.picked) == 1


def test_summarize_article_methods_in_order(fixture_articles):
    summaries = summarize.summarize_article(fixture_articles[0])
    assert [summary.method for summary in summaries] == list(summarize.METHODS)
    assert summarize.summarize_article(make_article(''), ['lead']) == []


def test_tweets_as_summary():
    posts = [make_post('Quake in Nepal', id='p1'), make_post('Quake in Nepal', id='p2'),
             make_post('Rescue teams arrive', id='p3'), make_post('Coffee time', id='p4')]
    linked = [(posts[0], 0.9, 2), (posts[1], 0.8, 1), (posts[2], 0.7, 2), (posts[3], 0.6, 0)]

    partial = summarize.tweets_as_summary('a1', linked, 1)
    assert partial.method == 'tweets_partial'
    assert partial.text == 'Quake in Nepal Rescue teams arrive'

    relevant = summarize.tweets_as_summary('a1', linked, 2)
    assert relevant.method == 'tweets_relevant'
    assert set(relevant.text.split()) <= set(partial.text.split())

    empty = summarize.tweets_as_summary('a1', [(posts[3], 0.6, 0)], 1)
    assert empty.text == ''
    assert empty.word_count == 0
