import random

import numpy as np
import pytest

from crisislink import linker, textproc
from crisislink.errors import ArtifactError, TrainingError
from crisislink.retrieval import build_index

from conftest import make_article, make_post, utc

EMPTY_LEXDB = textproc.LexicalDatabase()


def test_char_ngram_sim_containment():
    assert linker.char_ngram_sim(['nepal'], ['nepal', 'quake'], 2) == 1.0


def test_char_ngram_sim_disjoint_and_identical():
    assert linker.char_ngram_sim(['abc'], ['xyz'], 2) == 0.0
    assert linker.char_ngram_sim(['nepal', 'quake'], ['nepal', 'quake'], 3) == 1.0
    assert linker.char_ngram_sim([], ['nepal'], 2) == 0.0


def test_expanded_sim_without_entries_equals_plain():
    post, article = ['quake', 'relief'], ['earthquake', 'aid']
    for n in (2, 3):
        assert linker.expanded_char_ngram_sim(post, article, n, EMPTY_LEXDB) == \
            linker.char_ngram_sim(post, article, n)


def test_expanded_sim_uses_synonyms(lexdb_dir):
    lexdb = textproc.LexicalDatabase.from_directory(lexdb_dir)
    plain = linker.char_ngram_sim(['temblor'], ['earthquake'], 2)
    expanded = linker.expanded_char_ngram_sim(['temblor'], ['earthquake'], 2, lexdb)
    assert plain == 0.0
    assert expanded > plain
    assert linker.expanded_char_ngram_sim([], ['earthquake'], 2, lexdb) == 0.0


def test_split_hashtag():
    assert linker.split_hashtag('NepalQuake') == ['Nepal', 'Quake']
    assert linker.split_hashtag('Quake2015') == ['Quake', '2015']
    assert linker.split_hashtag('___') == ['___']


def test_hashtag_sim():
    article_stems = textproc.tokenize('Relief reaches Nepal').stems
    assert linker.hashtag_sim(['NepalQuake'], article_stems) == 1.0
    assert linker.hashtag_sim(['NepalQuake', 'PrayForKathmandu'], article_stems) == 0.5
    assert linker.hashtag_sim([], article_stems) == 0.0


def test_hashtag_sim_ignores_stopword_parts():
    article_stems = textproc.tokenize('Aid for the victims arrived today.').stems
    assert linker.hashtag_sim(['PrayForNepal'], article_stems) == 0.0
    assert linker.hashtag_sim(['PrayForNepal'], textproc.tokenize('Aid for Nepal').stems) == 1.0
    assert linker.hashtag_sim(['For'], article_stems, stopwords=frozenset()) == 1.0


def test_temporal_distance():
    post = make_post('quake', created_at=utc(2015, 5, 1))
    article = make_article('Quake.', published_at=utc(2015, 5, 3))
    assert linker.temporal_distance(post, article) == 2.0
    assert linker.day_difference(article.published_at, post.created_at) == -2.0
    assert linker.day_difference(post.created_at, post.created_at) == 0.0
    assert linker.temporal_distance(make_post('quake'), article) is None


def _pair_index(*articles):
    return build_index([textproc.tokenize(u'{0}\n{1}'.format(a.title, a.body).strip()) for a in articles],
                       [a.id for a in articles])


def test_make_features_identical_texts():
    when = utc(2015, 4, 25, 6)
    post = make_post('nepal quake relief', created_at=when)
    article = make_article('nepal quake relief', published_at=when)
    other = make_article('football match tonight', id='a2', published_at=when)
    features = linker.make_features(post, article, _pair_index(article, other), EMPTY_LEXDB)
    assert features.char2gramSim == features.char3gramSim == 1.0
    assert features.exp_char2gramSim == features.exp_char3gramSim == 1.0
    assert features.tfidf_sim == pytest.approx(1.0)
    assert features.temporal_distance == 0.0
    assert features.hashtag_sim == 0.0
    assert not features.missing_time


def test_make_features_disjoint_texts():
    post = make_post('sunny coffee', created_at=utc(2015, 4, 25))
    article = make_article('nepal quake', published_at=utc(2015, 4, 26))
    other = make_article('aid relief', id='a2')
    features = linker.make_features(post, article, _pair_index(article, other), EMPTY_LEXDB)
    assert features.char2gramSim == features.char3gramSim == 0.0
    assert features.exp_char2gramSim == features.exp_char3gramSim == 0.0
    assert features.tfidf_sim == 0.0
    assert features.temporal_distance == 1.0


def test_make_features_missing_time():
    article = make_article('nepal quake', published_at=utc(2015, 4, 26))
    features = linker.make_features(make_post('quake'), article, _pair_index(article), EMPTY_LEXDB)
    assert features.missing_time
    assert features.temporal_distance == 0.0


def test_feature_ranges_on_random_pairs(lexdb_dir):
    rng = random.Random(11)
    vocabulary = ['nepal', 'quake', 'earthquake', 'aid', 'help', 'rubble', 'rescue', 'kathmandu', 'tents', 'water',
                  'football', 'coffee', 'temblor', 'relief', 'village', 'road', 'x', 'ab']
    tags = ['NepalQuake', 'Relief', 'PrayForNepal', 'Coffee2015']

    def text(length):
        words = [rng.choice(vocabulary) for _ in range(length)]
        if rng.random() < 0.5:
            words.append('#' + rng.choice(tags))
        return ' '.join(words)

    start = utc(2015, 4, 20)
    posts = [make_post(text(rng.randint(0, 12)), id='p{0}'.format(i),
                       created_at=None if i % 17 == 0 else start.replace(day=rng.randint(20, 30)))
             for i in range(200)]
    articles = [make_article(text(rng.randint(1, 40)), id='a{0}'.format(i), title=text(3),
                             published_at=start.replace(day=rng.randint(20, 30))) for i in range(50)]

    extractor = linker.PairFeatureExtractor(_pair_index(*articles), textproc.LexicalDatabase.from_directory(lexdb_dir))
    count = 0
    for post in posts:
        for article in articles:
            features = extractor.features(post, article)
            for name in ('char2gramSim', 'char3gramSim', 'exp_char2gramSim', 'exp_char3gramSim', 'tfidf_sim',
                         'hashtag_sim'):
                assert 0.0 <= getattr(features, name) <= 1.0
            assert np.isfinite(features.temporal_distance)
            assert abs(features.temporal_distance) <= 10.0
            count += 1
    assert count == 10000


def test_candidate_pairs(fixture_posts, fixture_articles):
    extractor = linker.PairFeatureExtractor(_pair_index(*fixture_articles), EMPTY_LEXDB)
    pairs = list(extractor.candidate_pairs(fixture_posts, k=2))
    per_post = {}
    for post, article_id, score in pairs:
        per_post.setdefault(post.id, []).append(score)
        assert score > 0.0
    assert all(len(scores) <= 2 for scores in per_post.values())
    assert 'p01' in per_post


def test_undersample_balances():
    pairs = list(range(110))
    labels = [1] * 10 + [0] * 100
    kept, kept_labels = linker.undersample(pairs, labels, seed=3)
    assert kept_labels.count(1) == 10
    assert kept_labels.count(0) == 10
    assert kept == sorted(kept)
    assert linker.undersample(pairs, labels, seed=3) == (kept, kept_labels)


def test_undersample_balanced_input_unchanged():
    pairs = ['a', 'b', 'c', 'd']
    labels = [1, 0, 0, 1]
    assert linker.undersample(pairs, labels, seed=0) == (pairs, labels)


def test_undersample_single_class():
    with pytest.raises(TrainingError):
        linker.undersample([1, 2], [1, 1], seed=0)


def test_holdout_split_is_stratified_and_seeded():
    labels = [1] * 18 + [0] * 10
    training, held_out = linker.holdout_split(labels, 0.3, seed=7)
    assert sorted(training + held_out) == list(range(28))
    assert not set(training) & set(held_out)
    assert [labels[i] for i in held_out].count(1) == 5
    assert [labels[i] for i in held_out].count(0) == 3
    assert linker.holdout_split(labels, 0.3, seed=7) == (training, held_out)


def test_holdout_split_keeps_a_training_example_per_class():
    training, held_out = linker.holdout_split([1, 0, 0], 0.9, seed=0)
    assert held_out == [1] or held_out == [2]
    assert 0 in training
    assert linker.holdout_split([1, 0], 0.0, seed=0) == ([0, 1], [])
    with pytest.raises(TrainingError):
        linker.holdout_split([1, 0], 1.0, seed=0)


def _separable(count, seed):
    rng = np.random.default_rng(seed)
    labels = np.array([1, 0] * (count // 2))
    X = rng.normal(size=(count, len(linker.FEATURE_NAMES)))
    X[:, 0] += np.where(labels == 1, 4.0, -4.0)
    return X, labels


def test_train_separable():
    X, labels = _separable(200, seed=1)
    model = linker.train(list(X), list(labels), seed=5)
    accuracy = np.mean(model.predict(list(X)) == labels)
    assert accuracy >= 0.95
    probabilities = model.predict_proba(list(X))
    assert np.all((probabilities >= 0.0) & (probabilities <= 1.0))
    assert np.mean(probabilities[labels == 1]) > np.mean(probabilities[labels == 0])


def test_train_chance_level_on_shuffled_labels():
    X, labels = _separable(1000, seed=2)
    shuffled = np.random.default_rng(9).permutation(labels)
    model = linker.train(list(X), list(shuffled), seed=5)
    scores = [score for score in model.metadata['cv_accuracy'].values() if score is not None]
    assert scores
    assert abs(np.mean(scores) - 0.5) <= 0.1


def test_train_is_deterministic(tmp_path):
    X, labels = _separable(60, seed=4)
    first = linker.train(list(X), list(labels), seed=8)
    second = linker.train(list(X), list(labels), seed=8)
    first.save(str(tmp_path / 'first.json'))
    second.save(str(tmp_path / 'second.json'))
    assert (tmp_path / 'first.json').read_bytes() == (tmp_path / 'second.json').read_bytes()

    loaded = linker.LinkModel.load(str(tmp_path / 'first.json'))
    assert np.allclose(loaded.predict_proba(list(X)), first.predict_proba(list(X)))


def test_train_rejects_bad_input():
    with pytest.raises(TrainingError):
        linker.train([[0.0] * 7, [1.0] * 7], [1, 1], seed=0)
    with pytest.raises(TrainingError):
        linker.train([[0.0] * 7, [float('nan')] * 7], [1, 0], seed=0)
    with pytest.raises(TrainingError):
        linker.train([[0.0] * 6, [1.0] * 6], [1, 0], seed=0)


def test_load_missing_model(tmp_path):
    with pytest.raises(ArtifactError):
        linker.LinkModel.load(str(tmp_path / 'absent.json'))


def _model():
    X, labels = _separable(40, seed=6)
    return linker.train(list(X), list(labels), seed=0)


def test_rank_posts():
    model = _model()
    assert linker.rank_posts('a1', [], model).ranked == ()

    vectors = [[4.0] + [0.0] * 6, [0.0] * 7, [-4.0] + [0.0] * 6]
    result = linker.rank_posts('a1', [('p3', vectors[2]), ('p1', vectors[0]), ('p2', vectors[1])], model)
    assert [post_id for post_id, _ in result.ranked] == ['p1', 'p2', 'p3']
    probabilities = [probability for _, probability in result.ranked]
    assert probabilities[0] > probabilities[1] > probabilities[2]


def test_rank_posts_export_and_ties():
    model = _model()
    candidates = [('p{0:02d}'.format(i), [float(i % 4)] + [0.0] * 6) for i in range(12)]
    result = linker.rank_posts('a1', candidates, model)
    assert len(result.export(10)) == 10
    tied = [post_id for post_id, _ in result.ranked[:3]]
    assert tied == ['p03', 'p07', 'p11']


def test_rank_posts_ignores_candidate_order():
    model = _model()
    rng = random.Random(14)
    candidates = [('p{0:02d}'.format(i), [float(rng.randint(-4, 4))] + [0.0] * 6) for i in range(30)]
    expected = linker.rank_posts('a1', candidates, model)
    for _ in range(20):
        shuffled = list(candidates)
        rng.shuffle(shuffled)
        result = linker.rank_posts('a1', shuffled, model)
        assert [post_id for post_id, _ in result.ranked] == [post_id for post_id, _ in expected.ranked]
        assert [p for _, p in result.ranked] == pytest.approx([p for _, p in expected.ranked])


def test_weighted_precision():
    finals = [2] * 37 + [1] * 218 + [0] * 55
    assert linker.weighted_precision(finals) == pytest.approx(0.47, abs=0.005)
    assert linker.weighted_precision([2, 2]) == 1.0
    assert linker.weighted_precision([0, 0]) == 0.0
    assert linker.weighted_precision([]) is None


def test_weighted_precision_ignores_order():
    rng = random.Random(15)
    for _ in range(200):
        finals = [rng.choice((0, 1, 2)) for _ in range(rng.randint(1, 40))]
        shuffled = list(finals)
        rng.shuffle(shuffled)
        assert linker.weighted_precision(shuffled) == linker.weighted_precision(finals)


def test_annotator_agreement():
    agreement = linker.annotator_agreement([(2, 2), (2, 1), (0, 2)])
    assert agreement.score == 0.5
    assert agreement.pairs == 3
    assert linker.annotator_agreement([(1, 1), (0, 0)]).score == 1.0

    partial = linker.annotator_agreement([(1, 1), (2,)])
    assert partial.skipped == 1
    assert partial.pairs == 1


def test_link_records_read_back():
    result = linker.LinkResult(article_id='a1', ranked=(('p1', 0.9), ('p2', 0.4), ('p3', 0.1)))
    finals = {('p1', 'a1'): 2, ('p2', 'a1'): 0}
    distances = {('p1', 'a1'): 1.5, ('p2', 'a1'): -0.5}
    record = linker.link_record(result, finals, distances, top=2, training={('p2', 'a1')})
    assert record['candidates'] == 3
    linked = linker.read_link_records([record])
    assert [item.post_id for item in linked] == ['p1', 'p2']
    assert linked[0].final == 2
    assert linked[1].final == 0
    assert linked[1].in_training
    assert linked[1].temporal_distance == -0.5
    assert linker.held_out_finals(linked) == [2]
