import numpy as np
import pytest

import scenerag as sr


def test_recall_of():
    q = sr.QuestionRecord("How many chairs can be found?", sr.MULTI, 'count', ("chair_1", "chair_2"), "2")
    assert sr.recall_of(q, ["chair_2", "desk_1"]) == 0.5
    assert sr.recall_of(q, []) == 0.0
    assert sr.recall_of(q, ["chair_1", "chair_2"]) == 1.0


################################################################################
#                               small scene checks
################################################################################
@pytest.fixture(scope='module')
def synthetic():
    scene = sr.generate_synthetic_scene(8, 12, 30, sr.SCENE_PRESETS['villa_interior']['vocab'])
    questions = sr.generate_questions(scene, sr.random_user_poses(seed=8, n=3))
    keep = sorted( np.random.default_rng(8).choice(len(questions), size=200, replace=False).tolist() )
    corpus = [questions[i] for i in keep]
    model = sr.TwoTowerModel.initialize(seed=8)
    return scene, corpus, model


def test_recall_is_monotone_in_k(synthetic):
    scene, corpus, model = synthetic
    db = sr.KnowledgeDatabase.from_scene(scene, model)
    sweep = sr.k_sweep(db, None, corpus, range(1, 11), seed=8)
    assert sweep.recall_monotone()
    assert sweep.recall_monotone(sr.SINGLE)
    assert sweep.recall_monotone(sr.MULTI)
    recalls = [v for _,v in sweep.curve('recall')]
    assert recalls == sorted(recalls)
    assert list(sweep.reports) == list(range(1, 11))


def test_k_sweep_validation(synthetic):
    scene, corpus, model = synthetic
    evaluator = sr.Evaluator(sr.KnowledgeDatabase.from_scene(scene, model))
    with pytest.raises(sr.InvalidParameterError):
        evaluator.k_sweep(corpus, [3, 1])
    with pytest.raises(sr.InvalidParameterError):
        evaluator.evaluate(corpus, k=0)


def test_perfect_retrieval_answers_everything(synthetic):
    scene, _, model = synthetic
    corpus = sr.generate_questions(scene, sr.random_user_poses(seed=1, n=2))
    db = sr.KnowledgeDatabase.from_scene(scene, model)
    report = sr.evaluate(db, sr.TemplateAnswerer(), corpus, k=len(db))
    assert report.recall() == 1.0
    wrong = [r for r in report.rows if not r['correct']]
    assert not wrong, wrong[:3]
    assert report.accuracy() == 1.0
    assert {r['topic'] for r in report.rows} == set(sr.TOPICS)


def test_in_context_baseline(synthetic):
    scene, corpus, model = synthetic
    report = sr.evaluate(sr.KnowledgeDatabase.from_scene(scene, model), None, corpus, k=None)
    assert report.config['k'] == 'all'
    assert report.recall() == 1.0
    assert report.accuracy() == 1.0


def test_report_contents(synthetic):
    scene, corpus, model = synthetic
    report = sr.evaluate(sr.KnowledgeDatabase.from_scene(scene, model), None, corpus[:20], k=3, seed=8)
    assert report.config == {'k' : 3, 'model' : model.checkpoint_id, 'seed' : 8, 'scene' : scene.name}
    row = report.rows[0]
    assert set(row) == {'question', 'kind', 'topic', 'scene', 'retrieved', 'recall',
                        'answer', 'ground_truth', 'correct'}
    assert len(row['retrieved']) == 3
    agg = report.aggregates
    assert agg['overall']['n'] == 20
    assert sum(g['n'] for g in agg['kind'].values()) == 20
    assert scene.name in agg['scene']
    assert "overall" in report.table()


def test_corpus_must_fit_the_database(synthetic):
    scene, corpus, model = synthetic
    other = sr.generate_preset_scene('viking_village', seed=0)
    evaluator = sr.Evaluator(sr.KnowledgeDatabase.from_scene(other, model))
    with pytest.raises(sr.EvalError):
        evaluator.evaluate(corpus)
    with pytest.raises(sr.EvalError):
        evaluator.evaluate([])


def test_threaded_evaluation_matches(synthetic):
    scene, corpus, model = synthetic
    evaluator = sr.Evaluator(sr.KnowledgeDatabase.from_scene(scene, model))
    assert evaluator.evaluate(corpus, 6, workers=4).to_json() == evaluator.evaluate(corpus, 6).to_json()


################################################################################
#                         training on the office scene
################################################################################
@pytest.fixture(scope='module')
def office():
    """trains towers on a slice of the office corpus and keeps the rest for testing"""
    scene = sr.generate_preset_scene('office', seed=2, n_instances=34)
    questions = sr.generate_questions(scene, sr.random_user_poses(seed=2, n=20))
    train_q, test_q = sr.split_corpus(questions, 294, seed=2)
    samples = sr.build_training_samples(train_q, scene, negatives=1, hard_negatives=1, seed=2)
    initial, trained, history = sr.fit(samples, sr.TrainConfig(seed=2))
    return dict(scene=scene, train=train_q, test=test_q, samples=samples,
                initial=initial, trained=trained, history=history)


def test_held_out_set_is_larger(office):
    assert len(office['train']) == 294
    assert len(office['test']) >= 10 * len(office['train'])
    assert not ({q.text for q in office['train']} & {q.text for q in office['test']})


def test_training_converges(office):
    history = office['history']
    assert len(history) == sr.TrainConfig().epochs + 1
    assert history[-1] < history[0]
    sims = sr.similarity_by_label(office['trained'], office['samples'])
    assert sims[sr.POS] > sims[sr.NEG]
    assert sims[sr.POS] > sims[sr.HNEG]


def test_training_pulls_positives_and_pushes_hard_negatives(office):
    before = sr.similarity_by_label(office['initial'], office['samples'])
    after = sr.similarity_by_label(office['trained'], office['samples'])
    assert after[sr.POS] > before[sr.POS]
    assert after[sr.HNEG] < before[sr.HNEG]


def test_training_improves_recall(office):
    scene, test = office['scene'], office['test']
    report = sr.compare_models(sr.KnowledgeDatabase.from_scene(scene, office['initial']),
                                sr.KnowledgeDatabase.from_scene(scene, office['trained']),
                                test, k=6, seed=2)
    trained = report.trained.recall(sr.SINGLE)
    untrained = report.untrained.recall(sr.SINGLE)
    assert trained >= 0.90
    assert trained > untrained
    assert report.delta[scene.name]['overall']['recall'] == pytest.approx(
                report.trained.recall() - report.untrained.recall())


def _row(scene, kind, correct, recall):
    return {'question' : 'q', 'kind' : kind, 'topic' : 'count', 'scene' : scene,
            'retrieved' : [], 'recall' : recall, 'answer' : '-', 'ground_truth' : '-',
            'correct' : correct}


def test_scene_deltas_use_their_own_rows():
    config = {'k' : 1, 'model' : 'm', 'seed' : 0, 'scene' : 'mixed'}
    untrained = sr.EvalReport((_row('office', sr.MULTI, False, 0.0),
                                _row('villa', sr.MULTI, True, 1.0),
                                _row('villa', sr.MULTI, True, 1.0)), config)
    trained = sr.EvalReport((_row('office', sr.MULTI, True, 1.0),
                                _row('villa', sr.MULTI, True, 1.0),
                                _row('villa', sr.MULTI, False, 0.5)), config)
    delta = sr.ComparisonReport(untrained, trained).delta

    assert delta['office']['overall']['accuracy'] == pytest.approx(1.0)
    assert delta['office']['overall']['recall'] == pytest.approx(1.0)
    assert delta['villa']['overall']['accuracy'] == pytest.approx(-0.5)
    assert delta['villa']['overall']['recall'] == pytest.approx(-0.25)
    assert delta['villa'][sr.MULTI] == delta['villa']['overall']


def test_trained_towers_transfer_to_another_scene(office):
    viking = sr.generate_preset_scene('viking_village', seed=2)
    assert not set(viking.categories) & set(office['scene'].categories)
    corpus = sr.generate_questions(viking, sr.random_user_poses(seed=5, n=2))

    report = sr.compare_models(sr.KnowledgeDatabase.from_scene(viking, office['initial']),
                                sr.KnowledgeDatabase.from_scene(viking, office['trained']),
                                corpus, k=6, seed=5)
    assert report.trained.recall() >= report.untrained.recall()


def test_compare_rejects_mismatched_databases(office):
    scene = office['scene']
    other = sr.TwoTowerModel.initialize(seed=0, embedder=sr.HashEmbedder(dimension=64), hidden=16, embed=8)
    with pytest.raises(sr.ConfigurationMismatchError):
        sr.compare_models(sr.KnowledgeDatabase.from_scene(scene, office['initial']),
                            sr.KnowledgeDatabase.from_scene(scene, other),
                            office['test'][:5])
    viking = sr.generate_preset_scene('viking_village', seed=2)
    with pytest.raises(sr.ConfigurationMismatchError):
        sr.compare_models(sr.KnowledgeDatabase.from_scene(viking, office['initial']),
                            sr.KnowledgeDatabase.from_scene(scene, office['trained']),
                            office['test'][:5])


################################################################################
#                                 determinism
################################################################################
def test_reports_are_reproducible(office, synthetic):
    scene, corpus, model = synthetic
    first = sr.k_sweep(sr.KnowledgeDatabase.from_scene(scene, model), None, corpus, [1, 6, 10], seed=8)
    second = sr.k_sweep(sr.KnowledgeDatabase.from_scene(scene, sr.TwoTowerModel.initialize(seed=8)),
                        None, corpus, [1, 6, 10], seed=8)
    for k in (1, 6, 10):
        assert first.reports[k].to_json() == second.reports[k].to_json()

    # retraining from the same samples and seed gives the same checkpoint
    _, again, _ = sr.fit(office['samples'], sr.TrainConfig(seed=2))
    assert sr.model_to_bytes(again) == sr.model_to_bytes(office['trained'])

    test = office['test'][:300]
    a = sr.compare_models(sr.KnowledgeDatabase.from_scene(office['scene'], office['initial']),
                            sr.KnowledgeDatabase.from_scene(office['scene'], office['trained']),
                            test, seed=2)
    b = sr.compare_models(sr.KnowledgeDatabase.from_scene(office['scene'], office['initial']),
                            sr.KnowledgeDatabase.from_scene(office['scene'], again),
                            test, seed=2)
    assert a.to_json() == b.to_json()
