# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
"""command line entry point, one subcommand per step of the workflow

    scenerag gen-scene --preset office --seed 2 --out office.json
    scenerag gen-corpus --scene office.json --poses 20 --out corpus.jsonl
    scenerag build-samples --scene office.json --corpus corpus.jsonl --train 294 \\
        --out samples.jsonl --test-out test.jsonl
    scenerag train --samples samples.jsonl --out model.json
    scenerag eval --scene office.json --corpus test.jsonl --model model.json
    scenerag serve --scene office.json --model model.json --bind 127.0.0.1:7077
    scenerag ask --bind 127.0.0.1:7077 "What is the color of the clock?"
"""
import argparse
import json
import logging
import sys
from uuid import uuid4

from .Logger import set_global_level
from .core.answer import TemplateAnswerer, ChatBackendConfig, ChatCompletionAnswerer
from .core.constants import DEFAULT_K, DEFAULT_BIND, DEFAULT_HIDDEN, DEFAULT_EMBED, SCENE_PRESETS
from .core.corpus import generate_questions, random_user_poses, split_corpus, \
                            build_training_samples, save_questions, load_questions
from .core.embedding import HashEmbedder
from .core.evaluation import Evaluator, compare_models
from .core.Exceptions import SceneRAGError
from .core.io_tools import prevent_overwrite, write_json, dumps_json
from .core.KnowledgeDatabase import KnowledgeDatabase
from .core.Scene import UserPose, load_scene, save_scene, \
                        generate_preset_scene, generate_synthetic_scene
from .core.service import QueryRequest, QueryServer, client_query, profile_latency
from .core.TwoTower import TwoTowerModel, TrainConfig, TRAIN_PRESETS, \
                            fit, save_model, load_model, save_samples, load_samples
from .version_info import __version__


################################################################################
#                                  helpers
################################################################################
def _out_path(args, path=None):
    path = args.out if path is None else path
    if path and args.no_overwrite:
        path = prevent_overwrite(path)
    return path


def _print(text):
    sys.stdout.write(text + '\n')


def _model(args):
    """the checkpoint given by --model, or untrained towers seeded by --seed"""
    if args.model:
        return load_model(args.model, args.password)
    return TwoTowerModel.initialize(args.seed, HashEmbedder(), DEFAULT_HIDDEN, DEFAULT_EMBED)


def _answerer(args):
    if args.answerer == 'chat':
        return ChatCompletionAnswerer( ChatBackendConfig(endpoint=args.endpoint,
                                                            model=args.llm_model) )
    return TemplateAnswerer()


def _database(args):
    return KnowledgeDatabase.from_scene(load_scene(args.scene), _model(args))


def _ks(text):
    try:
        return [int(k) for k in text.split(',') if k.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("k values must be comma separated integers, got '{}'".format(text))


################################################################################
#                                subcommands
################################################################################
def cmd_gen_scene(args):
    if args.preset:
        scene = generate_preset_scene(args.preset, args.seed, args.instances)
    else:
        vocab = [v.strip() for v in args.vocab.split(',') if v.strip()]
        scene = generate_synthetic_scene(args.seed,
                                            args.categories,
                                            args.instances or args.categories,
                                            vocab,
                                            name=args.name)
    path = _out_path(args)
    if path:
        save_scene(scene, path)
        _print(path)
    else:
        _print( dumps_json(scene.to_dict()) )


def cmd_gen_corpus(args):
    scene = load_scene(args.scene)
    poses = random_user_poses(args.seed, args.poses, args.extent) if args.poses else None
    questions = generate_questions(scene, poses, seed=args.seed)
    path = _out_path(args)
    if path:
        save_questions(questions, path)
        _print(path)
    else:
        for q in questions:
            _print( dumps_json(q.to_dict()) )


def cmd_build_samples(args):
    scene = load_scene(args.scene)
    questions = load_questions(args.corpus)
    test = []
    if args.train is not None:
        questions, test = split_corpus(questions, args.train, args.seed)

    samples = build_training_samples(questions, scene,
                                        negatives=args.negatives,
                                        hard_negatives=args.hard_negatives,
                                        seed=args.seed)
    path = _out_path(args)
    save_samples(samples, path)
    _print(path)
    if args.test_out:
        test_path = _out_path(args, args.test_out)
        save_questions(test, test_path)
        _print(test_path)


def cmd_train(args):
    overrides = {'seed' : args.seed}
    for key in ('margin', 'w_hneg', 'lr', 'epochs'):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    cfg = TrainConfig.preset(args.preset, **overrides)

    samples = load_samples(args.samples)
    _, trained, history = fit(samples, cfg, HashEmbedder(), args.hidden, args.embed)

    path = _out_path(args)
    checksum = save_model(trained, path, args.password)
    _print( dumps_json({'checkpoint' : path,
                        'checkpoint_id' : trained.checkpoint_id,
                        'sha256' : checksum,
                        'loss_initial' : history[0],
                        'loss_final' : history[-1],
                        'epochs' : cfg.epochs}) )


def cmd_eval(args):
    corpus = load_questions(args.corpus)
    evaluator = Evaluator(_database(args), _answerer(args))
    k = None if args.in_context else args.k
    report = evaluator.evaluate(corpus, k, seed=args.seed, workers=args.workers)
    path = _out_path(args)
    if path:
        report.save(path)
    _print( report.table() )


def cmd_sweep_k(args):
    corpus = load_questions(args.corpus)
    sweep = Evaluator(_database(args), _answerer(args)).k_sweep(corpus, args.ks, seed=args.seed)
    path = _out_path(args)
    if path:
        write_json(path, sweep.to_dict(), indent=2)
    _print( sweep.table() )


def cmd_compare(args):
    corpus = load_questions(args.corpus)
    trained = load_model(args.model, args.password)
    untrained = TwoTowerModel.initialize(args.seed, trained.embedder, *trained.dims[1:])

    scene = load_scene(args.scene)
    report = compare_models(KnowledgeDatabase.from_scene(scene, untrained),
                            KnowledgeDatabase.from_scene(scene, trained),
                            corpus, args.k, _answerer(args), seed=args.seed)
    path = _out_path(args)
    if path:
        write_json(path, report.to_dict(), indent=2)
    _print( report.table() )


def cmd_serve(args):
    server = QueryServer(_database(args), _answerer(args), args.bind, args.k)
    _print( "listening on {}:{}".format(*server.address) )
    sys.stdout.flush()
    server.serve_until_signalled()


def cmd_ask(args):
    pose = UserPose(tuple(args.position), tuple(args.orientation))
    k = args.k
    if args.repeat > 1:
        requests = [QueryRequest(args.question, pose, k, "q{}".format(i)) for i in range(args.repeat)]
        report = profile_latency(args.bind, requests, args.timeout)
        _print( report.table() )
        return

    request = QueryRequest(args.question, pose, k, uuid4().hex[:8])
    response, communication_ms, end_to_end_ms = client_query(args.bind, request, args.timeout)
    out = response.to_dict()
    out['communication_ms'] = communication_ms
    out['end_to_end_ms'] = end_to_end_ms
    _print( dumps_json(out) )
    if not response.ok:
        return 1


################################################################################
#                                  parser
################################################################################
class JsonArgumentParser(argparse.ArgumentParser):
    """usage errors go to stderr as one JSON line, exit code 2"""
    def error(self, message):
        sys.stderr.write( json.dumps({'error' : 'ArgumentError', 'message' : message}) + '\n' )
        sys.exit(2)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0, help="random seed")
    common.add_argument('--k', type=int, default=DEFAULT_K, help="entries retrieved per question")
    common.add_argument('--model', default=None, help="two-tower checkpoint")
    common.add_argument('--password', default=None, help="password of an encrypted checkpoint")
    common.add_argument('--scene', default=None, help="scene file")
    common.add_argument('--out', default=None, help="output file")
    common.add_argument('--no-overwrite', action='store_true',
                            help="number the output file instead of replacing it")
    common.add_argument('--verbose', '-v', action='store_true', help="debug logging")

    answering = argparse.ArgumentParser(add_help=False)
    answering.add_argument('--answerer', choices=('template', 'chat'), default='template')
    answering.add_argument('--endpoint', default=ChatBackendConfig.endpoint,
                            help="chat completion endpoint for --answerer chat")
    answering.add_argument('--llm-model', default=ChatBackendConfig.model)

    parser = JsonArgumentParser(prog='scenerag',
                                    description="retrieval augmented question answering over 3D scenes")
    parser.add_argument('--version', action='version', version=__version__)
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('gen-scene', parents=[common], help="generate a synthetic scene")
    p.add_argument('--preset', choices=sorted(SCENE_PRESETS), default=None)
    p.add_argument('--categories', type=int, default=10)
    p.add_argument('--instances', type=int, default=None)
    p.add_argument('--vocab', default=','.join(SCENE_PRESETS['office']['vocab']),
                    help="comma separated category vocabulary")
    p.add_argument('--name', default=None)
    p.set_defaults(func=cmd_gen_scene)

    p = sub.add_parser('gen-corpus', parents=[common], help="generate template questions")
    p.add_argument('--poses', type=int, default=0, help="random user poses, 0 asks from the origin")
    p.add_argument('--extent', type=float, default=10.0)
    p.set_defaults(func=cmd_gen_corpus, required=('scene', 'out'))

    p = sub.add_parser('build-samples', parents=[common], help="label training samples")
    p.add_argument('--corpus', required=True)
    p.add_argument('--train', type=int, default=None,
                    help="train on this many questions, the other texts go to --test-out")
    p.add_argument('--test-out', default=None)
    p.add_argument('--negatives', type=int, default=1)
    p.add_argument('--hard-negatives', type=int, default=1)
    p.set_defaults(func=cmd_build_samples, required=('scene', 'out'))

    p = sub.add_parser('train', parents=[common], help="train the two towers")
    p.add_argument('--samples', required=True)
    p.add_argument('--preset', choices=sorted(TRAIN_PRESETS), default='desk')
    p.add_argument('--margin', type=float, default=None)
    p.add_argument('--w-hneg', dest='w_hneg', type=float, default=None)
    p.add_argument('--lr', type=float, default=None)
    p.add_argument('--epochs', type=int, default=None)
    p.add_argument('--hidden', type=int, default=DEFAULT_HIDDEN)
    p.add_argument('--embed', type=int, default=DEFAULT_EMBED)
    p.set_defaults(func=cmd_train, required=('out',))

    p = sub.add_parser('eval', parents=[common, answering], help="evaluate a corpus")
    p.add_argument('--corpus', required=True)
    p.add_argument('--in-context', action='store_true',
                    help="hand every visible object to the answerer instead of retrieving")
    p.add_argument('--workers', type=int, default=1)
    p.set_defaults(func=cmd_eval, required=('scene',))

    p = sub.add_parser('sweep-k', parents=[common, answering], help="evaluate a corpus for several k")
    p.add_argument('--corpus', required=True)
    p.add_argument('--ks', type=_ks, default=list(range(1, 11)), help="e.g. 1,2,4,6,8,10")
    p.set_defaults(func=cmd_sweep_k, required=('scene',))

    p = sub.add_parser('compare', parents=[common, answering], help="untrained vs trained towers")
    p.add_argument('--corpus', required=True)
    p.set_defaults(func=cmd_compare, required=('scene', 'model'))

    p = sub.add_parser('serve', parents=[common, answering], help="run the query server")
    p.add_argument('--bind', default=DEFAULT_BIND)
    p.set_defaults(func=cmd_serve, required=('scene',))

    p = sub.add_parser('ask', parents=[common], help="query a running server")
    p.add_argument('question')
    p.add_argument('--bind', default=DEFAULT_BIND)
    p.add_argument('--position', type=float, nargs=3, default=(0.0, 0.0, 0.0))
    p.add_argument('--orientation', type=float, nargs=4, default=(0.0, 0.0, 0.0, 1.0))
    p.add_argument('--timeout', type=float, default=10.0)
    p.add_argument('--repeat', type=int, default=1, help="send N times and print a latency table")
    p.set_defaults(func=cmd_ask)

    return parser


################################################################################
def main(argv=None):
    """runs one subcommand, returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    missing = ['--' + r for r in getattr(args, 'required', ()) if not getattr(args, r)]
    if missing:
        parser.error("{} requires {}".format(args.command, ', '.join(missing)))

    set_global_level(logging.DEBUG if args.verbose else logging.WARNING)
    try:
        code = args.func(args)
    except (SceneRAGError, OSError) as e:
        sys.stderr.write( json.dumps({'error' : type(e).__name__, 'message' : str(e)}) + '\n' )
        return 1
    return 0 if code is None else code


if __name__ == "__main__":
    sys.exit( main() )
