# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers

# constants.py
from .constants import *

# Exceptions.py
from .Exceptions import SceneRAGError
from .Exceptions import InvalidParameterError
from .Exceptions import SceneError
from .Exceptions import SceneParseError
from .Exceptions import SceneValidationError
from .Exceptions import DegenerateQuaternionError
from .Exceptions import NonFiniteInputError
from .Exceptions import ModelError
from .Exceptions import CheckpointError
from .Exceptions import DivergenceError
from .Exceptions import ZeroEmbeddingError
from .Exceptions import DatabaseError
from .Exceptions import UnknownInstanceError
from .Exceptions import EmptyIndexError
from .Exceptions import CorpusError
from .Exceptions import InsufficientSceneError
from .Exceptions import DanglingInstanceError
from .Exceptions import PipelineError
from .Exceptions import StageError
from .Exceptions import ServiceError
from .Exceptions import EvalError
from .Exceptions import ConfigurationMismatchError

# io_tools.py
from .io_tools import passgen
from .io_tools import prevent_overwrite
from .io_tools import make_numbered_prefix
from .io_tools import read_jsonl
from .io_tools import write_jsonl

# util.py
from .util import arrsummary
from .util import timer_ms
from .util import Timer

# spatial.py
from .spatial import quat_to_rotation_matrix
from .spatial import normalize_quaternion
from .spatial import euclidean_distance
from .spatial import relative_position
from .spatial import qualitative_direction
from .spatial import RelativePosition

# Scene.py
from .Scene import ObjectRecord
from .Scene import UserPose
from .Scene import Scene
from .Scene import load_scene
from .Scene import save_scene
from .Scene import generate_synthetic_scene
from .Scene import generate_preset_scene

# embedding.py
from .embedding import tokenize
from .embedding import info_text
from .embedding import Embedder
from .embedding import HashEmbedder
from .embedding import hash_embed
from .embedding import embedder_from_config

# TwoTower.py
from .TwoTower import Tower
from .TwoTower import TwoTowerModel
from .TwoTower import POS
from .TwoTower import NEG
from .TwoTower import HNEG
from .TwoTower import TrainingSample
from .TwoTower import TrainConfig
from .TwoTower import TRAIN_PRESETS
from .TwoTower import cosine_sim
from .TwoTower import loss_from_similarity
from .TwoTower import sample_similarity
from .TwoTower import sample_loss
from .TwoTower import batch_loss
from .TwoTower import similarity_by_label
from .TwoTower import train
from .TwoTower import fit
from .TwoTower import gradients
from .TwoTower import gradient_check
from .TwoTower import model_to_bytes
from .TwoTower import save_model
from .TwoTower import load_model
from .TwoTower import save_samples
from .TwoTower import load_samples

# KnowledgeDatabase.py
from .KnowledgeDatabase import KnowledgeDatabase
from .KnowledgeDatabase import RetrievalResult
from .KnowledgeDatabase import ReadWriteLock

# corpus.py
from .corpus import SINGLE
from .corpus import MULTI
from .corpus import TOPICS
from .corpus import TEMPLATES
from .corpus import QuestionRecord
from .corpus import canonical
from .corpus import pluralize
from .corpus import parse_question
from .corpus import object_phrase
from .corpus import answer_from_record
from .corpus import closest_instance
from .corpus import format_number
from .corpus import format_vector
from .corpus import generate_questions
from .corpus import random_user_poses
from .corpus import ground_truth
from .corpus import split_corpus
from .corpus import build_training_samples
from .corpus import save_questions
from .corpus import load_questions

# answer.py
from .answer import PromptBundle
from .answer import render_prompt
from .answer import infer_topic
from .answer import Answerer
from .answer import TemplateAnswerer
from .answer import template_answer
from .answer import ChatBackendConfig
from .answer import ChatCompletionAnswerer

# Stage.py
from .Stage import Stage
from .Stage import Input
from .Stage import FuncStage

# pipeline_tools.py
from .pipeline_tools import stageify

# Pipeline.py
from .Pipeline import Pipeline

# service.py
from .service import MAX_LINE
from .service import parse_line
from .service import parse_address
from .service import QueryRequest
from .service import QueryResponse
from .service import QueryServer
from .service import QueryClient
from .service import LatencyReport
from .service import query_pipeline
from .service import stage_times
from .service import serve
from .service import client_query
from .service import profile_latency

# evaluation.py
from .evaluation import recall_of
from .evaluation import EvalReport
from .evaluation import Evaluator
from .evaluation import KSweep
from .evaluation import ComparisonReport
from .evaluation import evaluate
from .evaluation import k_sweep
from .evaluation import compare_models
