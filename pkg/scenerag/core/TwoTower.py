# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
import copy
import hashlib
import json
from collections import OrderedDict
from dataclasses import dataclass, replace

import numpy as np

from ..Logger import get_logger
from .constants import DEFAULT_HIDDEN, DEFAULT_EMBED, CHECKPOINT_FORMAT, \
                        CHECKPOINT_VERSION
from .embedding import HashEmbedder, embedder_from_config, info_text
from .Exceptions import ModelError, CheckpointError, DivergenceError, \
                        ZeroEmbeddingError, InvalidParameterError, SceneRAGError
from .io_tools import dumps_json, seal, unseal, read_jsonl, write_jsonl
from .util import Timer, arrsummary

MODEL_LOGGER = get_logger('TwoTower')

POS = 'pos'
NEG = 'neg'
HNEG = 'hneg'
LABELS = (POS, NEG, HNEG)
"""relation labels of a question-information pair"""

PARAM_ORDER = ('W1', 'b1', 'W2', 'b2')
"""order in which a tower's parameters are flattened and stored"""


################################################################################
#                               data containers
################################################################################
@dataclass(frozen=True)
class TrainingSample(object):
    """a question paired with an information key and its relation label"""
    question: str
    information: tuple
    label: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise InvalidParameterError("label must be one of {}, not '{}'".format(LABELS, self.label))
        object.__setattr__(self, 'information', tuple(self.information))

    def to_dict(self):
        return {'question' : self.question,
                'category' : self.information[0],
                'instance' : self.information[1],
                'label' : self.label}

    @classmethod
    def from_dict(cls, d):
        return cls(d['question'], (d['category'], d['instance']), d['label'])


def save_samples(samples, path):
    """writes training samples as JSON lines"""
    return write_jsonl(path, (s.to_dict() for s in samples))


def load_samples(path):
    """reads training samples from JSON lines"""
    try:
        return [TrainingSample.from_dict(d) for d in read_jsonl(path)]
    except KeyError as e:
        msg = "training sample in '{}' is missing field {}".format(path, e)
        MODEL_LOGGER.error(msg)
        raise SceneRAGError(msg)


################################################################################
@dataclass(frozen=True)
class TrainConfig(object):
    """hyper-parameters of retriever training

    The defaults are the `desk` preset of TRAIN_PRESETS (lr 0.5, 200 epochs),
    which moves freshly initialized towers with full-batch descent. The
    `short` preset is the brief schedule: lr 1e-2 for 6 epochs.

    Attributes:
        margin(float): similarity threshold m below which negatives are free
        w_hneg(float): loss multiplier of hard negatives, >= 1
        lr(float): gradient descent step size
        epochs(int): number of full-batch updates
        seed(int): seed of the tower initialization
    """
    margin: float = 0.2
    w_hneg: float = 2.0
    lr: float = 0.5
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.margin < 1.0):
            raise InvalidParameterError("margin must be within (0, 1), got {}".format(self.margin))
        if self.w_hneg < 1.0:
            raise InvalidParameterError("w_hneg must be >= 1, got {}".format(self.w_hneg))
        if self.lr < 0.0 or not np.isfinite(self.lr):
            raise InvalidParameterError("lr must be a finite value >= 0, got {}".format(self.lr))
        if int(self.epochs) < 1:
            raise InvalidParameterError("epochs must be a positive integer, got {}".format(self.epochs))

    ############################################################################
    @classmethod
    def preset(cls, name, **overrides):
        """returns one of the named configurations in :data:`TRAIN_PRESETS`"""
        if name not in TRAIN_PRESETS:
            raise InvalidParameterError("unknown preset '{}', must be one of {}".format(name, sorted(TRAIN_PRESETS)))
        return replace(TRAIN_PRESETS[name], **overrides)

    def replace(self, **changes):
        return replace(self, **changes)


TRAIN_PRESETS = {
    # full-batch descent needs large steps to move fresh towers
    'desk' : TrainConfig(lr=0.5, epochs=200),
    'short' : TrainConfig(lr=1e-2, epochs=6),
    # the transformer fine-tuning schedule
    'finetune' : TrainConfig(lr=1e-5, epochs=6),
}


################################################################################
#                                   towers
################################################################################
class Tower(object):
    """affine -> tanh -> affine map from base embeddings into the shared space

    Attributes:
        W1(np.ndarray): (H, D) first layer weights
        b1(np.ndarray): (H,) first layer bias
        W2(np.ndarray): (E, H) second layer weights
        b2(np.ndarray): (E,) second layer bias
    """
    def __init__(self, W1, b1, W2, b2):
        self.W1 = np.array(W1, dtype=np.float64)
        self.b1 = np.array(b1, dtype=np.float64)
        self.W2 = np.array(W2, dtype=np.float64)
        self.b2 = np.array(b2, dtype=np.float64)

        H, D = self.W1.shape
        E = self.W2.shape[0]
        if self.b1.shape != (H,) or self.W2.shape != (E, H) or self.b2.shape != (E,):
            raise ModelError("inconsistent tower parameter shapes")
        if not all( np.all(np.isfinite(p)) for p in self.parameters() ):
            raise ModelError("tower parameters must be finite")

    ############################################################################
    @classmethod
    def initialize(cls, rng, dimension, hidden, embed):
        """Glorot-uniform weights, zero biases"""
        def _glorot(fan_out, fan_in):
            limit = np.sqrt( 6.0 / (fan_in + fan_out) )
            return rng.uniform(-limit, limit, size=(fan_out, fan_in))

        return cls(_glorot(hidden, dimension),
                    np.zeros(hidden),
                    _glorot(embed, hidden),
                    np.zeros(embed))

    ############################################################################
    def parameters(self):
        """:obj:`list` of :obj:`np.ndarray`: parameters in PARAM_ORDER"""
        return [self.W1, self.b1, self.W2, self.b2]

    ############################################################################
    def forward(self, X):
        """maps an (n, D) batch to (n, E), also returning the hidden activations"""
        A = np.tanh(X @ self.W1.T + self.b1)
        return A @ self.W2.T + self.b2, A

    ############################################################################
    def __call__(self, X):
        return self.forward(X)[0]

    ############################################################################
    def backward(self, X, A, G):
        """gradients of the parameters given dL/dOutput

        Args:
            X(np.ndarray): (n, D) inputs of the forward pass
            A(np.ndarray): (n, H) hidden activations of the forward pass
            G(np.ndarray): (n, E) gradient of the loss wrt the outputs

        Returns:
            :obj:`list` of :obj:`np.ndarray`: gradients in PARAM_ORDER
        """
        dZ1 = (G @ self.W2) * (1.0 - A * A)
        return [dZ1.T @ X, dZ1.sum(axis=0), G.T @ A, G.sum(axis=0)]

    ############################################################################
    @property
    def dims(self):
        """tuple: (D, H, E)"""
        return (self.W1.shape[1], self.W1.shape[0], self.W2.shape[0])

    ############################################################################
    def to_dict(self):
        return OrderedDict( (name, p.ravel().tolist()) for name,p in zip(PARAM_ORDER, self.parameters()) )

    @classmethod
    def from_dict(cls, d, dimension, hidden, embed):
        try:
            return cls(np.reshape(d['W1'], (hidden, dimension)),
                        np.reshape(d['b1'], (hidden,)),
                        np.reshape(d['W2'], (embed, hidden)),
                        np.reshape(d['b2'], (embed,)))
        except (KeyError, ValueError) as e:
            raise CheckpointError("tower parameters don't match the stored dimensions: {}".format(e))


################################################################################
#                                 the model
################################################################################
class TwoTowerModel(object):
    """question tower and information tower over one frozen base embedder

    Attributes:
        question_tower(:obj:`Tower`): encodes questions
        information_tower(:obj:`Tower`): encodes (category, instance) keys
        embedder(:obj:`Embedder`): base text embedder shared by both towers

    Example:
        >>> import scenerag as sr
        >>> model = sr.TwoTowerModel.initialize(seed=0)
        >>> model.forward_question("where is chair_1").shape
        (64,)
    """
    def __init__(self, question_tower, information_tower, embedder):
        if question_tower.dims != information_tower.dims:
            raise ModelError("question and information towers must share (D, H, E)")
        if question_tower.dims[0] != embedder.dimension:
            raise ModelError("tower input size {} doesn't match embedder dimension {}"\
                                .format(question_tower.dims[0], embedder.dimension))
        self.question_tower = question_tower
        self.information_tower = information_tower
        self.embedder = embedder

    ############################################################################
    @classmethod
    def initialize(cls, seed=0, embedder=None, hidden=DEFAULT_HIDDEN, embed=DEFAULT_EMBED):
        """builds a freshly initialized model, the question tower is drawn
        before the information tower from one seeded generator"""
        embedder = HashEmbedder() if embedder is None else embedder
        rng = np.random.default_rng(seed)
        question = Tower.initialize(rng, embedder.dimension, hidden, embed)
        information = Tower.initialize(rng, embedder.dimension, hidden, embed)
        return cls(question, information, embedder)

    ############################################################################
    #                               forward passes
    ############################################################################
    def encode_questions(self, questions):
        """(n, E) tower outputs for a list of question texts"""
        return self.question_tower( self.embedder.embed_batch(list(questions)) )

    ############################################################################
    def encode_information(self, infos):
        """(n, E) tower outputs for a list of (category, instance) keys"""
        texts = [info_text(i) for i in infos]
        return self.information_tower( self.embedder.embed_batch(texts) )

    ############################################################################
    def forward_question(self, question):
        return self.encode_questions([question])[0]

    ############################################################################
    def forward_information(self, info):
        return self.encode_information([info])[0]

    ############################################################################
    #                                 parameters
    ############################################################################
    def parameters(self):
        """all parameter arrays, question tower first"""
        return self.question_tower.parameters() + self.information_tower.parameters()

    ############################################################################
    @property
    def dims(self):
        """tuple: (D, H, E)"""
        return self.question_tower.dims

    ############################################################################
    def copy(self):
        return copy.deepcopy(self)

    ############################################################################
    def to_dict(self):
        D, H, E = self.dims
        return OrderedDict([
            ('format', CHECKPOINT_FORMAT),
            ('version', CHECKPOINT_VERSION),
            ('dimensions', {'D' : D, 'H' : H, 'E' : E}),
            ('embedder', self.embedder.config()),
            ('parameters', {'question' : self.question_tower.to_dict(),
                            'information' : self.information_tower.to_dict()}),
            ])

    ############################################################################
    @classmethod
    def from_dict(cls, d):
        if d.get('format') != CHECKPOINT_FORMAT:
            raise CheckpointError("not a two-tower checkpoint (format={!r})".format(d.get('format')))
        if d.get('version') != CHECKPOINT_VERSION:
            raise CheckpointError("unsupported checkpoint version {!r}, expected {}"\
                                    .format(d.get('version'), CHECKPOINT_VERSION))
        try:
            dims = d['dimensions']
            D, H, E = int(dims['D']), int(dims['H']), int(dims['E'])
            embedder = embedder_from_config(d['embedder'])
            params = d['parameters']
            question = Tower.from_dict(params['question'], D, H, E)
            information = Tower.from_dict(params['information'], D, H, E)
        except (KeyError, TypeError) as e:
            raise CheckpointError("malformed checkpoint, missing {}".format(e))

        if embedder.dimension != D:
            raise CheckpointError("checkpoint dimension D={} doesn't match its embedder dimension {}"\
                                    .format(D, embedder.dimension))
        return cls(question, information, embedder)

    ############################################################################
    @property
    def checkpoint_id(self):
        """str: short sha256 digest of the canonical checkpoint contents"""
        return hashlib.sha256( dumps_json(self.to_dict()).encode('utf-8') ).hexdigest()[:12]

    ############################################################################
    def __repr__(self):
        return "TwoTowerModel(D={}, H={}, E={}, id={})".format(*self.dims, self.checkpoint_id)


################################################################################
#                                 similarity
################################################################################
def cosine_sim(a, b):
    """cosine similarity of two non-zero vectors

    Example:
        >>> import scenerag as sr
        >>> round(sr.cosine_sim([1, 1], [1, 0]), 5)
        0.70711
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = float( np.linalg.norm(a) )
    nb = float( np.linalg.norm(b) )
    if na == 0.0 or nb == 0.0:
        msg = "cosine similarity is undefined for a zero vector"
        MODEL_LOGGER.error(msg)
        raise ZeroEmbeddingError(msg)
    return float( np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0) )


def loss_from_similarity(s, label, cfg):
    """the per-sample loss for a similarity s

    pos -> 1 - s, neg -> max(0, s - m), hneg -> w_hneg * max(0, s - m)
    """
    if label == POS:
        return 1.0 - s
    hinge = max(0.0, s - cfg.margin)
    if label == HNEG:
        return cfg.w_hneg * hinge
    return hinge


def sample_similarity(model, sample):
    return cosine_sim(model.forward_question(sample.question),
                        model.forward_information(sample.information))


def sample_loss(model, sample, cfg):
    """the loss contributed by one training sample"""
    return loss_from_similarity(sample_similarity(model, sample), sample.label, cfg)


def batch_loss(model, samples, cfg):
    """mean sample loss over a dataset"""
    return _Batch(model, samples).loss_and_grad(cfg, need_grad=False)[0]


def similarity_by_label(model, samples):
    """mean similarity of the samples of each label present in `samples`"""
    sims = _Batch(model, samples).similarities()
    labels = np.array([s.label for s in samples])
    return { l : float(sims[labels == l].mean()) for l in LABELS if np.any(labels == l) }


class _Batch(object):
    """a dataset prepared for repeated full-batch loss/gradient evaluation,
    every distinct question and information text is embedded once"""
    def __init__(self, model, samples):
        if len(samples) == 0:
            msg = "cannot compute a loss over an empty dataset"
            MODEL_LOGGER.error(msg)
            raise InvalidParameterError(msg)

        self.model = model
        self.samples = list(samples)

        questions = list( OrderedDict.fromkeys(s.question for s in self.samples) )
        infos = list( OrderedDict.fromkeys(s.information for s in self.samples) )
        q_index = {q : i for i,q in enumerate(questions)}
        i_index = {info : i for i,info in enumerate(infos)}

        self.Xq = model.embedder.embed_batch(questions)
        self.Xi = model.embedder.embed_batch([info_text(i) for i in infos])
        self.qi = np.array([q_index[s.question] for s in self.samples])
        self.ii = np.array([i_index[s.information] for s in self.samples])
        self.labels = np.array([s.label for s in self.samples])

    ############################################################################
    def _forward(self):
        Uq, Aq = self.model.question_tower.forward(self.Xq)
        Ui, Ai = self.model.information_tower.forward(self.Xi)
        U = Uq[self.qi]
        V = Ui[self.ii]
        nu = np.linalg.norm(U, axis=1)
        nv = np.linalg.norm(V, axis=1)
        if np.any(nu == 0.0) or np.any(nv == 0.0):
            msg = "a tower produced a zero embedding, similarity is undefined"
            MODEL_LOGGER.error(msg)
            raise ZeroEmbeddingError(msg)
        S = np.clip(np.sum(U * V, axis=1) / (nu * nv), -1.0, 1.0)
        return S, (Uq, Aq, Ui, Ai, U, V, nu, nv)

    ############################################################################
    def similarities(self):
        return self._forward()[0]

    ############################################################################
    def loss_and_grad(self, cfg, need_grad=True):
        """mean loss and (optionally) gradients in model.parameters() order"""
        S, (Uq, Aq, Ui, Ai, U, V, nu, nv) = self._forward()
        n = len(self.samples)

        pos = (self.labels == POS)
        hneg = (self.labels == HNEG)
        active = (~pos) & (S > cfg.margin)
        weight = np.where(hneg, cfg.w_hneg, 1.0)

        losses = np.where(pos, 1.0 - S, weight * np.maximum(0.0, S - cfg.margin))
        loss = float( losses.mean() )
        if not need_grad:
            return loss, None

        # dL/ds, the hinge subgradient at s == m is 0
        dS = np.where(pos, -1.0, np.where(active, weight, 0.0)) / n

        inv = 1.0 / (nu * nv)
        dU = dS[:,None] * ( V * inv[:,None] - (S / nu**2)[:,None] * U )
        dV = dS[:,None] * ( U * inv[:,None] - (S / nv**2)[:,None] * V )

        Gq = np.zeros_like(Uq)
        Gi = np.zeros_like(Ui)
        np.add.at(Gq, self.qi, dU)
        np.add.at(Gi, self.ii, dV)

        grads = self.model.question_tower.backward(self.Xq, Aq, Gq) \
                + self.model.information_tower.backward(self.Xi, Ai, Gi)
        return loss, grads


################################################################################
#                                 training
################################################################################
def train(model, samples, cfg=None, log_every=25):
    """trains a copy of `model` with full-batch gradient descent

    Args:
        model(:obj:`TwoTowerModel`): the starting point, left untouched
        samples(:obj:`list` of :obj:`TrainingSample`): the dataset X
        cfg(:obj:`TrainConfig`): hyper-parameters, defaults to TrainConfig()
        log_every(int): epochs between progress log lines

    Returns:
        (tuple): tuple containing:

            :obj:`TwoTowerModel`: the trained model
            :obj:`list` of float: loss history, initial loss first,
                length cfg.epochs + 1
    """
    cfg = TrainConfig() if cfg is None else cfg
    trained = model.copy()
    batch = _Batch(trained, samples)
    params = trained.parameters()

    MODEL_LOGGER.info("training on {} samples ({}) for {} epochs, lr={}, m={}, w_hneg={}"\
                        .format(len(batch.samples),
                                ', '.join("{}={}".format(l, int(np.sum(batch.labels == l))) for l in LABELS),
                                cfg.epochs, cfg.lr, cfg.margin, cfg.w_hneg))
    t = Timer()
    history = []
    for epoch in range(int(cfg.epochs)):
        loss, grads = batch.loss_and_grad(cfg)
        _check_finite(loss, epoch)
        history.append(loss)
        for p, g in zip(params, grads):
            p -= cfg.lr * g

        if log_every and (epoch % log_every == 0):
            MODEL_LOGGER.info("epoch {:4d} | loss {:.6f}".format(epoch, loss))

    final = batch.loss_and_grad(cfg, need_grad=False)[0]
    _check_finite(final, int(cfg.epochs))
    history.append(final)

    MODEL_LOGGER.info("finished training in {}sec, loss {:.6f} -> {:.6f}"\
                        .format(t.time(), history[0], history[-1]))
    MODEL_LOGGER.debug("question W1 {}".format( arrsummary(trained.question_tower.W1) ))
    MODEL_LOGGER.debug("information W1 {}".format( arrsummary(trained.information_tower.W1) ))
    return trained, history


def _check_finite(loss, epoch):
    if not np.isfinite(loss):
        msg = "training diverged at epoch {} (loss={}), lower the learning rate".format(epoch, loss)
        MODEL_LOGGER.error(msg)
        raise DivergenceError(msg)


def fit(samples, cfg=None, embedder=None, hidden=DEFAULT_HIDDEN, embed=DEFAULT_EMBED):
    """initializes a model with cfg.seed and trains it

    Returns:
        (tuple): (initial model, trained model, loss history)
    """
    cfg = TrainConfig() if cfg is None else cfg
    initial = TwoTowerModel.initialize(cfg.seed, embedder, hidden, embed)
    trained, history = train(initial, samples, cfg)
    return initial, trained, history


def gradients(model, samples, cfg):
    """analytic gradients of batch_loss in model.parameters() order"""
    return _Batch(model, samples).loss_and_grad(cfg)[1]


def gradient_check(model, samples, cfg, step=1e-6, floor=1e-3):
    """compares analytic gradients with central finite differences

    The relative error of a parameter is |a - n| / max(|a|, |n|, f) where f is
    `floor` times the largest analytic gradient magnitude, so round-off on
    components that vanish doesn't dominate.

    Args:
        model(:obj:`TwoTowerModel`): a small model, it is perturbed in place
            and restored
        samples(:obj:`list` of :obj:`TrainingSample`): a few samples away
            from the hinge kink
        cfg(:obj:`TrainConfig`): loss hyper-parameters
        step(float): finite difference step

    Returns:
        float: the maximum relative error over all parameters
    """
    batch = _Batch(model, samples)
    analytic = batch.loss_and_grad(cfg)[1]
    scale = max( float(np.max(np.abs(g))) if g.size else 0.0 for g in analytic )
    denom_floor = max(floor * scale, 1e-300)

    worst = 0.0
    for p, g in zip(model.parameters(), analytic):
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + step
            plus = batch.loss_and_grad(cfg, need_grad=False)[0]
            flat[j] = orig - step
            minus = batch.loss_and_grad(cfg, need_grad=False)[0]
            flat[j] = orig

            numeric = (plus - minus) / (2.0 * step)
            denom = max(abs(gflat[j]), abs(numeric), denom_floor)
            worst = max(worst, abs(gflat[j] - numeric) / denom)

    MODEL_LOGGER.debug("gradient check max relative error {:.3e}".format(worst))
    return worst


################################################################################
#                                 checkpoints
################################################################################
def model_to_bytes(model):
    """canonical UTF-8 JSON encoding of a model"""
    return dumps_json(model.to_dict()).encode('utf-8')


def save_model(model, path, passwd=None):
    """writes a checkpoint, optionally encrypted

    Returns:
        str: the sha256 checksum of the written file
    """
    encoded, checksum = seal(model_to_bytes(model), passwd)
    with open(path, 'wb') as f:
        f.write(encoded)
    MODEL_LOGGER.info("saved {} to '{}'".format(model, path))
    return checksum


def load_model(path, passwd=None, checksum=None, expected_dimension=None):
    """reads a checkpoint written by :func:`save_model`

    Args:
        path(str): checkpoint file
        passwd(str,None): password if the checkpoint is encrypted
        checksum(str,None): sha256 checksum to verify the file against
        expected_dimension(int,None): base embedding size the caller needs

    Returns:
        :obj:`TwoTowerModel`: the model, parameters bit-identical to the saved ones
    """
    with open(path, 'rb') as f:
        raw = f.read()

    try:
        decoded = unseal(raw, passwd, checksum, source=path)
        model = TwoTowerModel.from_dict( json.loads(decoded.decode('utf-8')) )
    except (ValueError, UnicodeDecodeError) as e:
        msg = "unable to read checkpoint '{}': {}".format(path, e)
        MODEL_LOGGER.error(msg)
        raise CheckpointError(msg)
    except SceneRAGError as e:
        if isinstance(e, CheckpointError):
            MODEL_LOGGER.error(str(e))
            raise
        raise CheckpointError(str(e))

    if expected_dimension is not None and model.dims[0] != int(expected_dimension):
        msg = "checkpoint '{}' has D={}, expected D={}".format(path, model.dims[0], expected_dimension)
        MODEL_LOGGER.error(msg)
        raise CheckpointError(msg)

    return model
