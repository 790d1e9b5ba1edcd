# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
#
"""the edge server: newline delimited JSON over TCP, one request and one
response per line, plus the client side latency instrumentation"""
import json
import signal
import socket
import socketserver
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from ..Logger import get_logger
from .answer import render_prompt, TemplateAnswerer
from .constants import DEFAULT_BIND, DEFAULT_K
from .Exceptions import ServiceError, SceneRAGError, InvalidParameterError
from .io_tools import dumps_json
from .Pipeline import Pipeline
from .Scene import UserPose
from .Stage import Stage, Input, FuncStage
from .util import Timer

SERVICE_LOGGER = get_logger('service')

EMPTY_QUESTION = "empty question"
MAX_LINE = 1 << 20
"""longest accepted request line in bytes"""


def parse_line(line, kind='request'):
    """decodes one NDJSON line into its json value"""
    try:
        return json.loads(line.decode('utf-8') if isinstance(line, bytes) else line)
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ServiceError("malformed {} line: {}".format(kind, e))


def parse_address(address):
    """splits 'host:port' into (host, port)"""
    if isinstance(address, (tuple, list)):
        return address[0], int(address[1])
    host, sep, port = str(address).rpartition(':')
    if not sep or not port.isdigit():
        raise InvalidParameterError("address must be 'host:port', got '{}'".format(address))
    return host or '127.0.0.1', int(port)


################################################################################
#                                  messages
################################################################################
@dataclass(frozen=True)
class QueryRequest(object):
    """a question asked from a user pose

    Attributes:
        question(str): the question text
        user_pose(:obj:`UserPose`): the pose the question is asked from
        k(int,None): number of entries to retrieve, server default if None
        request_id(str): client chosen token echoed in the response
    """
    question: str
    user_pose: UserPose = field(default_factory=UserPose)
    k: object = None
    request_id: str = ''

    def to_dict(self):
        d = OrderedDict([('request_id', self.request_id),
                            ('question', self.question),
                            ('user_pose', self.user_pose.to_dict())])
        if self.k is not None:
            d['k'] = self.k
        return d

    ############################################################################
    def encode(self):
        """the request as one UTF-8 line"""
        return (dumps_json(self.to_dict()) + '\n').encode('utf-8')

    ############################################################################
    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ServiceError("request must be a JSON object")
        question = d.get('question')
        if not isinstance(question, str):
            raise ServiceError("request 'question' must be a string")
        k = d.get('k')
        if k is not None and (isinstance(k, bool) or not isinstance(k, int) or k < 1):
            raise ServiceError("request 'k' must be a positive integer")
        try:
            pose = UserPose.from_dict(d['user_pose']) if 'user_pose' in d else UserPose()
        except SceneRAGError as e:
            raise ServiceError("invalid 'user_pose': {}".format(e))
        return cls(question, pose, k, str(d.get('request_id', '')))

    ############################################################################
    @classmethod
    def decode(cls, line):
        return cls.from_dict( parse_line(line, 'request') )


################################################################################
@dataclass(frozen=True)
class QueryResponse(object):
    """the server's reply to one QueryRequest

    Attributes:
        request_id(str): echoed token
        answer(str): answer text, empty for errors
        retrieved(tuple): (instance, score) pairs in rank order
        timings(dict): retrieval_ms, generation_ms and server_total_ms
        error(str,None): error description, None on success
    """
    request_id: str
    answer: str = ''
    retrieved: tuple = ()
    timings: dict = field(default_factory=dict)
    error: object = None

    @property
    def ok(self):
        return self.error is None

    ############################################################################
    def to_dict(self):
        if not self.ok:
            return OrderedDict([('request_id', self.request_id), ('error', self.error)])
        return OrderedDict([('request_id', self.request_id),
                            ('answer', self.answer),
                            ('retrieved', [[inst, score] for inst,score in self.retrieved]),
                            ('timings', dict(self.timings))])

    ############################################################################
    def encode(self):
        return (dumps_json(self.to_dict()) + '\n').encode('utf-8')

    ############################################################################
    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or 'request_id' not in d:
            raise ServiceError("response must be a JSON object with a 'request_id'")
        if 'error' in d:
            return cls(d['request_id'], error=str(d['error']))
        try:
            retrieved = tuple( (str(inst), score) for inst,score in d['retrieved'] )
            return cls(d['request_id'], d['answer'], retrieved,
                        {k : float(v) for k,v in d['timings'].items()})
        except (KeyError, TypeError, ValueError) as e:
            raise ServiceError("malformed response: {}".format(e))

    ############################################################################
    @classmethod
    def decode(cls, line):
        return cls.from_dict( parse_line(line, 'response') )


################################################################################
#                               query pipeline
################################################################################
class RetrieveStage(Stage):
    """sets the request pose and retrieves in one atomic database step, a
    None k hands over every visible object instead"""
    def __init__(self, db):
        self.db = db
        super().__init__()

    def process(self, question, k, pose):
        if k is None:
            return self.db.everything(question, pose)
        return self.db.retrieve(question, k, pose)


class AnswerStage(Stage):
    """runs an answerer on a prompt bundle"""
    def __init__(self, answerer):
        self.answerer = answerer
        super().__init__(answerer.__class__.__name__)

    def process(self, bundle, topic):
        return self.answerer.answer(bundle, topic)


RETRIEVAL_TASKS = ('result',)
GENERATION_TASKS = ('bundle', 'answer')


def query_pipeline(db, answerer=None, name='QueryPipeline'):
    """the per-request task graph: retrieve -> render prompt -> answer

    Inputs are (question, pose, k) plus the keyword input `topic`; the
    pipeline's outputs include 'result' (RetrievalResult), 'bundle'
    (PromptBundle) and 'answer'.
    """
    answerer = TemplateAnswerer() if answerer is None else answerer
    tasks = {
        'question' : Input(0),
        'pose' : Input(1),
        'k' : Input(2),
        'topic' : Input(),
        'result' : (RetrieveStage(db), 'question', 'k', 'pose'),
        'bundle' : (FuncStage(render_prompt), 'question', 'result', 'pose'),
        'answer' : (AnswerStage(answerer), 'bundle', 'topic'),
        }
    return Pipeline(tasks, name)


def stage_times(timings):
    """(retrieval_ms, generation_ms) from query pipeline task timings"""
    retrieval = sum(timings.get(t, 0.0) for t in RETRIEVAL_TASKS)
    generation = sum(timings.get(t, 0.0) for t in GENERATION_TASKS)
    return retrieval, generation


################################################################################
#                                   server
################################################################################
class _QueryHandler(socketserver.StreamRequestHandler):
    def handle(self):
        server = self.server.owner
        while True:
            line = self.rfile.readline(MAX_LINE)
            if not line:
                break
            if len(line) >= MAX_LINE and not line.endswith(b'\n'):
                response = self._drain_oversized()
                if response is None:
                    break
            elif not line.strip():
                continue
            else:
                response = server.handle_line(line)
            self.wfile.write( response.encode() )
            self.wfile.flush()

    def _drain_oversized(self):
        """skips the rest of a line longer than MAX_LINE, None on EOF"""
        while True:
            rest = self.rfile.readline(MAX_LINE)
            if not rest:
                return None
            if rest.endswith(b'\n'):
                break
        msg = "request line exceeds {} bytes".format(MAX_LINE)
        SERVICE_LOGGER.warning(msg)
        return QueryResponse('', error=msg)


class _ThreadingServer(socketserver.ThreadingMixIn, socketserver.TCPServer):
    daemon_threads = True
    allow_reuse_address = True


class QueryServer(object):
    """answers QueryRequests over TCP, one thread per connection

    Every request runs the query pipeline: its pose becomes the database's
    user pose in the same atomic step as the retrieval, then the prompt is
    rendered and answered.

    Attributes:
        db(:obj:`KnowledgeDatabase`): knowledge to answer from
        answerer(:obj:`Answerer`): produces answers
        default_k(int): k used when a request doesn't give one
        pipeline(:obj:`Pipeline`): the per-request task graph
    """
    def __init__(self, db, answerer=None, bind=DEFAULT_BIND, default_k=DEFAULT_K):
        self.db = db
        self.answerer = TemplateAnswerer() if answerer is None else answerer
        self.default_k = int(default_k)
        self.pipeline = query_pipeline(db, self.answerer)
        self.logger = self.pipeline.logger.getChild('server')

        host, port = parse_address(bind)
        try:
            self._server = _ThreadingServer((host, port), _QueryHandler)
        except OSError as e:
            msg = "unable to bind {}:{}: {}".format(host, port, e)
            self.logger.error(msg)
            raise ServiceError(msg)
        self._server.owner = self
        self._thread = None

    ############################################################################
    @property
    def address(self):
        """tuple: the (host, port) actually bound"""
        return self._server.server_address[:2]

    ############################################################################
    def handle_line(self, line):
        """turns one request line into a QueryResponse, never raises"""
        t = Timer()
        request_id = ''
        try:
            raw = parse_line(line)
            if isinstance(raw, dict):
                request_id = str(raw.get('request_id', ''))
            request = QueryRequest.from_dict(raw)
            if not request.question.strip():
                return QueryResponse(request_id, error=EMPTY_QUESTION)

            k = self.default_k if request.k is None else request.k
            outputs, timings = self.pipeline.process(request.question, request.user_pose, k,
                                                        topic=None, fetch=('result', 'answer'))
        except SceneRAGError as e:
            self.logger.warning("request '{}' failed: {}".format(request_id, e))
            return QueryResponse(request_id, error=str(e))
        except Exception as e:
            self.logger.error("request '{}' crashed: {}: {}".format(request_id, type(e).__name__, e))
            return QueryResponse(request_id, error="internal error")

        retrieval_ms, generation_ms = stage_times(timings)
        total_ms = t.raw_time_ms()
        return QueryResponse(request_id,
                                outputs['answer'],
                                outputs['result'].ranked,
                                {'retrieval_ms' : retrieval_ms,
                                    'generation_ms' : generation_ms,
                                    'server_total_ms' : total_ms})

    ############################################################################
    def start(self):
        """serves from a background thread and returns immediately"""
        self._thread = threading.Thread(target=self._server.serve_forever,
                                            name=self.pipeline.id, daemon=True)
        self._thread.start()
        self.logger.info("serving on {}:{}".format(*self.address))
        return self

    ############################################################################
    def shutdown(self):
        """stops accepting requests and closes the listening socket"""
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join()
            self._thread = None
        self.logger.info("server stopped")

    ############################################################################
    def serve_until_signalled(self, signals=(signal.SIGINT, signal.SIGTERM)):
        """serves until one of `signals` arrives, then shuts down cleanly.
        Must be called from the main thread"""
        stop = threading.Event()
        previous = {s : signal.signal(s, lambda *_: stop.set()) for s in signals}
        try:
            self.start()
            while not stop.wait(0.5):
                pass
        finally:
            self.shutdown()
            for s, handler in previous.items():
                signal.signal(s, handler)

    ############################################################################
    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.shutdown()


def serve(db, answerer=None, bind=DEFAULT_BIND, default_k=DEFAULT_K):
    """starts a QueryServer in the background and returns it"""
    return QueryServer(db, answerer, bind, default_k).start()


################################################################################
#                                   client
################################################################################
class QueryClient(object):
    """a persistent connection to a QueryServer

    Example:
        >>> with QueryClient("127.0.0.1:7077") as client: # doctest: +SKIP
        ...     response, comm_ms, e2e_ms = client.query(QueryRequest("Where is the clock?"))
    """
    def __init__(self, address=DEFAULT_BIND, timeout=10.0):
        self.address = parse_address(address)
        self.timeout = timeout
        try:
            self._sock = socket.create_connection(self.address, timeout=timeout)
        except OSError as e:
            msg = "unable to connect to {}:{}: {}".format(*self.address, e)
            SERVICE_LOGGER.error(msg)
            raise ServiceError(msg)
        self._rfile = self._sock.makefile('rb')

    ############################################################################
    def query(self, request):
        """sends one request and waits for its response

        Returns:
            (tuple): (QueryResponse, communication_ms, end_to_end_ms), where
                communication_ms is end_to_end_ms minus server_total_ms
        """
        payload = request.encode()
        try:
            t = Timer()
            self._sock.sendall(payload)
            line = self._rfile.readline(MAX_LINE)
            end_to_end_ms = t.raw_time_ms()
        except (socket.timeout, OSError) as e:
            msg = "query to {}:{} failed: {}".format(*self.address, e)
            SERVICE_LOGGER.error(msg)
            raise ServiceError(msg)

        if not line:
            raise ServiceError("server {}:{} closed the connection".format(*self.address))

        response = QueryResponse.decode(line)
        server_ms = response.timings.get('server_total_ms', 0.0) if response.ok else 0.0
        return response, end_to_end_ms - server_ms, end_to_end_ms

    ############################################################################
    def close(self):
        self._rfile.close()
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def client_query(address, request, timeout=10.0):
    """sends a single request over a fresh connection

    Returns:
        (tuple): (QueryResponse, communication_ms, end_to_end_ms)
    """
    with QueryClient(address, timeout) as client:
        return client.query(request)


################################################################################
#                              latency profiling
################################################################################
LATENCY_FIELDS = ('communication_ms', 'generation_ms', 'server_total_ms', 'end_to_end_ms')


@dataclass(frozen=True)
class LatencyReport(object):
    """per-query latencies and their means

    Attributes:
        rows(tuple): one dict per query with request_id and LATENCY_FIELDS
    """
    rows: tuple

    def __post_init__(self):
        if len(self.rows) == 0:
            raise InvalidParameterError("a latency report needs at least one query")

    ############################################################################
    @property
    def means(self):
        """dict: arithmetic mean of every latency field"""
        return {f : float( np.mean([r[f] for r in self.rows]) ) for f in LATENCY_FIELDS}

    ############################################################################
    def to_dict(self):
        return {'rows' : [dict(r) for r in self.rows], 'means' : self.means}

    ############################################################################
    def table(self):
        """plain text table of the rows and the means"""
        header = "{:<12}".format('request') + ''.join("{:>18}".format(f) for f in LATENCY_FIELDS)
        lines = [header, '-' * len(header)]
        for r in self.rows:
            lines.append( "{:<12}".format(r['request_id'][:12])
                            + ''.join("{:>18.3f}".format(r[f]) for f in LATENCY_FIELDS) )
        lines.append('-' * len(header))
        means = self.means
        lines.append( "{:<12}".format('mean') + ''.join("{:>18.3f}".format(means[f]) for f in LATENCY_FIELDS) )
        return '\n'.join(lines)


def profile_latency(address, requests, timeout=10.0):
    """runs a batch of requests over one connection and reports latencies

    Args:
        address(str): 'host:port' of a QueryServer
        requests(:obj:`list` of :obj:`QueryRequest`): the queries
        timeout(float): socket timeout in seconds

    Returns:
        :obj:`LatencyReport`: one row per request
    """
    rows = []
    with QueryClient(address, timeout) as client:
        for i, request in enumerate(requests):
            response, communication_ms, end_to_end_ms = client.query(request)
            if not response.ok:
                msg = "request {} failed: {}".format(i, response.error)
                SERVICE_LOGGER.error(msg)
                raise ServiceError(msg)
            rows.append( OrderedDict([('request_id', response.request_id or str(i)),
                                        ('communication_ms', communication_ms),
                                        ('generation_ms', response.timings['generation_ms']),
                                        ('server_total_ms', response.timings['server_total_ms']),
                                        ('end_to_end_ms', end_to_end_ms)]) )

    report = LatencyReport(tuple(rows))
    SERVICE_LOGGER.info("profiled {} queries, mean end to end {:.3f}ms"\
                        .format(len(rows), report.means['end_to_end_ms']))
    return report
