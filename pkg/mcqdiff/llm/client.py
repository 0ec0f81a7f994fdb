# -*- coding: utf-8 -*-
"""Persona synthesis and persona-conditioned simulation over any provider."""
import io
import json
import logging
import math
import os
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import yaml
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt, wait_exponential

from mcqdiff.errors import McqdiffError, ResponseParseError, TransportError, UsageError
from mcqdiff.llm.models import BatchResult, Prompt, SimulationFailure
from mcqdiff.llm.providers import OPTIONS, make_provider
from mcqdiff.profiling.models import PersonaProfile
from mcqdiff.utils import canonical_json, sha256_text, write_jsonl

logger = logging.getLogger(__name__)

PROMPTS_DIR = os.path.join(os.path.dirname(__file__), 'prompts')


def load_prompts(version):
    path = os.path.join(PROMPTS_DIR, '{}.yaml'.format(version))
    if not os.path.isfile(path):
        raise UsageError("Unknown prompt version {!r} (no {})".format(version, path))
    with io.open(path, encoding='utf-8') as fh:
        return yaml.safe_load(fh)


def _json_object(text):
    if text is None:
        raise ResponseParseError("Empty response", raw=text)
    start, end = text.find('{'), text.rfind('}')
    if start < 0 or end < start:
        raise ResponseParseError("No JSON object in response", raw=text)
    try:
        obj = json.loads(text[start:end + 1])
    except ValueError as e:
        raise ResponseParseError("Invalid JSON in response ({})".format(e), raw=text)
    if not isinstance(obj, dict):
        raise ResponseParseError("Response JSON is not an object", raw=text)
    return obj


def parse_persona(text):
    obj = _json_object(text)
    for key in ('name', 'description'):
        value = obj.get(key)
        if not isinstance(value, str) or not value.strip():
            raise ResponseParseError("Persona response lacks a non-empty {!r}".format(key), raw=text)
    return obj['name'].strip(), obj['description'].strip()


def parse_option_map(text):
    """Option weights keyed A-D; values must be finite and non-negative."""
    obj = _json_object(text)
    probs = {}
    for option in OPTIONS:
        if option not in obj:
            raise ResponseParseError("Response lacks option {}".format(option), raw=text)
        value = obj[option]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ResponseParseError("Option {} is not a number: {!r}".format(option, value), raw=text)
        if not math.isfinite(value) or value < 0:
            raise ResponseParseError("Option {} must be finite and >= 0, got {!r}".format(option, value), raw=text)
        probs[option] = float(value)
    return probs


class RateLimiter(object):
    """Token bucket shared by every thread of a client."""

    def __init__(self, per_minute, clock=time.monotonic, sleep=time.sleep):
        self.rate = per_minute / 60.0
        self.capacity = max(1.0, self.rate)
        self.tokens = self.capacity
        self.clock = clock
        self.sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self):
        while True:
            with self._lock:
                now = self.clock()
                self.tokens = min(self.capacity, self.tokens + (now - self._last) * self.rate)
                self._last = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            self.sleep(wait)


class ResponseCache(object):
    """Content-addressed JSON files; writes are atomic and serialized."""

    def __init__(self, directory):
        self.directory = directory
        self._lock = threading.Lock()

    def _path(self, key):
        return os.path.join(self.directory, key[:2], '{}.json'.format(key))

    def get(self, key):
        path = self._path(key)
        if not os.path.isfile(path):
            return None
        with io.open(path, encoding='utf-8') as fh:
            return json.load(fh)

    def put(self, key, value):
        path = self._path(key)
        with self._lock:
            if not os.path.isdir(os.path.dirname(path)):
                os.makedirs(os.path.dirname(path))
            fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix='.tmp')
            with io.open(fd, 'w', encoding='utf-8', newline='\n') as fh:
                fh.write(canonical_json(value))
            os.replace(tmp, path)

    def __len__(self):
        if not os.path.isdir(self.directory):
            return 0
        return sum(len([f for f in files if f.endswith('.json')]) for _, _, files in os.walk(self.directory))


def persona_hash(persona):
    return sha256_text(canonical_json({'cluster': persona.cluster, 'name': persona.name,
                                       'description': persona.description}))


def question_hash(question):
    return sha256_text(canonical_json(question.to_dict()))


def cache_key(config, persona, question):
    return sha256_text(canonical_json({
        'provider': config.identity,
        'model': config.model_name,
        'persona': persona_hash(persona),
        'question': question_hash(question),
        'prompt_version': config.prompt_version,
    }))


class LlmClient(object):
    """Retrying, rate-limited, cached access to a provider.

    Safe to share between threads.
    """

    def __init__(self, config, provider=None, cache_dir=None):
        self.config = config
        self.provider = provider or make_provider(config)
        self.prompts = load_prompts(config.prompt_version)
        self.cache = ResponseCache(cache_dir) if cache_dir else None
        # Mock answers are local; only remote providers are throttled
        self.limiter = None
        if config.rate_limit > 0 and config.provider != 'mock':
            self.limiter = RateLimiter(config.rate_limit)
        self.n_provider_calls = 0
        self.archive = []
        self._lock = threading.Lock()

    def _call(self, prompt):
        retrying = Retrying(
            stop=stop_after_attempt(self.config.max_retries + 1),
            wait=wait_exponential(multiplier=self.config.backoff, max=60),
            retry=retry_if_exception_type(TransportError),
            reraise=True,
        )
        for attempt in retrying:
            with attempt:
                number = attempt.retry_state.attempt_number
                logger.info("{} request {}, attempt {}".format(
                    prompt.kind, prompt.meta.get('question_id', prompt.meta.get('cluster')), number))
                if self.limiter is not None:
                    self.limiter.acquire()
                with self._lock:
                    self.n_provider_calls += 1
                try:
                    return self.provider.complete(prompt)
                except TransportError as e:
                    logger.warning("Attempt {} failed: {}".format(number, e))
                    raise

    def _record(self, prompt, raw, attempt, error=None, cached=False):
        row = {'kind': prompt.kind, 'cluster': prompt.meta.get('cluster'), 'attempt': attempt,
               'cached': cached, 'accepted': error is None, 'response': raw}
        if 'question_id' in prompt.meta:
            row['question_id'] = prompt.meta['question_id']
        if error is not None:
            row['error'] = error.message
        with self._lock:
            self.archive.append(row)

    def _ask(self, prompt, parse):
        """Call, parse, and reprompt once if the answer does not parse.

        Every answer is archived, rejected ones included.
        """
        raw = self._call(prompt)
        try:
            parsed = parse(raw)
        except ResponseParseError as e:
            self._record(prompt, raw, 1, e)
            logger.warning("Unparseable {} response ({}), reprompting once".format(prompt.kind, e))
            retry = prompt.with_followup(raw, self.prompts['reprompt'].format(reason=e.message))
            raw = self._call(retry)
            try:
                parsed = parse(raw)
            except ResponseParseError as again:
                self._record(prompt, raw, 2, again)
                raise
            self._record(prompt, raw, 2)
            return parsed, raw
        self._record(prompt, raw, 1)
        return parsed, raw

    def persona_prompt(self, request):
        template = self.prompts['persona']
        blocks = '\n\n'.join(template['block'].format(
            role=b.role,
            question_id=b.question_id,
            topic=b.topic,
            text=b.text,
            accuracies=', '.join('group {}: {:.2f}'.format(c, a) for c, a in sorted(b.accuracies.items())),
            delta=b.delta,
        ) for b in request.blocks)
        meta = {
            'cluster': request.cluster,
            'question_ids': [b.question_id for b in request.blocks],
            'strength_topics': sorted({b.topic for b in request.blocks if b.role == 'strength'}),
            'weakness_topics': sorted({b.topic for b in request.blocks if b.role == 'weakness'}),
        }
        return Prompt('persona', template['system'],
                      template['user'].format(instruction=request.instruction, blocks=blocks), meta)

    def simulation_prompt(self, question, persona):
        template = self.prompts['simulation']
        options = dict((o, question.options[o]) for o in OPTIONS)
        meta = {
            'question_id': question.question_id,
            'cluster': persona.cluster,
            'persona_name': persona.name,
            'correct_option': question.correct_option,
        }
        return Prompt('simulation',
                      template['system'].format(name=persona.name, description=persona.description),
                      template['user'].format(text=question.text, **options), meta)

    def synthesize_persona(self, request):
        prompt = self.persona_prompt(request)
        (name, description), _ = self._ask(prompt, parse_persona)
        return PersonaProfile(
            cluster=request.cluster,
            name=name,
            description=description,
            strengths=request.strengths,
            weaknesses=request.weaknesses,
            provenance='llm_generated',
        )

    def simulate_item(self, question, persona):
        """Raw option weights for one persona on one question."""
        if sorted(question.options) != list(OPTIONS):
            raise UsageError("Question {} does not have options A-D".format(question.question_id))
        prompt = self.simulation_prompt(question, persona)
        key = cache_key(self.config, persona, question) if self.cache else None
        if key:
            hit = self.cache.get(key)
            if hit is not None:
                self._record(prompt, hit['raw'], 1, cached=True)
                return hit['probs'], True
        probs, raw = self._ask(prompt, parse_option_map)
        if key:
            self.cache.put(key, {'question_id': question.question_id, 'cluster': persona.cluster,
                                 'probs': probs, 'raw': raw})
        return probs, False

    def batch_simulate(self, questions, personas):
        """Simulate every (question, persona) pair.

        A failing pair is recorded and never stops the batch.
        """
        questions, personas = list(questions), list(personas)
        if not questions or not personas:
            raise UsageError("batch_simulate needs at least one question and one persona")
        pairs = [(q, p) for q in sorted(questions, key=lambda q: q.question_id)
                 for p in sorted(personas, key=lambda p: p.cluster)]
        calls_before = self.n_provider_calls

        def run(pair):
            question, persona = pair
            try:
                probs, cached = self.simulate_item(question, persona)
                return pair, probs, cached, None
            except McqdiffError as e:
                return pair, None, False, e

        batch = BatchResult()
        with ThreadPoolExecutor(max_workers=self.config.concurrency) as pool:
            outcomes = list(pool.map(run, pairs))
        for (question, persona), probs, cached, error in outcomes:
            key = (question.question_id, persona.cluster)
            if error is not None:
                batch.failures.append(SimulationFailure(
                    question.question_id, persona.cluster, type(error).__name__, error.message,
                    getattr(error, 'raw', None)))
                continue
            batch.results[key] = probs
            batch.n_cache_hits += int(cached)
        batch.n_provider_calls = self.n_provider_calls - calls_before
        logger.info("Simulated {} pairs: {} from cache, {} provider calls, {} failures".format(
            len(pairs), batch.n_cache_hits, batch.n_provider_calls, len(batch.failures)))
        return batch

    def write_archive(self, path, manifest_hash=None):
        rows = sorted(self.archive, key=lambda r: (r['kind'], r.get('question_id', ''), r['cluster'], r['attempt']))
        write_jsonl(rows, path, manifest_hash)


def synthesize_persona(request, config, provider=None):
    return LlmClient(config, provider).synthesize_persona(request)


def simulate_item(question, persona, config, provider=None):
    return LlmClient(config, provider).simulate_item(question, persona)[0]


def batch_simulate(questions, personas, config, provider=None, cache_dir=None):
    return LlmClient(config, provider, cache_dir).batch_simulate(questions, personas)
