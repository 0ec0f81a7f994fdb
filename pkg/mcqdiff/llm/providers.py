# -*- coding: utf-8 -*-
"""Language model providers.

A provider turns a :class:`~mcqdiff.llm.models.Prompt` into raw response
text. Retries, caching and parsing live in the client.
"""
import hashlib
import json
import logging

import requests

from mcqdiff.errors import ProviderError, ResponseParseError, TransportError, UsageError
from mcqdiff.utils import read_json

logger = logging.getLogger(__name__)

OPTIONS = ('A', 'B', 'C', 'D')


class Provider(object):
    name = 'base'

    def __init__(self, config):
        self.config = config

    def complete(self, prompt):
        raise NotImplementedError


class HttpProvider(Provider):
    """Chat-completions style JSON endpoint.

    ``post_fn`` defaults to :func:`requests.post` and can be replaced in
    tests with any callable of the same signature.
    """

    name = 'http_api'

    def __init__(self, config, post_fn=None):
        super(HttpProvider, self).__init__(config)
        self.post_fn = post_fn or requests.post

    def _headers(self):
        headers = {'Content-Type': 'application/json'}
        key = self.config.api_key
        if key:
            headers['Authorization'] = 'Bearer {}'.format(key)
        return headers

    def complete(self, prompt):
        body = {
            'model': self.config.model_name,
            'messages': prompt.messages(),
            'temperature': self.config.temperature,
            'max_tokens': self.config.max_tokens,
        }
        try:
            resp = self.post_fn(self.config.endpoint, json=body, headers=self._headers(),
                                timeout=self.config.timeout)
        except requests.exceptions.RequestException as e:
            raise TransportError("Request to {} failed: {}".format(self.config.endpoint, type(e).__name__))
        status = getattr(resp, 'status_code', 200)
        if status == 429 or status >= 500:
            raise TransportError("Provider answered HTTP {}".format(status), status=status)
        if status >= 400:
            raise ProviderError("Provider rejected the request with HTTP {}".format(status), status=status)
        try:
            payload = resp.json()
        except ValueError:
            raise ResponseParseError("Provider response is not JSON", raw=getattr(resp, 'text', None))
        try:
            return payload['choices'][0]['message']['content']
        except (KeyError, IndexError, TypeError):
            raise ResponseParseError("Provider response has no choices[0].message.content",
                                     raw=json.dumps(payload, sort_keys=True))


NAME_FIRST = ('Careful', 'Hasty', 'Visual', 'Literal', 'Pattern', 'Stepwise', 'Intuitive', 'Symbolic')
NAME_SECOND = ('Calculator', 'Reasoner', 'Memorizer', 'Estimator', 'Explorer', 'Checker', 'Guesser', 'Solver')


def _digest(*parts):
    return hashlib.sha256('|'.join(str(p) for p in parts).encode('utf-8')).digest()


class MockProvider(Provider):
    """Offline provider whose answers are a pure function of its inputs.

    In ``hash`` mode option weights come from a hash of (seed, persona,
    question). In ``profile`` mode the correct option gets the persona's
    true class accuracy from ``truth.json`` and the distractors share the
    rest equally; items missing from the truth fall back to ``hash``.
    """

    name = 'mock'

    def __init__(self, config, truth=None):
        super(MockProvider, self).__init__(config)
        if truth is None and config.mock_mode == 'profile':
            if not config.truth_path:
                raise UsageError("provider.mock_mode 'profile' needs provider.truth_path")
            truth = read_json(config.truth_path)
        self.accuracy = (truth or {}).get('class_item_accuracy', {})

    def complete(self, prompt):
        if prompt.kind == 'persona':
            return self._persona(prompt.meta)
        if prompt.kind == 'simulation':
            return self._simulation(prompt.meta)
        raise ProviderError("Mock provider cannot answer a {!r} prompt".format(prompt.kind))

    def _persona(self, meta):
        digest = _digest(self.config.seed, 'persona', meta['cluster'], ','.join(meta['question_ids']))
        name = 'The {} {}'.format(NAME_FIRST[digest[0] % len(NAME_FIRST)], NAME_SECOND[digest[1] % len(NAME_SECOND)])
        description = ('Does comparatively well on {} questions and comparatively poorly on {} questions.'.format(
            ', '.join(meta['strength_topics']) or 'no', ', '.join(meta['weakness_topics']) or 'no'))
        return json.dumps({'name': name, 'description': description}, sort_keys=True)

    def _simulation(self, meta):
        if self.config.mock_mode == 'profile':
            p = self.accuracy.get(meta['question_id'], {}).get(str(meta['cluster']))
            if p is not None:
                rest = (1.0 - p) / 3.0
                return json.dumps({o: (p if o == meta['correct_option'] else rest) for o in OPTIONS},
                                  sort_keys=True)
            logger.debug("No true accuracy for {} / cluster {}, using hash answer".format(
                meta['question_id'], meta['cluster']))
        digest = _digest(self.config.seed, meta['persona_name'], meta['question_id'])
        weights = [(b + 1) / 256.0 for b in digest[:4]]
        return json.dumps(dict(zip(OPTIONS, weights)), sort_keys=True)


def make_provider(config, **kwargs):
    if config.provider == 'mock':
        return MockProvider(config, **kwargs)
    if config.provider == 'http_api':
        return HttpProvider(config, **kwargs)
    raise UsageError("Unknown provider {!r}".format(config.provider))
