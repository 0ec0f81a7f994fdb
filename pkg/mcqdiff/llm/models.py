# -*- coding: utf-8 -*-
"""Provider configuration and request / result records."""
import os
from dataclasses import dataclass, field

PROVIDERS = ('http_api', 'mock')
MOCK_MODES = ('hash', 'profile')


@dataclass
class ProviderConfig:
    """Where and how to reach the language model.

    The API key itself is never stored here: only the name of the
    environment variable that holds it.
    """

    provider: str = 'mock'
    endpoint: str = None
    model_name: str = 'mock-1'
    api_key_env: str = 'MCQDIFF_API_KEY'
    max_retries: int = 3
    timeout: float = 60.0
    rate_limit: float = 60.0
    temperature: float = 0.0
    max_tokens: int = 512
    backoff: float = 1.0
    concurrency: int = 4
    mock_mode: str = 'hash'
    truth_path: str = None
    prompt_version: str = 'v1'
    seed: int = 0

    def __post_init__(self):
        if self.provider not in PROVIDERS:
            raise ValueError("provider.provider must be one of {}".format(', '.join(PROVIDERS)))
        if self.mock_mode not in MOCK_MODES:
            raise ValueError("provider.mock_mode must be one of {}".format(', '.join(MOCK_MODES)))
        if not self.timeout > 0:
            raise ValueError("provider.timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("provider.max_retries must be >= 0")
        if self.rate_limit < 0:
            raise ValueError("provider.rate_limit must be >= 0 (0 disables limiting)")
        if self.concurrency < 1:
            raise ValueError("provider.concurrency must be >= 1")
        if self.provider == 'http_api' and not self.endpoint:
            raise ValueError("provider.endpoint is required for the http_api provider")

    @property
    def api_key(self):
        return os.environ.get(self.api_key_env) if self.api_key_env else None

    @property
    def identity(self):
        """Provider identity for cache keys. Contains no secrets."""
        if self.provider == 'mock':
            return 'mock:{}:{}:seed={}'.format(self.mock_mode, self.model_name, self.seed)
        return 'http_api:{}:{}'.format(self.endpoint, self.model_name)

    def to_dict(self):
        return {
            'provider': self.provider,
            'endpoint': self.endpoint,
            'model_name': self.model_name,
            'api_key_env': self.api_key_env,
            'max_retries': self.max_retries,
            'timeout': self.timeout,
            'rate_limit': self.rate_limit,
            'temperature': self.temperature,
            'max_tokens': self.max_tokens,
            'backoff': self.backoff,
            'concurrency': self.concurrency,
            'mock_mode': self.mock_mode,
            'truth_path': self.truth_path,
            'prompt_version': self.prompt_version,
        }


@dataclass(frozen=True)
class Prompt:
    """A rendered two-message prompt.

    ``meta`` carries what the mock provider needs (persona, question id,
    cluster, correct option); real providers only see ``messages()``.
    """

    kind: str
    system: str
    user: str
    meta: dict = field(default_factory=dict, hash=False, compare=False)
    followups: tuple = ()

    def messages(self):
        msgs = [{'role': 'system', 'content': self.system}, {'role': 'user', 'content': self.user}]
        msgs.extend({'role': role, 'content': content} for role, content in self.followups)
        return msgs

    def with_followup(self, answer, reprompt):
        """The same prompt with a rejected answer and a reprompt appended."""
        return Prompt(self.kind, self.system, self.user, self.meta,
                      self.followups + (('assistant', answer), ('user', reprompt)))


@dataclass
class SimulationFailure:
    question_id: str
    cluster: int
    error: str
    message: str
    raw: str = None

    def to_dict(self):
        return {'question_id': self.question_id, 'cluster': self.cluster, 'error': self.error,
                'message': self.message, 'raw': self.raw}


@dataclass
class BatchResult:
    """Raw option maps keyed by ``(question_id, cluster)`` plus failures."""

    results: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    n_provider_calls: int = 0
    n_cache_hits: int = 0

    def failed_questions(self):
        return sorted({f.question_id for f in self.failures})
