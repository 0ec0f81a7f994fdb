# -*- coding: utf-8 -*-
"""Helper utilities: canonical JSON, hashing, artifact paths and the run lock."""
import contextlib
import errno
import hashlib
import io
import json
import os

import numpy as np

from mcqdiff.errors import MissingArtifactError, SchemaError, UsageError

LOCK_NAME = '.mcqdiff.lock'
MANIFEST_KEY = 'manifest_hash'


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError("Object of type {} is not JSON serializable".format(type(obj).__name__))


def _finite(obj):
    """Copy of ``obj`` with NaN and infinities replaced by ``None``."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _finite(obj.tolist())
    if isinstance(obj, (float, np.floating)):
        return float(obj) if np.isfinite(obj) else None
    return obj


def canonical_json(obj, indent=None):
    """Deterministic JSON text: sorted keys, fixed separators, ``null`` for undefined floats."""
    separators = (',', ': ') if indent else (', ', ': ')
    return json.dumps(_finite(obj), sort_keys=True, indent=indent, separators=separators,
                      default=_default, ensure_ascii=False, allow_nan=False)


def sha256_text(text):
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def sha256_file(path):
    digest = hashlib.sha256()
    with io.open(path, 'rb') as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def write_json(obj, path):
    with io.open(path, 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(canonical_json(obj, indent=2))
        fh.write('\n')


def read_json(path):
    with io.open(path, encoding='utf-8') as fh:
        return json.load(fh)


def write_jsonl(rows, path, manifest_hash=None):
    """One object per line, after a ``{"manifest_hash": ...}`` header line when a hash is given."""
    with io.open(path, 'w', encoding='utf-8', newline='\n') as fh:
        if manifest_hash:
            fh.write(canonical_json({MANIFEST_KEY: manifest_hash}))
            fh.write('\n')
        for row in rows:
            fh.write(canonical_json(row))
            fh.write('\n')


def iter_jsonl(path):
    """Yield ``(line_number, object)``; blank lines and a leading manifest header are skipped."""
    first = True
    with io.open(path, encoding='utf-8') as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except ValueError as e:
                raise SchemaError(path, lineno, '<line>', 'invalid JSON ({})'.format(e))
            if not isinstance(obj, dict):
                raise SchemaError(path, lineno, '<line>', 'expected a JSON object')
            if first and list(obj) == [MANIFEST_KEY]:
                first = False
                continue
            first = False
            yield lineno, obj


def require(path, producer):
    """Return ``path`` if it exists, else name the subcommand that makes it."""
    if not os.path.isfile(path):
        raise MissingArtifactError(path, producer)
    return path


@contextlib.contextmanager
def run_lock(out_dir):
    """Exclusive lock on an output directory for the duration of a run."""
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    lock_path = os.path.join(out_dir, LOCK_NAME)
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except OSError as e:
        if e.errno == errno.EEXIST:
            raise UsageError("Output directory {} is locked by another run ({}). "
                             "Remove the lock file if no run is active.".format(out_dir, lock_path))
        raise
    try:
        os.write(fd, str(os.getpid()).encode('ascii'))
        os.close(fd)
        yield lock_path
    finally:
        try:
            os.remove(lock_path)
        except OSError:
            pass
