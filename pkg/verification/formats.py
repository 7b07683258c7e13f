"""Readers and writers of the pipeline's files.

Every file starts with a `#fmt:<name>:<version>` line. Text tables are
tab-separated, one record per line, with floats written as the shortest
decimal that round-trips. The gb, calibration, alpha and metrics files
hold one JSON object after the header.

Embeddings can also be stored in the SVEB binary layout:

    b'SVEB' | u16 version | u32 dim | u64 count | count*dim f32 values
    | per embedding four u16-length-prefixed UTF-8 strings
      (utt_id, speaker_id, domain, language)

all little-endian.
"""
import csv
import json
import re
import struct

import numpy as np
import pandas as pd

from .calibration import CalibrationModel
from .choices import Domain, Language
from .exceptions import FormatError, KeyMismatch, VersionUnsupported
from .language import GaussianBackend, LidDecision
from .metrics import ScoreSet
from .prototypes import PrototypeMatrix, SpeakerInfo
from .snorm import LanguageOffset
from .vectors import Embedding

FORMAT_VERSION = 1
SVEB_MAGIC = b'SVEB'
SVEB_HEADER = struct.Struct('<4sHIQ')
_HEADER_RE = re.compile(r'^#fmt:([A-Za-z_]+):(\d+)$')
_WHITESPACE = re.compile(r'\s')

TARGET = 'target'
NONTARGET = 'nontarget'


def _float(x):
    return repr(float(x))


def _vector(values):
    return ','.join(repr(v) for v in np.asarray(values, dtype=np.float64).tolist())


def _check_id(value):
    value = str(value)
    if not value or _WHITESPACE.search(value):
        raise FormatError(f'identifier {value!r} is empty or contains whitespace')
    return value


def _check_header(line, name, path):
    match = _HEADER_RE.match(line.rstrip('\n'))
    if match is None:
        raise FormatError(f'{path}: missing #fmt header')
    found, version = match.group(1), int(match.group(2))
    if found != name:
        raise FormatError(f'{path}: expected format {name}, found {found}')
    if version != FORMAT_VERSION:
        raise VersionUnsupported(f'{path}: {name} version {version} is not supported')


def _not_utf8(path, exc):
    return FormatError(f'{path}: invalid UTF-8 at byte {exc.start}')


def _write_table(path, name, rows):
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(f'#fmt:{name}:{FORMAT_VERSION}\n')
        for row in rows:
            fh.write('\t'.join(row))
            fh.write('\n')


def _read_table(path, name, widths):
    """DataFrame of strings; every row must have one of the given widths."""
    try:
        with open(path, encoding='utf-8') as fh:
            _check_header(fh.readline(), name, path)
        frame = pd.read_csv(
            path, sep='\t', header=None, skiprows=1, dtype=str,
            keep_default_na=False, quoting=csv.QUOTE_NONE, encoding='utf-8',
        )
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=range(min(widths)), dtype=str)
    except pd.errors.ParserError as exc:
        raise FormatError(f'{path}: {exc}') from exc
    except UnicodeDecodeError as exc:
        raise _not_utf8(path, exc) from exc
    if frame.shape[1] not in widths or frame.isna().any().any():
        raise FormatError(f'{path}: rows must have {" or ".join(map(str, widths))} fields')
    return frame


def _parse_float(value, path):
    try:
        return float(value)
    except ValueError:
        raise FormatError(f'{path}: {value!r} is not a number') from None


def _parse_vector(value, path):
    try:
        return np.array(value.split(','), dtype=np.float64)
    except ValueError:
        raise FormatError(f'{path}: malformed vector') from None


def _parse_int(value, path):
    try:
        return int(value)
    except ValueError:
        raise FormatError(f'{path}: {value!r} is not an integer') from None


# Embeddings

def write_embeddings(path, embeddings, binary=False):
    if binary:
        return _write_sveb(path, embeddings)
    _write_table(path, 'embeddings', (
        (_check_id(e.utt_id), _check_id(e.speaker_id), e.domain, e.language, _vector(e.vec))
        for e in embeddings
    ))


def read_embeddings(path):
    with open(path, 'rb') as fh:
        if fh.read(4) == SVEB_MAGIC:
            return _read_sveb(path)
    frame = _read_table(path, 'embeddings', (5,))
    try:
        return tuple(
            Embedding(utt, spk, dom, lang, _parse_vector(vec, path))
            for utt, spk, dom, lang, vec in frame.itertuples(index=False)
        )
    except ValueError as exc:
        raise FormatError(f'{path}: {exc}') from exc


def _pack_string(value):
    data = str(value).encode('utf-8')
    return struct.pack('<H', len(data)) + data


def _write_sveb(path, embeddings):
    embeddings = list(embeddings)
    dim = embeddings[0].dim if embeddings else 0
    if any(e.dim != dim for e in embeddings):
        raise FormatError('embeddings of mixed dimension cannot share one file')
    values = np.zeros((len(embeddings), dim), dtype='<f4')
    for i, e in enumerate(embeddings):
        values[i] = e.vec
    with open(path, 'wb') as fh:
        fh.write(SVEB_HEADER.pack(SVEB_MAGIC, FORMAT_VERSION, dim, len(embeddings)))
        fh.write(values.tobytes())
        for e in embeddings:
            for field in (_check_id(e.utt_id), _check_id(e.speaker_id), e.domain, e.language):
                fh.write(_pack_string(field))


def _read_sveb(path):
    with open(path, 'rb') as fh:
        data = fh.read()
    if len(data) < SVEB_HEADER.size:
        raise FormatError(f'{path}: truncated SVEB header')
    magic, version, dim, count = SVEB_HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise VersionUnsupported(f'{path}: SVEB version {version} is not supported')
    offset = SVEB_HEADER.size
    size = count * dim * 4
    if len(data) < offset + size:
        raise FormatError(f'{path}: truncated SVEB values')
    values = np.frombuffer(data, dtype='<f4', count=count * dim, offset=offset).reshape(count, dim)
    offset += size

    embeddings = []
    for i in range(count):
        fields = []
        for _ in range(4):
            if len(data) < offset + 2:
                raise FormatError(f'{path}: truncated SVEB string table')
            (length,) = struct.unpack_from('<H', data, offset)
            offset += 2
            if len(data) < offset + length:
                raise FormatError(f'{path}: truncated SVEB string table')
            try:
                fields.append(data[offset:offset + length].decode('utf-8'))
            except UnicodeDecodeError as exc:
                raise _not_utf8(path, exc) from exc
            offset += length
        try:
            embeddings.append(Embedding(*fields, values[i].astype(np.float64)))
        except ValueError as exc:
            raise FormatError(f'{path}: {exc}') from exc
    if offset != len(data):
        raise FormatError(f'{path}: trailing bytes after the SVEB string table')
    return tuple(embeddings)


# Prototypes

def write_prototypes(path, protos):
    _write_table(path, 'prototypes', (
        (_check_id(info.speaker_id), info.domain, info.language, _vector(protos.W[:, j]))
        for j, info in enumerate(protos.speakers)
    ))


def read_prototypes(path):
    frame = _read_table(path, 'prototypes', (4,))
    speakers = []
    columns = []
    try:
        for spk, dom, lang, vec in frame.itertuples(index=False):
            speakers.append(SpeakerInfo(spk, Domain(dom), Language(lang)))
            columns.append(_parse_vector(vec, path))
        return PrototypeMatrix(np.column_stack(columns), tuple(speakers))
    except ValueError as exc:
        raise FormatError(f'{path}: {exc}') from exc


# Trials, enrollment and keys

def write_trials(path, trials):
    _write_table(path, 'trials', ((_check_id(m), _check_id(t)) for m, t in trials))


def read_trials(path):
    frame = _read_table(path, 'trials', (2,))
    return tuple((m, t) for m, t in frame.itertuples(index=False))


def write_enrollment(path, enrollment_map):
    _write_table(path, 'enrollment', (
        (_check_id(model_id), _check_id(utt_id))
        for model_id, utt_ids in enrollment_map.items()
        for utt_id in utt_ids
    ))


def read_enrollment(path):
    frame = _read_table(path, 'enrollment', (2,))
    enrollment = {}
    for model_id, utt_id in frame.itertuples(index=False):
        enrollment.setdefault(model_id, []).append(utt_id)
    return {model_id: tuple(utts) for model_id, utts in enrollment.items()}


def _label(value, path):
    if value == TARGET:
        return True
    if value == NONTARGET:
        return False
    raise FormatError(f'{path}: label {value!r} is neither target nor nontarget')


def write_key(path, trials, labels):
    _write_table(path, 'key', (
        (_check_id(m), _check_id(t), TARGET if label else NONTARGET)
        for (m, t), label in zip(trials, labels)
    ))


def read_key(path):
    frame = _read_table(path, 'key', (3,))
    return {(m, t): _label(label, path) for m, t, label in frame.itertuples(index=False)}


def labels_from_key(keys, key):
    try:
        return np.array([key[k] for k in keys], dtype=bool)
    except KeyError as exc:
        raise KeyMismatch(f'trial {exc.args[0]} is missing from the key') from None


# Scores

def write_scores(path, scores):
    if scores.labels is None:
        rows = ((m, t, _float(s)) for (m, t), s in zip(scores.keys, scores.scores))
    else:
        rows = (
            (m, t, _float(s), TARGET if label else NONTARGET)
            for (m, t), s, label in zip(scores.keys, scores.scores, scores.labels)
        )
    _write_table(path, 'scores', rows)


def read_scores(path, calibrated=False):
    frame = _read_table(path, 'scores', (3, 4))
    keys = tuple(zip(frame[0], frame[1]))
    values = np.array([_parse_float(v, path) for v in frame[2]], dtype=np.float64)
    labels = None
    if frame.shape[1] == 4:
        labels = np.array([_label(v, path) for v in frame[3]], dtype=bool)
    return ScoreSet(keys=keys, scores=values, labels=labels, calibrated=calibrated)


# Language decisions

def write_lid(path, decisions):
    _write_table(path, 'lid', (
        (_check_id(utt_id), d.language, _float(d.llr)) for utt_id, d in decisions.items()
    ))


def read_lid(path):
    frame = _read_table(path, 'lid', (3,))
    decisions = {}
    for utt_id, language, llr in frame.itertuples(index=False):
        if language not in (Language.FARSI, Language.ENGLISH):
            raise FormatError(f'{path}: language {language!r} is neither FARSI nor ENGLISH')
        decisions[utt_id] = LidDecision(Language(language), _parse_float(llr, path))
    return decisions


# Batch manifests

def write_manifest(path, manifests):
    _write_table(path, 'manifest', (
        (str(p), str(b), str(pos), _check_id(utt_id), str(speaker))
        for manifest in manifests
        for p, b, pos, utt_id, speaker in manifest.rows()
    ))


def read_manifest(path):
    frame = _read_table(path, 'manifest', (5,))
    return [
        (_parse_int(p, path), _parse_int(b, path), _parse_int(pos, path), utt_id, _parse_int(s, path))
        for p, b, pos, utt_id, s in frame.itertuples(index=False)
    ]


# JSON records

def _write_json(path, name, payload):
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(f'#fmt:{name}:{FORMAT_VERSION}\n')
        fh.write(json.dumps(payload, sort_keys=True, allow_nan=False))
        fh.write('\n')


def _read_json(path, name):
    try:
        with open(path, encoding='utf-8') as fh:
            _check_header(fh.readline(), name, path)
            return json.loads(fh.read())
    except json.JSONDecodeError as exc:
        raise FormatError(f'{path}: {exc}') from exc
    except UnicodeDecodeError as exc:
        raise _not_utf8(path, exc) from exc


def _field(payload, key, path):
    try:
        return payload[key]
    except (KeyError, TypeError):
        raise FormatError(f'{path}: record has no {key!r}') from None


def write_gb(path, gb):
    _write_json(path, 'gb', {
        'mu_fa': gb.mu_fa.tolist(),
        'mu_usa': gb.mu_usa.tolist(),
        'mu_en': gb.mu_en.tolist(),
        'shared_cov': gb.shared_cov.tolist(),
        'weight': float(gb.weight),
        'covariance_type': str(gb.covariance_type),
    })


def read_gb(path):
    payload = _read_json(path, 'gb')
    return GaussianBackend(
        mu_fa=np.array(_field(payload, 'mu_fa', path), dtype=np.float64),
        mu_usa=np.array(_field(payload, 'mu_usa', path), dtype=np.float64),
        mu_en=np.array(_field(payload, 'mu_en', path), dtype=np.float64),
        shared_cov=np.array(_field(payload, 'shared_cov', path), dtype=np.float64),
        weight=float(_field(payload, 'weight', path)),
        covariance_type=_field(payload, 'covariance_type', path),
    )


def write_calibration(path, model):
    _write_json(path, 'calibration', {
        'a': model.a, 'b': model.b, 'tag': model.tag, 'iterations': model.iterations,
    })


def read_calibration(path):
    payload = _read_json(path, 'calibration')
    return CalibrationModel(
        a=float(_field(payload, 'a', path)),
        b=float(_field(payload, 'b', path)),
        tag=payload.get('tag', ''),
        iterations=int(payload.get('iterations', 0)),
    )


def write_alpha(path, offset):
    _write_json(path, 'alpha', {'alpha': offset.alpha, 'provenance': offset.provenance})


def read_alpha(path):
    payload = _read_json(path, 'alpha')
    return LanguageOffset(
        alpha=float(_field(payload, 'alpha', path)),
        provenance=payload.get('provenance', {}),
    )


def write_metrics(path, record):
    _write_json(path, 'metrics', record)


def read_metrics(path):
    return _read_json(path, 'metrics')
