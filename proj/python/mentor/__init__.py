"""Python access to the mentor core: gap algebra, metrics and the tutor service."""

import json

from . import _mentor
from ._mentor import (
    ConfigError,
    ConflictError,
    GatewayError,
    NotFoundError,
    ValidationError,
    normalize_skill_name,
    pearson,
    target_mastery,
    word_count,
)

__all__ = [
    "ConfigError",
    "ConflictError",
    "GatewayError",
    "NotFoundError",
    "ValidationError",
    "Tutor",
    "compute_gap",
    "match_skills",
    "normalize_skill_name",
    "pearson",
    "target_mastery",
    "win_rates",
    "word_count",
]


def _skills(items):
    out = []
    for s in items:
        skill = {"name": s} if isinstance(s, str) else dict(s)
        skill.setdefault("target_proficiency", "intermediate")
        out.append(skill)
    return json.dumps(out)


def compute_gap(required, mastered=()):
    """Required skills (names or skill dicts) minus mastered names."""
    return json.loads(_mentor.compute_gap(_skills(required), set(mastered)))


def match_skills(predicted, truth):
    """Returns (recall, precision, matched pairs) under exact normalized matching."""
    recall, precision, matches = _mentor.match_skills(_skills(predicted), _skills(truth))
    return recall, precision, [tuple(m) for m in matches]


def win_rates(records):
    return json.loads(_mentor.win_rates(json.dumps(list(records))))


class Tutor:
    """In-process tutor service; `request` mirrors the HTTP routes."""

    def __init__(self, config=None):
        self._impl = _mentor.Tutor(json.dumps(config or {}))

    def request(self, method, path, body=None):
        status, text = self._impl.request(method, path, "" if body is None else json.dumps(body))
        return status, json.loads(text)

    def replay_profile(self, learner_id):
        return json.loads(self._impl.replay_profile(learner_id))
