"""Activation arithmetic: base level, associative strength, cue evidence.

Total activation of a tracked object is its base level plus, for every
satisfied cue, the cue-class weight times the distributional factor F times
the associative strength MAS - ln(fan). F attenuates lexical-vector cues by
clamped cosine and is 1.0 for syntactic cues; fan is the number of grammar
objects sharing the cue. Semantic coherence (theta, the mean thematic fit of
observed role fillers) and salience (sigma, the accumulated weight of
satisfied cues) are computed and surfaced in traces; they do not enter the
total, and recognition decisions use the total plus hard-cue satisfaction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .fs import ABSENT, FeatureStructure, VectorRef, RANK_OBSERVED
from .vectors import Prototype, VectorStore, cosine, thematic_fit


class DomainError(ValueError):
    """An argument fell outside an operation's domain."""


class NoScorableRoles(Exception):
    """Semantic coherence was requested but no role could be scored."""


@dataclass(frozen=True)
class ActivationParams:
    """Tunables for activation, recognition, and the similarity gate."""

    mas: float = 2.0
    hard_cue_weight: float = 1.0
    soft_cue_weight: float = 0.4
    default_cue_weight: float = 1.0
    recognition_threshold: float = 1.5
    base_decay: float = 0.5
    soft_penalty: float = 0.25
    sim_threshold: float = 0.6

    def __post_init__(self):
        if self.mas <= 0:
            raise DomainError("mas must be positive")
        if self.hard_cue_weight < self.soft_cue_weight:
            raise DomainError("hard_cue_weight must be >= soft_cue_weight")
        if min(self.hard_cue_weight, self.soft_cue_weight, self.default_cue_weight) < 0:
            raise DomainError("cue weights must be nonnegative")
        if not 0 < self.soft_penalty <= 1:
            raise DomainError("soft_penalty must lie in (0, 1]")
        if not -1 <= self.sim_threshold <= 1:
            raise DomainError("sim_threshold must lie in [-1, 1]")
        if self.base_decay < 0:
            raise DomainError("base_decay must be nonnegative")

    def weight(self, weight_class: Optional[str]) -> float:
        if weight_class == "hard":
            return self.hard_cue_weight
        if weight_class == "soft":
            return self.soft_cue_weight
        return self.default_cue_weight


@dataclass
class CueMatch:
    """State of one cue for one tracked object."""

    cue: str
    kind: str  # "lexical" | "syntactic"
    weight_class: str  # "hard" | "soft"
    F: float = 1.0
    fan: int = 1
    satisfied: bool = False

    def __post_init__(self):
        if self.kind not in ("lexical", "syntactic"):
            raise DomainError(f"cue kind must be lexical or syntactic: {self.kind!r}")
        if self.kind == "syntactic" and self.F != 1.0:
            raise DomainError("syntactic cues carry F = 1.0")
        if self.fan < 1:
            raise DomainError("fan must be >= 1")
        if not 0.0 <= self.F <= 1.0:
            raise DomainError("F must lie in [0, 1]")


@dataclass
class ActivationRecord:
    """Running activation state for one grammar object."""

    name: str
    B: float = 0.0
    cue_matches: List[CueMatch] = field(default_factory=list)
    theta: Optional[float] = None
    sigma: float = 0.0
    A: float = 0.0


def associative_strength(params: ActivationParams, fan: int) -> float:
    """MAS - ln(fan): shared cues associate more weakly."""
    if fan < 1:
        raise DomainError(f"fan must be >= 1, got {fan}")
    return params.mas - math.log(fan)


def base_activation(
    access_count: float, time_since_last_access: float, params: ActivationParams
) -> float:
    """ln(1 + access_count) - d * ln(time): frequency up, recency decay."""
    if access_count < 0:
        raise DomainError("access_count must be nonnegative")
    if time_since_last_access <= 0:
        raise DomainError("time_since_last_access must be positive")
    return math.log1p(access_count) - params.base_decay * math.log(time_since_last_access)


def total_activation(record: ActivationRecord, params: ActivationParams) -> float:
    """B plus, per satisfied cue, W(class) * F * (MAS - ln fan).

    Cues are summed in their stored (grammar declaration) order, so the value
    is deterministic bit for bit.
    """
    total = record.B
    for cue in record.cue_matches:
        if not cue.satisfied:
            continue
        total += params.weight(cue.weight_class) * cue.F * associative_strength(params, cue.fan)
    return total


def total_activation_plain(record: ActivationRecord, params: ActivationParams) -> float:
    """The undegraded form: B plus W * S per satisfied cue, no F factor."""
    total = record.B
    for cue in record.cue_matches:
        if not cue.satisfied:
            continue
        total += params.weight(cue.weight_class) * associative_strength(params, cue.fan)
    return total


def lexical_F(token_form: str, cue, vs: Optional[VectorStore]) -> float:
    """Distributional factor of a token against a lexical cue.

    Surface-form cues score 1.0 on an exact case-folded match, else 0.0.
    Vector cues score the nonnegative-clamped cosine between the token's
    vector and the cue's vector; either side missing degrades to 0.0.
    """
    if isinstance(cue, VectorRef):
        if vs is None:
            return 0.0
        u = vs.get(token_form)
        v = vs.get(cue.word)
        if u is None or v is None:
            return 0.0
        return max(0.0, cosine(u, v))
    return 1.0 if token_form.lower() == str(cue).lower() else 0.0


def salience(record: ActivationRecord, params: ActivationParams) -> float:
    """Accumulated weight of satisfied cues; nondecreasing within a sentence."""
    return sum(
        params.weight(c.weight_class) for c in record.cue_matches if c.satisfied
    )


def semantic_coherence(
    instance: FeatureStructure,
    prototypes: Dict[str, Prototype],
    vs: VectorStore,
    role_fillers: Optional[Dict[str, str]] = None,
) -> float:
    """Mean thematic fit of the instance's observed role fillers.

    ``role_fillers`` maps role name to filler word; when omitted it is
    derived from the instance bundle by pairing each frame role with the
    argument-structure slot sharing its index and reading the slot's observed
    vector word. Roles lacking a prototype or a scorable filler are skipped.
    """
    fillers = role_fillers if role_fillers is not None else derive_role_fillers(instance)
    fits = []
    for role, word in fillers.items():
        proto = prototypes.get(role)
        if proto is None or word is None or word not in vs:
            continue
        fits.append(thematic_fit(word, proto, vs))
    if not fits:
        raise NoScorableRoles("no role had both a prototype and a scorable filler")
    return sum(fits) / len(fits)


def derive_role_fillers(instance: FeatureStructure) -> Dict[str, str]:
    """Frame role -> observed filler word, read off a construction bundle.

    A role counts as filled when its value node is the index of an
    argument-structure slot whose sem carries an observed vector-ref.
    """
    fillers: Dict[str, str] = {}
    slots = instance.get("arg_st")
    frames = _frames_of(instance)
    if not isinstance(slots, tuple):
        slots = ()
    index_to_word: Dict[int, str] = {}
    for slot in slots:
        if not isinstance(slot, FeatureStructure):
            continue
        sem = slot.get("sem")
        if not isinstance(sem, FeatureStructure):
            continue
        idx = sem.get("index")
        vec = sem.get("ds-vector")
        if (
            isinstance(idx, FeatureStructure)
            and isinstance(vec, VectorRef)
            and vec.rank >= RANK_OBSERVED
        ):
            index_to_word[id(idx)] = vec.word
    for frame in frames:
        for role, value in frame.items():
            if isinstance(value, FeatureStructure) and id(value) in index_to_word:
                fillers[role] = index_to_word[id(value)]
    return fillers


def _frames_of(instance: FeatureStructure) -> Tuple[FeatureStructure, ...]:
    meaning = instance.get("meaning")
    if not isinstance(meaning, FeatureStructure):
        return ()
    sem = meaning.get("sem")
    if not isinstance(sem, FeatureStructure):
        return ()
    frames = sem.get("frames")
    if not isinstance(frames, tuple):
        return ()
    return tuple(f for f in frames if isinstance(f, FeatureStructure))
