"""Per-speaker dual-stream models and weighted log-probability fusion.

Each enrolled speaker owns two ergodic HMMs: a spectral model over LFPC frames
and a much smaller suprasegmental model over prosodic block vectors. An
utterance O = (acoustic, prosodic) is scored against speaker v by

    score_v(alpha) = (1 - alpha) * [log P(O_ac | model_ac,v) + log P(v)]
                   +      alpha  * [log P(O_pr | model_pr,v) + log P(v)]

The evidence term log P(O) is identical for every speaker and is omitted; the
remaining expression is the posterior log-probability up to that shared
constant, and the decision is its argmax over speakers. ``alpha`` in [0, 1]
sets the prosodic weight: 0 reduces exactly to the spectral-only classifier,
1 to the prosodic-only one.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import derive_seed
from .hmm import (
    HmmModel,
    ModelError,
    ModelFormatError,
    TrainingResult,
    baum_welch_train,
    init_model,
    log_forward,
    model_from_text,
    model_to_text,
)


@dataclass(frozen=True)
class Topology:
    """State/mixture counts for the two streams."""

    acoustic_states: int = 9
    acoustic_mixtures: int = 10
    acoustic_dim: int = 16
    prosodic_states: int = 3
    prosodic_mixtures: int = 2
    prosodic_dim: int = 4

    def validate(self) -> None:
        for name in (
            "acoustic_states", "acoustic_mixtures", "acoustic_dim",
            "prosodic_states", "prosodic_mixtures", "prosodic_dim",
        ):
            if getattr(self, name) < 1:
                raise ModelError(f"{name} must be >= 1")


@dataclass
class DualObservation:
    """One utterance as seen by the classifier: both feature streams."""

    acoustic: np.ndarray  # (T, acoustic_dim)
    prosodic: np.ndarray  # (B, prosodic_dim)

    def __post_init__(self):
        self.acoustic = np.atleast_2d(np.asarray(self.acoustic, dtype=np.float64))
        self.prosodic = np.atleast_2d(np.asarray(self.prosodic, dtype=np.float64))


@dataclass
class SpeakerModel:
    """Both stream models for one speaker plus the speaker's log prior."""

    speaker_id: str
    acoustic: HmmModel
    prosodic: HmmModel
    log_prior: float = 0.0

    def validate(self) -> None:
        self.acoustic.validate()
        self.prosodic.validate()
        if not (np.isfinite(self.log_prior) and self.log_prior <= 0.0):
            raise ModelError(f"log prior must be finite and <= 0, got {self.log_prior}")


def log_posterior_acoustic(model: SpeakerModel, obs: DualObservation) -> float:
    """log P(O_ac | speaker) + log P(speaker); evidence term dropped."""
    return log_forward(model.acoustic, obs.acoustic)[0] + model.log_prior


def log_posterior_suprasegmental(model: SpeakerModel, obs: DualObservation) -> float:
    """log P(O_pr | speaker) + log P(speaker); evidence term dropped."""
    return log_forward(model.prosodic, obs.prosodic)[0] + model.log_prior


def fused_log_score(model: SpeakerModel, obs: DualObservation, alpha: float) -> float:
    """Affine combination of the two stream posteriors with prosodic weight alpha."""
    if not 0.0 <= alpha <= 1.0:
        raise ModelError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 0.0:
        return log_posterior_acoustic(model, obs)
    if alpha == 1.0:
        return log_posterior_suprasegmental(model, obs)
    return (1.0 - alpha) * log_posterior_acoustic(model, obs) + alpha * log_posterior_suprasegmental(
        model, obs
    )


@dataclass
class SpeakerTrainingResult:
    model: SpeakerModel
    acoustic: TrainingResult
    prosodic: TrainingResult


def train_speaker_model(
    speaker_id: str,
    observations: list[DualObservation],
    topology: Topology = Topology(),
    *,
    seed: int = 0,
    prior: float = 1.0,
    max_iterations: int = 40,
    tolerance: float = 1e-4,
) -> SpeakerTrainingResult:
    """Fit both stream models on the same utterances.

    Initialization seeds derive from (seed, stream, speaker_id), so a
    population trains reproducibly regardless of speaker order or process.
    """
    topology.validate()
    if not observations:
        raise ModelError(f"speaker {speaker_id!r}: no training utterances")
    if not 0.0 < prior <= 1.0:
        raise ModelError(f"prior must lie in (0, 1], got {prior}")

    acoustic_seqs = [o.acoustic for o in observations]
    prosodic_seqs = [o.prosodic for o in observations]
    if acoustic_seqs[0].shape[1] != topology.acoustic_dim:
        raise ModelError(
            f"speaker {speaker_id!r}: acoustic features have dim "
            f"{acoustic_seqs[0].shape[1]}, topology expects {topology.acoustic_dim}"
        )
    if prosodic_seqs[0].shape[1] != topology.prosodic_dim:
        raise ModelError(
            f"speaker {speaker_id!r}: prosodic features have dim "
            f"{prosodic_seqs[0].shape[1]}, topology expects {topology.prosodic_dim}"
        )

    acoustic_init = init_model(
        acoustic_seqs,
        topology.acoustic_states,
        topology.acoustic_mixtures,
        seed=derive_seed(seed, "acoustic", speaker_id),
    )
    acoustic_result = baum_welch_train(
        acoustic_init, acoustic_seqs, max_iterations=max_iterations, tolerance=tolerance
    )
    prosodic_init = init_model(
        prosodic_seqs,
        topology.prosodic_states,
        topology.prosodic_mixtures,
        seed=derive_seed(seed, "prosodic", speaker_id),
    )
    prosodic_result = baum_welch_train(
        prosodic_init, prosodic_seqs, max_iterations=max_iterations, tolerance=tolerance
    )

    model = SpeakerModel(
        speaker_id=speaker_id,
        acoustic=acoustic_result.model,
        prosodic=prosodic_result.model,
        log_prior=math.log(prior),
    )
    model.validate()
    return SpeakerTrainingResult(model=model, acoustic=acoustic_result, prosodic=prosodic_result)


# --- serialization -----------------------------------------------------------------

SPEAKER_MAGIC = "EMSPSPK"
SPEAKER_VERSION = 1


def speaker_model_to_text(model: SpeakerModel) -> str:
    model.validate()
    parts = [
        f"{SPEAKER_MAGIC} {SPEAKER_VERSION}",
        f"speaker {model.speaker_id}",
        f"log_prior {repr(float(model.log_prior))}",
        "acoustic",
        model_to_text(model.acoustic).rstrip("\n"),
        "prosodic",
        model_to_text(model.prosodic).rstrip("\n"),
    ]
    return "\n".join(parts) + "\n"


def speaker_model_from_text(text: str) -> SpeakerModel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split() != [SPEAKER_MAGIC, str(SPEAKER_VERSION)]:
        raise ModelFormatError(f"bad speaker model header: {lines[:1]}")
    if len(lines) < 5 or not lines[1].startswith("speaker "):
        raise ModelFormatError("missing speaker line")
    speaker_id = lines[1].split(" ", 1)[1].strip()
    if not lines[2].startswith("log_prior "):
        raise ModelFormatError("missing log_prior line")
    try:
        log_prior = float(lines[2].split(" ", 1)[1])
    except ValueError as exc:
        raise ModelFormatError(f"bad log_prior: {lines[2]!r}") from exc

    try:
        ac_start = lines.index("acoustic")
        pr_start = lines.index("prosodic")
    except ValueError as exc:
        raise ModelFormatError("missing acoustic/prosodic section") from exc
    if not ac_start < pr_start:
        raise ModelFormatError("sections out of order")

    acoustic = model_from_text("\n".join(lines[ac_start + 1 : pr_start]))
    prosodic = model_from_text("\n".join(lines[pr_start + 1 :]))
    model = SpeakerModel(
        speaker_id=speaker_id, acoustic=acoustic, prosodic=prosodic, log_prior=log_prior
    )
    try:
        model.validate()
    except ModelError as exc:
        raise ModelFormatError(f"deserialized speaker model invalid: {exc}") from exc
    return model


def save_speaker_model(model: SpeakerModel, path: str | Path) -> None:
    Path(path).write_text(speaker_model_to_text(model), encoding="utf-8")


def load_speaker_model(path: str | Path) -> SpeakerModel:
    path = Path(path)
    if not path.exists():
        raise ModelFormatError(f"speaker model file not found: {path}")
    return speaker_model_from_text(path.read_text(encoding="utf-8"))
