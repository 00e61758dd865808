"""Enrollment/identification sessions and their bookkeeping.

The session protocol: every speaker records 5 sentences x 15 repetitions per
emotion; repetitions 1..9 (first session) train, 10..15 (second session) test.
A *training plan* selects material per emotion: the ``unbiased`` plan uses the
emotion's unbiased recordings, while plan ``biased:<e>`` swaps emotion e's
material for recordings whose content correlates with the speaker
(``biased:<e>`` rows in the manifest). Identification is the argmax of the
fused two-stream score over the enrolled population, ties resolved to the
earliest enrolled speaker.
"""

from dataclasses import dataclass, field

import numpy as np

from .corpus import (
    EMOTIONS,
    SENTENCE_IDS,
    TRAIN_REPS,
    UNBIASED,
    CorpusError,
    CorpusManifest,
    UtteranceRecord,
    derive_seed,
    normalize_plan,
    plan_combinations,
)
from .sphmm import SpeakerModel, Topology, fused_log_score, train_speaker_model


class ProtocolError(CorpusError):
    """A manifest cannot support the requested session."""


def _plan_emotions(manifest: CorpusManifest, plan: str) -> list[str]:
    """Emotion set a plan runs over: emotions with unbiased material, plus the
    plan's target when only biased material exists for it."""
    plan = normalize_plan(plan)
    present = [
        e for e in EMOTIONS
        if any(r.emotion == e and r.bias_tag == UNBIASED for r in manifest.records)
    ]
    if plan != UNBIASED:
        target = plan.split(":", 1)[1]
        if target not in present:
            present = sorted(set(present) | {target}, key=EMOTIONS.index)
    return present


def assemble_training_set(
    manifest: CorpusManifest,
    speaker_id: str,
    plan: str,
    *,
    allow_partial: bool = False,
) -> list[UtteranceRecord]:
    """Training-session records for one speaker under a plan.

    The full protocol expects 9 repetitions per (emotion, sentence) cell —
    45 utterances per emotion; missing cells raise unless ``allow_partial``.
    """
    plan = normalize_plan(plan)
    combos = plan_combinations(plan, _plan_emotions(manifest, plan))
    by_cell: dict[tuple, list[UtteranceRecord]] = {}
    for r in manifest.records:
        if r.speaker_id == speaker_id and r.session == "train":
            by_cell.setdefault((r.emotion, r.bias_tag, r.sentence_id), []).append(r)
    selected: list[UtteranceRecord] = []
    missing: list[str] = []
    for emotion, bias in combos:
        for sentence in SENTENCE_IDS:
            cell = by_cell.get((emotion, bias, sentence), [])
            if len(cell) != len(TRAIN_REPS) and not allow_partial:
                missing.append(
                    f"{speaker_id} {emotion} sentence {sentence} {bias}:"
                    f" {len(cell)}/{len(TRAIN_REPS)} training repetitions"
                )
            selected.extend(sorted(cell, key=lambda r: r.repetition))
    if missing:
        raise ProtocolError("incomplete training material:\n  " + "\n  ".join(missing))
    if not selected:
        raise ProtocolError(f"no training material for speaker {speaker_id!r} under {plan}")
    return selected


def session_test_records(manifest: CorpusManifest, plan: str) -> list[UtteranceRecord]:
    """Every identification trial of a session: one per test-session utterance.

    Ordered by (speaker, emotion, sentence, repetition); with the full corpus
    this enumerates speakers x emotions x 5 sentences x 6 repetitions trials.
    """
    plan = normalize_plan(plan)
    combos = plan_combinations(plan, _plan_emotions(manifest, plan))
    wanted = set(combos)
    records = [
        r for r in manifest.records
        if r.session == "test" and (r.emotion, r.bias_tag) in wanted
    ]
    records.sort(
        key=lambda r: (r.speaker_id, EMOTIONS.index(r.emotion), r.sentence_id, r.repetition)
    )
    return records


def identify(
    models: list[SpeakerModel], obs, alpha: float
) -> tuple[str, np.ndarray]:
    """Argmax of the fused score over the enrolled population.

    Returns (speaker_id, score vector in enrollment order). On an exact score
    tie the earliest enrolled speaker wins (np.argmax picks the first maximum).
    """
    if not models:
        raise ProtocolError("empty enrolled population")
    scores = np.array([fused_log_score(m, obs, alpha) for m in models])
    return models[int(np.argmax(scores))].speaker_id, scores


def train_population(
    manifest: CorpusManifest,
    loader,
    plan: str,
    topology: Topology = Topology(),
    *,
    seed: int = 0,
    max_iterations: int = 40,
    tolerance: float = 1e-4,
    allow_partial: bool = False,
    training_sets: dict[str, list[UtteranceRecord]] | None = None,
) -> list[SpeakerModel]:
    """Enroll every speaker of the manifest under one plan.

    Speakers are enrolled in sorted id order and share a uniform prior 1/V.
    ``training_sets`` overrides the per-speaker record selection (used by
    cross-validation); otherwise the plan's full training session is used.
    """
    speakers = manifest.speakers
    if not speakers:
        raise ProtocolError("manifest has no speakers")
    prior = 1.0 / len(speakers)
    models = []
    for speaker_id in speakers:
        if training_sets is not None:
            records = training_sets[speaker_id]
        else:
            records = assemble_training_set(
                manifest, speaker_id, plan, allow_partial=allow_partial
            )
        observations = [loader(r) for r in records]
        result = train_speaker_model(
            speaker_id,
            observations,
            topology,
            seed=derive_seed(seed, "train", normalize_plan(plan)),
            prior=prior,
            max_iterations=max_iterations,
            tolerance=tolerance,
        )
        models.append(result.model)
    return models


@dataclass
class Trial:
    """One identification attempt."""

    record: UtteranceRecord
    predicted: str

    @property
    def correct(self) -> bool:
        return self.predicted == self.record.speaker_id


@dataclass
class PerformanceTable:
    """Correct/total identification counts per (emotion, gender) cell."""

    cells: dict[tuple[str, str], list[int]] = field(default_factory=dict)

    @classmethod
    def from_trials(cls, trials: list[Trial]) -> "PerformanceTable":
        table = cls()
        for trial in trials:
            cell = table.cells.setdefault((trial.record.emotion, trial.record.gender), [0, 0])
            cell[0] += int(trial.correct)
            cell[1] += 1
        return table

    @property
    def emotions(self) -> list[str]:
        present = {e for e, _ in self.cells}
        return [e for e in EMOTIONS if e in present]

    def percent(self, emotion: str, gender: str) -> float | None:
        cell = self.cells.get((emotion, gender))
        if not cell or cell[1] == 0:
            return None
        return 100.0 * cell[0] / cell[1]

    def emotion_average(self, emotion: str) -> float:
        values = [v for g in ("male", "female") if (v := self.percent(emotion, g)) is not None]
        if not values:
            raise ProtocolError(f"no trials for emotion {emotion!r}")
        return float(np.mean(values))

    def grand_average(self) -> float:
        """Mean of the per-emotion averages (each emotion weighs equally)."""
        return float(np.mean([self.emotion_average(e) for e in self.emotions]))

    def accuracy(self) -> float:
        correct = sum(c for c, _ in self.cells.values())
        total = sum(t for _, t in self.cells.values())
        return correct / total if total else 0.0

    def rows(self) -> list[tuple[str, float | None, float | None, float]]:
        return [
            (e, self.percent(e, "male"), self.percent(e, "female"), self.emotion_average(e))
            for e in self.emotions
        ]


@dataclass
class SessionResult:
    """Everything one identification session produced."""

    plan: str
    alpha: float
    speakers: list[str]
    trials: list[Trial]
    table: PerformanceTable

    @property
    def accuracy(self) -> float:
        return self.table.accuracy()

    def confusion(self) -> np.ndarray:
        """Speaker confusion counts, rows = true, columns = predicted."""
        index = {s: i for i, s in enumerate(self.speakers)}
        matrix = np.zeros((len(self.speakers), len(self.speakers)), dtype=int)
        for trial in self.trials:
            matrix[index[trial.record.speaker_id], index[trial.predicted]] += 1
        return matrix

    def emotion_averages(self) -> dict[str, float]:
        return {e: self.table.emotion_average(e) for e in self.table.emotions}


def score_records(
    models: list[SpeakerModel], records: list[UtteranceRecord], loader, alpha: float
) -> list[Trial]:
    trials = []
    for record in records:
        obs = loader(record)
        predicted, _ = identify(models, obs, alpha)
        trials.append(Trial(record=record, predicted=predicted))
    return trials


def run_session(
    models: list[SpeakerModel],
    manifest: CorpusManifest,
    loader,
    plan: str,
    alpha: float = 0.5,
) -> SessionResult:
    """Score every test-session utterance of the plan against the population."""
    plan = normalize_plan(plan)
    records = session_test_records(manifest, plan)
    if not records:
        raise ProtocolError(f"no test-session records for plan {plan}")
    trials = score_records(models, records, loader, alpha)
    return SessionResult(
        plan=plan,
        alpha=alpha,
        speakers=[m.speaker_id for m in models],
        trials=trials,
        table=PerformanceTable.from_trials(trials),
    )


# --- cross-validation ---------------------------------------------------------------

@dataclass
class FoldResult:
    fold: int
    result: SessionResult

    @property
    def accuracy(self) -> float:
        return self.result.accuracy


@dataclass
class CrossValidationResult:
    plan: str
    alpha: float
    folds: list[FoldResult]

    @property
    def accuracies(self) -> list[float]:
        return [f.accuracy for f in self.folds]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def sd_accuracy(self) -> float:
        return float(np.std(self.accuracies, ddof=1)) if len(self.folds) > 1 else 0.0


def partition_folds(
    manifest: CorpusManifest, plan: str, n_folds: int, seed: int
) -> list[dict[str, list[UtteranceRecord]]]:
    """Deal each (speaker, emotion, bias, sentence) cell's repetitions across folds.

    Every cell's repetitions are shuffled with a cell-specific seeded
    permutation and assigned round-robin, so each fold holds a stratified
    slice and each speaker keeps train and test material in every fold.
    """
    plan = normalize_plan(plan)
    if n_folds < 2:
        raise ProtocolError("need at least 2 folds")
    combos = plan_combinations(plan, _plan_emotions(manifest, plan))
    wanted = set(combos)

    assignments: list[dict[str, list[UtteranceRecord]]] = [
        {"test": [], "train": []} for _ in range(n_folds)
    ]
    cells: dict[tuple, list[UtteranceRecord]] = {}
    for r in manifest.records:
        if (r.emotion, r.bias_tag) in wanted:
            cells.setdefault(
                (r.speaker_id, r.emotion, r.bias_tag, r.sentence_id), []
            ).append(r)

    for key in sorted(cells):
        cell = sorted(cells[key], key=lambda r: r.repetition)
        if len(cell) < n_folds:
            raise ProtocolError(
                f"cell {key} has {len(cell)} repetitions < {n_folds} folds"
            )
        rng = np.random.default_rng(derive_seed(seed, "fold", *key))
        order = rng.permutation(len(cell))
        for position, idx in enumerate(order):
            held_out_fold = position % n_folds
            for fold in range(n_folds):
                role = "test" if fold == held_out_fold else "train"
                assignments[fold][role].append(cell[idx])
    return assignments


def cross_validate(
    manifest: CorpusManifest,
    loader,
    plan: str,
    topology: Topology = Topology(),
    *,
    alpha: float = 0.5,
    n_folds: int = 5,
    seed: int = 0,
    max_iterations: int = 40,
    tolerance: float = 1e-4,
) -> CrossValidationResult:
    """Retrain the whole population once per fold and score the held-out slice.

    Folds pool both session halves (all 15 repetitions per cell), so the
    estimate is independent of the fixed 9/6 session split.
    """
    plan = normalize_plan(plan)
    assignments = partition_folds(manifest, plan, n_folds, seed)
    speakers = manifest.speakers
    folds = []
    for fold_idx, assignment in enumerate(assignments):
        training_sets: dict[str, list[UtteranceRecord]] = {s: [] for s in speakers}
        for r in assignment["train"]:
            training_sets[r.speaker_id].append(r)
        for speaker_id, records in training_sets.items():
            if not records:
                raise ProtocolError(f"fold {fold_idx}: speaker {speaker_id} has no training data")
        models = train_population(
            manifest,
            loader,
            plan,
            topology,
            seed=derive_seed(seed, "xval", fold_idx),
            max_iterations=max_iterations,
            tolerance=tolerance,
            training_sets=training_sets,
        )
        test_records = sorted(
            assignment["test"],
            key=lambda r: (r.speaker_id, EMOTIONS.index(r.emotion), r.sentence_id, r.repetition),
        )
        if not test_records:
            raise ProtocolError(f"fold {fold_idx}: no test data")
        trials = score_records(models, test_records, loader, alpha)
        folds.append(
            FoldResult(
                fold=fold_idx,
                result=SessionResult(
                    plan=plan,
                    alpha=alpha,
                    speakers=[m.speaker_id for m in models],
                    trials=trials,
                    table=PerformanceTable.from_trials(trials),
                ),
            )
        )
    return CrossValidationResult(plan=plan, alpha=alpha, folds=folds)
