"""Bridging corpus records to classifier observations.

A record's ``source`` is either a WAV file (features are computed on the fly)
or a precomputed ``*.lfpc.feat`` file with a ``*.pros.feat`` sibling.
:func:`extract_corpus` materializes features for a whole manifest into a
self-contained directory so later stages never touch audio.
"""

import shutil
from dataclasses import dataclass
from pathlib import Path

from .corpus import (
    CorpusError,
    CorpusManifest,
    UtteranceRecord,
    read_audio,
    read_feature_file,
    write_feature_file,
    write_manifest,
)
from .dsp import lfpc_sequence
from .prosody import PitchTrackerConfig, suprasegmental_sequence
from .sphmm import DualObservation

ACOUSTIC_SUFFIX = ".lfpc.feat"
PROSODIC_SUFFIX = ".pros.feat"


@dataclass(frozen=True)
class FrontEnd:
    """Every front-end knob in one place; defaults match the reference setup."""

    window_ms: float = 30.0
    hop_ms: float = 5.0
    n_fft: int = 512
    n_bands: int = 16
    f_low: float = 100.0
    f_high: float = 8000.0
    block_size: int = 9
    f0_min: float = 75.0
    f0_max: float = 400.0
    voicing_threshold: float = 0.3

    def acoustic(self, samples, sample_rate: int):
        return lfpc_sequence(
            samples,
            sample_rate,
            window_ms=self.window_ms,
            hop_ms=self.hop_ms,
            n_fft=self.n_fft,
            n_bands=self.n_bands,
            f_low=self.f_low,
            f_high=self.f_high,
        )

    def prosodic(self, samples, sample_rate: int):
        return suprasegmental_sequence(
            samples,
            sample_rate,
            window_ms=self.window_ms,
            hop_ms=self.hop_ms,
            block_size=self.block_size,
            config=PitchTrackerConfig(
                f_min=self.f0_min,
                f_max=self.f0_max,
                voicing_threshold=self.voicing_threshold,
            ),
        )


def prosodic_sibling(acoustic_path: Path) -> Path:
    name = acoustic_path.name
    if not name.endswith(ACOUSTIC_SUFFIX):
        raise CorpusError(f"not an acoustic feature file: {acoustic_path}")
    return acoustic_path.with_name(name[: -len(ACOUSTIC_SUFFIX)] + PROSODIC_SUFFIX)


def load_observation(
    manifest: CorpusManifest, record: UtteranceRecord, front_end: FrontEnd = FrontEnd()
) -> DualObservation:
    """Read or compute both feature streams for one record."""
    path = manifest.resolve(record)
    if record.source.endswith(".wav"):
        signal = read_audio(path)
        if signal.sample_rate != manifest.sample_rate:
            raise CorpusError(
                f"{path}: sample rate {signal.sample_rate} != manifest rate"
                f" {manifest.sample_rate}"
            )
        samples = signal.as_float()
        return DualObservation(
            acoustic=front_end.acoustic(samples, signal.sample_rate),
            prosodic=front_end.prosodic(samples, signal.sample_rate),
        )
    if record.source.endswith(ACOUSTIC_SUFFIX):
        return DualObservation(
            acoustic=read_feature_file(path),
            prosodic=read_feature_file(prosodic_sibling(path)),
        )
    raise CorpusError(f"unsupported source type: {record.source!r}")


def make_loader(manifest: CorpusManifest, front_end: FrontEnd = FrontEnd()):
    """Bind manifest + front end into a record -> DualObservation callable."""

    def loader(record: UtteranceRecord) -> DualObservation:
        return load_observation(manifest, record, front_end)

    return loader


def extract_corpus(
    manifest: CorpusManifest,
    out_dir: str | Path,
    front_end: FrontEnd = FrontEnd(),
    *,
    force: bool = False,
    failures: list | None = None,
) -> CorpusManifest:
    """Materialize features for every record into ``out_dir``.

    WAV sources are analyzed; feature sources are copied through, so the
    output directory stands alone. Existing outputs newer than their input are
    reused unless ``force``. Writes ``features.csv`` (a manifest whose sources
    point at the new files) and returns it.

    With ``failures`` (a list), a record whose extraction fails is skipped and
    ``(record, exception)`` appended instead of aborting the whole run.
    """
    out_dir = Path(out_dir)
    feat_dir = out_dir / "features"
    feat_dir.mkdir(parents=True, exist_ok=True)

    new_records = []
    for record in manifest.records:
        src = manifest.resolve(record)
        ac_out = feat_dir / f"{record.key}{ACOUSTIC_SUFFIX}"
        pr_out = feat_dir / f"{record.key}{PROSODIC_SUFFIX}"
        if force or _stale(ac_out, src) or _stale(pr_out, src):
            try:
                if record.source.endswith(".wav"):
                    obs = load_observation(manifest, record, front_end)
                    write_feature_file(obs.acoustic, ac_out)
                    write_feature_file(obs.prosodic, pr_out)
                elif record.source.endswith(ACOUSTIC_SUFFIX):
                    pr_src = prosodic_sibling(src)
                    if src != ac_out:
                        shutil.copyfile(src, ac_out)
                        shutil.copyfile(pr_src, pr_out)
                else:
                    raise CorpusError(f"unsupported source type: {record.source!r}")
            except Exception as exc:
                if failures is None:
                    raise
                failures.append((record, exc))
                continue
        new_records.append(
            UtteranceRecord(
                speaker_id=record.speaker_id,
                gender=record.gender,
                emotion=record.emotion,
                sentence_id=record.sentence_id,
                bias_tag=record.bias_tag,
                session=record.session,
                repetition=record.repetition,
                source=f"features/{ac_out.name}",
            )
        )

    extracted = CorpusManifest(
        records=new_records,
        sample_rate=manifest.sample_rate,
        metadata=dict(manifest.metadata),
        root=out_dir,
    )
    write_manifest(extracted, out_dir / "features.csv")
    return extracted


def _stale(target: Path, source: Path) -> bool:
    if not target.exists():
        return True
    if not source.exists():
        return False
    return target.stat().st_mtime < source.stat().st_mtime
