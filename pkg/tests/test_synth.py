import json

import numpy as np
import pytest

from moperturb import Connectivity, SynthConfig, bone_lengths, generate
from moperturb.synth import (
    DatasetFormatError,
    read_dataset,
    read_sequence_file,
    write_dataset,
    write_sequence_file,
)


class TestConfigValidation:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            SynthConfig(t_h=2)
        with pytest.raises(ValueError):
            SynthConfig(t_f=0)
        with pytest.raises(ValueError):
            SynthConfig(amplitude=0.0)
        with pytest.raises(ValueError):
            SynthConfig(noise_std=-1.0)
        with pytest.raises(ValueError):
            SynthConfig(family="brownian")
        with pytest.raises(ValueError):
            SynthConfig(freq_range=(2.0, 1.0))


class TestGenerate:
    def test_rigid_construction_keeps_bone_lengths_constant(self):
        ds = generate(SynthConfig(n_sequences=5, t_h=10, t_f=10, seed=3, noise_std=0.0))
        for split in ds.sequences:
            frames = np.concatenate([split.history.frames, split.future.frames])
            lengths = bone_lengths(frames, ds.connectivity)
            assert lengths.var(axis=0).max() < 1e-9

    def test_seeded_determinism(self):
        config = SynthConfig(n_sequences=4, t_h=10, t_f=5, seed=9, family="mixture")
        a, b = generate(config), generate(config)
        assert a.labels == b.labels
        for s, t in zip(a.sequences, b.sequences):
            assert np.array_equal(s.history.frames, t.history.frames)
            assert np.array_equal(s.future.frames, t.future.frames)

    def test_oscillation_span_matches_closed_form(self):
        # a fixed 1 Hz sinusoid of amplitude a sampled at 100 fps over more
        # than a full period has axis span 2a up to the sampling error bound
        a = 0.7
        config = SynthConfig(
            n_sequences=3, t_h=3, t_f=120, fps=100.0, family="oscillation",
            amplitude=a, freq_range=(1.0, 1.0), seed=12,
            base_pose=np.zeros((1, 3)), connectivity=Connectivity(()), joint_names=None,
        )
        ds = generate(config)
        sampling_gap = 2 * a * (1 - np.cos(np.pi * 1.0 / 100.0))
        for split in ds.sequences:
            frames = np.concatenate([split.history.frames, split.future.frames])
            span = frames[:, 0, 0].max() - frames[:, 0, 0].min()
            assert abs(span - 2 * a) <= sampling_gap + 1e-9

    def test_mixture_labels_both_families(self):
        ds = generate(SynthConfig(n_sequences=30, t_h=5, t_f=5, seed=4, family="mixture"))
        assert set(ds.labels) == {"oscillation", "drift"}

    def test_noise_breaks_rigidity(self):
        ds = generate(SynthConfig(n_sequences=1, t_h=10, t_f=10, seed=3, noise_std=0.05))
        lengths = bone_lengths(ds.sequences[0].history.frames, ds.connectivity)
        assert lengths.var(axis=0).max() > 1e-9


class TestFileFormat:
    def test_round_trip_bitwise(self, tmp_path):
        ds = generate(SynthConfig(n_sequences=4, t_h=6, t_f=5, seed=1, family="mixture"))
        write_dataset(tmp_path / "data", ds)
        back = read_dataset(tmp_path / "data")
        assert back.labels == ds.labels
        assert back.connectivity.bones == ds.connectivity.bones
        assert back.joint_names == ds.joint_names
        for s, t in zip(ds.sequences, back.sequences):
            assert np.array_equal(s.history.frames, t.history.frames)
            assert np.array_equal(s.future.frames, t.future.frames)
            assert s.fps == t.fps

    def test_sequence_file_fields(self, tmp_path):
        ds = generate(SynthConfig(n_sequences=1, t_h=4, t_f=3, seed=1))
        path = tmp_path / "seq.json"
        write_sequence_file(path, ds.sequences[0], ds.connectivity, "walk")
        raw = json.loads(path.read_text())
        assert raw["version"] == 1
        assert raw["joints"] == 5
        assert raw["label"] == "walk"
        assert len(raw["history"]) == 4 and len(raw["future"]) == 3
        assert raw["connectivity"] == [[0, 1], [1, 2], [1, 3], [1, 4]]

    def test_truncated_file_is_parse_error(self, tmp_path):
        ds = generate(SynthConfig(n_sequences=1, t_h=4, t_f=3, seed=1))
        path = tmp_path / "seq.json"
        write_sequence_file(path, ds.sequences[0], ds.connectivity, None)
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with pytest.raises(DatasetFormatError, match="line"):
            read_sequence_file(path)

    def test_joint_count_mismatch_names_frame(self, tmp_path):
        ds = generate(SynthConfig(n_sequences=1, t_h=4, t_f=3, seed=1))
        path = tmp_path / "seq.json"
        write_sequence_file(path, ds.sequences[0], ds.connectivity, None)
        raw = json.loads(path.read_text())
        del raw["history"][2][4]  # frame 2 loses a joint
        path.write_text(json.dumps(raw))
        with pytest.raises(DatasetFormatError, match="frame 2"):
            read_sequence_file(path)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "seq.json"
        path.write_text(json.dumps({"version": 1, "fps": 25.0}))
        with pytest.raises(DatasetFormatError, match="missing field"):
            read_sequence_file(path)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_dataset(tmp_path)
