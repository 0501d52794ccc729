import numpy as np
import pytest
import torch

from evlearn import (GROUP_NAMES, JointModel, TrainConfig, group_hashes,
                     load_checkpoint, make_jump_dataset, train)


def short_cfg(**kw):
    defaults = dict(stage1_steps=3, stage2_steps=3, stage3_steps=2,
                    batch_size=2, snr_db=None)
    defaults.update(kw)
    return TrainConfig(**defaults)


class TestSchedule:
    def test_default_learning_rate(self):
        assert TrainConfig().lr == 2e-4

    def test_stage1_freezes_deblur_decoder(self, tiny_model, tiny_config):
        ds = make_jump_dataset(4, tiny_config, seed=0)
        before = group_hashes(tiny_model)
        train(tiny_model, ds, short_cfg(stage2_steps=0, stage3_steps=0))
        after = group_hashes(tiny_model)
        assert after["phi_y"] == before["phi_y"]
        for name in ("theta0", "theta1", "theta_y", "phi0", "phi1"):
            assert after[name] != before[name], name

    def test_stage2_updates_only_deblur_decoder(self, tiny_model,
                                                tiny_config):
        ds = make_jump_dataset(4, tiny_config, seed=0)
        train(tiny_model, ds, short_cfg(stage2_steps=0, stage3_steps=0))
        before = group_hashes(tiny_model)
        train(tiny_model, ds, short_cfg(stage1_steps=0, stage3_steps=0))
        after = group_hashes(tiny_model)
        assert after["phi_y"] != before["phi_y"]
        for name in ("theta0", "theta1", "theta_y", "phi0", "phi1"):
            assert after[name] == before[name], name

    def test_stage3_updates_everything(self, tiny_model, tiny_config):
        ds = make_jump_dataset(4, tiny_config, seed=0)
        before = group_hashes(tiny_model)
        train(tiny_model, ds,
              short_cfg(stage1_steps=0, stage2_steps=0, stage3_steps=3))
        after = group_hashes(tiny_model)
        for name in GROUP_NAMES:
            assert after[name] != before[name], name

    def test_all_groups_trainable_after_run(self, tiny_model, tiny_config):
        ds = make_jump_dataset(2, tiny_config, seed=0)
        train(tiny_model, ds, short_cfg())
        assert all(p.requires_grad for p in tiny_model.parameters())

    def test_one_sample_stage1_loss_decreases_smoothed(self, tiny_config):
        torch.manual_seed(0)
        model = JointModel(tiny_config)
        ds = make_jump_dataset(1, tiny_config, seed=10)
        hist = train(model, ds, short_cfg(lr=1e-3, stage1_steps=300,
                                          stage2_steps=0, stage3_steps=0,
                                          batch_size=1))
        losses = np.array(hist[1])
        smoothed = np.convolve(losses, np.ones(10) / 10, mode="valid")
        # monotone decrease up to small optimizer jitter, large net drop
        assert np.all(np.diff(smoothed) <= 0.05 * smoothed[:-1])
        assert smoothed[-1] < 0.05 * smoothed[0]


class TestErrors:
    def test_empty_dataset_rejected(self, tiny_model, tiny_config):
        ds = make_jump_dataset(1, tiny_config, seed=0)
        empty = {key: tensor[:0] for key, tensor in ds.items()}
        with pytest.raises(ValueError):
            train(tiny_model, empty, short_cfg())

    def test_nan_loss_aborts_with_diagnostic(self, tiny_model, tiny_config):
        ds = make_jump_dataset(2, tiny_config, seed=0)
        ds["gt"][0, 0, 0, 0] = float("nan")
        with pytest.raises(RuntimeError, match="stage 2"):
            train(tiny_model, ds, short_cfg(stage1_steps=0, stage3_steps=0))


class TestPersistence:
    def test_checkpoints_and_loss_log(self, tiny_model, tiny_config,
                                      tmp_path):
        ds = make_jump_dataset(2, tiny_config, seed=0)
        train(tiny_model, ds, short_cfg(snr_db=10.0), out_dir=tmp_path)
        for stage in (1, 2, 3):
            assert (tmp_path / f"stage{stage}.pt").exists()
        lines = (tmp_path / "losses.txt").read_text().splitlines()
        assert lines
        for line in lines:
            stage, step, loss = line.split("\t")
            assert int(stage) in (1, 2, 3)
            assert float(loss) >= 0.0

    def test_checkpoint_round_trip(self, tiny_model, tiny_config, tmp_path):
        ds = make_jump_dataset(2, tiny_config, seed=0)
        train(tiny_model, ds, short_cfg(snr_db=7.5), out_dir=tmp_path)
        model, snr = load_checkpoint(tmp_path / "stage3.pt")
        assert snr == 7.5
        assert group_hashes(model) == group_hashes(tiny_model)
