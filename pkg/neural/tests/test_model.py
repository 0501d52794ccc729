from dataclasses import replace
from fractions import Fraction

import pytest
import torch

from evlearn import (Budget, Channel, JointModel, ModelConfig,
                     make_jump_dataset, mean_symbol_power)


def batch(cfg, n=2, seed=0):
    ds = make_jump_dataset(n, cfg, seed=seed)
    return ds["x0"], ds["x1"], ds["gt"]


class TestShapes:
    def test_transmit_preserves_shapes(self, tiny_model, tiny_config):
        x0, x1, _ = batch(tiny_config)
        x0h, x1h = tiny_model.forward_transmit(x0, x1, tiny_config.budget,
                                               Channel(None))
        assert x0h.shape == x0.shape
        assert x1h.shape == x1.shape

    def test_deblur_preserves_shape_and_range(self, tiny_model, tiny_config):
        x0, x1, _ = batch(tiny_config)
        xh = tiny_model.forward_deblur(x0, x1).detach()
        assert xh.shape == x0.shape
        assert float(xh.min()) >= 0.0
        assert float(xh.max()) <= 1.0

    def test_shape_mismatch_rejected(self, tiny_model, tiny_config):
        x0, x1, _ = batch(tiny_config)
        with pytest.raises(ValueError):
            tiny_model.forward_transmit(x0[:, :, :-1], x1,
                                        tiny_config.budget, Channel(None))
        with pytest.raises(ValueError):
            tiny_model.forward_deblur(x0, x1[:, :-1])

    def test_budget_mismatch_rejected(self, tiny_model, tiny_config):
        x0, x1, _ = batch(tiny_config)
        wrong = Budget(1, 1, 1, tiny_config.n0)
        with pytest.raises(ValueError):
            tiny_model.forward_transmit(x0, x1, wrong, Channel(None))


class TestDeterminismAndBudget:
    def test_noiseless_repeat_identical(self, tiny_model, tiny_config):
        x0, x1, _ = batch(tiny_config)
        a = tiny_model.forward_transmit(x0, x1, tiny_config.budget,
                                        Channel(None))
        b = tiny_model.forward_transmit(x0, x1, tiny_config.budget,
                                        Channel(None))
        assert torch.equal(a[0], b[0]) and torch.equal(a[1], b[1])

    def test_symbol_counts_match_budget(self, tiny_model, tiny_config):
        x0, x1, _ = batch(tiny_config, n=3)
        res = tiny_model.transmit(x0, x1, Channel(None))
        cfg = tiny_config
        assert res.z.shape == (3, 2 * cfg.budget.k)
        assert res.s0_hat.shape[1] == 2 * cfg.k0
        assert res.s1_hat.shape[1] == 2 * cfg.k1
        assert res.y_hat.shape[1] == 2 * cfg.k2

    def test_shared_block_feeds_both_decoders(self, tiny_model, tiny_config):
        x0, x1, _ = batch(tiny_config)
        res = tiny_model.transmit(x0, x1, Channel(None))
        # the decoders consume the single received shared block; re-decoding
        # with it reproduces both outputs exactly
        assert torch.equal(tiny_model.image_decoder(res.s0_hat, res.y_hat),
                           res.x0_hat)
        assert torch.equal(
            tiny_model.event_decoder(res.s1_hat, res.y_hat)
            * tiny_config.event_scale, res.x1_hat)

    def test_unit_power_every_batch(self, tiny_model, tiny_config):
        for seed in range(3):
            x0, x1, _ = batch(tiny_config, n=4, seed=seed)
            res = tiny_model.transmit(x0, x1, Channel(10.0, seed))
            power = mean_symbol_power(res.z.detach())
            assert float((power - 1).abs().max()) < 1e-3

    def test_cbr_operating_points(self):
        third = ModelConfig()  # 48x48, 256 symbols per stream
        assert third.budget.cbr == Fraction(1, 3)
        sixth = ModelConfig(k0=128, k1=128, k2=128)
        assert sixth.budget.cbr == Fraction(1, 6)


class TestAblation:
    def test_zero_event_input_still_valid(self, tiny_config):
        torch.manual_seed(0)
        model = JointModel(replace(tiny_config, use_events=False))
        x0, x1, _ = batch(tiny_config)
        with torch.no_grad():
            x0h, x1h, xh = model(x0, x1, Channel(10.0, 0))
        assert torch.isfinite(xh).all()
        assert 0.0 <= float(xh.min()) and float(xh.max()) <= 1.0

    def test_ablation_ignores_event_content(self, tiny_config):
        torch.manual_seed(0)
        model = JointModel(replace(tiny_config, use_events=False))
        x0, x1, _ = batch(tiny_config)
        a = model.forward_transmit(x0, x1, tiny_config.budget, Channel(None))
        b = model.forward_transmit(x0, torch.zeros_like(x1),
                                   tiny_config.budget, Channel(None))
        assert torch.equal(a[0], b[0])


class TestGradientFlow:
    def test_deblur_groups_all_receive_gradient(self, tiny_model,
                                                tiny_config):
        x0, x1, gt = batch(tiny_config)
        loss = torch.nn.functional.mse_loss(
            tiny_model.forward_deblur(x0, x1), gt)
        loss.backward()
        for name, module in tiny_model.deblur_decoder.named_children():
            norms = [p.grad.norm().item() for p in module.parameters()
                     if p.grad is not None]
            assert norms and max(norms) > 0.0, f"dead branch: {name}"

    def test_finite_difference_spot_check(self, tiny_config):
        torch.manual_seed(1)
        model = JointModel(tiny_config).double()
        x0, x1, gt = (t.double() for t in batch(tiny_config, n=1, seed=3))

        def loss_value():
            return torch.nn.functional.mse_loss(
                model.forward_deblur(x0, x1), gt)

        loss = loss_value()
        model.zero_grad()
        loss.backward()
        params = [p for p in model.deblur_decoder.parameters()
                  if p.grad is not None and p.grad.abs().max() > 1e-8]
        rng = torch.Generator().manual_seed(9)
        checked = 0
        for p in params:
            if checked >= 5:
                break
            flat = p.detach().view(-1)
            gflat = p.grad.view(-1)
            idx = int(torch.randint(flat.numel(), (1,), generator=rng))
            if abs(gflat[idx]) < 1e-6:
                continue
            h = 1e-6
            with torch.no_grad():
                orig = flat[idx].item()
                flat[idx] = orig + h
                plus = loss_value().item()
                flat[idx] = orig - h
                minus = loss_value().item()
                flat[idx] = orig
            fd = (plus - minus) / (2 * h)
            assert fd == pytest.approx(gflat[idx].item(), rel=1e-3)
            checked += 1
        assert checked == 5
