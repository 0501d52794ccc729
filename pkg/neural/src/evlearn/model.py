"""Networks: paired encoders with a shared stream, symbol-space decoders,
and a cross-attention U-Net that fuses image and event reconstructions
into a sharp image estimate."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

from .channel import Channel, power_normalize
from .config import Budget, ModelConfig


def _conv(cin: int, cout: int, stride: int = 1) -> nn.Conv2d:
    return nn.Conv2d(cin, cout, kernel_size=3, stride=stride, padding=1)


class _SymbolHead(nn.Module):
    """Three conv layers followed by a linear projection to 2k reals
    (k complex symbols)."""

    def __init__(self, cin: int, width: int, spatial: int, k: int):
        super().__init__()
        self.body = nn.Sequential(
            _conv(cin, width), nn.GELU(),
            _conv(width, width, stride=2), nn.GELU(),
            _conv(width, width), nn.GELU(),
        )
        self.proj = nn.Linear(width * (spatial // 2) ** 2, 2 * k)

    def forward(self, feats: torch.Tensor) -> torch.Tensor:
        h = self.body(feats)
        return self.proj(h.flatten(1))


class EncoderStack(nn.Module):
    """Two stems (image, events) and three symbol heads: image-specific,
    event-specific, and a shared head on the concatenated stem features."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        w = cfg.base_width
        self.image_stem = nn.Sequential(
            _conv(cfg.image_channels, w, stride=2), nn.GELU(),
            _conv(w, w, stride=2), nn.GELU(),
        )
        self.event_stem = nn.Sequential(
            _conv(cfg.event_channels, w, stride=2), nn.GELU(),
            _conv(w, w, stride=2), nn.GELU(),
        )
        spatial = cfg.height // 4
        self.image_head = _SymbolHead(w, w, spatial, cfg.k0)
        self.event_head = _SymbolHead(w, w, spatial, cfg.k1)
        self.shared_head = _SymbolHead(2 * w, w, spatial, cfg.k2)

    def forward(self, x0: torch.Tensor, x1: torch.Tensor):
        f0 = self.image_stem(x0)
        f1 = self.event_stem(x1)
        s0 = self.image_head(f0)
        s1 = self.event_head(f1)
        y = self.shared_head(torch.cat([f0, f1], dim=1))
        return s0, s1, y


class _SymbolDecoder(nn.Module):
    """Maps received symbols [ŝ, ŷ] back to a (cout, H, W) map: a linear
    lift, three upsampling conv layers, then two reconstruction layers."""

    def __init__(self, cfg: ModelConfig, k_in: int, cout: int):
        super().__init__()
        w = cfg.base_width
        self.spatial = cfg.height // 8
        self.width = w
        self.proj = nn.Linear(2 * (k_in + cfg.k2), w * self.spatial ** 2)
        self.body = nn.Sequential(
            nn.Upsample(scale_factor=2), _conv(w, w), nn.GELU(),
            nn.Upsample(scale_factor=2), _conv(w, w), nn.GELU(),
            nn.Upsample(scale_factor=2), _conv(w, w), nn.GELU(),
        )
        self.recon = nn.Sequential(
            _conv(w, w), nn.GELU(),
            _conv(w, cout),
        )

    def forward(self, s_hat: torch.Tensor, y_hat: torch.Tensor) -> torch.Tensor:
        h = self.proj(torch.cat([s_hat, y_hat], dim=1))
        h = h.view(-1, self.width, self.spatial, self.spatial)
        return self.recon(self.body(h))


class CrossAttention(nn.Module):
    """Multi-head attention on pooled token grids: queries from image
    features, keys/values from event features.  The attended map is
    upsampled back to the feature resolution and returned as a residual."""

    def __init__(self, channels: int, heads: int, tokens: int):
        super().__init__()
        self.tokens = tokens
        self.norm_q = nn.LayerNorm(channels)
        self.norm_kv = nn.LayerNorm(channels)
        self.attn = nn.MultiheadAttention(channels, heads, batch_first=True)

    def forward(self, img: torch.Tensor, ev: torch.Tensor) -> torch.Tensor:
        b, c, h, w = img.shape
        t = min(self.tokens, h, w)
        q = F.adaptive_avg_pool2d(img, t).flatten(2).transpose(1, 2)
        kv = F.adaptive_avg_pool2d(ev, t).flatten(2).transpose(1, 2)
        out, _ = self.attn(self.norm_q(q), self.norm_kv(kv), self.norm_kv(kv))
        out = out.transpose(1, 2).reshape(b, c, t, t)
        return F.interpolate(out, size=(h, w), mode="nearest")


class DeblurDecoder(nn.Module):
    """U-Net over the reconstructed blurry image, fusing event features via
    cross-attention at each encoder level, with skip connections on the
    upsampling path.  Outputs a residual over the blurry input, clamped to
    [0, 1]."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        w = cfg.base_width
        heads, tokens = cfg.attn_heads, cfg.attn_tokens
        self.img_in = _conv(cfg.image_channels, w)
        self.ev_in = _conv(cfg.event_channels, w)
        self.attn0 = CrossAttention(w, heads, tokens)
        self.down_img = _conv(w, 2 * w, stride=2)
        self.down_ev = _conv(w, 2 * w, stride=2)
        self.attn1 = CrossAttention(2 * w, heads, tokens)
        self.down2 = _conv(2 * w, 4 * w, stride=2)
        self.bottleneck = _conv(4 * w, 4 * w)
        self.up1 = _conv(4 * w, 2 * w)
        self.fuse1 = _conv(4 * w, 2 * w)
        self.up0 = _conv(2 * w, w)
        self.fuse0 = _conv(2 * w, w)
        self.out = _conv(w, cfg.image_channels)

    def forward(self, x0_hat: torch.Tensor, ev: torch.Tensor) -> torch.Tensor:
        fi = F.gelu(self.img_in(x0_hat))
        fe = F.gelu(self.ev_in(ev))
        f0 = fi + self.attn0(fi, fe)
        gi = F.gelu(self.down_img(f0))
        ge = F.gelu(self.down_ev(fe))
        f1 = gi + self.attn1(gi, ge)
        h = F.gelu(self.down2(f1))
        h = F.gelu(self.bottleneck(h))
        u1 = F.gelu(self.up1(F.interpolate(h, scale_factor=2)))
        u1 = F.gelu(self.fuse1(torch.cat([u1, f1], dim=1)))
        u0 = F.gelu(self.up0(F.interpolate(u1, scale_factor=2)))
        u0 = F.gelu(self.fuse0(torch.cat([u0, f0], dim=1)))
        raw = x0_hat + self.out(u0)
        # straight-through clamp: outputs stay in [0, 1] but gradients pass
        # through unchanged, so saturated pixels cannot stall training
        return raw + (torch.clamp(raw, 0.0, 1.0) - raw).detach()


@dataclass
class TransmitResult:
    """Intermediate tensors of one transmission round-trip."""

    z: torch.Tensor        # normalized symbols before noise, (B, 2k) reals
    z_hat: torch.Tensor    # after the channel
    s0_hat: torch.Tensor
    s1_hat: torch.Tensor
    y_hat: torch.Tensor    # the single shared block, fed to both decoders
    x0_hat: torch.Tensor
    x1_hat: torch.Tensor   # event tensor in raw count units


class JointModel(nn.Module):
    """End-to-end model: encode blurry image + event tensor to channel
    symbols, transmit over AWGN, decode both streams, then deblur.

    With ``use_events=False`` the event input is replaced by a constant
    zero tensor everywhere (the image-only ablation) while the symbol
    budget stays identical.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.encoder = EncoderStack(cfg)
        self.image_decoder = _SymbolDecoder(cfg, cfg.k0, cfg.image_channels)
        self.event_decoder = _SymbolDecoder(cfg, cfg.k1, cfg.event_channels)
        self.deblur_decoder = DeblurDecoder(cfg)

    def scale_events(self, x1: torch.Tensor) -> torch.Tensor:
        return x1 / self.cfg.event_scale

    def _check_inputs(self, x0: torch.Tensor, x1: torch.Tensor):
        cfg = self.cfg
        expect0 = (cfg.image_channels, cfg.height, cfg.width)
        expect1 = (cfg.event_channels, cfg.height, cfg.width)
        if x0.ndim != 4 or tuple(x0.shape[1:]) != expect0:
            raise ValueError(f"image batch must be (B, {expect0}), "
                             f"got {tuple(x0.shape)}")
        if x1.ndim != 4 or tuple(x1.shape[1:]) != expect1:
            raise ValueError(f"event batch must be (B, {expect1}), "
                             f"got {tuple(x1.shape)}")
        if x0.shape[0] != x1.shape[0]:
            raise ValueError("batch sizes differ")

    def transmit(self, x0: torch.Tensor, x1: torch.Tensor,
                 channel: Channel) -> TransmitResult:
        cfg = self.cfg
        self._check_inputs(x0, x1)
        x1s = self.scale_events(x1)
        if not cfg.use_events:
            x1s = torch.zeros_like(x1s)
        s0, s1, y = self.encoder(x0, x1s)
        z = power_normalize(torch.cat([s0, s1, y], dim=1))
        z_hat = channel(z)
        a, b = 2 * cfg.k0, 2 * (cfg.k0 + cfg.k1)
        s0_hat, s1_hat, y_hat = z_hat[:, :a], z_hat[:, a:b], z_hat[:, b:]
        x0_hat = self.image_decoder(s0_hat, y_hat)
        x1_hat = self.event_decoder(s1_hat, y_hat) * cfg.event_scale
        return TransmitResult(z, z_hat, s0_hat, s1_hat, y_hat, x0_hat, x1_hat)

    def forward_transmit(self, x0: torch.Tensor, x1: torch.Tensor,
                         budget: Budget, channel: Channel):
        if budget != self.cfg.budget:
            raise ValueError(f"budget {budget} does not match the configured "
                             f"{self.cfg.budget}")
        result = self.transmit(x0, x1, channel)
        return result.x0_hat, result.x1_hat

    def forward_deblur(self, x0_hat: torch.Tensor,
                       x1_hat: torch.Tensor) -> torch.Tensor:
        self._check_inputs(x0_hat, x1_hat)
        ev = self.scale_events(x1_hat)
        if not self.cfg.use_events:
            ev = torch.zeros_like(ev)
        return self.deblur_decoder(x0_hat, ev)

    def forward(self, x0: torch.Tensor, x1: torch.Tensor, channel: Channel):
        result = self.transmit(x0, x1, channel)
        x_hat = self.forward_deblur(result.x0_hat, result.x1_hat)
        return result.x0_hat, result.x1_hat, x_hat

    def parameter_groups(self) -> dict[str, list[nn.Parameter]]:
        """Named parameter groups used by the staged training schedule."""
        enc = self.encoder
        return {
            "theta0": list(enc.image_stem.parameters())
            + list(enc.image_head.parameters()),
            "theta1": list(enc.event_stem.parameters())
            + list(enc.event_head.parameters()),
            "theta_y": list(enc.shared_head.parameters()),
            "phi0": list(self.image_decoder.parameters()),
            "phi1": list(self.event_decoder.parameters()),
            "phi_y": list(self.deblur_decoder.parameters()),
        }
