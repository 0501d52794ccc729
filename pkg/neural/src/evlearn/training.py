"""Three-stage training schedule.

Stage 1 trains the transmission path (encoders + symbol decoders) on the
sum of the blurry-image and event-tensor reconstruction errors, with the
deblurring decoder frozen.  Stage 2 trains only the deblurring decoder on
the sharp-image error.  Stage 3 fine-tunes everything on the sharp-image
error.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

import torch
import torch.nn.functional as F

from .channel import Channel
from .config import TrainConfig
from .data import dataset_size
from .model import JointModel

GROUP_NAMES = ("theta0", "theta1", "theta_y", "phi0", "phi1", "phi_y")

_STAGE_FROZEN = {
    1: frozenset({"phi_y"}),
    2: frozenset({"theta0", "theta1", "theta_y", "phi0", "phi1"}),
    3: frozenset(),
}


def group_hashes(model: JointModel) -> dict[str, str]:
    """SHA-256 digest of each parameter group's raw values."""
    hashes = {}
    for name, params in model.parameter_groups().items():
        digest = hashlib.sha256()
        for p in params:
            digest.update(p.detach().cpu().numpy().tobytes())
        hashes[name] = digest.hexdigest()
    return hashes


def _set_frozen(model: JointModel, frozen: frozenset[str]):
    for name, params in model.parameter_groups().items():
        requires = name not in frozen
        for p in params:
            p.requires_grad_(requires)


def _stage_loss(model: JointModel, stage: int, batch: dict[str, torch.Tensor],
                channel: Channel) -> torch.Tensor:
    if stage == 1:
        result = model.transmit(batch["x0"], batch["x1"], channel)
        target1 = model.scale_events(batch["x1"])
        if not model.cfg.use_events:
            target1 = torch.zeros_like(target1)
        return (F.mse_loss(result.x0_hat, batch["x0"])
                + F.mse_loss(model.scale_events(result.x1_hat), target1))
    _, _, x_hat = model(batch["x0"], batch["x1"], channel)
    return F.mse_loss(x_hat, batch["gt"])


@dataclass
class TrainState:
    stage: int
    frozen: frozenset[str]
    step: int = 0
    loss_history: list[float] = field(default_factory=list)


def _batch_indices(n: int, batch_size: int, steps: int,
                   generator: torch.Generator):
    """Yield `steps` batches of indices, reshuffling each pass over the
    data."""
    produced = 0
    while produced < steps:
        order = torch.randperm(n, generator=generator)
        for start in range(0, n, batch_size):
            if produced >= steps:
                return
            yield order[start:start + batch_size]
            produced += 1


def train(model: JointModel, dataset: dict[str, torch.Tensor],
          cfg: TrainConfig, out_dir: str | os.PathLike | None = None,
          ) -> dict[int, list[float]]:
    """Run the staged schedule; returns per-stage loss histories.

    When ``out_dir`` is given, writes ``stage{n}.pt`` checkpoints and
    appends ``stage<TAB>step<TAB>loss`` lines to ``losses.txt``.
    """
    n = dataset_size(dataset)
    if n == 0:
        raise ValueError("dataset is empty")
    channel = Channel(cfg.snr_db, cfg.noise_seed)
    shuffle = torch.Generator()
    shuffle.manual_seed(cfg.shuffle_seed)

    log = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        log = open(os.path.join(out_dir, "losses.txt"), "w")

    histories: dict[int, list[float]] = {}
    try:
        for stage, steps in ((1, cfg.stage1_steps), (2, cfg.stage2_steps),
                             (3, cfg.stage3_steps)):
            state = TrainState(stage, _STAGE_FROZEN[stage])
            _set_frozen(model, state.frozen)
            trainable = [p for p in model.parameters() if p.requires_grad]
            optimizer = torch.optim.Adam(trainable, lr=cfg.lr)
            for idx in _batch_indices(n, cfg.batch_size, steps, shuffle):
                batch = {key: tensor[idx] for key, tensor in dataset.items()}
                loss = _stage_loss(model, stage, batch, channel)
                if not torch.isfinite(loss):
                    raise RuntimeError(
                        f"non-finite loss {loss.item()} at stage {stage} "
                        f"step {state.step}")
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                value = float(loss.item())
                state.loss_history.append(value)
                if log and (state.step % cfg.log_every == 0
                            or state.step == steps - 1):
                    log.write(f"{stage}\t{state.step}\t{value:.6e}\n")
                state.step += 1
            histories[stage] = state.loss_history
            if out_dir is not None:
                save_checkpoint(model, cfg,
                                os.path.join(out_dir, f"stage{stage}.pt"))
    finally:
        if log:
            log.close()
    _set_frozen(model, frozenset())
    return histories


def save_checkpoint(model: JointModel, cfg: TrainConfig,
                    path: str | os.PathLike):
    from dataclasses import asdict

    torch.save({"state_dict": model.state_dict(),
                "model_config": asdict(model.cfg),
                "snr_db": cfg.snr_db}, path)


def load_checkpoint(path: str | os.PathLike):
    """Rebuild a model (and its training SNR metadata) from a checkpoint."""
    from .config import ModelConfig

    payload = torch.load(path, weights_only=False)
    model = JointModel(ModelConfig(**payload["model_config"]))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload.get("snr_db")
