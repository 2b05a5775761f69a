"""Segmentation network: residual encoder, atrous spatial pyramid pooling,
residual deconvolution decoder with skip concatenation, single-conv
classifier.

The encoder is ResNet18-shaped: four layers of two basic residual blocks,
each layer halving resolution, so the bottleneck sits at 1/16 scale. Each
decoder layer is two serial residual blocks: an up-sampling block
(deconvolution kernel 4, stride 2 on both the main and shortcut paths)
followed, after concatenating the matching encoder features, by a
resolution-maintaining block (kernel 3, stride 1). Inputs whose sides are not
divisible by 16 are zero-padded and the output is cropped back.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

ENCODER_LAYERS = 4
DOWN_FACTOR = 2**ENCODER_LAYERS  # each encoder layer halves resolution


@dataclass(frozen=True)
class ModelConfig:
    n_classes: int = 3
    use_aspp: bool = True
    base_width: int = 64
    aspp_dilations: tuple[int, ...] = (1, 6, 12, 18)

    def __post_init__(self):
        if self.n_classes not in (2, 3):
            raise ValueError("n_classes must be 2 or 3")
        if self.base_width < 4:
            raise ValueError("base_width must be >= 4")


class BasicBlock(nn.Module):
    """Two 3x3 convolutions with an identity (or 1x1 projection) shortcut."""

    def __init__(self, in_ch: int, out_ch: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(out_ch)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(out_ch)
        if stride != 1 or in_ch != out_ch:
            self.shortcut = nn.Sequential(
                nn.Conv2d(in_ch, out_ch, 1, stride=stride, bias=False),
                nn.BatchNorm2d(out_ch),
            )
        else:
            self.shortcut = nn.Identity()

    def forward(self, x):
        out = F.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return F.relu(out + self.shortcut(x))


class Encoder(nn.Module):
    """Stem plus four two-block residual layers, halving resolution each."""

    def __init__(self, width: int):
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv2d(3, width, 3, padding=1, bias=False),
            nn.BatchNorm2d(width),
            nn.ReLU(inplace=True),
        )
        chans = [width, width * 2, width * 4, width * 8]
        layers = []
        in_ch = width
        for out_ch in chans:
            layers.append(
                nn.Sequential(BasicBlock(in_ch, out_ch, stride=2), BasicBlock(out_ch, out_ch))
            )
            in_ch = out_ch
        self.layers = nn.ModuleList(layers)
        self.out_channels = [width] + chans

    def forward(self, x):
        feats = [self.stem(x)]
        for layer in self.layers:
            feats.append(layer(feats[-1]))
        return feats  # resolutions 1, 1/2, 1/4, 1/8, 1/16


class ASPP(nn.Module):
    """Parallel atrous 3x3 branches (plus 1x1 for rate 1), fused by 1x1."""

    def __init__(self, in_ch: int, out_ch: int, dilations):
        super().__init__()
        branches = []
        for d in dilations:
            if d == 1:
                conv = nn.Conv2d(in_ch, out_ch, 1, bias=False)
            else:
                conv = nn.Conv2d(in_ch, out_ch, 3, padding=d, dilation=d, bias=False)
            branches.append(
                nn.Sequential(conv, nn.BatchNorm2d(out_ch), nn.ReLU(inplace=True))
            )
        self.branches = nn.ModuleList(branches)
        self.project = nn.Sequential(
            nn.Conv2d(out_ch * len(branches), out_ch, 1, bias=False),
            nn.BatchNorm2d(out_ch),
            nn.ReLU(inplace=True),
        )

    def forward(self, x):
        return self.project(torch.cat([b(x) for b in self.branches], dim=1))


class ResidualUpBlock(nn.Module):
    """Doubles resolution: deconv k4 s2 main path, deconv k4 s2 shortcut."""

    def __init__(self, in_ch: int, out_ch: int):
        super().__init__()
        self.up = nn.ConvTranspose2d(in_ch, out_ch, 4, stride=2, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(out_ch)
        self.conv = nn.Conv2d(out_ch, out_ch, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(out_ch)
        self.shortcut = nn.Sequential(
            nn.ConvTranspose2d(in_ch, out_ch, 4, stride=2, padding=1, bias=False),
            nn.BatchNorm2d(out_ch),
        )

    def forward(self, x):
        out = F.relu(self.bn1(self.up(x)))
        out = self.bn2(self.conv(out))
        return F.relu(out + self.shortcut(x))


class DecoderLayer(nn.Module):
    """Residual up-block, skip concatenation, then a maintaining block."""

    def __init__(self, in_ch: int, skip_ch: int, out_ch: int):
        super().__init__()
        self.up = ResidualUpBlock(in_ch, out_ch)
        self.fuse = BasicBlock(out_ch + skip_ch, out_ch)

    def forward(self, x, skip):
        return self.fuse(torch.cat([self.up(x), skip], dim=1))


class RegionNet(nn.Module):
    """Full predictor: encoder -> (ASPP) -> decoder -> per-pixel scores."""

    def __init__(self, cfg: ModelConfig = ModelConfig()):
        super().__init__()
        self.cfg = cfg
        self.encoder = Encoder(cfg.base_width)
        chans = self.encoder.out_channels  # [w, w, 2w, 4w, 8w] per resolution
        bottleneck = chans[-1]
        self.aspp = (
            ASPP(bottleneck, bottleneck, cfg.aspp_dilations) if cfg.use_aspp else nn.Identity()
        )
        decoder = []
        in_ch = bottleneck
        for skip_ch in reversed(chans[:-1]):
            out_ch = max(skip_ch, cfg.base_width)
            decoder.append(DecoderLayer(in_ch, skip_ch, out_ch))
            in_ch = out_ch
        self.decoder = nn.ModuleList(decoder)
        self.classifier = nn.Conv2d(in_ch, cfg.n_classes, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """(N, 3, H, W) map images -> (N, n_classes, H, W) raw scores."""
        h, w = x.shape[-2:]
        pad_h = (-h) % DOWN_FACTOR
        pad_w = (-w) % DOWN_FACTOR
        if pad_h or pad_w:
            x = F.pad(x, (0, pad_w, 0, pad_h))
        feats = self.encoder(x)
        out = self.aspp(feats[-1])
        for layer, skip in zip(self.decoder, reversed(feats[:-1])):
            out = layer(out, skip)
        scores = self.classifier(out)
        if pad_h or pad_w:
            scores = scores[..., :h, :w]
        return scores


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())
