"""Encoder-decoder network predicting five grasp-map channels.

A compact U-Net: four resolution levels with skip connections. The head
splits activations per channel contract: tanh for the doubled-angle pair,
sigmoid for the graspability score, softplus offset into the valid width
band, sigmoid for balance.
"""

from __future__ import annotations

import torch
import torch.nn as nn

W_MIN = 0.30
W_MAX = 1.55


def _block(cin, cout):
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, padding=1),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
        nn.Conv2d(cout, cout, 3, padding=1),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
    )


class GraspUNet(nn.Module):
    def __init__(self, in_channels: int = 5, width: int = 32):
        super().__init__()
        w = width
        self.enc1 = _block(in_channels, w)
        self.enc2 = _block(w, 2 * w)
        self.enc3 = _block(2 * w, 4 * w)
        self.bottom = _block(4 * w, 8 * w)
        self.pool = nn.MaxPool2d(2)
        self.up3 = nn.ConvTranspose2d(8 * w, 4 * w, 2, stride=2)
        self.dec3 = _block(8 * w, 4 * w)
        self.up2 = nn.ConvTranspose2d(4 * w, 2 * w, 2, stride=2)
        self.dec2 = _block(4 * w, 2 * w)
        self.up1 = nn.ConvTranspose2d(2 * w, w, 2, stride=2)
        self.dec1 = _block(2 * w, w)
        self.head = nn.Conv2d(w, 5, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        e1 = self.enc1(x)
        e2 = self.enc2(self.pool(e1))
        e3 = self.enc3(self.pool(e2))
        b = self.bottom(self.pool(e3))
        d3 = self.dec3(torch.cat([self.up3(b), e3], dim=1))
        d2 = self.dec2(torch.cat([self.up2(d3), e2], dim=1))
        d1 = self.dec1(torch.cat([self.up1(d2), e1], dim=1))
        raw = self.head(d1)
        c = torch.tanh(raw[:, 0:1])
        s = torch.tanh(raw[:, 1:2])
        w = W_MIN + (W_MAX - W_MIN) * torch.sigmoid(raw[:, 2:3])
        u = torch.sigmoid(raw[:, 3:4])
        b_ch = torch.sigmoid(raw[:, 4:5])
        return torch.cat([c, s, w, u, b_ch], dim=1)


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters() if p.requires_grad)
