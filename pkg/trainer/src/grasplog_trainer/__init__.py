"""U-Net trainer for five-channel log-grasp maps.

Consumes datasets produced by the generator package purely through their
on-disk contract: tensor files, ``manifest.json`` and the golden loss
values; exports predictions the generator's harness can score.
"""

from .losses import LossWeights, bce, mmse, skewed_w_loss, total_loss
from .model import GraspUNet, count_parameters

__version__ = "0.1.0"
