"""Illumination-guided encoder-decoder GAN for low-light image enhancement."""
from .critic import Critic, CriticConfig, build_critic
from .enhance import enhance_image
from .errors import (ArchiveError, ChecksumError, ContractError, DatasetLayoutError, EdnigError,
                     IncompatibleFormatError, ModelFileError, NumericError, PairingError)
from .illum import IlluminationMap, IlluminationParams, bright_channel, guided_filter, illumination_map
from .imgio import AugmentationParams, ImageTensor, PairedSample, load_lol_dataset
from .losses import LossWeights
from .net import Generator, GeneratorConfig, build_generator, count_parameters, pad_to_multiple

__version__ = "0.1.0"
