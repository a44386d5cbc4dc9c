"""Polar-coded transmission with polarization-based input shaping."""
from ._backend import BACKEND
from .channels import (ChannelInfo, Dmc, SolverError, builtin_channel, channel_from_config,
                       mutual_information, optimal_input, transmit)
from .code import (CodeSpec, DecodeFailure, LazyDecoder, build_code, decode, decode_frame,
                   encode, inner_llr, map_decode_oracle)
from .core import (BitBlock, InvalidArgument, RandomStream, binary_entropy, polar_transform,
                   uniform_variate, variational_distance)
from .polarization import (ExtractorSet, FrozenSet, IndexSets, build_index_sets,
                           choose_extractor_set, outer_frozen_sets, source_entropies_exact,
                           source_entropies_mc)
from .shaper import (GallagerSpec, ShaperSpec, best_rational_approx, gallager_rate_gap,
                     gallager_shape, shape, shaper_output_distribution, source_lr)

__all__ = [
    "BACKEND", "ChannelInfo", "Dmc", "SolverError", "builtin_channel", "channel_from_config",
    "mutual_information", "optimal_input", "transmit", "CodeSpec", "DecodeFailure",
    "LazyDecoder", "build_code", "decode", "decode_frame", "encode", "inner_llr",
    "map_decode_oracle", "BitBlock", "InvalidArgument", "RandomStream", "binary_entropy",
    "polar_transform", "uniform_variate", "variational_distance", "ExtractorSet", "FrozenSet",
    "IndexSets", "build_index_sets", "choose_extractor_set", "outer_frozen_sets",
    "source_entropies_exact", "source_entropies_mc", "GallagerSpec", "ShaperSpec",
    "best_rational_approx", "gallager_rate_gap", "gallager_shape", "shape",
    "shaper_output_distribution", "source_lr",
]

__version__ = "0.1.0"
