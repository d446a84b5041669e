"""Structural comparison of tune distributions."""

from .frechet import PHRASE_PAIRS, DistributionProfile, discrete_frechet, distribution_profile, normalize_profile, phrase_profile
from .notes import note_histogram, pitch_class_totals
from .tsne import TsneConfig, TsneResult, conditional_probabilities, joint_probabilities, tsne_embed

__all__ = [
    "PHRASE_PAIRS", "DistributionProfile", "TsneConfig", "TsneResult", "conditional_probabilities",
    "discrete_frechet", "distribution_profile", "joint_probabilities", "normalize_profile",
    "note_histogram", "phrase_profile", "pitch_class_totals", "tsne_embed",
]
