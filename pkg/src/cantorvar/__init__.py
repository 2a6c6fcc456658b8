"""Cantor-group harmonic analysis and norm-variation verification at desk scale."""
from .abelian import CharacterTable, Group, characters, make_group
from .averages import ScaleLadder, VariationReport, bilinear_average, count_jumps, variation_sum
from .dadic import DadicInterval, DigitVector, iota, kappa, ominus, oplus
from .stepfn import StepFn2, make_step

__version__ = "0.1.0"

__all__ = [
    "CharacterTable", "Group", "characters", "make_group",
    "ScaleLadder", "VariationReport", "bilinear_average", "count_jumps", "variation_sum",
    "DadicInterval", "DigitVector", "iota", "kappa", "ominus", "oplus",
    "StepFn2", "make_step",
]
