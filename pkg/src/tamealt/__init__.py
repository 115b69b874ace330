"""Finite operad algebras over GF(p), tame automorphism words and their permutation actions."""

from .algebra import AlgebraStructure, are_isomorphic, automorphisms, is_minimal, random_structure
from .operad import FreeElement, Signature, evaluate, parse_element, substitute
from .tame import GammaGenerators, GroupWord, Transvection, crt_solve, transvection_word, verify_word_symbolic

__all__ = [
    "AlgebraStructure",
    "FreeElement",
    "GammaGenerators",
    "GroupWord",
    "Signature",
    "Transvection",
    "are_isomorphic",
    "automorphisms",
    "crt_solve",
    "evaluate",
    "is_minimal",
    "parse_element",
    "random_structure",
    "substitute",
    "transvection_word",
    "verify_word_symbolic",
]
