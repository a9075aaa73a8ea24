from .nfa import Dfa, Nfa, nfa_padded, nfa_word, regex_to_nfa
from .core import (
    ProductAcceptor, UnrankedDTA, UnrankedNTA, dta_complement,
    dta_containment, dtd_to_dta, find_accepted_tree, nta_is_empty, product,
)
from .progress import build_comatch_dta, build_match_nta, path_progress_dfa
from .subexpr import build_subexpr_dta, self_closure
from .ata import (
    RankedAta, RankExceeded, ata_accepts, bounded_nonempty_diff, build_ata,
    wildcard_expand,
)

__all__ = [
    "Dfa", "Nfa", "nfa_padded", "nfa_word", "regex_to_nfa",
    "ProductAcceptor", "UnrankedDTA", "UnrankedNTA", "dta_complement",
    "dta_containment", "dtd_to_dta", "find_accepted_tree", "nta_is_empty",
    "product", "build_comatch_dta", "build_match_nta", "path_progress_dfa",
    "build_subexpr_dta", "self_closure", "RankedAta", "RankExceeded",
    "ata_accepts", "bounded_nonempty_diff", "build_ata", "wildcard_expand",
]
