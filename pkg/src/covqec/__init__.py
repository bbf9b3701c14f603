"""Covariant erasure codes: constructions, fidelity certificates and lower bounds.

The package is organised as

* :mod:`covqec.numkit`, :mod:`covqec.special`: linear algebra and special functions;
* :mod:`covqec.codespace`: code families as sparse isometries;
* :mod:`covqec.noise`: erasure models and reduced environment operators;
* :mod:`covqec.fidelity`: entanglement fidelity under the best recovery;
* :mod:`covqec.certify`: upper bounds on the worst-case error;
* :mod:`covqec.bounds`: charge-fluctuation lower bounds;
* :mod:`covqec.reptheory`: irrep dimensions for the dimension bounds;
* :mod:`covqec.groupcodes`: codes covariant under finite groups.
"""

from . import bounds, certify, codespace, fidelity, groupcodes, noise, numkit, reptheory, special
from .bounds import BoundReport, thm1_worst_lower, thm2_bounds
from .certify import Certificate, certify_minorization, certify_reference
from .codespace import ChargeSpec, CovariantCode, SparseState
from .fidelity import FidelityEstimate, fe_via_constant_channel, worst_case_eps_heuristic
from .noise import ErasureModel, event_view

__version__ = "0.1.0"

__all__ = [
    "bounds", "certify", "codespace", "fidelity", "groupcodes", "noise", "numkit", "reptheory",
    "special", "BoundReport", "thm1_worst_lower", "thm2_bounds", "Certificate",
    "certify_minorization", "certify_reference", "ChargeSpec", "CovariantCode", "SparseState",
    "FidelityEstimate", "fe_via_constant_channel", "worst_case_eps_heuristic", "ErasureModel",
    "event_view",
]
