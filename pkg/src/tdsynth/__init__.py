"""Linear controller synthesis under time-domain constraints.

Pole placement through the Youla-Kucera parametrization leaves a free
polynomial ``q``; its coefficients are chosen by convex optimization so that
closed-loop signals satisfy time-domain requirements (bounds, overshoot,
steady-state error).  The time-domain conditions are relaxed to
sum-of-squares constraints and solved as semidefinite programs.

Main entry points
-----------------
solve_d_minimal
    Youla-Kucera family of a plant for a closed-loop pole set.
decompose
    Modal decomposition of a closed-loop signal, affine in ``q``.
synthesize
    Full pipeline driven by a :class:`~tdsynth.config.SynthesisConfig`.
"""

from .diophantine import YoulaFamily, controller, instantiate, solve_d_minimal
from .poly import AffinePoly, MultiPoly, RatPoly
from .response import Reference, decompose, time_eval, to_multipoly
from .transfer import PoleSpec, TransferFunction, closed_loop, target_poly

__version__ = "0.1.0"

__all__ = [
    "AffinePoly",
    "MultiPoly",
    "PoleSpec",
    "RatPoly",
    "Reference",
    "TransferFunction",
    "YoulaFamily",
    "closed_loop",
    "controller",
    "decompose",
    "instantiate",
    "solve_d_minimal",
    "target_poly",
    "time_eval",
    "to_multipoly",
]
