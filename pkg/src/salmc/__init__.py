"""Self-adversarially learned Markov-chain sampling toolkit.

The package trains a neural conditional generator to act as a Markov
transition kernel. Reference particle and Langevin samplers, chain
diagnostics, and a config-driven experiment runner live alongside it.
"""

__version__ = "0.1.0"

from .adversarial import SALMC, load_generator, sample_chain, sample_chains
from .diagnostics import (
    ChainDiagnostics,
    compute_diagnostics,
    ess,
    gelman_rubin,
    mmd,
)
from .kernels import KernelConfig
from .rng import RngStream
from .samplers.ag_svgd import AGSVGD, ag_svgd_step
from .samplers.sgld import SGLD
from .samplers.svgd import SVGD
from .targets import load_target
from .transport import W2Config, entropic_w2, exact_w2

__all__ = [
    "AGSVGD",
    "ChainDiagnostics",
    "KernelConfig",
    "RngStream",
    "SALMC",
    "SGLD",
    "SVGD",
    "W2Config",
    "__version__",
    "ag_svgd_step",
    "compute_diagnostics",
    "entropic_w2",
    "ess",
    "exact_w2",
    "gelman_rubin",
    "load_generator",
    "load_target",
    "mmd",
    "sample_chain",
    "sample_chains",
]
