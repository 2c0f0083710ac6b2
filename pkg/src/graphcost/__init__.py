"""graphcost: communication cost of distributing graph states over noisy channels.

Stabilizer Monte Carlo plus closed-form models for comparing entanglement
purification strategies (pairwise, multiparty, and intermediate) when
preparing GHZ and linear cluster states across noisy channels.
"""

__version__ = "0.1.0"

from .tableau import StabilizerRegister

__all__ = ["StabilizerRegister", "__version__"]
