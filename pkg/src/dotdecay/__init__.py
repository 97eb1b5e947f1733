"""Non-exponential decay of tunneling electrons in quantum dots.

Potentials, semiclassical and exact resonance analysis, decay profiles,
transition-time estimates, driven three-level dynamics and the nuclear
alpha-decay comparison.
"""

__version__ = "0.1.0"
