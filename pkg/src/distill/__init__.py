"""Single-rail entanglement distribution over lossy channels.

Exact linear-optics simulation of do-nothing, NLA (at Bob's end and
half-way) and purification protocols, the matching closed-form results, and
the best-protocol comparison built on them.
"""

__version__ = "0.1.0"
