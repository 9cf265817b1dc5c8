"""Exact and numerical tools for McNaughton homeomorphisms of the unit square.

Submodules: geom, pwl, gens, mvfun, twist, symbolic, cone, dyn, fastmap,
leaves, synth, acceptance, cli.
"""

__version__ = "0.1.0"
