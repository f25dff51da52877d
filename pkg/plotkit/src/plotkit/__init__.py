"""Figure rendering for the beam solver's CSV outputs.

Strictly file-to-file: the package never invokes the solver and reads only the
documented CSV schemas (solution profiles, per-layer error records, and
convergence studies).
"""

__version__ = "0.1.0"
