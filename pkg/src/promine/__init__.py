"""promine: session-based patient-reported-outcome mining toolkit.

Assembles client episodes from per-visit ORS/SRS records, computes outcome
statistics, trains and cross-validates a probabilistic classifier zoo with
nested feature selection, and serves what-if predictions for clinical
decision support.
"""

__version__ = "0.1.0"
