"""Console rendering for twinsim commands."""
