"""Surrogate-based uncertainty quantification for steady open-channel flow."""
