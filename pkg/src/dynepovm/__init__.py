"""Measurement-induced qubit POVMs from indirect cavity measurements."""
