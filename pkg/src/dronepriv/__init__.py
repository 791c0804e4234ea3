"""Privacy-preserving drone field-of-view shortlisting and flight-software audit."""

__version__ = "0.1.0"
