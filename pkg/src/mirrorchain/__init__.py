"""Perfect state transfer on engineered XX spin chains, protected against
known systematic errors by boundary encodings and decodings."""

__version__ = "0.1.0"
