"""Arbitrarily varying wiretap channels: symmetrizability, secrecy rates and random-code simulation."""
__version__ = "0.1.0"
