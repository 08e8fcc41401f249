"""Evaluation toolkit for multilingual machine unlearning."""

__version__ = "0.1.0"
