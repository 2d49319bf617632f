"""LLM-guided exploration strategies for small reinforcement-learning agents."""

__version__ = "0.1.0"
