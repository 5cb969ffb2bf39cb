"""belllab: quantum and hidden-variable predictions for the Bell/CHSH experiment."""

__version__ = "0.1.0"
