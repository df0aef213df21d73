"""handflow: hand-demonstration to robot-dataset conversion pipeline."""

__version__ = "0.1.0"
