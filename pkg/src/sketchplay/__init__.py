"""sketchplay: timed strokes and gestures in, simulated physical scenes out."""

__version__ = "0.1.0"
