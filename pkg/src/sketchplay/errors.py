"""Exception types shared across the pipeline."""
from __future__ import annotations


class SketchPlayError(Exception):
    """Base class for all pipeline errors."""


# --- stream ingestion / trajectory ---

class MalformedRecord(SketchPlayError):
    pass


class NonMonotonicTime(SketchPlayError):
    pass


class IndexOutOfRange(SketchPlayError):
    pass


class TooFewFrames(SketchPlayError):
    pass


class TooFewPoints(SketchPlayError):
    pass


class DegenerateTimestep(SketchPlayError):
    pass


class EmptyInput(SketchPlayError):
    pass


# --- sketch ---

class EmptyCanvas(SketchPlayError):
    pass


class DegenerateOutline(SketchPlayError):
    pass


# --- recognition ---

class NonPositiveVolume(SketchPlayError):
    pass


class NonPositiveMass(SketchPlayError):
    pass


class AlphaOutOfRange(SketchPlayError):
    pass


class RemoteUnavailable(SketchPlayError):
    pass


class InvalidResponse(SketchPlayError):
    pass


# --- physics ---

class ParameterOutOfRange(SketchPlayError):
    pass


class UnknownBody(SketchPlayError):
    pass


class NumericalBlowup(SketchPlayError):
    """Simulation diverged; carries the frame index where it happened."""

    def __init__(self, message: str, frame_index: int):
        super().__init__(message)
        self.frame_index = frame_index


# --- emitter ---

class UnsupportedShape(SketchPlayError):
    pass


class EmptySpec(SketchPlayError):
    pass


# --- priors ---

class DegenerateCamera(SketchPlayError):
    pass


# --- service ---

class BadStatus(SketchPlayError):
    pass


class MalformedStroke(SketchPlayError):
    pass


class UnknownObject(SketchPlayError):
    pass


class RangeOutOfBounds(SketchPlayError):
    pass
