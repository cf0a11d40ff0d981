from .bodies import (
    Cloth,
    RigidBody,
    SoftBody,
    make_box_body,
    make_prism_body,
    make_sphere_body,
    springs_from_elastic_moduli,
)
from .collision import StaticPlane
from .framelog import frame_log_bytes, read_frame_log, write_frame_log
from .shapes import BoxShape, PrismShape, SphereShape
from .world import (
    BodySnapshot,
    ContactRecord,
    Frame,
    World,
    apply_gesture_impulse,
    simulate,
    step,
    tilt_angle,
)

__all__ = [
    "BodySnapshot",
    "BoxShape",
    "Cloth",
    "ContactRecord",
    "Frame",
    "PrismShape",
    "RigidBody",
    "SoftBody",
    "SphereShape",
    "StaticPlane",
    "World",
    "apply_gesture_impulse",
    "frame_log_bytes",
    "make_box_body",
    "make_prism_body",
    "make_sphere_body",
    "read_frame_log",
    "simulate",
    "springs_from_elastic_moduli",
    "step",
    "tilt_angle",
    "write_frame_log",
]
