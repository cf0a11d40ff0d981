"""Material/mass inference and the gesture-to-object velocity transfer.

Two inference backends share one contract: a deterministic rule-based
table lookup (always available, used as fallback) and an optional remote
HTTP backend that sends a few-shot payload of descriptor->property
exemplars.  Remote failures of any kind degrade to the rule backend so
the pipeline never needs the network.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from importlib import resources
from typing import Optional, Sequence, Tuple

import httpx

from .errors import (
    AlphaOutOfRange,
    InvalidResponse,
    NonPositiveMass,
    NonPositiveVolume,
)
from .geometry import Vec3, vscale
from .sketch import MeshPrimitive, SketchObject

MATERIAL_LABELS = ("metal", "wood", "rubber", "glass", "cloth", "unknown")
DEFAULT_HAND_MASS = 0.4  # kg; tunable, nothing in the transfer rule fixes it
MIN_VOLUME = 1e-12  # m^3

INFER_URL_ENV = "SKETCHPLAY_INFER_URL"
INFER_TOKEN_ENV = "SKETCHPLAY_INFER_TOKEN"

PROVENANCE_RULE = "rule_based"
PROVENANCE_REMOTE = "remote_inference"
PROVENANCE_USER = "user_override"


@dataclass(frozen=True)
class MaterialProfile:
    label: str
    alpha_material: float
    density_rho: float
    friction_mu: float
    restitution_e: float
    elastic_modulus_E: float
    poisson_nu: float

    def __post_init__(self):
        validate_profile_ranges(self)


def validate_profile_ranges(p: "MaterialProfile") -> None:
    if p.label not in MATERIAL_LABELS:
        raise InvalidResponse(f"unknown material label {p.label!r}")
    if not 0 < p.alpha_material <= 1:
        raise InvalidResponse(f"alpha_material {p.alpha_material} not in (0, 1]")
    if not p.density_rho > 0:
        raise InvalidResponse(f"density_rho {p.density_rho} must be > 0")
    if not p.friction_mu >= 0:
        raise InvalidResponse(f"friction_mu {p.friction_mu} must be >= 0")
    if not 0 <= p.restitution_e <= 1:
        raise InvalidResponse(f"restitution_e {p.restitution_e} not in [0, 1]")
    if not p.elastic_modulus_E > 0:
        raise InvalidResponse(f"elastic_modulus_E {p.elastic_modulus_E} must be > 0")
    if not 0 <= p.poisson_nu < 0.5:
        raise InvalidResponse(f"poisson_nu {p.poisson_nu} not in [0, 0.5)")
    for name in ("alpha_material", "density_rho", "friction_mu", "restitution_e",
                 "elastic_modulus_E", "poisson_nu"):
        if not math.isfinite(getattr(p, name)):
            raise InvalidResponse(f"{name} is not finite")


@dataclass(frozen=True)
class MassEstimate:
    mass_kg: float
    volume_m3: float
    provenance: str  # rule_based | remote_inference | user_override

    def __post_init__(self):
        if self.mass_kg <= 0:
            raise NonPositiveMass(f"mass {self.mass_kg} must be > 0")
        if self.volume_m3 <= 0:
            raise NonPositiveVolume(f"volume {self.volume_m3} must be > 0")


@dataclass(frozen=True)
class InferenceResult:
    profile: MaterialProfile
    provenance: str
    confidence: Optional[float] = None
    mass_kg: Optional[float] = None  # remote backends may estimate mass directly


@dataclass(frozen=True)
class VelocityTransfer:
    v_hand: Vec3
    m_hand: float
    m_obj: float
    alpha_material: float


def _load_json_resource(name: str):
    with resources.files("sketchplay.data").joinpath(name).open("r") as f:
        return json.load(f)


def load_material_table(path: Optional[str] = None) -> dict:
    """Material label -> MaterialProfile table, bundled defaults or a user file."""
    raw = _load_json_resource("material_table.json") if path is None else json.load(open(path))
    table = {}
    for label, row in raw.items():
        table[label] = MaterialProfile(label=label, **row)
    alphas = {label: p.alpha_material for label, p in table.items()}
    if "metal" in alphas and "cloth" in alphas and not alphas["metal"] < alphas["cloth"]:
        raise InvalidResponse("material table must order alpha(metal) < alpha(cloth)")
    return table

def load_few_shot_exemplars(path: Optional[str] = None) -> list:
    return _load_json_resource("few_shot_exemplars.json") if path is None else json.load(open(path))


_DEFAULT_TABLE = None


def default_material_table() -> dict:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = load_material_table()
    return _DEFAULT_TABLE


def infer_material_rule_based(
    obj: SketchObject,
    prompt: Optional[str] = None,
    table: Optional[dict] = None,
) -> MaterialProfile:
    """Deterministic material inference from prompt keywords or shape descriptors.

    Keyword match wins; otherwise near-circular outlines read as rubber
    balls, long thin rectangles as wooden planks, many loose strokes as
    cloth, and everything else defaults to wood.
    """
    table = table or default_material_table()
    if prompt:
        lowered = prompt.lower()
        for label in ("metal", "wood", "rubber", "glass", "cloth"):
            if label in lowered:
                return table[label]
        for synonym, label in (("steel", "metal"), ("iron", "metal"), ("fabric", "cloth"),
                               ("ball", "rubber"), ("stone", "glass")):
            if synonym in lowered:
                return table[label]
    d = obj.descriptors
    if d["circularity"] > 0.9:
        return table["rubber"]
    if d["rectangularity"] > 0.9 and d["aspect_ratio"] > 3:
        return table["wood"]
    if d["stroke_count"] >= 6 and d["compactness"] < 0.5:
        return table["cloth"]
    return table["wood"]


def build_inference_request(
    obj: SketchObject,
    prompt: Optional[str],
    exemplars: Sequence[dict],
) -> dict:
    """Assemble the few-shot JSON payload: exemplar pairs, then the query."""
    return {
        "exemplars": [
            {"descriptors": ex["descriptors"], "profile": ex["profile"]}
            for ex in exemplars
        ],
        "query": {
            "descriptors": {
                k: obj.descriptors[k]
                for k in ("aspect_ratio", "compactness", "rectangularity",
                          "stroke_count", "area")
            },
            "prompt": prompt or "",
        },
    }


def _validate_remote_response(payload: dict, table: dict) -> Tuple[MaterialProfile, float, float]:
    try:
        label = payload["label"]
        alpha = float(payload["alpha_material"])
        rho = float(payload["density_rho"])
        mass = float(payload["mass_kg"])
        confidence = float(payload["confidence"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidResponse(f"response missing or non-numeric field: {exc}") from exc
    if label not in table:
        raise InvalidResponse(f"response label {label!r} not in material table")
    if not 0 <= confidence <= 1:
        raise InvalidResponse(f"confidence {confidence} not in [0, 1]")
    if mass <= 0 or not math.isfinite(mass):
        raise InvalidResponse(f"mass_kg {mass} must be positive and finite")
    # contact parameters come from the table row; the remote fields override
    # the inferred alpha and density, and must satisfy the profile ranges
    profile = replace(table[label], alpha_material=alpha, density_rho=rho)
    return profile, confidence, mass


def infer_material_remote(
    obj: SketchObject,
    prompt: Optional[str] = None,
    exemplars: Optional[Sequence[dict]] = None,
    url: Optional[str] = None,
    token: Optional[str] = None,
    table: Optional[dict] = None,
    timeout: float = 5.0,
) -> InferenceResult:
    """Few-shot remote inference with rule-based fallback.

    Sends one HTTP POST; any transport error or out-of-range response
    falls back to ``infer_material_rule_based`` and records rule_based
    provenance instead of aborting the pipeline.
    """
    table = table or default_material_table()
    url = url or os.environ.get(INFER_URL_ENV)
    token = token or os.environ.get(INFER_TOKEN_ENV)
    exemplars = exemplars if exemplars is not None else load_few_shot_exemplars()

    def fallback() -> InferenceResult:
        return InferenceResult(
            profile=infer_material_rule_based(obj, prompt, table),
            provenance=PROVENANCE_RULE,
        )

    if not url or not exemplars:
        return fallback()

    request = build_inference_request(obj, prompt, exemplars)
    headers = {"Authorization": f"Bearer {token}"} if token else {}
    try:
        response = httpx.post(url, json=request, headers=headers, timeout=timeout)
        response.raise_for_status()
        payload = response.json()
    except Exception:
        # RemoteUnavailable by contract: degrade, never abort
        return fallback()
    try:
        profile, confidence, mass = _validate_remote_response(payload, table)
    except InvalidResponse:
        return fallback()
    return InferenceResult(
        profile=profile,
        provenance=PROVENANCE_REMOTE,
        confidence=confidence,
        mass_kg=mass,
    )


def estimate_mass(
    obj: SketchObject,
    primitive: MeshPrimitive,
    profile: MaterialProfile,
    provenance: str = PROVENANCE_RULE,
    mass_override: Optional[float] = None,
) -> MassEstimate:
    """Mass from density and lifted volume (or a direct remote/user value)."""
    if primitive.volume < MIN_VOLUME:
        raise NonPositiveVolume(f"volume {primitive.volume} below {MIN_VOLUME} m^3 floor")
    if mass_override is not None:
        return MassEstimate(mass_kg=mass_override, volume_m3=primitive.volume,
                            provenance=provenance)
    return MassEstimate(
        mass_kg=profile.density_rho * primitive.volume,
        volume_m3=primitive.volume,
        provenance=PROVENANCE_RULE,
    )


def transfer_factor(m_hand: float, m_obj: float, alpha_material: float) -> float:
    """The scalar (m_hand + alpha*m_obj) / (m_hand + m_obj) in (alpha, 1]."""
    if m_hand <= 0 or m_obj <= 0:
        raise NonPositiveMass(f"masses must be positive, got m_hand={m_hand}, m_obj={m_obj}")
    if not 0 < alpha_material <= 1:
        raise AlphaOutOfRange(f"alpha_material {alpha_material} not in (0, 1]")
    return (m_hand + alpha_material * m_obj) / (m_hand + m_obj)


def transfer_velocity(transfer: VelocityTransfer) -> Vec3:
    """Scale hand velocity componentwise by the material-weighted mass ratio."""
    factor = transfer_factor(transfer.m_hand, transfer.m_obj, transfer.alpha_material)
    return vscale(transfer.v_hand, factor)
