import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sketchplay import materials
from sketchplay.errors import AlphaOutOfRange, InvalidResponse, NonPositiveMass, NonPositiveVolume
from sketchplay.materials import (
    MassEstimate,
    MaterialProfile,
    VelocityTransfer,
    estimate_mass,
    infer_material_remote,
    infer_material_rule_based,
    load_material_table,
    transfer_factor,
    transfer_velocity,
)
from sketchplay.sketch import MeshPrimitive, SketchObject


def fake_object(circularity=0.5, rectangularity=0.5, aspect=1.0, strokes=1, compactness=0.5):
    return SketchObject(
        id="obj", strokes=(), outline=((0, 0), (1, 0), (1, 1), (0, 1)),
        bbox=(0, 0, 1, 1), centroid=(0.5, 0.5),
        descriptors={
            "circularity": circularity, "rectangularity": rectangularity,
            "aspect_ratio": aspect, "stroke_count": strokes,
            "compactness": compactness, "area": 1.0, "width": 1.0, "height": 1.0,
        },
    )


# --- table ------------------------------------------------------------------

def test_builtin_table_satisfies_ranges_and_alpha_ordering():
    table = load_material_table()
    assert set(table) == {"metal", "wood", "rubber", "glass", "cloth"}
    assert table["metal"].alpha_material < table["cloth"].alpha_material
    for profile in table.values():
        assert 0 < profile.alpha_material <= 1
        assert profile.density_rho > 0
        assert 0 <= profile.restitution_e <= 1
        assert 0 <= profile.poisson_nu < 0.5


def test_profile_range_validation():
    with pytest.raises(InvalidResponse):
        MaterialProfile(label="wood", alpha_material=0.0, density_rho=700,
                        friction_mu=0.5, restitution_e=0.4,
                        elastic_modulus_E=1e10, poisson_nu=0.35)
    with pytest.raises(InvalidResponse):
        MaterialProfile(label="wood", alpha_material=0.4, density_rho=-1,
                        friction_mu=0.5, restitution_e=0.4,
                        elastic_modulus_E=1e10, poisson_nu=0.35)


# --- rule backend -------------------------------------------------------------

def test_prompt_keyword_wins():
    profile = infer_material_rule_based(fake_object(), prompt="a metal ball")
    assert profile.label == "metal"
    assert profile.alpha_material == 0.1


def test_circular_outline_reads_as_rubber():
    assert infer_material_rule_based(fake_object(circularity=0.95)).label == "rubber"


def test_plank_reads_as_wood():
    profile = infer_material_rule_based(fake_object(rectangularity=0.95, aspect=5.0))
    assert profile.label == "wood"


def test_many_loose_strokes_read_as_cloth():
    profile = infer_material_rule_based(fake_object(strokes=7, compactness=0.3))
    assert profile.label == "cloth"


def test_rule_backend_is_deterministic():
    obj = fake_object(circularity=0.95)
    assert infer_material_rule_based(obj, "bouncy") == infer_material_rule_based(obj, "bouncy")


def test_rule_backend_never_returns_unknown():
    for kwargs in (dict(), dict(circularity=0.95), dict(rectangularity=0.99, aspect=9.0)):
        assert infer_material_rule_based(fake_object(**kwargs)).label != "unknown"


# --- mass ---------------------------------------------------------------------

def box_primitive(side=0.1):
    return MeshPrimitive(kind="box", half_extents=(side / 2,) * 3, volume=side**3)


def test_wood_cube_mass():
    table = load_material_table()
    mass = estimate_mass(fake_object(), box_primitive(0.1), table["wood"])
    assert mass.mass_kg == pytest.approx(0.7, rel=1e-12)
    assert mass.provenance == "rule_based"


def test_volume_floor():
    table = load_material_table()
    with pytest.raises(NonPositiveVolume):
        estimate_mass(fake_object(), MeshPrimitive(kind="box", volume=1e-13), table["wood"])


def test_mass_is_linear_in_volume():
    table = load_material_table()
    m1 = estimate_mass(fake_object(), MeshPrimitive(kind="box", volume=0.002), table["glass"])
    m2 = estimate_mass(fake_object(), MeshPrimitive(kind="box", volume=0.004), table["glass"])
    assert m2.mass_kg == pytest.approx(2.0 * m1.mass_kg, rel=1e-12)


# --- velocity transfer ----------------------------------------------------------

def test_alpha_one_is_identity():
    v = transfer_velocity(VelocityTransfer(v_hand=(2.0, -1.0, 0.5), m_hand=0.4,
                                           m_obj=3.0, alpha_material=1.0))
    assert v == (2.0, -1.0, 0.5)


def test_massless_object_limit():
    v = transfer_velocity(VelocityTransfer(v_hand=(1.0, 0.0, 0.0), m_hand=0.4,
                                           m_obj=1e-9, alpha_material=0.3))
    assert abs(v[0] - 1.0) <= 1e-6


def test_paper_worked_example():
    v = transfer_velocity(VelocityTransfer(v_hand=(2.0, 0.0, 0.0), m_hand=0.4,
                                           m_obj=1.0, alpha_material=0.1))
    assert v[0] == pytest.approx(0.714286, abs=1e-6)
    assert v[1] == v[2] == 0.0


def test_transfer_errors():
    with pytest.raises(NonPositiveMass):
        transfer_factor(0.0, 1.0, 0.5)
    with pytest.raises(NonPositiveMass):
        transfer_factor(0.4, -1.0, 0.5)
    with pytest.raises(AlphaOutOfRange):
        transfer_factor(0.4, 1.0, 0.0)
    with pytest.raises(AlphaOutOfRange):
        transfer_factor(0.4, 1.0, 1.5)


def test_factor_grid_sweep_bounds_and_monotonicity():
    # 10^4 parameter triples: factor in (alpha, 1], decreasing in m_obj,
    # increasing in alpha
    m_hands = [0.05 * (i + 1) for i in range(10)]
    m_objs = [0.01 * 3**i for i in range(10)]
    alphas = [0.01 + 0.98 * i / 99 for i in range(100)]  # (0, 1) grid
    for m_hand in m_hands:
        for alpha in alphas:
            prev = None
            for m_obj in m_objs:
                f = transfer_factor(m_hand, m_obj, alpha)
                assert alpha < f <= 1.0
                if prev is not None:
                    assert f < prev  # strictly decreasing in m_obj
                prev = f
    # the bound collapses to equality exactly at alpha = 1
    assert transfer_factor(0.4, 5.0, 1.0) == 1.0
    for m_hand in m_hands[:3]:
        for m_obj in m_objs[:5]:
            prev = None
            for alpha in alphas:
                f = transfer_factor(m_hand, m_obj, alpha)
                if prev is not None:
                    assert f > prev  # strictly increasing in alpha
                prev = f


@given(
    st.floats(min_value=1e-3, max_value=100),
    st.floats(min_value=1e-3, max_value=100),
    st.floats(min_value=1e-6, max_value=1.0, exclude_min=True),
)
@settings(max_examples=200)
def test_transfer_direction_is_exactly_preserved(m_hand, m_obj, alpha):
    v_hand = (3.0, -4.0, 12.0)
    v = transfer_velocity(VelocityTransfer(v_hand=v_hand, m_hand=m_hand,
                                           m_obj=m_obj, alpha_material=alpha))
    f = transfer_factor(m_hand, m_obj, alpha)
    assert v == (v_hand[0] * f, v_hand[1] * f, v_hand[2] * f)  # componentwise


# --- remote backend ---------------------------------------------------------

class _FakeResponse:
    def __init__(self, payload, status=200):
        self._payload = payload
        self.status_code = status

    def raise_for_status(self):
        if self.status_code >= 400:
            raise httpx.HTTPStatusError("boom", request=None, response=None)

    def json(self):
        return self._payload


def test_remote_unreachable_falls_back(monkeypatch):
    monkeypatch.setenv(materials.INFER_URL_ENV, "http://127.0.0.1:9/infer")
    result = infer_material_remote(fake_object(), prompt=None, timeout=0.2)
    assert result.provenance == "rule_based"


def test_remote_invalid_range_falls_back(monkeypatch):
    def fake_post(url, json=None, headers=None, timeout=None):
        return _FakeResponse({"label": "wood", "alpha_material": 0.4,
                              "density_rho": -5.0, "mass_kg": 1.0, "confidence": 0.9})
    monkeypatch.setattr(httpx, "post", fake_post)
    result = infer_material_remote(fake_object(), url="http://example.test/infer")
    assert result.provenance == "rule_based"


def test_remote_valid_response_passes_through(monkeypatch):
    captured = {}

    def fake_post(url, json=None, headers=None, timeout=None):
        captured["payload"] = json
        captured["headers"] = headers
        return _FakeResponse({"label": "glass", "alpha_material": 0.2,
                              "density_rho": 2400.0, "mass_kg": 0.5, "confidence": 0.8})

    monkeypatch.setattr(httpx, "post", fake_post)
    result = infer_material_remote(fake_object(), prompt="a marble",
                                   url="http://example.test/infer", token="sekrit")
    assert result.provenance == "remote_inference"
    assert result.profile.label == "glass"
    assert result.profile.alpha_material == 0.2
    assert result.profile.density_rho == 2400.0
    assert result.mass_kg == 0.5
    assert result.confidence == 0.8
    # few-shot payload shape: exemplar pairs then the query
    assert captured["payload"]["exemplars"], "exemplar list must be non-empty"
    assert set(captured["payload"]["exemplars"][0]) == {"descriptors", "profile"}
    assert captured["payload"]["query"]["prompt"] == "a marble"
    assert captured["headers"]["Authorization"] == "Bearer sekrit"


def test_remote_result_satisfies_profile_ranges(monkeypatch):
    def fake_post(url, json=None, headers=None, timeout=None):
        return _FakeResponse({"label": "cloth", "alpha_material": 2.0,
                              "density_rho": 300.0, "mass_kg": 0.1, "confidence": 0.5})
    monkeypatch.setattr(httpx, "post", fake_post)
    result = infer_material_remote(fake_object(), url="http://example.test/infer")
    assert result.provenance == "rule_based"  # alpha 2.0 violates (0, 1]


def test_mass_estimate_invariant():
    with pytest.raises(NonPositiveMass):
        MassEstimate(mass_kg=0.0, volume_m3=1.0, provenance="rule_based")
    with pytest.raises(NonPositiveVolume):
        MassEstimate(mass_kg=1.0, volume_m3=0.0, provenance="rule_based")
