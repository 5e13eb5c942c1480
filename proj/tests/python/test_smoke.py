import json
import os

import numpy as np
import pytest

import retargetkit as rk


@pytest.fixture(scope="module")
def model():
    return rk.Model.builtin("mini_humanoid")


def test_model_surface(model):
    assert model.name == "mini_humanoid"
    assert model.n_joints == 12
    assert "pelvis" in model.keypoint_names
    assert model.contact_groups == ["left_foot", "right_foot"]
    assert model.validate() == []
    assert "mini_humanoid" in repr(model)

    text = model.serialize()
    assert '"name"' in text and "mini_humanoid" in text

    with pytest.raises(ValueError):
        rk.Model.builtin("mule")


def test_fk_shapes_and_stance(model):
    stance = model.default_stance()
    kp = rk.fk(
        model,
        stance["base_positions"][0],
        stance["base_quaternions"][0],
        stance["joints"][0],
    )
    assert kp.shape == (len(model.keypoint_names), 3)
    feet = [model.keypoint_names.index(n) for n in ("left_foot", "right_foot")]
    assert np.all(np.abs(kp[feet, 2]) < 0.02)  # soles start at the ground

    with pytest.raises(ValueError):
        rk.fk(model, np.zeros(3), np.array([1.0, 0, 0, 0]), np.zeros(3))


def test_fixture_arrays():
    fx = rk.fixture("squat")
    T, m = fx["reference"].shape[:2]
    assert (T, m) == (100, 8)
    assert fx["truth_contacts"]["flags"].all()  # squat keeps double support
    assert fx["dt"] == pytest.approx(0.02)
    assert len(fx["names"]) == m
    assert fx["source"]["joints"].shape == (100, 12)

    with pytest.raises(ValueError):
        rk.fixture("cartwheel")


def test_geometric_retarget_and_feasibility(model):
    fx = rk.fixture("squat")
    ref = fx["reference"][:10]
    fit = rk.geometric_retarget(model, ref, fx["names"], fx["adjacency"], fx["dt"])
    assert fit["joints"].shape == (10, 12)
    assert max(fit["residuals"]) < 1e-3

    contacts = rk.estimate_contacts(
        model, fit["base_positions"], fit["base_quaternions"], fit["joints"], fx["dt"]
    )
    assert contacts["flags"].shape == (10, 2)
    assert contacts["flags"].all()

    feas = rk.check_feasibility(
        model, fit["base_positions"], fit["base_quaternions"], fit["joints"], fx["dt"]
    )
    assert 0.0 <= feas["infeasible_fraction"] <= 1.0
    assert feas["residuals"].shape == (10,)


def test_combined_distance_zero_at_identity():
    fx = rk.fixture("squat")
    x = fx["reference"][:5]
    assert rk.combined_distance(x, x, fx["adjacency"]) == 0.0
    assert rk.combined_distance(x, x + 0.01, fx["adjacency"]) > 0.0


def test_pipeline_round_trip(tmp_path):
    config = (
        "reference fixture:squat\n"
        "method gr\n"
        f"out_dir {tmp_path}/runs\n"
        "profile fast\n"
    )
    result = rk.run_pipeline(config)
    assert os.path.isdir(result["dir"])
    assert result["seeds"][0]["metrics"]["joints_rmse"] == 0.0

    again = rk.run_pipeline(config)
    assert again["id"] == result["id"]
    t = os.path.join(result["seeds"][0]["dir"], "trajectory.txt")
    with open(t, "rb") as f:
        first = f.read()
    with open(t, "rb") as f:
        assert f.read() == first  # artifact stable on disk after rerun

    rep = rk.report([result["dir"]])
    assert "gr" in rep["text"]
    parsed = json.loads(rep["json"])
    assert parsed["runs"][0]["aggregate"]["count"] == 1

    paths = rk.plot([result["dir"]], "contact_timeline", str(tmp_path / "plots"))
    assert len(paths) == 1 and os.path.exists(paths[0])

    verdict = rk.validate_trajectory("builtin:mini_humanoid", t)
    assert verdict["feasible"].shape[0] == 100

    with pytest.raises(ValueError):
        rk.run_pipeline("method nonsense\nreference fixture:squat\n")
