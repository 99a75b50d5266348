import numpy as np
import pytest

import januslab

TINY = """
run.steps = 6
run.resolution = 8
run.image_size = 12
reference.template_spacing_deg = 90
metrics.n_views = 8
"""


def test_clip_score_bounds():
    rng = np.random.default_rng(0)
    g = rng.normal(scale=10.0, size=(4, 5, 3))
    c = januslab.clip_score(g, 2.5)
    assert c.shape == g.shape
    assert np.abs(c).max() <= 2.5
    inside = np.abs(g) <= 2.5
    assert np.array_equal(c[inside], g[inside])
    with pytest.raises(ValueError):
        januslab.clip_score(g, 0.0)


def test_dynamic_threshold_endpoints():
    assert januslab.dynamic_threshold(0, 2000) == 2.0
    assert januslab.dynamic_threshold(2000, 2000) == 8.0
    assert januslab.dynamic_threshold(1000, 2000) == 5.0


def test_prompt_debiasing():
    assert januslab.pmi("back view", "smiling") == pytest.approx(0.3333, abs=1e-4)
    assert januslab.debias_prompt("a smiling dog", "back view", ["dog"]) == "a dog"
    assert januslab.debias_prompt("a smiling dog", "front view", ["dog"]) == "a smiling dog"
    assert januslab.view_prompt(180.0) == "back view"
    with pytest.raises(KeyError):
        januslab.debias_prompt("a purple dog", "back view")


def test_scenario_run_is_deterministic():
    s = januslab.Scenario(TINY)
    a = s.run("both", 3)
    b = s.run("both", 3)
    assert a["field"] == b["field"]
    assert a["a_dist"] == b["a_dist"]
    img = s.render(a["field"], 30.0)
    assert img.shape == (12, 12, 3)
    assert np.isfinite(img).all()
    assert "front view" in s.reference_metrics()["bin_names"]


def test_bad_config():
    with pytest.raises(ValueError):
        januslab.Scenario("run.stepz = 3\n")
    with pytest.raises(KeyError):
        januslab.Scenario(TINY).run("no_such_arm")
