import pytest

from lib import gallery
from lib import verify


@pytest.fixture(scope="module")
def checks():
    return verify.verify_examples(seed=0, samples=200)


def test_worked_examples_pass(checks):
    failed = [c.name for c in checks if c.asserted and not c.passed]
    assert failed == []
    assert verify.all_passed(checks)


def test_display_value_is_reported_not_asserted(checks):
    (display,) = [c for c in checks if c.name.startswith("closed-form s_2 display")]
    assert not display.asserted


def test_every_group_reports(checks):
    names = " ".join(c.name for c in checks)
    for fragment in ("slice-constant", "S_h recovered", "singular set of h", "x(1-IJ)", "inverse map", "Delta_i",
                     "V(f) = C_-i+", "central differences", "SVD rank", "V(N(f))", "V(f*g)", "representation formula",
                     "N(f*g)", "real r", "C_J^perp", "8 singular corners"):
        assert fragment in names


def test_perturbed_product_example_is_caught():
    checks = verify.verify_examples(h=gallery.product_example(perturb=1e-3), seed=0, samples=50)
    by_name = {c.name: c for c in checks}
    assert not by_name["h(-j) = 0"].passed
    assert not by_name["S_h recovered by scan_zeros"].passed
    assert not verify.all_passed(checks)


def test_check_to_dict():
    d = verify.Check("x", 2.0, 1.0, detail="too big").to_dict()
    assert d == {"name": "x", "residual": 2.0, "threshold": 1.0, "asserted": True, "detail": "too big", "passed": False}


def test_all_passed_ignores_reported_checks():
    checks = [verify.Check("a", 0.0, 1.0), verify.Check("b", 5.0, 1.0, asserted=False)]
    assert verify.all_passed(checks)
    assert not verify.all_passed(checks + [verify.Check("c", 5.0, 1.0)])
