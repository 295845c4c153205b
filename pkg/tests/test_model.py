import json

import pytest

from twisted_hodge.exterior import Form
from twisted_hodge.linalg import is_zero_matrix
from twisted_hodge.model import (
    LieComplexModel,
    ModelError,
    ValidationFailed,
    build_dbar,
    build_partial,
    bundled_models,
    load_model,
    model_from_dict,
    model_to_dict,
    require_valid,
    torus_model,
    validate,
)
from twisted_hodge.scalars import GaussianRational


def mono(n, holo, anti, c=1):
    return Form(n, {(tuple(holo), tuple(anti)): c})


def kt(c=1):
    return LieComplexModel("kt", 2, [Form.zero(2), mono(2, [0], [0], c)])


def test_bundled_list():
    names = bundled_models()
    for expected in ["torus_n1", "torus_n2", "torus_n3", "kodaira_thurston", "hopf_surface"]:
        assert expected in names


@pytest.mark.parametrize("name", bundled_models())
def test_bundled_models_validate(name):
    m = load_model(name)
    assert validate(m).passed


@pytest.mark.parametrize("c", [GaussianRational(1), GaussianRational(2, -3), GaussianRational(1, 1) / 5])
def test_kt_family_validates(c):
    assert validate(kt(c)).passed


def test_corrupted_model_fails():
    m = LieComplexModel("bad", 2, [mono(2, [0, 1], []), mono(2, [0], [0]) + mono(2, [0], [1])])
    rep = validate(m)
    assert not rep.passed
    assert rep.first_failure.startswith("d^2")
    with pytest.raises(ValidationFailed):
        build_dbar(m)


def test_non_unimodular_rejected():
    # d phi1 = phi1 ^ phi2: tr ad != 0
    m = LieComplexModel("nu", 2, [mono(2, [0, 1], []), Form.zero(2)])
    rep = validate(m)
    assert not rep.unimodular and not rep.passed


def test_schema_rejects_02():
    with pytest.raises(ModelError):
        LieComplexModel("x", 2, [mono(2, [], [0, 1]), Form.zero(2)])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_torus_zero(n):
    m = torus_model(n)
    assert build_dbar(m).is_zero() and build_partial(m).is_zero()


def test_torus_rejects_zero():
    with pytest.raises(ModelError):
        torus_model(0)


def test_kt_dbar_blocks():
    m = require_valid(load_model("kodaira_thurston"))
    db = build_dbar(m)
    assert is_zero_matrix(db.block(0, 0))
    # the only nonzero first-order block entry on (0,1) comes from partial, not dbar
    dp = build_partial(m)
    assert sum(1 for x in dp.block(0, 1).ravel() if x != 0) == 1
    assert is_zero_matrix(db.block(0, 1))


@pytest.mark.parametrize("name", bundled_models())
def test_graded_identities(name):
    m = load_model(name)
    db, dp = build_dbar(m), build_partial(m)
    n = m.n
    assert db.compose(db).is_zero()
    assert dp.compose(dp).is_zero()
    assert (dp.compose(db) + db.compose(dp)).is_zero()
    from math import comb

    for (p, q), b in db.blocks.items():
        assert b.shape == (comb(n, p) * comb(n, q + 1), comb(n, p) * comb(n, q))


def test_roundtrip():
    m = load_model("hopf_surface")
    again = model_from_dict(json.loads(json.dumps(model_to_dict(m))))
    assert again.dphi == m.dphi and again.theta_examples == m.theta_examples


def test_malformed_coefficient(tmp_path):
    doc = model_to_dict(load_model("kodaira_thurston"))
    doc["dphi"]["2"][0]["coeff"] = "1/0"
    with pytest.raises(ModelError):
        model_from_dict(doc)


def test_missing_model():
    with pytest.raises(FileNotFoundError):
        load_model("no_such_model")


def test_numeric_mode():
    m = load_model("kodaira_thurston").as_numeric()
    assert not m.exact
    assert build_dbar(m).compose(build_dbar(m)).is_zero(1e-12)
