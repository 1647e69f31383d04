import math

import pytest

import _autolinc as al


def test_parse_roundtrip():
    assert al.parse("add( yhat , N )") == "add(yhat,N)"
    with pytest.raises(Exception):
        al.parse("frob(y)")


def test_canonical_sorts_commutative_args():
    assert al.canonical("add(yhat,N)") == al.canonical("add(N,yhat)")
    assert al.num_rules("square(add(yhat,neg(y)))") == 5


def test_legality():
    ok, _ = al.legality("mul(N,mul(y,yhat))")
    assert ok
    bad, missing = al.legality("add(yhat,y)")
    assert not bad and missing == "N"


def test_eval_and_grad():
    yhat = [[0.6, 0.4]]
    y = [[1.0, 0.0]]
    n = [[2.0, 2.0]]
    v = al.eval_loss("square(add(yhat,neg(y)))", yhat, y, n)
    assert v == pytest.approx((0.4 ** 2 + 0.4 ** 2) / 2)
    g = al.grad_yhat("square(add(yhat,neg(y)))", yhat, y, n)
    assert g[0][0] == pytest.approx(-0.4)
    assert g[0][1] == pytest.approx(0.4)


def test_fingerprint_collapses_equal_gradients():
    a = al.fingerprint("add(yhat,yhat)")
    b = al.fingerprint("mul(2,yhat)")
    assert a["hash"] == b["hash"]
    assert al.fingerprint("square(y)")["all_zero"]


def test_basic_check_rejects_overflow():
    ok, reason = al.basic_check("exp(exp(exp(inv(mul(y,yhat)))))")
    assert not ok and reason == "non-finite"


def test_presets():
    names = al.list_presets()
    assert "CE" in names and "balanced-softmax" in names and "A" in names
    assert al.num_rules(al.preset_expression("A")) <= 10


def test_sbm_and_imbalance():
    d = al.gen_sbm(num_classes=3, nodes_per_class=30, p_in=0.2, feature_dim=8,
                   train_per_class=10, val_per_class=10, seed=1)
    assert d.num_nodes == 90
    assert d.train_class_counts == [10, 10, 10]
    imb = al.step_imbalance(d, 5, 1)
    assert imb.train_class_counts == [10, 10, 2]
    assert imb.val == d.val


def test_train_ce():
    d = al.gen_sbm(num_classes=3, nodes_per_class=40, p_in=0.2, feature_dim=8,
                   train_per_class=10, val_per_class=10, seed=7)
    r = al.train(d, "CE", epochs=60, hidden=16)
    assert not r["rejected"]
    assert r["test"]["bacc"] > 0.8
    assert len(r["test"]["recall"]) == 3


def test_train_tree_loss():
    d = al.gen_sbm(num_classes=3, nodes_per_class=30, p_in=0.2, feature_dim=8,
                   train_per_class=10, val_per_class=10, seed=7)
    r = al.train(d, al.preset_expression("C"), epochs=40, hidden=8)
    assert 0.0 <= r["reward"] <= 1.0


def test_uct_score():
    assert al.uct_score(0.7, 8, 2, 1.0) == pytest.approx(1.7197, abs=1e-4)
    assert math.isinf(al.uct_score(0.0, 8, 0, 1.0))


def test_toy_search():
    d = al.gen_sbm(num_classes=3, nodes_per_class=30, p_in=0.2, feature_dim=8,
                   train_per_class=10, val_per_class=10, seed=0)
    r = al.search(d, episodes=500, sims=5, seed=0,
                  toy_target="square(add(yhat,neg(mul(inv(N),y))))")
    assert r["episodes_run"] == 500
    assert r["max_reward"] > 0.9
    assert all(rec["reward"] <= 1.0 for rec in r["records"])
