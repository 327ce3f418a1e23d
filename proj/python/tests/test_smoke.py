import pytest

import spots


def test_small_starts():
    expected = ["loss", "loss", "win", "win", "win", "loss"]
    for n, want in enumerate(expected, start=1):
        outcome, stats = spots.solve(f"0*{n}")
        assert outcome == want
        assert stats["outcome"] == want
        assert stats["expansions"] > 0


@pytest.mark.parametrize("engine", ["oracle", "pns", "dfpn", "pdfpn", "cluster"])
def test_engines_agree_on_nim(engine):
    assert spots.solve("1,2,3", game="nim", engine=engine, threads=2, workers=2)[0] == "loss"
    assert spots.solve("1,2", game="nim", engine=engine, nim=1)[0] == "win"


def test_grundy_and_certificate():
    db = spots.GrundyDatabase()
    assert spots.grundy("0*4", db=db) == 1
    assert db.find(spots.canonical("sprouts", "0*4")) == 1
    report = spots.verify(db)
    assert report["passed"]
    assert report["checked"] == len(db)
    assert db.dumps().startswith("#spots-gn-v1\n")


def test_budget_and_syntax_errors():
    with pytest.raises(spots.BudgetExceeded):
        spots.solve("0*7", budget=50)
    with pytest.raises(ValueError):
        spots.solve("0*q")


def test_estimate_is_seeded():
    a = spots.estimate("0*4", samples=200, seed=3)
    b = spots.estimate("0*4", samples=200, seed=3)
    assert a == b
    assert a[0] > 0


def test_position_helpers():
    assert spots.canonical("sprouts", "0*0") == ""
    assert spots.canonical("nim", "3,1,0,2") == "1,2,3"
    assert len(spots.decompose("nim", "1,2")) == 2
    assert spots.children("sprouts", "0*1")
