from usability_ga.rng import RngSpec


def test_streams_are_reproducible_and_distinct():
    a, b = RngSpec(3), RngSpec(3)
    assert a.py("x").random() == b.py("x").random()
    assert a.py("x").random() != a.py("y").random()
    assert a.stream(1, 2).random() == b.stream(1, 2).random()
    assert a.stream(1, 2).random() != a.stream(2, 1).random()
    assert a.numpy("k").integers(0, 1 << 30) == b.numpy("k").integers(0, 1 << 30)
    assert a.child("c").seed_for("z") == b.child("c").seed_for("z")
    assert a.child("c").seed_for("z") != RngSpec(4).child("c").seed_for("z")
