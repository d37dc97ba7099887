from torchdod.lib import VisitMarker


def test_mark_and_reset():
    marker = VisitMarker(5)
    assert len(marker) == 5
    assert not marker.is_marked(2)

    marker.mark(2)
    assert marker.is_marked(2)
    assert not marker.check_and_mark(2)
    assert marker.check_and_mark(3)
    assert marker.is_marked(3)

    marker.reset()
    assert not any(marker.is_marked(v) for v in range(5))


def test_no_stale_marks_over_many_queries():
    marker = VisitMarker(10)
    for query in range(100):
        marker.reset()
        assert all(marker.check_and_mark(v) for v in range(query % 10))
        assert not any(marker.is_marked(v) for v in range(query % 10, 10))
