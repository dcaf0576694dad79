import numpy as np
import pytest

from dominter import streams


def test_replayable():
    a = streams.trial_stream(7, 12345, streams.FADING).random(5)
    b = streams.trial_stream(7, 12345, streams.FADING).random(5)
    assert np.array_equal(a, b)


def test_streams_distinct():
    draws = [
        streams.trial_stream(7, 0, streams.FIELD).random(),
        streams.trial_stream(7, 1, streams.FIELD).random(),
        streams.trial_stream(7, 0, streams.FADING).random(),
        streams.trial_stream(8, 0, streams.FIELD).random(),
    ]
    assert len(set(draws)) == len(draws)


def test_large_indices():
    g = streams.trial_stream(2 ** 64 - 1, 2 ** 63, streams.PRIORITY)
    assert 0 <= g.random() < 1


def test_shell_substream():
    assert streams.shell_substream(0, streams.FIELD) == streams.FIELD
    assert streams.shell_substream(1, streams.FADING) == 5
    ids = {streams.shell_substream(j, kind) for j in range(4) for kind in range(3)}
    assert len(ids) == 12
    assert streams.PRIORITY not in ids


def test_negative_seed():
    with pytest.raises(ValueError):
        streams.trial_stream(-1, 0)
