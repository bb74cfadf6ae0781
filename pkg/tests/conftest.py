import pytest

from recipnet.model import Event, Layer, TrustLevel, build_graph

DAY = 86400


def chat(ts, a, b):
    return Event(ts, a, b, Layer.CHAT)


def trade(ts, a, b):
    return Event(ts, a, b, Layer.TRADE)


def trust(ts, a, b, level=TrustLevel.TRUSTEE):
    return Event(ts, a, b, Layer.TRUST, level)


def graph_of(events, window=None):
    events = list(events)
    if window is None:
        window = (0, max([e.ts for e in events], default=0))
    return build_graph(events, window)


@pytest.fixture
def small_graph():
    return graph_of([
        chat(0, "a", "b"),
        chat(3600, "b", "a"),
        trade(DAY, "a", "c"),
        trust(2 * DAY, "c", "a"),
        trust(3 * DAY, "a", "c", TrustLevel.FRIEND),
    ], window=(0, 10 * DAY))


_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_VERDICTS, [])

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance")
        for line in lines:
            terminalreporter.write_line(line)
