import pytest
from hypothesis import given, settings, strategies as st

from pagetime.exceptions import DomainError, EmptyManifest
from pagetime.waterfall import (
    SimComponent,
    components_from_manifest,
    effective_parallelism,
    schedule_csv,
    simulate,
    sweep,
)

FOUR = [SimComponent(i, 400, 600) for i in range(1, 5)]
FIVE = [SimComponent(i, 400, 100) for i in range(1, 6)]


@pytest.mark.parametrize("k,makespan", [(1, 4000), (2, 2000), (4, 1000)])
def test_figures_4_to_6(k, makespan):
    assert simulate(FOUR, k).makespan_ms == makespan


def test_js_barrier_serialises():
    comps = [SimComponent(1, 0, 1000), SimComponent(2, 0, 1000, is_js=True), SimComponent(3, 0, 1000)]
    result = simulate(comps, 8)
    assert result.makespan_ms == 3000
    assert result.per_component == ((0, 1000), (1000, 2000), (2000, 3000))


def test_sweep_four():
    assert sweep(FOUR, 4) == [(1, 4000), (2, 2000), (3, 2000), (4, 1000)]


def test_sweep_single_component():
    assert {m for _, m in sweep([SimComponent(1, 30, 70)], 6)} == {100}


def test_five_component_example():
    ms = dict(sweep(FIVE, 8))
    assert all(ms[k] == ms[5] for k in range(5, 9))
    assert effective_parallelism(FIVE, 5) == pytest.approx(5, rel=0.1)


def test_effective_parallelism():
    assert effective_parallelism(FOUR, 1) == 1
    assert effective_parallelism(FOUR, 4) == 4


def test_tie_breaking_and_connections():
    r = simulate(FOUR, 2)
    assert r.connection_index == (0, 1, 0, 1)
    assert r.connections_used == 2
    assert schedule_csv(r).splitlines() == [
        "doc_order,start_ms,end_ms,connection_index",
        "1,0.00,1000.00,0",
        "2,0.00,1000.00,1",
        "3,1000.00,2000.00,0",
        "4,1000.00,2000.00,1",
    ]


def test_errors():
    with pytest.raises(DomainError):
        simulate(FOUR, 0)
    with pytest.raises(EmptyManifest):
        simulate([], 1)
    with pytest.raises(DomainError):
        simulate([SimComponent(1, 1, 1), SimComponent(1, 1, 1)], 1)
    with pytest.raises(DomainError):
        sweep(FOUR, 0)


def test_manifest_base_page_is_barrier(appendix_manifest):
    comps = components_from_manifest(appendix_manifest)
    assert comps[0].is_js and comps[15].is_js and not comps[1].is_js
    r = simulate(comps, 4)
    base_end = r.per_component[0][1]
    assert all(start >= base_end for start, _ in r.per_component[1:])


comp = st.tuples(st.floats(0, 1000), st.floats(0, 1000), st.booleans())


def build(specs):
    return [SimComponent(i + 1, fb, cd, js) for i, (fb, cd, js) in enumerate(specs)]


@settings(max_examples=200)
@given(st.lists(comp, min_size=1, max_size=15), st.integers(1, 8))
def test_makespan_bounds(specs, k_max):
    comps = build(specs)
    serial = sum(c.duration for c in comps)
    longest = max(c.duration for c in comps)
    results = sweep(comps, k_max)
    assert results[0][1] == pytest.approx(serial, rel=1e-12, abs=1e-9)
    prev = float("inf")
    for k, makespan in results:
        assert makespan <= prev + 1e-9
        assert makespan >= longest - 1e-9
        assert makespan >= serial / k - 1e-9
        prev = makespan


@settings(max_examples=200)
@given(st.lists(comp, min_size=1, max_size=15), st.integers(1, 8))
def test_schedule_invariants(specs, k):
    comps = build(specs)
    r = simulate(comps, k)
    for c, (start, end) in zip(comps, r.per_component):
        assert end == pytest.approx(start + c.duration)
    events = sorted([(s, 1) for s, e in r.per_component if e > s] + [(e, -1) for s, e in r.per_component if e > s])
    live = 0
    for _, delta in events:
        live += delta
        assert live <= k
    assert simulate(comps, k) == r


@settings(max_examples=200)
@given(st.lists(comp, min_size=1, max_size=15), st.integers(1, 8), st.data())
def test_removing_barrier_never_hurts(specs, k, data):
    barriers = [i for i, s in enumerate(specs) if s[2]]
    if not barriers:
        return
    i = data.draw(st.sampled_from(barriers))
    relaxed = list(specs)
    relaxed[i] = (specs[i][0], specs[i][1], False)
    assert simulate(build(relaxed), k).makespan_ms <= simulate(build(specs), k).makespan_ms + 1e-9
