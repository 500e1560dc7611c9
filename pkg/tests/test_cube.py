import pytest

from main_logic.corpus import sky_pair_corpus, standard_corpus
from main_logic.cube import (
    Resolution,
    build_akh_complex,
    build_kh_complex,
    check_square_zero,
    dump_complex,
    iter_generators,
    resolution_counts,
    smooth,
)
from main_logic.errors import ResourceLimitError
from main_logic.linkdiag import (
    BraidWord,
    Crossing,
    PlanarDiagram,
    annular_to_planar,
    braid_closure,
    model_link,
    parse_pd,
)

HOPF_PD = "X(1,3,2,4) X(3,1,4,2)"


def test_resolution_from_string():
    r = Resolution.from_string("10")
    assert r.mask == 1 and r.length == 2 and r.weight == 1
    assert r.bit(0) == 1 and r.bit(1) == 0
    with pytest.raises(ValueError):
        Resolution.from_string("12")


@pytest.mark.parametrize("bits, circles", [("00", 2), ("10", 1), ("01", 1), ("11", 2)])
def test_smooth_hopf(bits, circles):
    state = smooth(parse_pd(HOPF_PD), Resolution.from_string(bits))
    assert state.circle_count == circles
    assert set(state.arc_circle.values()) == set(range(circles))


def test_smooth_u2_circles_are_essential():
    state = smooth(annular_to_planar(model_link("U2")), Resolution(0, 0))
    assert state.circle_count == 2
    assert state.essential == (True, True)


def test_smooth_planar_unknot_is_not_essential():
    state = smooth(model_link("unknot"), Resolution(0, 0))
    assert state.circle_count == 1
    assert state.essential == (False,)


def test_smooth_rejects_wrong_length():
    with pytest.raises(ValueError):
        smooth(parse_pd(HOPF_PD), Resolution.from_string("1"))


def test_smooth_independent_of_crossing_order():
    diagram = parse_pd(HOPF_PD)
    reordered = PlanarDiagram(tuple(reversed(diagram.crossings)), diagram.loops)
    for mask in range(4):
        swapped = ((mask & 1) << 1) | (mask >> 1)
        assert (
            smooth(diagram, Resolution(mask, 2)).circle_count
            == smooth(reordered, Resolution(swapped, 2)).circle_count
        )


def test_unknot_complex():
    complex_ = build_kh_complex(model_link("unknot"))
    assert sorted(complex_.blocks) == [(-1,), (1,)]
    for block in complex_.blocks.values():
        assert block.degrees() == [0]
        assert block.dim(0) == 1
        assert block.differential(0).is_zero()


def test_hopf_complex_generator_counts():
    complex_ = build_kh_complex(model_link("hopf_positive"))
    assert complex_.total_generators() == 12
    per_i = {}
    for generator in iter_generators(complex_):
        per_i[generator.i] = per_i.get(generator.i, 0) + 1
    assert per_i == {0: 4, 1: 4, 2: 4}


@pytest.mark.parametrize("name, diagram", standard_corpus(8))
def test_generator_count_is_state_sum(name, diagram):
    complex_ = build_kh_complex(diagram)
    counts = resolution_counts(diagram)
    assert complex_.total_generators() == sum(
        count * 2 ** circles for (_, circles), count in counts.items()
    )
    assert sum(counts.values()) == 2 ** diagram.crossing_count


@pytest.mark.parametrize("name, diagram", standard_corpus(8))
def test_square_zero_and_j_parity(name, diagram):
    complex_ = build_kh_complex(diagram)
    check_square_zero(complex_)
    parities = {g.j % 2 for g in iter_generators(complex_)}
    assert parities == {diagram.component_count % 2}
    for g in iter_generators(complex_):
        assert -diagram.n_minus <= g.i <= diagram.n_plus


@pytest.mark.parametrize("name, diagram", sky_pair_corpus())
def test_annular_complex(name, diagram):
    complex_ = build_akh_complex(diagram)
    check_square_zero(complex_)
    planar = build_kh_complex(annular_to_planar(diagram))
    assert complex_.total_generators() == planar.total_generators()
    for g in iter_generators(complex_):
        assert abs(g.k) <= 2
        assert (g.j - g.k) % 2 == 0


def test_annular_complex_three_strands():
    complex_ = build_akh_complex(braid_closure(BraidWord(3, (1, -2, 1, 2))))
    check_square_zero(complex_)
    assert all(len(grading) == 2 for grading in complex_.blocks)


def test_crossing_limit():
    with pytest.raises(ResourceLimitError) as info:
        build_kh_complex(model_link("P3"), crossing_limit=3)
    assert info.value.limit == 3
    assert "crossing_limit=3" in str(info.value)


def test_dump_complex():
    text = dump_complex(build_kh_complex(model_link("hopf_positive")))
    assert text.startswith("# complex annular=False crossings=2")
    assert "block (0,)" in text
    assert "(0,0,1)" in text or "d[" in text
    limited = dump_complex(build_kh_complex(model_link("hopf_positive")), limit=1)
    assert "..." in limited


def test_kink_with_negative_crossing():
    kink = PlanarDiagram((Crossing((1, 2, 2, 1), -1),))
    complex_ = build_kh_complex(kink)
    check_square_zero(complex_)
    assert kink.n_minus == 1


def walk_circles(diagram, mask):
    """逐个交叉连弧后做深度优先遍历数圆周（与批量算法独立的计数）"""
    neighbours = {arc: set() for arc in diagram.arcs()}
    for c, crossing in enumerate(diagram.crossings):
        a, b, cc, d = crossing.arcs
        pairs = ((a, d), (b, cc)) if (mask >> c) & 1 else ((a, b), (cc, d))
        for u, v in pairs:
            neighbours[u].add(v)
            neighbours[v].add(u)
    seen, count = set(), 0
    for arc in neighbours:
        if arc in seen:
            continue
        count += 1
        stack = [arc]
        while stack:
            current = stack.pop()
            if current not in seen:
                seen.add(current)
                stack.extend(neighbours[current] - seen)
    return count


@pytest.mark.parametrize("word", [(1, -2, 1, 2), (1, 1, 1), (-1, 2, 3, -2), (2, 2, -1)])
def test_batched_circles_match_walk(word):
    diagram = annular_to_planar(braid_closure(BraidWord(4, word)))
    n = diagram.crossing_count
    for mask in range(1 << n):
        state = smooth(diagram, Resolution(mask, n))
        assert state.circle_count == walk_circles(diagram, mask)
        assert len(state.essential) == state.circle_count
