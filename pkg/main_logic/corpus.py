"""自检用的图库与随机辫子"""

import random
from typing import List, Sequence, Tuple

from main_logic.linkdiag import (
    AnnularDiagram,
    BraidMove,
    BraidWord,
    MoveKind,
    PlanarDiagram,
    annular_to_planar,
    apply_move,
    augment_with_meridian,
    braid_closure,
    model_link,
    parse_pd,
)

# (名称, 股数, 字母)
STANDARD_BRAIDS: Sequence[Tuple[str, int, Tuple[int, ...]]] = (
    ("trefoil_positive", 2, (1, 1, 1)),
    ("trefoil_negative", 2, (-1, -1, -1)),
    ("figure_eight", 3, (1, -2, 1, -2)),
    ("hopf_cancelled", 2, (1, -1)),
    ("unlink_3", 3, ()),
    ("torus_2_4", 2, (1, 1, 1, 1)),
    ("three_strand_twist", 3, (1, 2, 1, 2)),
)

# 一对天空的全部辫子形式
SKY_PAIR_WORDS: Sequence[Tuple[int, ...]] = ((), (1, -1), (-1, 1), (1, 1), (-1, -1))


def standard_corpus(max_crossings: int = 12) -> List[Tuple[str, PlanarDiagram]]:
    """平面图库，按交叉数上限过滤

    Returns:
        (名称, 平面图) 列表，顺序固定
    """
    entries: List[Tuple[str, PlanarDiagram]] = [
        ("unknot", model_link("unknot")),
        ("unknot_kink", parse_pd("X(1,1,2,2)")),
        ("hopf_positive", model_link("hopf_positive")),
        ("hopf_negative", model_link("hopf_negative")),
        ("P3", model_link("P3")),
    ]
    for name, strands, letters in STANDARD_BRAIDS:
        closure = braid_closure(BraidWord(strands, letters))
        entries.append((name, annular_to_planar(closure)))
        entries.append((f"{name}+mu", augment_with_meridian(closure)))
    return [(name, d) for name, d in entries if d.crossing_count <= max_crossings]


def sky_pair_corpus() -> List[Tuple[str, AnnularDiagram]]:
    """所有可能由一对天空得到的环形图"""
    return [
        (" ".join(str(g) for g in letters) or "empty", braid_closure(BraidWord(2, letters)))
        for letters in SKY_PAIR_WORDS
    ]


def random_braid_word(
    rng: random.Random, max_letters: int = 8, strand_choices: Sequence[int] = (2, 3)
) -> BraidWord:
    strands = rng.choice(list(strand_choices))
    length = rng.randint(0, max_letters)
    letters = [rng.choice((1, -1)) * rng.randint(1, strands - 1) for _ in range(length)]
    return BraidWord(strands, tuple(letters))


def _applicable_moves(rng: random.Random, word: BraidWord) -> List[BraidMove]:
    """当前辫子词上可以施加的变换（共轭和插入各随机取一个）"""
    letters = word.letters
    generator = rng.choice((1, -1)) * rng.randint(1, word.strand_count - 1)
    moves = [
        BraidMove(MoveKind.CONJUGATE, generator),
        BraidMove(MoveKind.INSERT, generator, rng.randint(0, len(letters))),
    ]
    for p in range(len(letters) - 1):
        a, b = letters[p], letters[p + 1]
        if a == -b:
            moves.append(BraidMove(MoveKind.DELETE, 0, p))
        if abs(abs(a) - abs(b)) >= 2:
            moves.append(BraidMove(MoveKind.COMMUTE, 0, p))
        if p + 2 < len(letters) and letters[p + 2] == a and (a > 0) == (b > 0) \
                and abs(abs(a) - abs(b)) == 1:
            moves.append(BraidMove(MoveKind.BRAID_RELATION, 0, p))
    return moves


def random_moves(
    rng: random.Random, word: BraidWord, count: int = 3
) -> Tuple[BraidWord, List[BraidMove]]:
    """随机施加保持环形同痕的变换

    每一步在可施加的变换（共轭、插入、删除、辫关系、远交换）中均匀选取一个

    Returns:
        (新辫子词, 施加的变换)
    """
    moves = []
    if word.strand_count < 2:
        return word, moves
    for _ in range(count):
        move = rng.choice(_applicable_moves(rng, word))
        word = apply_move(word, move)
        moves.append(move)
    return word, moves
