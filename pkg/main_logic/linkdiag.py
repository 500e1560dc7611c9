"""链环图：辫子词、环形（辫子闭包）图与平面 PD 图

文本格式
--------
辫子词: 以空白分隔的非零整数，例如 ``"1 1 -2"``；g > 0 表示 σ_g，g < 0 表示 σ_|g| 的逆。
PD 码: ``X(a,b,c,d)`` 从入射下穿弧开始逆时针列出四条弧；
``Xp(...)`` / ``Xm(...)`` 额外显式给出交叉符号；``O(a)`` 为无交叉的圆周。
各项之间可用空白或逗号分隔。

约定
----
- σ_i（正字母）是正交叉；辫子自下而上，位置自左向右编号。
- 交叉 (a,b,c,d) 中下穿弧 a→c；上穿弧 d→b 时为正交叉，b→d 时为负交叉。
- 经线 μ 逆时针环绕所有股线，下方一段从上方穿过，上方一段从下方穿过，因此 2m 个交叉全为正。
"""

import hashlib
import itertools
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from main_logic.errors import DiagramParseError, MoveError

logger = logging.getLogger(__name__)

# 交叉的四个槽位
UNDER_IN, SLOT_B, UNDER_OUT, SLOT_D = 0, 1, 2, 3

MODEL_NAMES = ("U2", "P3", "unknot", "hopf_positive", "hopf_negative")


@dataclass(frozen=True)
class BraidWord:
    """辫子词

    Attributes:
        strand_count: 股数
        letters: 带符号的生成元下标序列
    """

    strand_count: int
    letters: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.strand_count < 1:
            raise DiagramParseError(f"股数必须为正整数，当前为 {self.strand_count}")
        object.__setattr__(self, "letters", tuple(int(g) for g in self.letters))
        for g in self.letters:
            if g == 0 or abs(g) >= self.strand_count:
                raise DiagramParseError(
                    f"生成元 {g} 不在 [1, {self.strand_count - 1}] 范围内", token=str(g)
                )

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def writhe(self) -> int:
        return sum(1 if g > 0 else -1 for g in self.letters)


@dataclass(frozen=True)
class AnnularDiagram:
    """环形链环图，仅以辫子闭包形式表示

    Attributes:
        presentation: 辫子词，链环是它绕轴的闭包
        component_windings: 每个分量绕轴的圈数
        components: 每个分量经过的起始位置（按最小位置排序）
    """

    presentation: BraidWord
    component_windings: Tuple[int, ...]
    components: Tuple[Tuple[int, ...], ...]

    @property
    def strand_count(self) -> int:
        return self.presentation.strand_count

    @property
    def component_count(self) -> int:
        return len(self.component_windings)

    @property
    def crossing_count(self) -> int:
        return len(self.presentation)


@dataclass(frozen=True)
class Crossing:
    """PD 交叉

    Attributes:
        arcs: 从入射下穿弧开始逆时针排列的四条弧
        sign: +1 表示上穿弧 d→b，-1 表示 b→d
    """

    arcs: Tuple[int, int, int, int]
    sign: int

    def is_incoming(self, slot: int) -> bool:
        """槽位上的弧是否指向本交叉"""
        if slot == UNDER_IN:
            return True
        if slot == UNDER_OUT:
            return False
        if slot == SLOT_D:
            return self.sign > 0
        return self.sign < 0

    def exit_slot(self, slot: int) -> int:
        """沿同一股线穿过交叉后的槽位"""
        return (slot + 2) % 4

    def mirrored(self) -> "Crossing":
        """交换上下穿后的交叉"""
        a, b, c, d = self.arcs
        if self.sign > 0:
            return Crossing((d, a, b, c), -1)
        return Crossing((b, c, d, a), 1)


@dataclass(frozen=True)
class PlanarDiagram:
    """平面 PD 图

    Attributes:
        crossings: 交叉序列
        loops: 无交叉圆周的弧标号
        seam_arcs: 经过辫子闭包缝的弧（仅由环形图得到时非空，用于判断本质圆）
    """

    crossings: Tuple[Crossing, ...] = ()
    loops: Tuple[int, ...] = ()
    seam_arcs: FrozenSet[int] = field(default=frozenset(), compare=False)
    component_count: int = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "crossings", tuple(self.crossings))
        object.__setattr__(self, "loops", tuple(self.loops))
        object.__setattr__(self, "seam_arcs", frozenset(self.seam_arcs))
        _check_incidence(self.crossings, self.loops)
        _check_orientation(self.crossings)
        _check_planarity(self.crossings)
        object.__setattr__(self, "component_count", len(self.components()))

    @property
    def n_plus(self) -> int:
        return sum(1 for x in self.crossings if x.sign > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for x in self.crossings if x.sign < 0)

    @property
    def writhe(self) -> int:
        return self.n_plus - self.n_minus

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)

    def arcs(self) -> List[int]:
        """所有弧标号（升序）"""
        labels = {arc for x in self.crossings for arc in x.arcs}
        labels.update(self.loops)
        return sorted(labels)

    @property
    def arc_orientations(self) -> Dict[int, Tuple[Tuple[int, int], Tuple[int, int]]]:
        """每条弧的 (尾端槽位, 头端槽位)，槽位为 (交叉下标, 槽号)；圆周不出现"""
        tails: Dict[int, Tuple[int, int]] = {}
        heads: Dict[int, Tuple[int, int]] = {}
        for k, x in enumerate(self.crossings):
            for slot, arc in enumerate(x.arcs):
                if x.is_incoming(slot):
                    heads[arc] = (k, slot)
                else:
                    tails[arc] = (k, slot)
        return {arc: (tails[arc], heads[arc]) for arc in heads}

    def next_arc(self, arc: int) -> int:
        """沿定向走到的下一条弧"""
        k, slot = self.arc_orientations[arc][1]
        x = self.crossings[k]
        return x.arcs[x.exit_slot(slot)]

    def components(self) -> List[Tuple[int, ...]]:
        """按定向遍历得到的各分量弧序列"""
        orientations = self.arc_orientations
        seen = set()
        result = []
        for arc in sorted(orientations):
            if arc in seen:
                continue
            walk = []
            current = arc
            while current not in seen:
                seen.add(current)
                walk.append(current)
                k, slot = orientations[current][1]
                x = self.crossings[k]
                current = x.arcs[x.exit_slot(slot)]
            result.append(tuple(walk))
        result.extend((loop,) for loop in self.loops)
        return result


MoveTarget = Union[AnnularDiagram, PlanarDiagram]


# ---------------------------------------------------------------- 校验


def _check_incidence(crossings: Sequence[Crossing], loops: Sequence[int]) -> None:
    counts: Dict[int, int] = {}
    for x in crossings:
        if len(x.arcs) != 4:
            raise DiagramParseError(f"交叉必须有 4 条弧: {x.arcs}")
        if x.sign not in (1, -1):
            raise DiagramParseError(f"交叉符号必须为 ±1: {x.sign}")
        for arc in x.arcs:
            counts[arc] = counts.get(arc, 0) + 1
    for arc, count in sorted(counts.items()):
        if count != 2:
            raise DiagramParseError(f"弧 {arc} 出现 {count} 次，应为 2 次", token=str(arc))
    for loop in loops:
        if loop in counts:
            raise DiagramParseError(f"圆周 O({loop}) 与交叉中的弧重名", token=str(loop))
    if len(set(loops)) != len(loops):
        raise DiagramParseError("圆周标号重复")


def _check_orientation(crossings: Sequence[Crossing]) -> None:
    ins: Dict[int, int] = {}
    for x in crossings:
        for slot, arc in enumerate(x.arcs):
            if x.is_incoming(slot):
                ins[arc] = ins.get(arc, 0) + 1
    for x in crossings:
        for arc in x.arcs:
            if ins.get(arc, 0) != 1:
                raise DiagramParseError(f"弧 {arc} 的定向不一致", token=str(arc))


def _check_planarity(crossings: Sequence[Crossing]) -> None:
    """欧拉公式检查：每个连通块 V - E + F = 2"""
    if not crossings:
        return
    occurrences: Dict[int, List[Tuple[int, int]]] = {}
    for k, x in enumerate(crossings):
        for slot, arc in enumerate(x.arcs):
            occurrences.setdefault(arc, []).append((k, slot))
    partner = {}
    for first, second in occurrences.values():
        partner[first] = second
        partner[second] = first

    faces = 0
    visited = set()
    for start in partner:
        if start in visited:
            continue
        faces += 1
        dart = start
        while dart not in visited:
            visited.add(dart)
            k, slot = partner[dart]
            dart = (k, (slot + 1) % 4)

    parent = list(range(len(crossings)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for first, second in occurrences.values():
        parent[find(first[0])] = find(second[0])
    blocks = len({find(i) for i in range(len(crossings))})

    vertices = len(crossings)
    edges = len(occurrences)
    if vertices - edges + faces != 2 * blocks:
        raise DiagramParseError(
            f"交叉关联不是平面图: V - E + F = {vertices - edges + faces}，应为 {2 * blocks}"
        )


# ---------------------------------------------------------------- 辫子


def parse_braid(text: str, strands: int) -> BraidWord:
    """解析辫子词

    Args:
        text: 以空白分隔的带符号整数
        strands: 股数

    Returns:
        辫子词

    Raises:
        DiagramParseError: 出现非整数、零或越界生成元
    """
    letters = []
    for token in text.split():
        try:
            g = int(token)
        except ValueError:
            raise DiagramParseError(f"无法解析的辫子字母: {token!r}", token=token) from None
        if g == 0:
            raise DiagramParseError("辫子字母不能为 0", token=token)
        if abs(g) >= strands:
            raise DiagramParseError(
                f"辫子字母 {token} 超出 {strands} 股辫子的生成元范围", token=token
            )
        letters.append(g)
    return BraidWord(strands, tuple(letters))


def serialize_braid(word: BraidWord) -> str:
    return " ".join(str(g) for g in word.letters)


def braid_permutation(word: BraidWord) -> Tuple[int, ...]:
    """辫子的位置置换

    Returns:
        perm[s] 为从位置 s 出发的股线最终所在的位置
    """
    at = list(range(word.strand_count))
    for g in word.letters:
        a = abs(g) - 1
        at[a], at[a + 1] = at[a + 1], at[a]
    perm = [0] * word.strand_count
    for position, strand in enumerate(at):
        perm[strand] = position
    return tuple(perm)


def braid_closure(word: BraidWord) -> AnnularDiagram:
    """辫子闭包

    分量由置换的轮换给出，每个分量的圈数等于轮换长度

    Args:
        word: 辫子词

    Returns:
        环形链环图
    """
    perm = braid_permutation(word)
    seen = set()
    components = []
    for start in range(word.strand_count):
        if start in seen:
            continue
        cycle = []
        position = start
        while position not in seen:
            seen.add(position)
            cycle.append(position)
            position = perm[position]
        components.append(tuple(cycle))
    windings = tuple(len(c) for c in components)
    return AnnularDiagram(word, windings, tuple(components))


def _flip(g: int) -> int:
    return -g


def free_reduce(letters: Sequence[int]) -> Tuple[int, ...]:
    """删去所有相邻的 σσ⁻¹"""
    stack: List[int] = []
    for g in letters:
        if stack and stack[-1] == -g:
            stack.pop()
        else:
            stack.append(g)
    return tuple(stack)


class MoveKind(Enum):
    """辫子词上保持环形同痕的变换"""

    CONJUGATE = "conjugate"
    INSERT = "insert"
    DELETE = "delete"
    BRAID_RELATION = "braid_relation"
    COMMUTE = "commute"


@dataclass(frozen=True)
class BraidMove:
    """一次变换

    Attributes:
        kind: 变换类型
        generator: 共轭或插入用的带符号生成元
        position: 作用位置
    """

    kind: MoveKind
    generator: int = 0
    position: int = 0


def apply_move(word: BraidWord, move: BraidMove) -> BraidWord:
    """对辫子词施加一次变换，闭包在环形中同痕

    Args:
        word: 原辫子词
        move: 变换

    Returns:
        新的辫子词

    Raises:
        MoveError: 位置或生成元非法
    """
    letters = list(word.letters)
    m = word.strand_count
    kind = move.kind

    if kind in (MoveKind.CONJUGATE, MoveKind.INSERT):
        g = move.generator
        if g == 0 or abs(g) >= m:
            raise MoveError(f"生成元 {g} 不属于 {m} 股辫群")

    if kind is MoveKind.CONJUGATE:
        return BraidWord(m, free_reduce([move.generator] + letters + [_flip(move.generator)]))

    p = move.position
    if kind is MoveKind.INSERT:
        if not 0 <= p <= len(letters):
            raise MoveError(f"插入位置 {p} 越界（长度 {len(letters)}）")
        letters[p:p] = [move.generator, _flip(move.generator)]
        return BraidWord(m, letters)

    if kind is MoveKind.DELETE:
        if not 0 <= p < len(letters) - 1 or letters[p] != -letters[p + 1]:
            raise MoveError(f"位置 {p} 处没有可删除的 σσ⁻¹")
        del letters[p:p + 2]
        return BraidWord(m, letters)

    if kind is MoveKind.BRAID_RELATION:
        if not 0 <= p <= len(letters) - 3:
            raise MoveError(f"辫关系位置 {p} 越界（长度 {len(letters)}）")
        a, b, c = letters[p:p + 3]
        if a != c or (a > 0) != (b > 0) or abs(abs(a) - abs(b)) != 1:
            raise MoveError(f"位置 {p} 处不是 σ_iσ_jσ_i 形式: {a} {b} {c}")
        letters[p:p + 3] = [b, a, b]
        return BraidWord(m, letters)

    if kind is MoveKind.COMMUTE:
        if not 0 <= p <= len(letters) - 2:
            raise MoveError(f"交换位置 {p} 越界（长度 {len(letters)}）")
        a, b = letters[p:p + 2]
        if abs(abs(a) - abs(b)) < 2:
            raise MoveError(f"生成元 {a} 与 {b} 不可交换")
        letters[p], letters[p + 1] = b, a
        return BraidWord(m, letters)

    raise MoveError(f"未知变换: {kind}")


# ---------------------------------------------------------------- 平面化


def _sweep(word: BraidWord, meridian: bool) -> PlanarDiagram:
    """自下而上扫描辫子，生成 PD 交叉；可选在闭包缝处加入经线"""
    m = word.strand_count
    counter = itertools.count(1)
    start = [next(counter) for _ in range(m)]
    cur = list(start)
    raw: List[Tuple[Tuple[int, int, int, int], int]] = []

    for g in word.letters:
        a = abs(g) - 1
        b = a + 1
        new_left, new_right = next(counter), next(counter)
        if g > 0:
            # 左股从上方穿到右边
            raw.append(((cur[b], new_right, new_left, cur[a]), 1))
        else:
            raw.append(((cur[a], cur[b], new_right, new_left), -1))
        cur[a], cur[b] = new_left, new_right

    mer: List[int] = []
    if meridian:
        mer = [next(counter) for _ in range(2 * m)]
        # 下方一段自西向东，从上方穿过
        for j in range(m):
            s_out = next(counter)
            raw.append(((cur[j], mer[j + 1], s_out, mer[j]), 1))
            cur[j] = s_out
        # 上方一段自东向西，从下方穿过
        for j in reversed(range(m)):
            idx = m + (m - 1 - j)
            s_out = next(counter)
            raw.append(((mer[idx], s_out, mer[(idx + 1) % (2 * m)], cur[j]), 1))
            cur[j] = s_out

    rename = {cur[j]: start[j] for j in range(m) if cur[j] != start[j]}
    crossings = [
        (tuple(rename.get(arc, arc) for arc in arcs), sign) for arcs, sign in raw
    ]
    loops = [start[j] for j in range(m) if cur[j] == start[j]]

    # 按分量（最小起始位置优先）遍历，重新稠密编号
    closure = braid_closure(word)
    starts = [start[cycle[0]] for cycle in closure.components]
    if meridian:
        starts.append(mer[0])
    return _relabel(crossings, loops, set(start), starts)


def _relabel(
    crossings: List[Tuple[Tuple[int, ...], int]],
    loops: List[int],
    seam: set,
    starts: List[int],
) -> PlanarDiagram:
    heads: Dict[int, Tuple[int, int]] = {}
    for k, (arcs, sign) in enumerate(crossings):
        candidate = Crossing(arcs, sign)
        for slot, arc in enumerate(arcs):
            if candidate.is_incoming(slot):
                heads[arc] = (k, slot)

    mapping: Dict[int, int] = {}
    label = itertools.count(1)
    for arc in starts:
        current = arc
        while current not in mapping:
            mapping[current] = next(label)
            if current not in heads:
                break
            k, slot = heads[current]
            current = crossings[k][0][(slot + 2) % 4]

    return PlanarDiagram(
        tuple(Crossing(tuple(mapping[a] for a in arcs), sign) for arcs, sign in crossings),
        tuple(sorted(mapping[loop] for loop in loops)),
        frozenset(mapping[arc] for arc in seam),
    )


def annular_to_planar(diagram: AnnularDiagram) -> PlanarDiagram:
    """忘掉轴，得到闭辫子的平面图（保留闭包缝上的弧）"""
    return _sweep(diagram.presentation, meridian=False)


def augment_with_meridian(diagram: AnnularDiagram) -> PlanarDiagram:
    """在闭包缝处加入实心环的经线 μ

    Args:
        diagram: m 股的环形图

    Returns:
        多出一个分量、多出 2m 个交叉的平面图
    """
    return _sweep(diagram.presentation, meridian=True)


def mirror(diagram: PlanarDiagram) -> PlanarDiagram:
    """镜像：每个交叉交换上下穿"""
    return PlanarDiagram(
        tuple(x.mirrored() for x in diagram.crossings), diagram.loops, diagram.seam_arcs
    )


# ---------------------------------------------------------------- PD 文本

_PD_TOKEN = re.compile(r"\s*(Xp|Xm|X|O)\s*\(([^()]*)\)\s*,?")


def _infer_signs(
    arcs_list: List[Tuple[int, int, int, int]], signs: List[Optional[int]]
) -> List[bool]:
    """沿弧追踪推断上穿方向

    Args:
        arcs_list: 各交叉的弧
        signs: 已知符号（None 表示未知），原地补全

    Returns:
        每个交叉的符号是否由下穿方向唯一确定
    """
    occurrences: Dict[int, List[Tuple[int, int]]] = {}
    for k, arcs in enumerate(arcs_list):
        for slot, arc in enumerate(arcs):
            occurrences.setdefault(arc, []).append((k, slot))
    for arc, occ in occurrences.items():
        if len(occ) != 2:
            raise DiagramParseError(f"弧 {arc} 出现 {len(occ)} 次，应为 2 次", token=str(arc))

    def direction(k: int, slot: int) -> Optional[bool]:
        if slot == UNDER_IN:
            return True
        if slot == UNDER_OUT:
            return False
        if signs[k] is None:
            return None
        return (slot == SLOT_D) == (signs[k] > 0)

    def propagate() -> None:
        changed = True
        while changed:
            changed = False
            for arc, (first, second) in occurrences.items():
                d1 = direction(*first)
                d2 = direction(*second)
                if d1 is not None and d2 is not None:
                    if d1 == d2:
                        raise DiagramParseError(f"弧 {arc} 的定向不一致", token=str(arc))
                    continue
                if d1 is None and d2 is None:
                    continue
                known, (k, slot) = (d1, second) if d1 is not None else (d2, first)
                # 另一端必须方向相反
                incoming = not known
                signs[k] = 1 if incoming == (slot == SLOT_D) else -1
                changed = True

    propagate()
    forced = [s is not None for s in signs]

    while any(s is None for s in signs):
        # 全部上穿的分量：从最小标号的弧出发，使下一条弧标号尽量小
        pending = sorted(
            arc
            for k, arcs in enumerate(arcs_list)
            if signs[k] is None
            for slot, arc in enumerate(arcs)
            if slot in (SLOT_B, SLOT_D)
        )
        arc = pending[0]
        first, second = sorted(occurrences[arc])

        def following(end):
            k, slot = end
            return arcs_list[k][(slot + 2) % 4]

        head = first if following(first) <= following(second) else second
        k, slot = head
        signs[k] = 1 if slot == SLOT_D else -1
        logger.debug("弧 %d 所在分量无下穿，按标号约定定向", arc)
        propagate()
    return forced


def parse_pd(text: str) -> PlanarDiagram:
    """解析 PD 码

    Args:
        text: 例如 ``"X(1,3,2,4) X(3,1,4,2)"`` 或 ``"O(1)"``

    Returns:
        校验过的平面图

    Raises:
        DiagramParseError: 语法错误、弧出现次数不为 2、定向不一致或非平面
    """
    arcs_list: List[Tuple[int, int, int, int]] = []
    signs: List[Optional[int]] = []
    loops: List[int] = []
    position = 0
    stripped = text.strip()
    while position < len(stripped):
        match = _PD_TOKEN.match(stripped, position)
        if not match:
            bad = stripped[position:].split()[0]
            raise DiagramParseError(f"无法解析的 PD 片段: {bad!r}", token=bad)
        kind, body = match.group(1), match.group(2)
        try:
            values = [int(v) for v in body.split(",") if v.strip()]
        except ValueError:
            raise DiagramParseError(f"弧标号必须为整数: {match.group(0).strip()!r}",
                                    token=match.group(0).strip()) from None
        if kind == "O":
            if len(values) != 1:
                raise DiagramParseError(f"O(...) 需要 1 个弧标号: {body!r}", token=body)
            loops.append(values[0])
        else:
            if len(values) != 4:
                raise DiagramParseError(f"{kind}(...) 需要 4 个弧标号: {body!r}", token=body)
            arcs_list.append(tuple(values))
            signs.append({"Xp": 1, "Xm": -1}.get(kind))
        position = match.end()

    _infer_signs(arcs_list, signs)
    crossings = tuple(Crossing(arcs, sign) for arcs, sign in zip(arcs_list, signs))
    return PlanarDiagram(crossings, tuple(loops))


def serialize_pd(diagram: PlanarDiagram) -> str:
    """输出 PD 码；只有下穿方向推不出符号的交叉才写成 Xp/Xm"""
    arcs_list = [x.arcs for x in diagram.crossings]
    forced = _infer_signs(arcs_list, [None] * len(arcs_list))
    parts = []
    for x, is_forced in zip(diagram.crossings, forced):
        head = "X" if is_forced else ("Xp" if x.sign > 0 else "Xm")
        parts.append(f"{head}({','.join(str(a) for a in x.arcs)})")
    parts.extend(f"O({loop})" for loop in diagram.loops)
    return " ".join(parts)


def diagram_hash(diagram: MoveTarget) -> str:
    """图的稳定哈希，用作结果缓存键的一部分"""
    if isinstance(diagram, AnnularDiagram):
        text = f"annular:{diagram.strand_count}:{serialize_braid(diagram.presentation)}"
    else:
        text = f"pd:{serialize_pd(diagram)}"
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------- 模型链环


def model_link(name: str) -> MoveTarget:
    """参照链环

    Args:
        name: U2, P3, unknot, hopf_positive, hopf_negative 之一

    Returns:
        U2 为环形图，其余为平面图

    Raises:
        DiagramParseError: 未知名称
    """
    if name == "U2":
        return braid_closure(BraidWord(2, ()))
    if name == "P3":
        return augment_with_meridian(braid_closure(BraidWord(2, ())))
    if name == "unknot":
        return PlanarDiagram((), (1,))
    if name == "hopf_positive":
        return annular_to_planar(braid_closure(BraidWord(2, (1, 1))))
    if name == "hopf_negative":
        return annular_to_planar(braid_closure(BraidWord(2, (-1, -1))))
    raise DiagramParseError(f"未知的模型链环: {name}", token=name)
