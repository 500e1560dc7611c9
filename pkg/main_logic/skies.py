"""2+1 维 Minkowski 时空中的事件、天空与度规判据

天空: θ ↦ (q(θ), θ)，q(θ) = p - t·u(θ)，u(θ) = (cos θ, sin θ)。
投影: 沿单位向量 e 看 e·q 的大小决定股线位置（自左向右递增），
e⊥ = (-e_y, e_x) 方向取值大的股线在上。θ 自 0 递增，即辫子自下而上。
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from main_logic.causality import HomologyEngine, Route, Verdict, decide
from main_logic.errors import DegenerateInputError, DiagramParseError, GenericityError, IntegrityError
from main_logic.linkdiag import BraidWord, braid_closure

logger = logging.getLogger(__name__)

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
ROTATION_ATTEMPTS = 32
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Event:
    """时空事件 (p, t)，光速为 1"""

    p: Tuple[float, float]
    t: float

    def __post_init__(self):
        p = (float(self.p[0]), float(self.p[1]))
        t = float(self.t)
        if not np.all(np.isfinite(p + (t,))):
            raise DegenerateInputError(f"事件坐标必须有限: p={p}, t={t}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "t", t)

    def translated(self, dp: Tuple[float, float] = (0.0, 0.0), dt: float = 0.0) -> "Event":
        return Event((self.p[0] + dp[0], self.p[1] + dp[1]), self.t + dt)

    def __str__(self) -> str:
        return f"{self.p[0]:g},{self.p[1]:g},{self.t:g}"


@dataclass(frozen=True)
class SkyCurve:
    """事件的天空：经过该事件的所有光线与 t = 0 截面的交点及方向"""

    event: Event

    @property
    def radius(self) -> float:
        return abs(self.event.t)

    def evaluate(self, theta) -> np.ndarray:
        """q(θ)，θ 可以是标量或数组，结果最后一维为 2"""
        theta = np.asarray(theta, dtype=float)
        direction = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return np.asarray(self.event.p) - self.event.t * direction

    def sample(self, count: int = 64) -> np.ndarray:
        """均匀采样，返回 (count, 3) 的 (q_x, q_y, θ)"""
        theta = np.linspace(0.0, TWO_PI, count, endpoint=False)
        return np.column_stack([self.evaluate(theta), theta])


@dataclass(frozen=True)
class CausalClass:
    """度规判据的结果

    Attributes:
        kind: timelike, null 或 spacelike
        margin: | |Δp| - |Δt| |
    """

    kind: str
    margin: float

    @property
    def related(self) -> bool:
        return self.kind != "spacelike"


@dataclass(frozen=True)
class IntersectionDetected:
    """两条天空相交，θ 为交点"""

    theta: float


@dataclass(frozen=True)
class CausalReport:
    """端到端结果：同调判定、度规判据和所用的辫子词"""

    x: Event
    y: Event
    verdict: Verdict
    oracle: CausalClass
    word: Optional[BraidWord] = None

    @property
    def agrees(self) -> bool:
        return self.verdict.related == self.oracle.related

    def to_dict(self) -> dict:
        result = self.verdict.to_dict()
        result["events"] = [str(self.x), str(self.y)]
        result["oracle"] = {"class": self.oracle.kind, "margin": self.oracle.margin}
        result["word"] = None if self.word is None else list(self.word.letters)
        return result


def sky(event: Event) -> SkyCurve:
    return SkyCurve(event)


def _differences(x: Event, y: Event) -> Tuple[np.ndarray, float, float, float]:
    dp = np.asarray(y.p) - np.asarray(x.p)
    dt = y.t - x.t
    dp_norm = float(np.hypot(dp[0], dp[1]))
    scale = abs(dt) + dp_norm
    if scale == 0.0:
        raise DegenerateInputError(f"两个事件相同: {x}")
    return dp, dt, dp_norm, scale


def classify_metric(x: Event, y: Event, epsilon: float = 1e-9) -> CausalClass:
    """平直度规下的因果类型

    Args:
        x, y: 两个事件
        epsilon: 类光边界的相对容差（相对 |Δt| + |Δp|）

    Raises:
        DegenerateInputError: 两个事件相同
    """
    _, dt, dp_norm, scale = _differences(x, y)
    margin = abs(dp_norm - abs(dt))
    if margin <= epsilon * scale:
        kind = "null"
    elif dp_norm < abs(dt):
        kind = "timelike"
    else:
        kind = "spacelike"
    return CausalClass(kind, margin)


def sky_intersection(x: Event, y: Event, epsilon: float = 1e-9) -> Optional[float]:
    """两条天空的交点 θ，不相交时返回 None

    交点满足 Δp = Δt·u(θ)，即 |Δp| = |Δt|（在容差内）
    """
    dp, dt, dp_norm, scale = _differences(x, y)
    if abs(dp_norm - abs(dt)) > epsilon * scale:
        return None
    theta = math.atan2(dp[1] / dt, dp[0] / dt)
    return theta % TWO_PI


def _rotate(direction: Tuple[float, float], angle: float) -> Tuple[float, float]:
    c, s = math.cos(angle), math.sin(angle)
    return (c * direction[0] - s * direction[1], s * direction[0] + c * direction[1])


def _project(
    dp: np.ndarray, dt: float, scale: float, direction: Tuple[float, float], delta: float
) -> Optional[Tuple[int, ...]]:
    """在方向 e 下求交叉并定出字母；不在一般位置时返回 None"""
    e = np.asarray(direction)
    e_perp = np.array([-e[1], e[0]])
    c = float(e @ dp)
    if abs(dt) <= delta * scale:
        # 两条天空的 e·q 只差常数 c
        return None if abs(c) <= delta * scale else ()
    discriminant = dt * dt - c * c
    if abs(discriminant) ** 0.5 < delta * scale:
        return None
    if discriminant < 0:
        return ()
    phi = math.atan2(e[1], e[0])
    half = math.acos(c / dt)
    crossings = sorted(((phi + half) % TWO_PI, (phi - half) % TWO_PI))
    if crossings[1] - crossings[0] < delta:
        return None
    letters = []
    for theta in crossings:
        u = np.array([math.cos(theta), math.sin(theta)])
        du = np.array([-math.sin(theta), math.cos(theta)])
        slope = -dt * float(e @ du)
        height = float(e_perp @ (dp - dt * u))
        if abs(height) <= delta * scale:
            return None
        letters.append(1 if slope * height > 0 else -1)
    return tuple(letters)


def skies_to_braid(
    x: Event,
    y: Event,
    direction: Tuple[float, float] = (1.0, 0.0),
    epsilon: float = 1e-9,
    delta: float = 1e-9,
) -> Union[BraidWord, IntersectionDetected]:
    """把两条天空投影成 2 股辫子

    Args:
        x, y: 两个事件
        direction: 投影方向 e（会被单位化）
        epsilon: 天空相交的相对容差
        delta: 切触判据阈值

    Returns:
        2 股辫子词，或天空相交时的 IntersectionDetected

    Raises:
        DegenerateInputError: 事件相同或方向为零
        GenericityError: 旋转所有方向后仍不在一般位置
    """
    dp, dt, dp_norm, scale = _differences(x, y)
    theta = sky_intersection(x, y, epsilon)
    if theta is not None:
        logger.info("天空相交于 θ=%.6f", theta)
        return IntersectionDetected(theta)

    norm = math.hypot(direction[0], direction[1])
    if norm == 0.0:
        raise DegenerateInputError("投影方向不能为零向量")
    base = (direction[0] / norm, direction[1] / norm)
    for attempt in range(ROTATION_ATTEMPTS + 1):
        e = _rotate(base, attempt * GOLDEN_ANGLE)
        letters = _project(dp, dt, scale, e, delta)
        if letters is None:
            logger.info("投影方向 (%.4f, %.4f) 不在一般位置，旋转黄金角", *e)
            continue
        if len(letters) not in (0, 2):
            raise IntegrityError(f"天空对的辫子长度应为 0 或 2，得到 {len(letters)}")
        return BraidWord(2, letters)
    raise GenericityError(
        f"旋转 {ROTATION_ATTEMPTS} 次后仍不在一般位置", abs(dp_norm - abs(dt))
    )


def end_to_end(
    x: Event,
    y: Event,
    route: str = "akh",
    direction: Tuple[float, float] = (1.0, 0.0),
    epsilon: float = 1e-9,
    delta: float = 1e-9,
    engine: Optional[HomologyEngine] = None,
) -> CausalReport:
    """事件对 → 辫子 → 同调判定，并附上度规判据"""
    oracle = classify_metric(x, y, epsilon)
    projected = skies_to_braid(x, y, direction, epsilon, delta)
    if isinstance(projected, IntersectionDetected):
        verdict = Verdict(True, Route.SKY_INTERSECTION, witness_theta=projected.theta)
        return CausalReport(x, y, verdict, oracle)
    verdict = decide(braid_closure(projected), route, engine)
    if verdict.related != oracle.related:
        logger.warning("同调判定与度规判据不一致: %s / %s", x, y)
    return CausalReport(x, y, verdict, oracle, projected)


def parse_event(text: str) -> Event:
    """解析 "px,py,t"

    Raises:
        DiagramParseError: 字段数不为 3 或不是数字
    """
    fields = [f.strip() for f in text.split(",")]
    if len(fields) != 3:
        raise DiagramParseError(f"事件需要 3 个坐标 px,py,t: {text!r}", token=text)
    try:
        px, py, t = (float(f) for f in fields)
    except ValueError:
        raise DiagramParseError(f"事件坐标必须是数字: {text!r}", token=text) from None
    return Event((px, py), t)


def parse_event_pair(text: str) -> Tuple[Event, Event]:
    """解析事件对 px,py,t;qx,qy,s"""
    parts = text.split(";")
    if len(parts) != 2:
        raise DiagramParseError(f"事件对需要用 ';' 分隔两个事件: {text!r}", token=text)
    return parse_event(parts[0]), parse_event(parts[1])


def random_event_pair(
    rng: np.random.Generator, min_margin: float = 0.1, extent: float = 2.0
) -> Tuple[Event, Event]:
    """随机事件对，保证 | |Δp| - |Δt| | > min_margin"""
    while True:
        values = rng.uniform(-extent, extent, size=6)
        x = Event((values[0], values[1]), values[2])
        y = Event((values[3], values[4]), values[5])
        _, dt, dp_norm, _ = _differences(x, y)
        if abs(dp_norm - abs(dt)) > min_margin:
            return x, y
