"""Monomial rewriting on x_i and ybar_i, where ybar_i stands for the run x_i..x_{i+k}.

R1 at i: x_i x_{i+1} .. x_{i+k} -> ybar_i
R2 at i: x_i ybar_{i+1}         -> x_{i+k+1} ybar_i
"""

from __future__ import annotations

import os
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple

from .algebra import _compositions
from .errors import CheckFailed
from .report import CheckReport

R1, R2 = "R1", "R2"
STRATEGIES = ("leftmost-R1-first", "leftmost-R2-first", "rightmost", "random-seeded", "alternating")

Factors = Tuple[Tuple[int, int], ...]


def _freeze(d: Mapping[int, int]) -> Factors:
    for i, a in d.items():
        if a < 0:
            raise ValueError(f"negative exponent at index {i}")
    return tuple(sorted((int(i), int(a)) for i, a in d.items() if a))


@dataclass(frozen=True)
class XYMonomial:
    x: Factors
    y: Factors
    k: int = 1

    @classmethod
    def make(cls, x: Mapping[int, int] = (), y: Mapping[int, int] = (), k: int = 1) -> "XYMonomial":
        if k < 1:
            raise ValueError("k must be positive")
        return cls(_freeze(dict(x)), _freeze(dict(y)), k)

    @classmethod
    def from_indices(cls, xs: Iterable[int] = (), ys: Iterable[int] = (), k: int = 1) -> "XYMonomial":
        return cls.make(Counter(xs), Counter(ys), k)

    @property
    def xmap(self) -> Dict[int, int]:
        return dict(self.x)

    @property
    def ymap(self) -> Dict[int, int]:
        return dict(self.y)

    def deg1(self) -> int:
        return sum(a for _, a in self.x)

    def deg2(self) -> int:
        return sum(i * b for i, b in self.y)

    def has_y(self) -> bool:
        return bool(self.y)

    def grade(self) -> Tuple[int, int]:
        """(degree, weight) of the phi-image."""
        k = self.k
        n = sum(i * a for i, a in self.x) + sum(b * ((k + 1) * i + k * (k + 1) // 2) for i, b in self.y)
        l = self.deg1() + (k + 1) * sum(b for _, b in self.y)
        return n, l

    def __str__(self):
        parts = [f"x{i}" + (f"^{a}" if a > 1 else "") for i, a in self.x]
        parts += [f"ybar{i}" + (f"^{b}" if b > 1 else "") for i, b in self.y]
        return "*".join(parts) or "1"


class ReductionStep(NamedTuple):
    rule: str
    position: int


def phi(m: XYMonomial) -> Tuple[int, ...]:
    """Expand every ybar_i into x_i..x_{i+k}; a sorted index tuple."""
    out: List[int] = []
    for i, a in m.x:
        out.extend([i] * a)
    for i, b in m.y:
        for _ in range(b):
            out.extend(range(i, i + m.k + 1))
    return tuple(sorted(out))


def applicable_steps(m: XYMonomial) -> List[ReductionStep]:
    xs, ys, k = m.xmap, m.ymap, m.k
    steps = []
    for i in sorted(xs):
        if all(xs.get(i + t, 0) > 0 for t in range(k + 1)):
            steps.append(ReductionStep(R1, i))
        if ys.get(i + 1, 0) > 0:
            steps.append(ReductionStep(R2, i))
    return steps


def is_reduced(m: XYMonomial) -> bool:
    return not applicable_steps(m)


def apply_step(m: XYMonomial, step: ReductionStep) -> XYMonomial:
    xs, ys, k = Counter(m.xmap), Counter(m.ymap), m.k
    i = step.position
    if step.rule == R1:
        for t in range(k + 1):
            if xs[i + t] < 1:
                raise ValueError(f"R1 at {i} does not apply to {m}")
            xs[i + t] -= 1
        ys[i] += 1
    elif step.rule == R2:
        if xs[i] < 1 or ys[i + 1] < 1:
            raise ValueError(f"R2 at {i} does not apply to {m}")
        xs[i] -= 1
        ys[i + 1] -= 1
        xs[i + k + 1] += 1
        ys[i] += 1
    else:
        raise ValueError(f"unknown rule {step.rule!r}")
    return XYMonomial.make(xs, ys, k)


class _Chooser:
    def __init__(self, strategy: str, seed=0):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
        self.strategy = strategy
        self.rng = random.Random(seed)
        self.turn = 0

    def __call__(self, steps: List[ReductionStep]) -> ReductionStep:
        s = self.strategy
        if s == "rightmost":
            return max(steps, key=lambda st: (st.position, st.rule == R1))
        if s == "random-seeded":
            return self.rng.choice(steps)
        if s == "alternating":
            want = (R1, R2)[self.turn % 2]
            self.turn += 1
        else:
            want = R1 if s == "leftmost-R1-first" else R2
        pref = [st for st in steps if st.rule == want]
        return min(pref or steps, key=lambda st: st.position)


def _assert_decrease(before: XYMonomial, after: XYMonomial, step: ReductionStep):
    d1b, d1a = before.deg1(), after.deg1()
    if step.rule == R1:
        ok = d1a < d1b
    else:
        ok = d1a == d1b and after.deg2() == before.deg2() - 1
    if not ok:
        raise CheckFailed("termination metric", f"{step.rule}@{step.position} on {before} gave {after}")
    if phi(after) != phi(before):
        raise CheckFailed("phi preserved", f"{step.rule}@{step.position} on {before} gave {after}")


def normal_form(m: XYMonomial, strategy: str = "leftmost-R1-first", seed=0,
                trace: Optional[List[ReductionStep]] = None) -> XYMonomial:
    """Apply steps chosen by the strategy until none applies (asserting the metric per step)."""
    choose = _Chooser(strategy, seed)
    cur = m
    while True:
        steps = applicable_steps(cur)
        if not steps:
            return cur
        st = choose(steps)
        nxt = apply_step(cur, st)
        _assert_decrease(cur, nxt, st)
        if trace is not None:
            trace.append(st)
        cur = nxt


def all_normal_forms(m: XYMonomial) -> set:
    """Every reduced monomial reachable from m (full search of the reduction graph)."""
    seen, stack, out = {m}, [m], set()
    while stack:
        cur = stack.pop()
        steps = applicable_steps(cur)
        if not steps:
            out.add(cur)
        for st in steps:
            nxt = apply_step(cur, st)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return out


def random_monomial(rng: random.Random, k: int, max_weight: int, window: Tuple[int, int]) -> XYMonomial:
    """Random x/ybar monomial with phi-weight <= max_weight and indices in the window."""
    lo, hi = window
    budget = rng.randint(1, max_weight)
    xs, ys = Counter(), Counter()
    while budget > 0:
        if budget >= k + 1 and hi - k >= lo and rng.random() < 0.35:
            ys[rng.randint(lo, hi - k)] += 1
            budget -= k + 1
        else:
            xs[rng.randint(lo, hi)] += 1
            budget -= 1
    return XYMonomial.make(xs, ys, k)


def _check_one(m: XYMonomial, seed: int) -> Optional[dict]:
    forms = {s: normal_form(m, s, seed) for s in STRATEGIES}
    distinct = set(forms.values())
    if len(distinct) > 1 or not is_reduced(next(iter(distinct))):
        return {"monomial": str(m), "normal_forms": {s: str(v) for s, v in forms.items()}}
    return None


def _confluence_chunk(args):
    k, n, seed, max_weight, window = args
    rng = random.Random(seed)
    for _ in range(n):
        m = random_monomial(rng, k, max_weight, window)
        try:
            bad = _check_one(m, rng.randrange(2 ** 32))
        except CheckFailed as exc:
            return {"monomial": str(m), "error": str(exc)}
        if bad:
            return bad
    return None


def _chunks(samples: int, seed, parts: int):
    master = random.Random(seed)
    size, extra = divmod(samples, parts)
    return [(size + (1 if j < extra else 0), master.randrange(2 ** 63)) for j in range(parts)]


def confluence_test(k: int, samples: int = 10_000, seed=0, max_weight: int = 6,
                    index_window: Tuple[int, int] = (-8, 8), workers: Optional[int] = None) -> CheckReport:
    """Five strategies agree on random monomials; phi and the metric hold at every step.

    The seed stream is split into a fixed number of chunks, so results do not
    depend on the worker count.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    jobs = [(k, n, s, max_weight, tuple(index_window)) for n, s in _chunks(samples, seed, 16) if n]
    workers = workers or max(1, int(os.environ.get("FLATDEFORM_THREADS", "1") or 1))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_confluence_chunk, jobs))
    else:
        results = [_confluence_chunk(j) for j in jobs]
    name = f"confluence k={k}"
    for bad in results:
        if bad:
            raise CheckFailed(name, "normal forms diverge", **bad)
    return CheckReport(name, window={"samples": samples, "max_weight": max_weight,
                                     "index_window": list(index_window), "seed": seed})


def exhaustive_monomials(k: int, max_weight: int, window: Tuple[int, int]) -> Iterable[XYMonomial]:
    """All monomials with phi-weight <= max_weight, x-indices and ybar-indices in the window."""
    lo, hi = window
    idx = list(range(lo, hi + 1))
    for ny in range(0, max_weight // (k + 1) + 1):
        for ys in combinations_with_replacement(idx, ny):
            for nx in range(0, max_weight - ny * (k + 1) + 1):
                if nx + ny == 0:
                    continue
                for xs in combinations_with_replacement(idx, nx):
                    yield XYMonomial.from_indices(xs, ys, k)


def exhaustive_check(k: int, max_weight: int = 4, window: Tuple[int, int] = (-4, 4)) -> CheckReport:
    """Unique reduced form via a full reduction-graph search, plus agreement of all strategies."""
    name = f"exhaustive confluence k={k}"
    count = 0
    for m in exhaustive_monomials(k, max_weight, window):
        forms = all_normal_forms(m)
        if len(forms) != 1:
            raise CheckFailed(name, "several reduced forms", monomial=str(m),
                              normal_forms=sorted(str(f) for f in forms))
        bad = _check_one(m, count)
        if bad or next(iter(forms)) != normal_form(m):
            raise CheckFailed(name, "strategy disagrees with graph search", monomial=str(m))
        count += 1
    return CheckReport(name, window={"max_weight": max_weight, "index_window": list(window), "monomials": count})


def reduced_monomials(k: int, key, lo: int, hi: int) -> List[XYMonomial]:
    """Reduced monomials of the given grade whose phi-image lies in [lo, hi]."""
    n, l = key
    out = []
    ystart, yend = lo, hi - k
    for ny in range(0, l // (k + 1) + 1):
        lx = l - ny * (k + 1)
        for ys in combinations_with_replacement(range(ystart, yend + 1), ny):
            ydeg = sum((k + 1) * i + k * (k + 1) // 2 for i in ys)
            yset = set(ys)
            for xs in _compositions(lo, hi, lx, n - ydeg, False):
                xset = set(xs)
                if any(i + 1 in yset for i in xset):
                    continue
                if any(all(i + t in xset for t in range(1, k + 1)) for i in xset):
                    continue
                out.append(XYMonomial.from_indices(xs, ys, k))
    return out


def count_reduced(k: int, N: int, key, require_y: bool = False) -> int:
    return sum(1 for m in reduced_monomials(k, key, -N, N) if m.has_y() or not require_y)


def injectivity_check(k: int, max_weight: int = 4, window: Tuple[int, int] = (-4, 4)) -> CheckReport:
    """Distinct reduced monomials have distinct phi-images."""
    name = f"phi injective on reduced k={k}"
    lo, hi = window
    seen: Dict[Tuple[int, ...], XYMonomial] = {}
    for l in range(1, max_weight + 1):
        for n in range(lo * l, hi * l + 1):
            for m in reduced_monomials(k, (n, l), lo, hi):
                img = phi(m)
                if img in seen:
                    raise CheckFailed(name, "two reduced monomials share an image",
                                      first=str(seen[img]), second=str(m), image=list(img))
                seen[img] = m
    return CheckReport(name, window={"max_weight": max_weight, "index_window": list(window),
                                     "reduced": len(seen)})
