"""Boundedness verdicts for T_{a,b,c} and S_{a,b,c} between weighted mixed-norm spaces.

Each case tag names one parameter regime; the conditions attached to it are
evaluated index by index and reported with signed margins (positive = satisfied
with room, for equalities the signed defect).

Case tags:

    interior                1 < p_- <= p_+ <= q_- < inf, alpha != beta
    endpoint-p1             p = (1, p2), p2 > 1
    endpoint-p2             p = (p1, 1), p1 > 1
    endpoint-both           p = (1, 1)
    endpoint-p1-equal       endpoint-p1 with alpha_1 = b_1
    endpoint-p2-equal       endpoint-p2 with alpha_2 = b_2
    endpoint-both-equal     endpoint-both with alpha_i = b_i for both i
    diagonal-1              p1 = q1, alpha_1 = beta_1, p2 < q2
    diagonal-2              p2 = q2, alpha_2 = beta_2, p1 < q1
    diagonal-both           p = q, alpha = beta
    sup-1                   p1 = q1 = inf, index 2 finite
    sup-2                   p2 = q2 = inf, index 1 finite
    sup-both                p = q = (inf, inf)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import FRParams, Setting

EQ_TOL = 1e-12

BOUNDED = "Bounded"
UNBOUNDED = "Unbounded"
BOUNDARY_EQUALITY = "BoundaryEquality"
UNSUPPORTED = "Unsupported"

STRICT, NONSTRICT, EQUALITY = "strict", "nonstrict", "equality"

FINITE_CASES = ("interior", "endpoint-p1", "endpoint-p2", "endpoint-both",
                "diagonal-1", "diagonal-2", "diagonal-both")
# the endpoint cases with alpha_i = b_i only come with necessary conditions
EQUAL_WEIGHT_CASES = ("endpoint-p1-equal", "endpoint-p2-equal", "endpoint-both-equal")
SUP_CASES = ("sup-1", "sup-2", "sup-both")


@dataclass(frozen=True)
class Condition:
    name: str
    relation: str
    margin: float
    passed: bool
    kind: str
    index: int = 0
    role: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "relation": self.relation, "margin": self.margin,
                "pass": self.passed}


@dataclass(frozen=True)
class Verdict:
    outcome: str
    case_tag: str | None
    conditions: tuple[Condition, ...] = ()
    reason: str = ""

    @property
    def failing(self) -> frozenset[str]:
        return frozenset(c.name for c in self.conditions if not c.passed)

    def condition(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        out = {"outcome": self.outcome, "case_tag": self.case_tag,
               "conditions": [c.to_dict() for c in self.conditions]}
        if self.reason:
            out["reason"] = self.reason
        return out


@dataclass(frozen=True)
class CaseInfo:
    tag: str | None
    reason: str = ""


def _strict(name: str, relation: str, margin: float, index: int, role: str) -> Condition:
    return Condition(name, relation, margin, margin > 0, STRICT, index, role)


def _nonstrict(name: str, relation: str, margin: float, index: int, role: str) -> Condition:
    return Condition(name, relation, margin, margin >= -EQ_TOL, NONSTRICT, index, role)


def _equality(name: str, relation: str, margin: float, index: int, role: str) -> Condition:
    return Condition(name, relation, margin, abs(margin) <= EQ_TOL, EQUALITY, index, role)


def classify(setting: Setting) -> CaseInfo:
    p, q, al, be = setting.p, setting.q, setting.alpha, setting.beta
    inf = [math.isinf(x) for x in (*p, *q)]
    p_inf, q_inf = inf[:2], inf[2:]
    for i in range(2):
        if p_inf[i] != q_inf[i]:
            return CaseInfo(None, f"index {i + 1}: p and q must both be finite or both infinite")
        if p[i] > q[i]:
            return CaseInfo(None, f"index {i + 1}: p > q")
    if all(p_inf):
        return CaseInfo("sup-both")
    if p_inf[0] or p_inf[1]:
        j = 1 if p_inf[0] else 0
        if al[j] == be[j]:
            return CaseInfo(None, f"index {j + 1}: alpha = beta next to an infinite index")
        return CaseInfo("sup-1" if p_inf[0] else "sup-2")

    if p.plus > q.minus:
        return CaseInfo(None, "requires p_+ <= q_-")
    if tuple(p) == tuple(q) and setting.same_weights:
        return CaseInfo("diagonal-both")
    if p[0] == q[0] and p[1] < q[1] and al[0] == be[0]:
        return CaseInfo("diagonal-1")
    if p[1] == q[1] and p[0] < q[0] and al[1] == be[1]:
        return CaseInfo("diagonal-2")
    if setting.same_weights:
        return CaseInfo(None, "alpha = beta outside the diagonal cases")
    if p.minus > 1:
        return CaseInfo("interior")
    if p[0] == 1 and p[1] == 1:
        return CaseInfo("endpoint-both")
    return CaseInfo("endpoint-p1" if p[0] == 1 else "endpoint-p2")


def classify_setting(setting: Setting) -> str:
    """Case tag of the setting, or ``"Unsupported"``."""
    return classify(setting).tag or UNSUPPORTED


def threshold_c(setting: Setting, i: int, a_i: float, b_i: float) -> float:
    """n+1+a_i+b_i+(n+1+beta_i)/q_i-(n+1+alpha_i)/p_i for a zero-based index i."""
    p, q = setting.p[i], setting.q[i]
    if math.isinf(p) or math.isinf(q):
        raise ValueError("threshold_c needs finite exponents")
    n = setting.n
    return n + 1 + a_i + b_i + (n + 1 + setting.beta[i]) / q - (n + 1 + setting.alpha[i]) / p


# -- per-index condition groups ---------------------------------------------

def _weight(setting, params, i):
    k = i + 1
    return _strict(f"-q{k}a{k}<beta{k}+1", "<",
                   setting.beta[i] + 1 + setting.q[i] * params.a[i], k, "weight")


def _integrability(setting, params, i):
    # at p_i = 1 the condition reads alpha_i < b_i
    k = i + 1
    name = f"alpha{k}<b{k}" if setting.p[i] == 1 else f"alpha{k}+1<p{k}(b{k}+1)"
    return _strict(name, "<", setting.p[i] * (params.b[i] + 1) - setting.alpha[i] - 1, k,
                   "integrability")


def _threshold(setting, params, i):
    k = i + 1
    return _nonstrict(f"c{k}>=threshold{k}", ">=",
                      params.c[i] - threshold_c(setting, i, params.a[i], params.b[i]), k, "threshold")


def _general_index(setting, params, i):
    return [_weight(setting, params, i), _integrability(setting, params, i),
            _threshold(setting, params, i)]


def _equal_weight_index(setting, params, i):
    k, n = i + 1, setting.n
    return [_weight(setting, params, i),
            _equality(f"alpha{k}=b{k}", "=", params.b[i] - setting.alpha[i], k, "equal-weight"),
            _equality(f"c{k}=a{k}+(n+1+beta{k})/q{k}", "=",
                      params.c[i] - params.a[i] - (n + 1 + setting.beta[i]) / setting.q[i], k,
                      "c-equality")]


def _diagonal_index(setting, params, i):
    k, n = i + 1, setting.n
    return [_weight(setting, params, i), _integrability(setting, params, i),
            _equality(f"c{k}=n+1+a{k}+b{k}", "=", params.c[i] - (n + 1 + params.a[i] + params.b[i]), k,
                      "c-equality")]


def _sup_index(setting, params, i):
    k, n = i + 1, setting.n
    return [_strict(f"a{k}>0", ">", params.a[i], k, "sup-a"),
            _strict(f"b{k}>-1", ">", params.b[i] + 1, k, "sup-b"),
            _equality(f"c{k}=n+1+a{k}+b{k}", "=", params.c[i] - (n + 1 + params.a[i] + params.b[i]), k,
                      "sup-c")]


def _resolve(setting: Setting, params: FRParams) -> CaseInfo:
    """Case tag after the p_i = 1, alpha_i = b_i refinement."""
    info = classify(setting)
    if info.tag is None:
        return info
    at_one = [setting.p[i] == 1 and setting.alpha[i] == params.b[i] for i in range(2)]
    if not any(at_one):
        return info
    tag = info.tag
    if tag == "endpoint-p1" and at_one[0]:
        return CaseInfo("endpoint-p1-equal")
    if tag == "endpoint-p2" and at_one[1]:
        return CaseInfo("endpoint-p2-equal")
    if tag == "endpoint-both" and all(at_one):
        return CaseInfo("endpoint-both-equal")
    idx = [i + 1 for i in range(2) if at_one[i]]
    return CaseInfo(None, f"p_i = 1 with alpha_i = b_i at index {idx} is not covered in case {tag}")


def conditions_for(setting: Setting, params: FRParams, tag: str) -> list[Condition]:
    groups = {
        "interior": (_general_index, _general_index),
        "endpoint-p1": (_general_index, _general_index),
        "endpoint-p2": (_general_index, _general_index),
        "endpoint-both": (_general_index, _general_index),
        "endpoint-p1-equal": (_equal_weight_index, _general_index),
        "endpoint-p2-equal": (_general_index, _equal_weight_index),
        "endpoint-both-equal": (_equal_weight_index, _equal_weight_index),
        "diagonal-1": (_diagonal_index, _general_index),
        "diagonal-2": (_general_index, _diagonal_index),
        "diagonal-both": (_diagonal_index, _diagonal_index),
        "sup-1": (_sup_index, _general_index),
        "sup-2": (_general_index, _sup_index),
        "sup-both": (_sup_index, _sup_index),
    }[tag]
    out = []
    for i, group in enumerate(groups):
        out.extend(group(setting, params, i))
    return out


def check_bounded(setting: Setting, params: FRParams) -> Verdict:
    info = _resolve(setting, params)
    if info.tag is None:
        return Verdict(UNSUPPORTED, None, (), info.reason)
    conds = tuple(conditions_for(setting, params, info.tag))
    if not all(c.passed for c in conds):
        return Verdict(UNBOUNDED, info.tag, conds)
    if info.tag in EQUAL_WEIGHT_CASES:
        return Verdict(BOUNDARY_EQUALITY, info.tag, conds,
                       "necessary conditions hold; no sufficiency result for alpha_i = b_i at p_i = 1")
    return Verdict(BOUNDED, info.tag, conds)


@dataclass(frozen=True)
class SumCondition:
    required: float
    actual: float
    passed: bool

    def to_dict(self) -> dict:
        return {"required": self.required, "actual": self.actual, "pass": self.passed}


def sum_condition(setting: Setting, params: FRParams) -> SumCondition:
    """The aggregated necessary condition c_1 + c_2 >= threshold_1 + threshold_2."""
    required = sum(threshold_c(setting, i, params.a[i], params.b[i]) for i in range(2))
    actual = sum(params.c)
    return SumCondition(required, actual, actual - required >= -EQ_TOL)
