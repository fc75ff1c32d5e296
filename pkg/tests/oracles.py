"""Independent brute-force oracles used by the unit and acceptance tests.

Everything here is written against the contracts, not against the package
internals: different algorithms, different data structures, no imports from
dialdoc beyond plain data types.
"""

import math
import string
from fractions import Fraction

ARTICLES = ("a", "an", "the")


def oracle_normalize(text):
    kept = []
    for ch in text.lower():
        if ch in string.punctuation:
            continue
        kept.append(ch)
    words = ["".join(kept)]
    words = words[0].split()
    return " ".join(w for w in words if w not in ARTICLES)


def oracle_exact_match(prediction, golds):
    return int(any(oracle_normalize(prediction) == oracle_normalize(g) for g in golds))


def _multiset_overlap(a, b):
    a, b = sorted(a), sorted(b)
    i = j = same = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            same += 1
            i += 1
            j += 1
        elif a[i] < b[j]:
            i += 1
        else:
            j += 1
    return same


def oracle_unigram_f1(prediction, golds):
    best = 0.0
    for gold in golds:
        p = oracle_normalize(prediction).split()
        g = oracle_normalize(gold).split()
        if not p and not g:
            score = 1.0
        elif not p or not g:
            score = 0.0
        else:
            same = _multiset_overlap(p, g)
            if same == 0:
                score = 0.0
            else:
                prec = same / len(p)
                rec = same / len(g)
                score = 2 * prec * rec / (prec + rec)
        best = max(best, score)
    return best


def oracle_decode(window_specs, max_answer_tokens, nbest):
    """Exhaustive ranked n-best over windows of (char_spans, start_scores, end_scores).

    window_specs: list of (spans, starts, ends) where spans[i] is the
    (char_start, char_end) of window token i.
    """
    best = {}
    for spans, starts, ends in window_specs:
        count = len(spans)
        for s in range(count):
            for e in range(s, count):
                if e - s + 1 > max_answer_tokens:
                    continue
                key = (spans[s][0], spans[e][1])
                score = starts[s] + ends[e]
                if key not in best or score > best[key]:
                    best[key] = score
    ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1]))
    return ranked[:nbest]


def oracle_qualifying_splits(span, splits, lam):
    """Splits whose character overlap with the span reaches lam of their size."""
    lam = Fraction(str(lam))
    out = []
    for sp in splits:
        lo = span[0] if span[0] > sp.char_start else sp.char_start
        hi = span[1] if span[1] < sp.char_end else sp.char_end
        overlap = hi - lo
        if overlap > 0 and Fraction(overlap, sp.char_end - sp.char_start) >= lam:
            out.append(sp)
    return out


def oracle_extend_by_splits(span, splits, lam):
    q = oracle_qualifying_splits(span, splits, lam)
    if not q:
        return span
    start = min([span[0]] + [sp.char_start for sp in q])
    end = max([span[1]] + [sp.char_end for sp in q])
    return (start, end)


def oracle_vote(predictions):
    """(winning span, votes, tiebreak) by explicit frequency tally."""
    freq = {}
    scores = {}
    for p in predictions:
        freq[p.span] = freq.get(p.span, 0) + 1
        scores.setdefault(p.span, []).append(p.score)
    top = max(freq.values())
    leaders = sorted(s for s, c in freq.items() if c == top)
    if len(leaders) == 1:
        return leaders[0], top, "none"
    sums = {s: math.fsum(sorted(scores[s])) for s in leaders}
    best = max(sums.values())
    leaders = [s for s in leaders if sums[s] == best]
    if len(leaders) == 1:
        return leaders[0], top, "score"
    return leaders[0], top, "position"


def oracle_locate_gold(gold, first, last, context):
    """Tightest enclosing token pair by scanning all pairs; window is [first, last)."""
    best = None
    for i in range(len(context)):
        for j in range(i, len(context)):
            if context[i].char_start <= gold[0] and context[j].char_end >= gold[1]:
                if best is None or (j - i, -i) < (best[1] - best[0], -best[0]):
                    best = (i, j)
    if best is None:
        return None
    if first <= best[0] and best[1] < last:
        return best
    return None


def oracle_window_starts(n_tokens, capacity, stride):
    """Expected window start offsets by direct simulation."""
    starts = [0]
    while starts[-1] + capacity < n_tokens:
        nxt = starts[-1] + stride
        if nxt >= n_tokens:
            break
        starts.append(nxt)
    return starts


def oracle_members(plan, exclude):
    out = []
    for node in plan.nodes:
        if node.name in exclude:
            continue
        out.extend(list(node.checkpoints))
    return out
