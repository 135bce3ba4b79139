"""Shared fixtures-in-code and independent oracles for the test suite.

Oracles here are deliberately written from first principles (plain loops,
brute-force scans, closed-form arithmetic) so they share no code with the
package implementations they check.
"""

from __future__ import annotations

import math

import numpy as np

from selfcare.dataset.types import Device, Modality, SignalChannel, WindowedSegment


def make_channel(modality, samples, rate_hz, device=Device.WRIST):
    return SignalChannel(Modality(modality), device, rate_hz, samples=np.asarray(samples))


def make_segment(channels, label=1, subject_id="T1", device=Device.WRIST, start_s=0.0):
    """Segment from {modality: (samples, rate)} pairs."""
    built = {
        Modality(m): make_channel(m, samples, rate, device)
        for m, (samples, rate) in channels.items()
    }
    window_s = max(ch.samples.size / ch.rate_hz for ch in built.values())
    return WindowedSegment(subject_id, device, start_s, window_s, built, label)


def acc_segment(x, y, z, rate_hz=32.0, label=1, subject_id="T1", device=Device.WRIST):
    return make_segment(
        {"ACC_X": (x, rate_hz), "ACC_Y": (y, rate_hz), "ACC_Z": (z, rate_hz)},
        label=label,
        subject_id=subject_id,
        device=device,
    )


# ---------------------------------------------------------------------------
# Metric oracle: per-sample recount, no matrix algebra shared with the package.


def metrics_oracle(y_true, y_pred, n_classes):
    """(accuracy, macro_f1, precision list, recall list) by direct counting."""
    n = len(y_true)
    correct = sum(1 for t, p in zip(y_true, y_pred) if t == p)
    accuracy = correct / n
    precisions, recalls, f1s = [], [], []
    for c in range(n_classes):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)
    return accuracy, sum(f1s) / n_classes, precisions, recalls


# ---------------------------------------------------------------------------
# Vote oracles: literal reading of the fusion rules.


def hard_vote_oracle(rows):
    votes = [max(range(len(r)), key=lambda c: r[c]) for r in rows]
    counts = [votes.count(c) for c in range(len(rows[0]))]
    top = max(counts)
    tied = [c for c, n in enumerate(counts) if n == top]
    if len(tied) == 1:
        return tied[0]
    sums = [sum(r[c] for r in rows) for c in range(len(rows[0]))]
    return max(tied, key=lambda c: (sums[c], -c))


def soft_vote_oracle(rows):
    means = [sum(r[c] for r in rows) / len(rows) for c in range(len(rows[0]))]
    return max(range(len(means)), key=lambda c: (means[c], -c))


def simplex_grid(n_classes, step_count):
    """All probability vectors with entries i/step_count summing to 1."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + [remaining])
            return
        for i in range(remaining + 1):
            rec(prefix + [i], remaining - i, slots - 1)

    rec([], step_count, n_classes)
    return [[i / step_count for i in v] for v in out]


# ---------------------------------------------------------------------------
# Boosting oracle: brute-force information-gain stump plus the real-valued
# weight update, computed with plain Python arithmetic.


def _weighted_entropy(weights_by_class):
    total = sum(weights_by_class)
    if total <= 0.0:
        return 0.0
    h = 0.0
    for w in weights_by_class:
        if w > 0.0:
            p = w / total
            h -= p * math.log2(p)
    return h


def stump_oracle(x, y, w, n_classes):
    """Best info-gain threshold stump on 1-D data.

    Returns (left_mask, left_probs, right_probs) where probabilities are
    weighted class fractions.  Candidate thresholds are midpoints between
    consecutive distinct values; the first strictly best gain wins.
    """
    order = sorted(range(len(x)), key=lambda i: x[i])
    parent = [0.0] * n_classes
    for i in range(len(x)):
        parent[y[i]] += w[i]
    h_parent = _weighted_entropy(parent)
    total_w = sum(parent)

    best_gain, best_thr = 0.0, None
    for a, b in zip(order, order[1:]):
        if x[a] == x[b]:
            continue
        thr = (x[a] + x[b]) / 2.0
        left = [0.0] * n_classes
        right = [0.0] * n_classes
        for i in range(len(x)):
            (left if x[i] <= thr else right)[y[i]] += w[i]
        after = (
            sum(left) * _weighted_entropy(left) + sum(right) * _weighted_entropy(right)
        ) / total_w
        gain = h_parent - after
        if gain > best_gain:
            best_gain, best_thr = gain, thr
    if best_thr is None:
        raise AssertionError("oracle found no split")

    left_mask = [xi <= best_thr for xi in x]
    left = [0.0] * n_classes
    right = [0.0] * n_classes
    for i in range(len(x)):
        (left if left_mask[i] else right)[y[i]] += w[i]
    lp = [v / sum(left) for v in left]
    rp = [v / sum(right) for v in right]
    return left_mask, lp, rp


def boost_round_oracle(x, y, w, n_classes, prob_floor=1e-12):
    """One round of probability-weighted boosting on 1-D data.

    Trains the oracle stump on weights w, then reweights each sample by
    exp(-(K-1)/K * sum_c coding_c * log p_c) with the symmetric coding
    (+1 on the true class, -1/(K-1) elsewhere) and renormalizes.
    """
    left_mask, lp, rp = stump_oracle(x, y, w, n_classes)
    k = n_classes
    new_w = []
    for i in range(len(x)):
        probs = lp if left_mask[i] else rp
        s = 0.0
        for c in range(k):
            coding = 1.0 if c == y[i] else -1.0 / (k - 1)
            s += coding * math.log(max(probs[c], prob_floor))
        new_w.append(w[i] * math.exp(-((k - 1.0) / k) * s))
    total = sum(new_w)
    return [v / total for v in new_w]
