"""Built-in verification suite: re-derives core numerics independently.

Each check recomputes its expectation from scratch (scripted recurrences,
brute-force counting, finite differences) rather than trusting the library
code under test. The CLI exposes this as the `selfcheck` subcommand.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from comprel import rng
from comprel.corpus import LabelSpace
from comprel.experiments import load_checkpoint, save_checkpoint
from comprel.metrics import score
from comprel.nn import AdamConfig, ParamTensor, build_single, forward, gradient_check, softmax
from comprel.nn.adam import update_tensor
from comprel.training import EarlyStopper


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        flag = "ok" if self.passed else "FAIL"
        return f"[{flag:4s}] {self.name}: {self.detail}"


def _random_model(gen):
    dim = int(gen.integers(2, 9))
    vocab = int(gen.integers(3, 12))
    n_classes = int(gen.integers(2, 7))
    batch = int(gen.integers(1, 8))
    matrix = gen.normal(0.0, 0.5, size=(vocab, dim))
    params = build_single(matrix, n_classes, "A", int(gen.integers(0, 2**31)))
    pairs = gen.integers(0, vocab, size=(batch, 2))
    gold = gen.integers(0, n_classes, size=batch)
    return params, pairs, gold


def check_gradients(n_models: int = 100, tol: float = 1e-4) -> CheckResult:
    gen = rng.stream(404, "selfcheck", "grad")
    worst = 0.0
    start = time.perf_counter()
    for _ in range(n_models):
        params, pairs, gold = _random_model(gen)
        report = gradient_check(params, pairs, gold, "A")
        worst = max(worst, report.max_rel_error)
    elapsed = time.perf_counter() - start
    return CheckResult(
        name="gradient-check",
        passed=worst < tol,
        detail=f"max rel error {worst:.3e} over {n_models} models "
        f"(tol {tol:g}, {elapsed:.2f}s)",
    )


def check_adam(n_cases: int = 200, tol: float = 1e-12) -> CheckResult:
    """Replays Adam against a plain-Python scalar recurrence."""
    gen = rng.stream(404, "selfcheck", "adam")
    worst = 0.0
    for _ in range(n_cases):
        steps = int(gen.integers(1, 12))
        x0 = float(gen.normal())
        grads = [float(gen.normal()) for _ in range(steps)]
        cfg = AdamConfig(
            eta=float(gen.uniform(1e-4, 1e-1)),
            beta1=float(gen.uniform(0.5, 0.99)),
            beta2=float(gen.uniform(0.9, 0.9999)),
            epsilon=float(gen.uniform(1e-10, 1e-6)),
        )
        tensor = ParamTensor("x", np.array([x0]))
        x, m, v = x0, 0.0, 0.0
        for t, g in enumerate(grads, start=1):
            tensor.grad[:] = g
            update_tensor(tensor, cfg)
            m = cfg.beta1 * m + (1 - cfg.beta1) * g
            v = cfg.beta2 * v + (1 - cfg.beta2) * g * g
            m_hat = m / (1 - cfg.beta1**t)
            v_hat = v / (1 - cfg.beta2**t)
            x -= cfg.eta * m_hat / (math.sqrt(v_hat) + cfg.epsilon)
            worst = max(worst, abs(float(tensor.values[0]) - x))
    return CheckResult(
        name="adam-recurrence",
        passed=worst < tol,
        detail=f"max per-step deviation {worst:.3e} over {n_cases} cases (tol {tol:g})",
    )


def check_softmax(n_cases: int = 200) -> CheckResult:
    gen = rng.stream(404, "selfcheck", "softmax")
    worst_sum = 0.0
    worst_shift = 0.0
    for _ in range(n_cases):
        rows = int(gen.integers(1, 6))
        cols = int(gen.integers(2, 8))
        logits = gen.normal(0.0, 50.0, size=(rows, cols))
        probs = softmax(logits)
        if not np.all(np.isfinite(probs)) or probs.min() < 0.0:
            return CheckResult("softmax-invariants", False, "non-finite or negative")
        worst_sum = max(worst_sum, float(np.abs(probs.sum(axis=1) - 1.0).max()))
        shifted = softmax(logits + gen.normal(0.0, 10.0))
        worst_shift = max(worst_shift, float(np.abs(shifted - probs).max()))
    passed = worst_sum < 1e-12 and worst_shift < 1e-9
    return CheckResult(
        name="softmax-invariants",
        passed=passed,
        detail=f"row-sum error {worst_sum:.3e}, shift error {worst_shift:.3e}",
    )


def check_metrics(n_cases: int = 100) -> CheckResult:
    gen = rng.stream(404, "selfcheck", "metrics")
    labels = [f"L{i}" for i in range(12)]
    space = LabelSpace(taxonomy="A", labels=sorted(labels))
    for case in range(n_cases):
        n = int(gen.integers(1, 60))
        gold = [labels[gen.integers(12)] for _ in range(n)]
        predicted = [labels[gen.integers(12)] for _ in range(n)]
        scores, table = score(predicted, gold, space)
        for label in labels:
            tp = sum(1 for g, p in zip(gold, predicted) if g == p == label)
            fp = sum(1 for g, p in zip(gold, predicted) if p == label and g != label)
            fn = sum(1 for g, p in zip(gold, predicted) if g == label and p != label)
            got = scores.per_label[label]
            if (got.tp, got.fp, got.fn) != (tp, fp, fn):
                return CheckResult(
                    "metrics-oracle", False, f"count mismatch on {label} case {case}"
                )
        correct = sum(1 for g, p in zip(gold, predicted) if g == p)
        if scores.accuracy != correct / n or table.total != n:
            return CheckResult("metrics-oracle", False, f"accuracy mismatch case {case}")
    return CheckResult(
        "metrics-oracle", True, f"counts match brute force on {n_cases} cases"
    )


def check_early_stopping() -> CheckResult:
    stopper = EarlyStopper(patience=5)
    stopped_at = None
    for epoch, acc in enumerate([0.5, 0.6, 0.55, 0.54, 0.53, 0.52, 0.51], start=1):
        stopper.update(epoch, acc)
        if stopper.should_stop:
            stopped_at = epoch
            break
    ok = stopped_at == 7 and stopper.best_epoch == 2
    never = EarlyStopper(patience=7)
    for epoch in range(1, 8):
        never.update(epoch, 1.0 - epoch * 0.01)
        if never.should_stop and epoch < 7:
            ok = False
    return CheckResult(
        name="early-stopping",
        passed=ok,
        detail=f"reference schedule stopped at {stopped_at}, best epoch "
        f"{stopper.best_epoch}",
    )


def check_checkpoint_roundtrip() -> CheckResult:
    gen = rng.stream(404, "selfcheck", "ckpt")
    matrix = gen.normal(size=(6, 3))
    params = build_single(matrix, 4, "B", 9)
    probs_before = forward(params, np.array([[0, 1], [2, 3]]), "B").probs
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.npz"
        save_checkpoint(path, params)
        loaded = load_checkpoint(path)
    same = all(
        np.array_equal(a.values, b.values)
        for a, b in zip(params.tensors(), loaded.tensors())
    )
    probs_after = forward(loaded, np.array([[0, 1], [2, 3]]), "B").probs
    same = same and np.array_equal(probs_before, probs_after)
    return CheckResult(
        name="checkpoint-roundtrip",
        passed=same,
        detail="tensor values and forward pass bit-equal after reload",
    )


def run_all() -> list[CheckResult]:
    return [
        check_gradients(),
        check_adam(),
        check_softmax(),
        check_metrics(),
        check_early_stopping(),
        check_checkpoint_roundtrip(),
    ]
