"""Raw confidence scores from token log probabilities.

The score for a sample is the geometric mean of its token
probabilities, ``exp(mean(token_logprobs))``, computed over a selectable
token window: the whole sequence, only the extracted code span, or only
the trailing tokens.
"""

import json
import math
from dataclasses import dataclass

from .data import Dataset, Sample, parse_record
from .errors import DataError, MissingCodeError, RecordError

__all__ = [
    "ConfidenceMethod",
    "ScoredSample",
    "score_sample",
    "score_dataset",
    "save_scored",
    "load_scored",
]

METHOD_NAMES = ("avg_prob", "code_prob", "tail_prob")
DEFAULT_TAIL_TOKENS = 40


@dataclass(frozen=True)
class ConfidenceMethod:
    """Which token window feeds the mean log probability."""

    name: str
    tail_tokens: int = DEFAULT_TAIL_TOKENS

    def __post_init__(self) -> None:
        if self.name not in METHOD_NAMES:
            raise DataError(f"unknown confidence method {self.name!r}, expected one of {METHOD_NAMES}")
        if self.name == "tail_prob" and self.tail_tokens < 1:
            raise DataError(f"tail_tokens must be >= 1, got {self.tail_tokens}")


@dataclass
class ScoredSample:
    """A sample paired with its raw confidence score in (0, 1]."""

    sample: Sample
    p_hat: float
    method: str


def score_sample(sample: Sample, method: ConfidenceMethod) -> float:
    """Raw confidence for one sample under the given method."""
    lps = sample.token_logprobs
    if not lps:
        raise DataError(f"sample {sample.sample_id!r} has no tokens to score")
    if method.name == "avg_prob":
        window = lps
    elif method.name == "code_prob":
        if sample.code_span is None:
            raise MissingCodeError(
                f"sample {sample.sample_id!r} has no code_span for code_prob scoring"
            )
        start, end = sample.code_span
        window = lps[start:end]
        if not window:
            raise MissingCodeError(f"sample {sample.sample_id!r} has an empty code span")
    else:
        window = lps[-min(method.tail_tokens, len(lps)):]
    return math.exp(sum(window) / len(window))


def score_dataset(
    dataset: Dataset, method: ConfidenceMethod, skip_missing: bool = False
) -> tuple[list[ScoredSample], int]:
    """Score every sample; returns the scored list and a skip tally.

    With ``skip_missing`` samples that cannot be scored under the method
    (no usable code span, empty token list) are dropped and counted
    instead of raising.
    """
    scored: list[ScoredSample] = []
    skipped = 0
    for sample in dataset:
        try:
            p_hat = score_sample(sample, method)
        except DataError:
            if skip_missing:
                skipped += 1
                continue
            raise
        scored.append(ScoredSample(sample, p_hat, method.name))
    return scored, skipped


def save_scored(scored: list[ScoredSample], path: str) -> None:
    """Write scored samples as record lines augmented with p_hat and method."""
    with open(path, "w", encoding="utf-8") as fh:
        for item in scored:
            obj = item.sample.to_dict()
            obj["p_hat"] = item.p_hat
            obj["method"] = item.method
            fh.write(json.dumps(obj, sort_keys=True))
            fh.write("\n")


def load_scored(path: str) -> list[ScoredSample]:
    """Load records previously written by :func:`save_scored`."""
    out: list[ScoredSample] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise RecordError(f"malformed JSON: {exc.msg}", line=lineno) from exc
            sample = parse_record(obj, line=lineno)
            if sample.sample_id in seen:
                raise RecordError("duplicate sample_id", line=lineno, sample_id=sample.sample_id)
            seen.add(sample.sample_id)
            p_hat = obj.get("p_hat")
            if not isinstance(p_hat, (int, float)) or isinstance(p_hat, bool):
                raise RecordError("missing or non-numeric p_hat", line=lineno, sample_id=sample.sample_id)
            p_hat = float(p_hat)
            if not 0.0 <= p_hat <= 1.0 or not math.isfinite(p_hat):
                raise RecordError(f"p_hat {p_hat!r} outside [0, 1]", line=lineno, sample_id=sample.sample_id)
            method = obj.get("method")
            if not isinstance(method, str):
                raise RecordError("missing method", line=lineno, sample_id=sample.sample_id)
            out.append(ScoredSample(sample, p_hat, method))
    return out
