"""Mixing, synthetic sources and the two-channel separation protocol."""

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .density import sample_sgg
from .errors import DomainError
from .metrics import acy_error, match_components
from .optimizer import FitConfig, fit_ica, separate
from .signal_io import SignalMatrix, read_pgm

SUM_DIFF = np.array([[1.0, 1.0], [1.0, -1.0]])
BUNDLED_IMAGES = ("rings.pgm", "weave.pgm")
_CHANNEL_STRIDE = 0xD1B54A32D192ED03


@dataclass(eq=False)
class MixingExperiment:
    sources: SignalMatrix
    mixing: np.ndarray
    mixed: SignalMatrix
    ground_truth_available: bool = True


@dataclass(frozen=True, eq=False)
class SeparationScore:
    acy: float
    min_congruence: float
    mean_congruence: float
    congruences: np.ndarray


def mix(sources, A):
    """Apply ``A`` to every sample's channel vector: ``x_i = A s_i``."""
    S = sources.data if isinstance(sources, SignalMatrix) else np.atleast_2d(np.asarray(sources, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[1] != S.shape[1]:
        raise DomainError(f"mixing matrix {A.shape} does not match {S.shape[1]} channels")
    out = S @ A.T
    if isinstance(sources, SignalMatrix):
        return SignalMatrix(out, sample_rate=sources.sample_rate, width=sources.width, height=sources.height)
    return SignalMatrix(out)


def channel_seed(seed, j):
    return (int(seed) + j * _CHANNEL_STRIDE) & ((1 << 64) - 1)


def generate_sources(specs, n, seed):
    """One independent column per UnivariateSgg in ``specs``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not specs:
        raise DomainError("need at least one source specification")
    cols = [sample_sgg(p, n, channel_seed(seed, j)) for j, p in enumerate(specs)]
    return SignalMatrix(np.column_stack(cols))


def make_experiment(sources, A=SUM_DIFF):
    if not isinstance(sources, SignalMatrix):
        sources = SignalMatrix(sources)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return MixingExperiment(sources=sources, mixing=A, mixed=mix(sources, A))


def center_crop(img, width, height, new_width, new_height):
    grid = np.asarray(img, dtype=float).reshape(height, width)
    top = (height - new_height) // 2
    left = (width - new_width) // 2
    return grid[top : top + new_height, left : left + new_width].ravel()


def image_sources(images):
    """Stack single-channel images into one SignalMatrix, cropping to the smallest."""
    w = min(im.width for im in images)
    h = min(im.height for im in images)
    cols = [center_crop(im.data[:, 0], im.width, im.height, w, h) for im in images]
    return SignalMatrix(np.column_stack(cols), width=w, height=h)


def load_bundled_images():
    ref = resources.files("sggica") / "data"
    images = []
    for name in BUNDLED_IMAGES:
        with resources.as_file(ref / name) as path:
            images.append(read_pgm(path))
    return images


def rescale_unit(x):
    """Min-max rescale each column of ``x`` to [0, 1]; constant columns map to 0."""
    x = np.asarray(x, dtype=float)
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    return (x - lo) / np.where(span > 0, span, 1.0)


def score_separation(sources, estimates, mixing=None, W_est=None, center=True):
    """Matched congruences (optionally on mean-removed channels) and ACY(A, W_est^-1)."""
    S = np.asarray(sources, dtype=float)
    E = np.asarray(estimates, dtype=float)
    if center:
        S = S - S.mean(axis=0)
        E = E - E.mean(axis=0)
    report = match_components(S.T, E.T)
    acy = float("nan")
    if mixing is not None and W_est is not None:
        acy = acy_error(mixing, np.linalg.inv(W_est))
    return SeparationScore(
        acy=acy,
        min_congruence=report.min_congruence,
        mean_congruence=report.mean_congruence,
        congruences=report.congruences,
    )


def run_experiment(experiment, config=None, center=True):
    """Fit the mixed channels and score the recovered sources against the truth."""
    fit = fit_ica(experiment.mixed.data, config or FitConfig())
    est = separate(experiment.mixed.data, fit)
    score = score_separation(experiment.sources.data, est, experiment.mixing, fit.model.W, center=center)
    return fit, est, score
