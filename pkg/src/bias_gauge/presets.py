"""Ready-made task specifications for the standard image benchmarks.

Intrinsic dimension and margin values are published estimates; radii follow
the conventions below and can be overridden.

* MNIST: largest norm of the bundled 5000-image training subset at unit
  pixel scale.
* SVHN, CIFAR-10: sqrt(3072), the largest possible norm of a 32x32x3 image
  with pixels in [0, 1].
* ImageNet: largest possible norm of a 224x224x3 image after the usual
  per-channel mean/std normalisation.
"""
from __future__ import annotations

import math

from .difficulty import MetaTaskSpec, TaskSpec

_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)


def imagenet_radius(side: int = 224) -> float:
    per_pixel = sum(max((1 - mu) / sd, mu / sd) ** 2 for mu, sd in zip(_IMAGENET_MEAN, _IMAGENET_STD))
    return side * math.sqrt(per_pixel)


MNIST_RADIUS = 14.903  # max norm of the bundled subset, pixels / 255
UNIT_CUBE_RADIUS_32 = math.sqrt(32 * 32 * 3)
IMAGENET_RADIUS = imagenet_radius()

# (m, delta, n, d, eps_over_L, r)
_BENCHMARKS = {
    "mnist": (14, 2.4, 60_000, 10, 0.001, MNIST_RADIUS),
    "svhn": (19, 1.6, 73_257, 10, 0.01, UNIT_CUBE_RADIUS_32),
    "cifar10": (27, 2.8, 50_000, 10, 0.01, UNIT_CUBE_RADIUS_32),
    "imagenet": (48, 65.0, 1_281_167, 1000, 0.1, IMAGENET_RADIUS),
}

BENCHMARKS = tuple(_BENCHMARKS)


def benchmark(name: str, r: float | None = None) -> TaskSpec:
    """Classification spec for one of ``BENCHMARKS``; ``r`` overrides the radius."""
    try:
        m, delta, n, d, eps, default_r = _BENCHMARKS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; choose from {BENCHMARKS}") from None
    return TaskSpec.classification(m, n, d, default_r if r is None else r, delta, 1.0, eps)


# Published test error rates, ordered from weakest to strongest model. Values
# marked approximate are read off leaderboards rather than a single number in
# the source publication.
MODEL_ERRORS = {
    "mnist": [
        ("Linear", 0.12),
        ("FC-3", 0.0305),
        ("AlexNet", 0.012),  # approximate
        ("LeNet-5", 0.0095),
        ("DSN", 0.0039),
        ("MCDNN", 0.0023),
        ("Ensembled CNN", 0.0009),
    ],
    "svhn": [
        ("FC-6", 0.19),  # approximate
        ("AlexNet", 0.047),  # approximate
        ("Deep CNN", 0.0216),
        ("DSN", 0.0192),
        ("DenseNet", 0.0159),
        ("WRN-16-8", 0.0154),
        ("WRN-28-10", 0.0099),  # approximate
    ],
    "cifar10": [
        ("Linear", 0.65),  # approximate
        ("FC-4", 0.45),  # approximate
        ("MCDNN", 0.1121),
        ("AlexNet", 0.11),
        ("DSN", 0.0822),
        ("DenseNet", 0.0346),
        ("ResNet-50", 0.017),  # approximate
        ("BiT-L", 0.0063),
        ("ViT-H/14", 0.005),
    ],
    "imagenet": [
        ("Linear", 0.6),  # approximate
        ("SIFT + FVs", 0.46),  # approximate
        ("AlexNet", 0.375),
        ("DenseNet-121", 0.2502),
        ("ResNet-50", 0.2385),
        ("DenseNet-201", 0.2258),
        ("WRN-50-2-bottleneck", 0.219),
        ("BiT-L", 0.1246),
        ("ViT-H/14", 0.1145),
    ],
}


def model_errors_csv(name: str) -> str:
    lines = ["name,error_rate"]
    lines += [f"{model},{err}" for model, err in MODEL_ERRORS[name]]
    return "\n".join(lines) + "\n"


# Character counts of the 30 background alphabets of Omniglot (964 letters).
OMNIGLOT_BACKGROUND_ALPHABETS = (
    20, 29, 26, 41, 40, 24, 46, 14, 26, 34, 33, 22, 26, 43, 24,
    48, 22, 16, 52, 47, 40, 26, 40, 41, 33, 14, 42, 23, 17, 55,
)

# 105x105 images with pixels in [0, 1]: the all-ones image has norm 105.
OMNIGLOT_RADIUS = 105.0


def omniglot(m0: int, m1: int, r_g: float = OMNIGLOT_RADIUS, delta_g: float = 10.5) -> MetaTaskSpec:
    """20-way, 20-shot Omniglot over the background alphabets."""
    return MetaTaskSpec.omniglot(m0, m1, r_g, delta_g, OMNIGLOT_BACKGROUND_ALPHABETS)


def cartpole(observations: int, delta: float = 0.001, n: float = 10_000, eps_over_L: float = 0.001) -> dict:
    """Arguments for ``difficulty_rl`` for noisy Cartpole seeing ``observations`` frames (m = 2T)."""
    return {"m": 2 * observations, "delta": delta, "n": n, "d": 1, "eps_over_L": eps_over_L}
