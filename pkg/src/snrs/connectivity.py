"""Random-graph connectivity: per-weight Bernoulli masks and accounting.

Each convolution layer's receptive-field weights are kept or dropped as
independent Bernoulli(p) draws, one realization sampled at model
construction and frozen for the model's lifetime.  Biases are never
masked.  The accounting helpers quantify what that buys: expected and
realized active weight counts, and multiply-accumulate counts for a
given input size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import Stream


@dataclass(frozen=True)
class ConnectivityMask:
    """One realized binary mask over a conv weight tensor.

    bits is a read-only uint8 array shaped (out_channels, in_channels,
    kh, kw); seed_path records (global seed, layer index) when the mask
    came from a derived stream.
    """

    bits: np.ndarray
    connectivity_p: float
    seed_path: tuple[int, int] | None = None

    def __post_init__(self):
        self.bits.setflags(write=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.bits.shape

    def popcount(self) -> int:
        return int(self.bits.sum())

    def as_float(self) -> np.ndarray:
        return np.ascontiguousarray(self.bits, dtype=np.float64)


def sample_mask(shape, p, stream: Stream, seed_path=None) -> ConnectivityMask:
    """Draw a Bernoulli(p) bit per weight, row-major weight order.

    The mask is a pure function of (shape, p, stream state); formation
    happens once and the result is immutable.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"connectivity probability must be in [0, 1], got {p}")
    n = int(np.prod(shape))
    bits = np.fromiter(
        (stream.bernoulli(p) for _ in range(n)), dtype=np.uint8, count=n
    ).reshape(shape)
    return ConnectivityMask(bits=bits, connectivity_p=p, seed_path=seed_path)


def mask_density(mask) -> float:
    """Fraction of 1-bits; accepts a ConnectivityMask or a plain array."""
    bits = mask.bits if isinstance(mask, ConnectivityMask) else np.asarray(mask)
    return float(np.count_nonzero(bits)) / bits.size


def masks_for_config(config) -> list[ConnectivityMask]:
    """Sample the per-layer masks a config's seed determines.

    Stream address is (config.seed, "mask", layer_index); this is the
    single sampling path used by both model construction and the
    accounting functions, so their realized counts always agree.
    """
    masks = []
    for idx, shape in enumerate(config.layer_shapes()):
        stream = Stream.derive(config.seed, "mask", idx)
        masks.append(
            sample_mask(shape, config.connectivity_p, stream, (config.seed, idx))
        )
    return masks


# -- serialization ---------------------------------------------------------

def pack_mask_bits(bits: np.ndarray) -> bytes:
    """Pack mask bits row-major, 8 per byte, least-significant bit first."""
    return np.packbits(
        np.ascontiguousarray(bits, dtype=np.uint8).ravel(), bitorder="little"
    ).tobytes()


def unpack_mask_bits(data: bytes, shape) -> np.ndarray:
    n = int(np.prod(shape))
    bits = np.unpackbits(
        np.frombuffer(data, dtype=np.uint8), count=n, bitorder="little"
    )
    return bits.reshape(shape)


def packed_size(shape) -> int:
    return (int(np.prod(shape)) + 7) // 8


# -- parameter and MAC accounting ------------------------------------------

@dataclass(frozen=True)
class ParameterCounts:
    dense_conv_weights: int
    expected_active_conv_weights: float
    realized_active_conv_weights: int
    conv_biases: int
    head_weights: int
    head_biases: int


@dataclass(frozen=True)
class MacCounts:
    dense: int
    active: int


def expected_parameter_count(config, masks=None) -> ParameterCounts:
    """Dense vs expected vs realized conv weight counts for a config.

    The realized count is for the masks config.seed determines (pass
    `masks` to account an already-built model).  Biases and the dense
    head are reported separately; they are never masked.
    """
    shapes = config.layer_shapes()
    dense = sum(int(np.prod(s)) for s in shapes)
    if masks is None:
        masks = masks_for_config(config)
    realized = sum(m.popcount() for m in masks)
    feature_len = config.feature_len()
    return ParameterCounts(
        dense_conv_weights=dense,
        expected_active_conv_weights=config.connectivity_p * dense,
        realized_active_conv_weights=realized,
        conv_biases=sum(s[0] for s in shapes),
        head_weights=config.num_classes * feature_len,
        head_biases=config.num_classes,
    )


def mac_count(config, input_shape=None, masks=None) -> MacCounts:
    """Dense vs realized multiply-accumulate counts for one forward pass.

    Conv layers only (the head is identical in both).  active <= dense
    always, since every masked weight's MACs are skipped at every
    output position.
    """
    if input_shape is None:
        input_shape = (config.input_channels, config.input_height, config.input_width)
    if masks is None:
        masks = masks_for_config(config)
    _, h, w = input_shape
    kh, kw = config.kernel
    dense = 0
    active = 0
    for idx, shape in enumerate(config.layer_shapes()):
        oh, ow = h - kh + 1, w - kw + 1
        positions = oh * ow
        dense += positions * int(np.prod(shape))
        active += positions * masks[idx].popcount()
        h, w = oh, ow
        if (idx + 1) in config.pool_after:
            h //= 2
            w //= 2
    return MacCounts(dense=dense, active=active)
