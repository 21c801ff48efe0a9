"""Descriptor configurations, centre-of-gravity quadrants and feature assembly"""

import math
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateSplitError, DescriptorSyntaxError
from .glcm import glcm_feature_vector
from .lbp import LbpVariant, histogram_dimension, lbp_histogram
from .spectral import dct_features, dft_features
from .types import STANDARD_SCALES, CogPoint, FeatureVector, GrayImage, LedgerEntry, NeighborhoodSpec
from .wld import DEFAULT_QUANTIZATION, WldQuantization, wld_histogram

COG_MODES = ("intensity", "geometric")


class DescriptorBase(Enum):
    LBP = "LBP"
    RILBP = "riLBP"
    WLD = "WLD"
    WLDRI = "WLDRI"
    GLCM = "GLCM"
    DCT = "DCT"
    DFT = "DFT"

    @property
    def is_texture(self) -> bool:
        return self in (DescriptorBase.LBP, DescriptorBase.RILBP, DescriptorBase.WLD, DescriptorBase.WLDRI)


# Names accepted in descriptor strings, fused forms first so they match greedily
_FUSED_NAMES = {"WeberLBP": DescriptorBase.LBP, "riWeberLBP": DescriptorBase.RILBP}
_NAME_PATTERN = re.compile(
    r"^(?P<cog>cog)?(?P<name>riWeberLBP|WeberLBP|riLBP|LBP|WLDRI|WLD|GLCM|DCT|DFT)"
    r"(?:@(?P<scales>[^:]+))?(?::(?P<params>.+))?$"
)


@dataclass(frozen=True)
class DescriptorConfig:
    """One feature protocol: base descriptor, scales, cog split and Weber fusion"""

    base: DescriptorBase
    scales: tuple[NeighborhoodSpec, ...] = (STANDARD_SCALES[0],)
    cog: bool = False
    fuse_weber: bool = False
    wld: WldQuantization = DEFAULT_QUANTIZATION
    glcm_levels: int = 16
    glcm_distance: int = 1
    coefficients: int = 64

    def __post_init__(self) -> None:
        if self.base.is_texture and not self.scales:
            raise ValueError(f"{self.base.value} needs at least one (P,R) scale")
        if not self.base.is_texture and self.scales:
            object.__setattr__(self, "scales", ())
        if self.fuse_weber and self.base not in (DescriptorBase.LBP, DescriptorBase.RILBP):
            raise ValueError(f"Weber fusion applies to LBP and riLBP, not {self.base.value}")

    @property
    def name(self) -> str:
        if self.fuse_weber:
            return "riWeberLBP" if self.base is DescriptorBase.RILBP else "WeberLBP"
        return self.base.value

    @property
    def weber_block(self) -> DescriptorBase | None:
        """WLD flavour fused after each LBP block"""
        if not self.fuse_weber:
            return None
        return DescriptorBase.WLDRI if self.base is DescriptorBase.RILBP else DescriptorBase.WLD

    @property
    def max_radius(self) -> float:
        return max((s.R for s in self.scales), default=0.0)

    def __str__(self) -> str:
        return format_descriptor(self)


def format_descriptor(cfg: DescriptorConfig) -> str:
    """Canonical string, e.g. 'cogriWeberLBP@8,1+16,2+24,3' or 'GLCM:16,1'"""
    text = ("cog" if cfg.cog else "") + cfg.name
    if cfg.base.is_texture:
        text += "@" + "+".join(str(s) for s in cfg.scales)
        uses_wld = cfg.base in (DescriptorBase.WLD, DescriptorBase.WLDRI) or cfg.fuse_weber
        if uses_wld and cfg.wld != DEFAULT_QUANTIZATION:
            text += f":{cfg.wld}"
    elif cfg.base is DescriptorBase.GLCM:
        text += f":{cfg.glcm_levels},{cfg.glcm_distance}"
    else:
        text += f":{cfg.coefficients}"
    return text


def _parse_scale(text: str) -> NeighborhoodSpec:
    parts = text.split(",")
    if len(parts) != 2:
        raise DescriptorSyntaxError(f"scale '{text}' must look like P,R")
    try:
        P = int(parts[0])
        R = float(parts[1])
        return NeighborhoodSpec(P, int(R) if R.is_integer() else R)
    except ValueError as e:
        raise DescriptorSyntaxError(f"bad scale '{text}': {e}") from e


def parse_descriptor(
    text: str, *, glcm_levels: int = 16, glcm_distance: int = 1, coefficients: int = 64
) -> DescriptorConfig:
    """Inverse of format_descriptor; omitted parameters take the keyword defaults"""
    match = _NAME_PATTERN.match(text.strip())
    if not match:
        raise DescriptorSyntaxError(f"unrecognised descriptor '{text}'")

    name = match.group("name")
    fuse = name in _FUSED_NAMES
    base = _FUSED_NAMES[name] if fuse else DescriptorBase(name)
    scales_text = match.group("scales")
    params = match.group("params")

    scales: tuple[NeighborhoodSpec, ...] = ()
    if base.is_texture:
        if not scales_text:
            raise DescriptorSyntaxError(f"'{text}' needs scales, e.g. {name}@8,1")
        scales = tuple(_parse_scale(s) for s in scales_text.split("+"))
    elif scales_text:
        raise DescriptorSyntaxError(f"{name} takes no (P,R) scales")

    wld = DEFAULT_QUANTIZATION
    levels, distance = glcm_levels, glcm_distance
    try:
        if params is not None:
            if base.is_texture:
                if base in (DescriptorBase.LBP, DescriptorBase.RILBP) and not fuse:
                    raise DescriptorSyntaxError(f"{name} takes no parameters")
                t, m = params.lower().split("x")
                wld = WldQuantization(int(t), int(m))
            elif base is DescriptorBase.GLCM:
                level_text, distance_text = params.split(",")
                levels, distance = int(level_text), int(distance_text)
            else:
                coefficients = int(params)
        return DescriptorConfig(
            base=base,
            scales=scales,
            cog=match.group("cog") is not None,
            fuse_weber=fuse,
            wld=wld,
            glcm_levels=levels,
            glcm_distance=distance,
            coefficients=coefficients,
        )
    except DescriptorSyntaxError:
        raise
    except ValueError as e:
        raise DescriptorSyntaxError(f"bad parameters in '{text}': {e}") from e


def _scale_dimension(base: DescriptorBase, spec: NeighborhoodSpec, q: WldQuantization) -> int:
    if base is DescriptorBase.LBP:
        return histogram_dimension(spec, LbpVariant.U2)
    if base is DescriptorBase.RILBP:
        return histogram_dimension(spec, LbpVariant.RIU2)
    return q.dimension


def expected_dimension(cfg: DescriptorConfig) -> int:
    """Closed-form feature length of cfg"""
    if cfg.base is DescriptorBase.GLCM:
        per_region = 64
    elif cfg.base in (DescriptorBase.DCT, DescriptorBase.DFT):
        per_region = cfg.coefficients
    else:
        per_region = 0
        for spec in cfg.scales:
            per_region += _scale_dimension(cfg.base, spec, cfg.wld)
            if cfg.fuse_weber:
                per_region += cfg.wld.dimension
    return (4 if cfg.cog else 1) * per_region


def center_of_gravity(img: GrayImage, mode: str = "intensity") -> CogPoint:
    """Intensity-weighted centroid; the geometric centre for all-zero images or mode='geometric'"""
    if mode not in COG_MODES:
        raise ValueError(f"cog mode must be one of {COG_MODES}, got '{mode}'")
    geometric = CogPoint((img.width - 1) / 2, (img.height - 1) / 2)
    if mode == "geometric":
        return geometric

    pixels = img.pixels.astype(np.int64)
    total = int(pixels.sum())
    if total == 0:
        return geometric
    sx = int((pixels.sum(axis=0) * np.arange(img.width)).sum())
    sy = int((pixels.sum(axis=1) * np.arange(img.height)).sum())
    return CogPoint(sx / total, sy / total)


def split_point(c: CogPoint) -> tuple[int, int]:
    """Round-half-up split column and row"""
    return math.floor(c.cx + 0.5), math.floor(c.cy + 0.5)


def split_quadrants(img: GrayImage, c: CogPoint, min_side: int = 1) -> list[GrayImage]:
    """[top-left, top-right, bottom-left, bottom-right] around the rounded cog"""
    sx, sy = split_point(c)
    widths = (sx, img.width - sx)
    heights = (sy, img.height - sy)
    if min(widths + heights) < min_side:
        raise DegenerateSplitError(
            f"split at ({sx}, {sy}) of a {img.width}x{img.height} image leaves a quadrant "
            f"narrower than {min_side} pixels"
        )
    p = img.pixels
    return [
        GrayImage(np.array(p[:sy, :sx])),
        GrayImage(np.array(p[:sy, sx:])),
        GrayImage(np.array(p[sy:, :sx])),
        GrayImage(np.array(p[sy:, sx:])),
    ]


def required_side(cfg: DescriptorConfig) -> int:
    """Smallest region side the descriptor can run on"""
    if cfg.base.is_texture:
        return max(s.min_side for s in cfg.scales)
    if cfg.base is DescriptorBase.GLCM:
        return cfg.glcm_distance + 1
    return 1


def _texture_block(img: GrayImage, base: DescriptorBase, spec: NeighborhoodSpec, q: WldQuantization) -> FeatureVector:
    if base is DescriptorBase.LBP:
        return lbp_histogram(img, spec, LbpVariant.U2)
    if base is DescriptorBase.RILBP:
        return lbp_histogram(img, spec, LbpVariant.RIU2)
    return wld_histogram(img, spec, q, rotation_invariant=base is DescriptorBase.WLDRI)


def _region_blocks(img: GrayImage, cfg: DescriptorConfig) -> list[FeatureVector]:
    if cfg.base is DescriptorBase.GLCM:
        return [glcm_feature_vector(img, cfg.glcm_distance, cfg.glcm_levels)]
    if cfg.base is DescriptorBase.DCT:
        return [dct_features(img, cfg.coefficients)]
    if cfg.base is DescriptorBase.DFT:
        return [dft_features(img, cfg.coefficients)]

    blocks: list[FeatureVector] = []
    weber = cfg.weber_block
    for spec in cfg.scales:
        blocks.append(_texture_block(img, cfg.base, spec, cfg.wld))
        if weber is not None:
            blocks.append(_texture_block(img, weber, spec, cfg.wld))
    return blocks


def extract(img: GrayImage, cfg: DescriptorConfig, cog_mode: str = "intensity") -> FeatureVector:
    """Feature vector of cfg: quadrant-major, then scale, then LBP before WLD"""
    if cfg.cog:
        regions = split_quadrants(img, center_of_gravity(img, cog_mode), required_side(cfg))
    else:
        regions = [img]

    blocks: list[FeatureVector] = []
    for region in regions:
        blocks.extend(_region_blocks(region, cfg))
    return FeatureVector.concat(blocks, descriptor=format_descriptor(cfg))


@dataclass(frozen=True)
class ProtocolRow:
    group: int
    row: str
    scale: str
    config: DescriptorConfig
    published: int


_COMBINED = "(8,1)+(16,2)+(24,3)"


def _variants(row: str) -> tuple[DescriptorBase, bool]:
    return {
        "LBP": (DescriptorBase.LBP, False),
        "WLD": (DescriptorBase.WLD, False),
        "riLBP": (DescriptorBase.RILBP, False),
        "WLDRI": (DescriptorBase.WLDRI, False),
        "WeberLBP": (DescriptorBase.LBP, True),
        "riWeberLBP": (DescriptorBase.RILBP, True),
    }[row]


# group -> (cog, combined scales, {row: published sizes})
_PUBLISHED_SIZES: dict[int, tuple[bool, bool, dict[str, tuple[int, ...]]]] = {
    1: (False, False, {"LBP": (59, 243, 555), "WLD": (48, 48, 48), "riLBP": (10, 18, 26), "WLDRI": (48, 48, 48)}),
    2: (False, True, {"LBP": (857,), "WLD": (144,), "riLBP": (54,), "WLDRI": (144,)}),
    3: (True, False, {"LBP": (236, 972, 2220), "WLD": (192, 192, 192), "riLBP": (40, 72, 104), "WLDRI": (192, 192, 192)}),
    4: (True, True, {"LBP": (3428,), "WLD": (576,), "riLBP": (216,), "WLDRI": (576,)}),
    5: (False, False, {"WeberLBP": (117, 291, 603), "riWeberLBP": (58, 66, 74)}),
    # printed with a cog prefix, but the sizes are the plain three-scale sums
    6: (False, True, {"WeberLBP": (1011,), "riWeberLBP": (198,)}),
    7: (True, False, {"WeberLBP": (468, 1164, 2412), "riWeberLBP": (232, 264, 296)}),
    8: (True, True, {"WeberLBP": (4044,), "riWeberLBP": (792,)}),
}


def protocol_matrix() -> list[ProtocolRow]:
    """Every feature-size entry of the published protocol"""
    rows: list[ProtocolRow] = []
    for group, (cog, combined, entries) in _PUBLISHED_SIZES.items():
        for row, sizes in entries.items():
            base, fuse = _variants(row)
            if combined:
                configs = [(_COMBINED, STANDARD_SCALES)]
            else:
                configs = [(f"({s})", (s,)) for s in STANDARD_SCALES]
            for (label, scales), published in zip(configs, sizes):
                cfg = DescriptorConfig(base=base, scales=scales, cog=cog, fuse_weber=fuse)
                rows.append(ProtocolRow(group, ("cog" if cog else "") + row, label, cfg, published))
    return rows


def dimension_ledger() -> list[LedgerEntry]:
    """Published versus computed sizes; the WeberLBP (8,1) family disagrees by 10 per block"""
    ledger: list[LedgerEntry] = []
    for entry in protocol_matrix():
        computed = expected_dimension(entry.config)
        ledger.append(
            LedgerEntry(
                group=entry.group,
                row=entry.row,
                scale=entry.scale,
                descriptor=format_descriptor(entry.config),
                published=entry.published,
                computed=computed,
                discrepancy=computed != entry.published,
            )
        )
    return ledger
