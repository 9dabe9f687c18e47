import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal, Optional

import numpy as np

if TYPE_CHECKING:
    from scan.engine import EntanglementCurve

logger = logging.getLogger(__name__)

CUSP_THETA = 10.0
MIN_POINTS = 5
# slope changes below this (relative to the curve's own scale) are rounding noise
NOISE_FLOOR = 1e-9

FeatureKind = Literal["maximum", "minimum", "cusp", "slope-jump"]


@dataclass(frozen=True)
class Feature:
    location: float
    kind: FeatureKind
    # E_v at an extremum, |change of slope| at a cusp or slope jump
    magnitude: float
    index: int
    value: float
    # a cusp sitting on an extremum keeps which one it was
    extremum: Optional[str] = None


@dataclass
class FeatureReport:
    features: list[Feature] = field(default_factory=list)
    steepest: Optional[float] = None
    steepest_slope: float = 0.0
    theta: float = CUSP_THETA
    warning: Optional[str] = None

    def of_kind(self, *kinds: FeatureKind) -> list[Feature]:
        return [f for f in self.features if f.kind in kinds]

    def maxima(self) -> list[Feature]:
        return [
            f for f in self.features
            if f.kind == "maximum" or (f.kind == "cusp" and f.extremum == "maximum")
        ]

    def dominant(self) -> Optional[float]:
        """
        Location of the most prominent feature: the highest interior maximum,
        else the largest slope jump, else the midpoint of the steepest segment.
        """
        if peaks := self.maxima():
            return max(peaks, key=lambda f: f.value).location
        if jumps := self.of_kind("cusp", "slope-jump"):
            return max(jumps, key=lambda f: f.magnitude).location
        return self.steepest


def detect_features(curve: "EntanglementCurve", theta: float = CUSP_THETA) -> FeatureReport:
    return find_features(curve.axis_values, curve.ev_values, theta)


def find_features(x: np.ndarray, y: np.ndarray, theta: float = CUSP_THETA) -> FeatureReport:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = np.isfinite(y)
    if not keep.all():
        logger.info("ignoring %d failed points", int(np.sum(~keep)))
    x, y = x[keep], y[keep]

    if len(x) < MIN_POINTS:
        message = f"need at least {MIN_POINTS} points for feature detection, got {len(x)}"
        logger.warning(message)
        return FeatureReport(theta=theta, warning=message)

    slopes = np.diff(y) / np.diff(x)
    steep = int(np.argmax(np.abs(slopes)))
    report = FeatureReport(
        steepest=float(0.5 * (x[steep] + x[steep + 1])),
        steepest_slope=float(slopes[steep]),
        theta=theta,
    )

    # change of slope at every interior point
    kinks = np.abs(np.diff(slopes))
    floor = NOISE_FLOOR * (float(np.max(np.abs(y))) + 1.0) / float(np.min(np.diff(x)))
    threshold = theta * float(np.median(kinks)) + floor

    for i in range(1, len(x) - 1):
        extremum = None
        if y[i] > y[i - 1] and y[i] >= y[i + 1]:
            extremum = "maximum"
        elif y[i] < y[i - 1] and y[i] <= y[i + 1]:
            extremum = "minimum"

        kink = float(kinks[i - 1])
        if kink > threshold:
            kind = "cusp" if extremum else "slope-jump"
            report.features.append(Feature(float(x[i]), kind, kink, i, float(y[i]), extremum))
        elif extremum:
            report.features.append(Feature(float(x[i]), extremum, float(y[i]), i, float(y[i])))

    logger.debug("%d features, steepest segment at %.6g", len(report.features), report.steepest)
    return report
