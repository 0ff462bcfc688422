"""
Module for generating synthetic concepts.
Each ManifoldSpec describes a generator G: R^k -> R^d plus the region of
parameter space z is drawn from; sample() evaluates G on random z and adds
optional Gaussian noise in the ambient space.
"""
from __future__ import annotations

import math
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np  # type: ignore

from exceptions import MalformedInput
from families import TransformFamily
from point_cloud import PointCloud

TWO_PI = 2.0 * math.pi


def _vector(value: Any, name: str) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if array.ndim != 1 or array.size == 0 or not np.all(np.isfinite(array)):
        raise MalformedInput(f"expected a non-empty finite vector, got {value!r}", source=name)
    return array


def _interval(value: Sequence[float], name: str) -> Tuple[float, float]:
    if len(value) != 2 or not float(value[0]) < float(value[1]):
        raise MalformedInput(f"region must be a non-empty interval, got {value!r}", source=name)
    return float(value[0]), float(value[1])


class ManifoldSpec:
    """
    Base class of every generator.

    :param noise_sigma: Standard deviation of additive ambient noise, defaults to 0
    :type noise_sigma: float, optional
    """
    kind = "manifold"

    def __init__(self, noise_sigma: float = 0.0):
        if noise_sigma < 0:
            raise MalformedInput(f"noise_sigma must be non-negative, got {noise_sigma}")
        self.noise_sigma = float(noise_sigma)

    @property
    def dim(self) -> int:
        raise NotImplementedError()

    def generate(self, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, Optional[List[str]]]:
        """Noiseless points and optional labels"""
        raise NotImplementedError()

    def to_dict(self) -> Dict[str, Any]:
        data = {"kind": self.kind, "noise_sigma": self.noise_sigma}
        data.update(self._fields())
        return data

    def _fields(self) -> Dict[str, Any]:
        raise NotImplementedError()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ManifoldSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()


class Subspace(ManifoldSpec):
    """
    offset + z @ basis_vectors with z uniform in a coefficient box

    :param basis_vectors: k x d array, one spanning vector per row
    :type basis_vectors: np.ndarray
    :param offset: Point the subspace passes through, defaults to the origin
    :type offset: Optional[np.ndarray], optional
    :param region: k x 2 box of coefficient intervals, defaults to [-1, 1]^k
    :type region: Optional[Sequence[Sequence[float]]], optional
    """
    kind = "subspace"

    def __init__(
        self,
        basis_vectors: np.ndarray,
        offset: Optional[np.ndarray] = None,
        region: Optional[Sequence[Sequence[float]]] = None,
        noise_sigma: float = 0.0,
    ):
        super().__init__(noise_sigma)
        self.basis_vectors = np.atleast_2d(np.asarray(basis_vectors, dtype=float))
        k, d = self.basis_vectors.shape
        self.offset = np.zeros(d) if offset is None else _vector(offset, "offset")
        if self.offset.size != d:
            raise MalformedInput(f"offset has dimension {self.offset.size}, basis vectors {d}")
        region = [(-1.0, 1.0)] * k if region is None else region
        if len(region) != k:
            raise MalformedInput(f"need {k} region intervals, got {len(region)}", source="region")
        self.region = [_interval(interval, "region") for interval in region]

    @property
    def dim(self) -> int:
        return self.basis_vectors.shape[1]

    def generate(self, n, rng):
        low, high = np.array(self.region).T
        z = rng.uniform(low, high, size=(n, len(self.region)))
        return self.offset + z @ self.basis_vectors, None

    def _fields(self):
        return {
            "basis_vectors": self.basis_vectors.tolist(),
            "offset": self.offset.tolist(),
            "region": [list(interval) for interval in self.region],
        }


class Circle(ManifoldSpec):
    """
    Circle in the plane, sampled on an angle interval.
    With spacing 'even' the angles are equally spaced instead of random.
    """
    kind = "circle"

    def __init__(
        self,
        center: Sequence[float] = (0.0, 0.0),
        radius: float = 1.0,
        region: Sequence[float] = (0.0, TWO_PI),
        spacing: str = "random",
        noise_sigma: float = 0.0,
    ):
        super().__init__(noise_sigma)
        self.center = _vector(center, "center")
        if self.center.size != 2:
            raise MalformedInput("a circle lives in the plane", source="center")
        if radius <= 0:
            raise MalformedInput(f"radius must be positive, got {radius}", source="radius")
        if spacing not in ("random", "even"):
            raise MalformedInput(f"unknown spacing {spacing!r}", source="spacing")
        self.radius = float(radius)
        self.region = _interval(region, "region")
        self.spacing = spacing

    @property
    def dim(self) -> int:
        return 2

    def angles(self, n: int, rng: np.random.Generator) -> np.ndarray:
        start, stop = self.region
        if self.spacing == "even":
            full = stop - start >= TWO_PI - 1e-12
            return np.linspace(start, stop, n, endpoint=not full)
        return rng.uniform(start, stop, size=n)

    def generate(self, n, rng):
        theta = self.angles(n, rng)
        points = self.center + self.radius * np.column_stack([np.cos(theta), np.sin(theta)])
        return points, None

    def _fields(self):
        return {
            "center": self.center.tolist(),
            "radius": self.radius,
            "region": list(self.region),
            "spacing": self.spacing,
        }


class Sphere(ManifoldSpec):
    """
    (dim-1)-sphere in R^dim. region, when given, is the largest angle from
    the +x1 axis, so small values sample a cap.
    """
    kind = "sphere"

    def __init__(
        self,
        center: Sequence[float],
        radius: float = 1.0,
        region: Optional[float] = None,
        noise_sigma: float = 0.0,
    ):
        super().__init__(noise_sigma)
        self.center = _vector(center, "center")
        if radius <= 0:
            raise MalformedInput(f"radius must be positive, got {radius}", source="radius")
        if region is not None and not 0.0 < region <= math.pi:
            raise MalformedInput(f"cap angle must lie in (0, pi], got {region}", source="region")
        self.radius = float(radius)
        self.region = region

    @property
    def dim(self) -> int:
        return self.center.size

    def generate(self, n, rng):
        directions = np.empty((0, self.dim))
        while directions.shape[0] < n:
            draw = rng.standard_normal((2 * n, self.dim))
            draw /= np.linalg.norm(draw, axis=1, keepdims=True)
            if self.region is not None:
                draw = draw[draw[:, 0] >= math.cos(self.region)]
            directions = np.vstack([directions, draw])
        return self.center + self.radius * directions[:n], None

    def _fields(self):
        return {"center": self.center.tolist(), "radius": self.radius, "region": self.region}


class PolyGenerator(ManifoldSpec):
    """
    Polynomial map G(z) = sum_a coefficient_a * z^a from R^k to R^d

    :param terms: Map from exponent tuple (length k) to a coefficient vector (length d)
    :type terms: Mapping[Tuple[int, ...], Sequence[float]]
    :param region: k x 2 box z is drawn from, defaults to [-1, 1]^k
    :type region: Optional[Sequence[Sequence[float]]], optional
    """
    kind = "poly"

    def __init__(
        self,
        terms: Mapping[Tuple[int, ...], Sequence[float]],
        region: Optional[Sequence[Sequence[float]]] = None,
        noise_sigma: float = 0.0,
    ):
        super().__init__(noise_sigma)
        if not terms:
            raise MalformedInput("generator has no terms", source="terms")
        self.terms = {tuple(int(p) for p in key): _vector(value, "terms") for key, value in terms.items()}
        lengths = {len(key) for key in self.terms}
        dims = {value.size for value in self.terms.values()}
        if len(lengths) != 1 or len(dims) != 1:
            raise MalformedInput("all terms need the same latent and ambient dimension", source="terms")
        self.k = lengths.pop()
        self._dim = dims.pop()
        self.r = max(sum(key) for key in self.terms)
        if self.r < 1:
            raise MalformedInput("generator degree must be at least 1", source="terms")
        region = [(-1.0, 1.0)] * self.k if region is None else region
        if len(region) != self.k:
            raise MalformedInput(f"need {self.k} region intervals", source="region")
        self.region = [_interval(interval, "region") for interval in region]

    @property
    def dim(self) -> int:
        return self._dim

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        """G at each row of z"""
        z = np.atleast_2d(z)
        points = np.zeros((z.shape[0], self._dim))
        for exponents, coefficient in self.terms.items():
            points += np.prod(z ** np.array(exponents), axis=1)[:, None] * coefficient
        return points

    def generate(self, n, rng):
        low, high = np.array(self.region).T
        return self.evaluate(rng.uniform(low, high, size=(n, self.k))), None

    def _fields(self):
        return {
            "terms": [{"exponents": list(key), "coefficient": value.tolist()} for key, value in self.terms.items()],
            "region": [list(interval) for interval in self.region],
        }


class Segment(ManifoldSpec):
    """Straight segment between two endpoints"""
    kind = "segment"

    def __init__(
        self,
        start: Sequence[float],
        end: Sequence[float],
        region: Sequence[float] = (0.0, 1.0),
        noise_sigma: float = 0.0,
    ):
        super().__init__(noise_sigma)
        self.start = _vector(start, "start")
        self.end = _vector(end, "end")
        if self.start.size != self.end.size:
            raise MalformedInput("endpoints differ in dimension")
        if np.allclose(self.start, self.end):
            raise MalformedInput("segment endpoints coincide")
        self.region = _interval(region, "region")

    @property
    def dim(self) -> int:
        return self.start.size

    def generate(self, n, rng):
        t = rng.uniform(*self.region, size=n)
        return self.start + t[:, None] * (self.end - self.start), None

    def _fields(self):
        return {"start": self.start.tolist(), "end": self.end.tolist(), "region": list(self.region)}


class Union(ManifoldSpec):
    """
    Several parts sampled together, each point labelled with its part.
    Points are split as evenly as possible, earlier parts take the remainder.
    Each part keeps its own noise, the union's noise comes on top.
    """
    kind = "union"

    def __init__(
        self,
        parts: Sequence[ManifoldSpec],
        labels: Optional[Sequence[str]] = None,
        noise_sigma: float = 0.0,
    ):
        super().__init__(noise_sigma)
        if not parts:
            raise MalformedInput("a union needs at least one part", source="parts")
        if len({part.dim for part in parts}) != 1:
            raise MalformedInput("union parts differ in dimension", source="parts")
        self.parts = list(parts)
        self.labels = [f"part{i}" for i in range(len(parts))] if labels is None else [str(label) for label in labels]
        if len(self.labels) != len(self.parts):
            raise MalformedInput("one label per part", source="labels")

    @property
    def dim(self) -> int:
        return self.parts[0].dim

    def counts(self, n: int) -> List[int]:
        share, extra = divmod(n, len(self.parts))
        return [share + (1 if i < extra else 0) for i in range(len(self.parts))]

    def generate(self, n, rng):
        points, labels = [], []
        for part, label, count in zip(self.parts, self.labels, self.counts(n)):
            if count == 0:
                continue
            part_points, _ = part.generate(count, rng)
            if part.noise_sigma > 0:
                part_points = part_points + rng.normal(0.0, part.noise_sigma, size=part_points.shape)
            points.append(part_points)
            labels.extend([label] * count)
        return np.vstack(points), labels

    def _fields(self):
        return {"parts": [part.to_dict() for part in self.parts], "labels": list(self.labels)}


class Trajectory(ManifoldSpec):
    """
    Path p + integral of v(t) with v(t) = sum_j velocity[j] t^j, with a
    constant 1 coordinate appended to every position. Times are equally
    spaced over region.
    """
    kind = "trajectory"

    def __init__(
        self,
        initial_point: Sequence[float],
        velocity: Sequence[Sequence[float]],
        region: Sequence[float] = (0.0, 1.0),
        noise_sigma: float = 0.0,
    ):
        super().__init__(noise_sigma)
        self.initial_point = _vector(initial_point, "initial_point")
        self.velocity = np.atleast_2d(np.asarray(velocity, dtype=float))
        if self.velocity.shape[1] != self.initial_point.size:
            raise MalformedInput("velocity and initial point differ in dimension", source="velocity")
        self.region = _interval(region, "region")

    @property
    def velocity_degree(self) -> int:
        return self.velocity.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.initial_point.size + 1

    def positions(self, t: np.ndarray) -> np.ndarray:
        powers = np.arange(1, self.velocity.shape[0] + 1)
        weights = t[:, None] ** powers / powers
        return self.initial_point + weights @ self.velocity

    def generate(self, n, rng):
        t = np.linspace(*self.region, n)
        positions = self.positions(t)
        return np.column_stack([positions, np.ones(n)]), None

    def _fields(self):
        return {
            "initial_point": self.initial_point.tolist(),
            "velocity": self.velocity.tolist(),
            "region": list(self.region),
        }


class Transformed(ManifoldSpec):
    """
    Images of a base cloud under random members of a transform family.
    Each sampled point is a random base point moved by a random parameter.
    region is (low, high) for rotations and ((u_low, u_high), (v_low, v_high))
    for translations.
    """
    kind = "transform"

    def __init__(
        self,
        base: PointCloud,
        family: TransformFamily,
        region: Sequence[Any],
        noise_sigma: float = 0.0,
    ):
        super().__init__(noise_sigma)
        if base.dim < 2:
            raise MalformedInput("transforms act on the first two coordinates", source="base")
        self.base = base
        self.family = TransformFamily(family)
        if self.family is TransformFamily.ROTATION:
            self.region: Any = _interval(region, "region")
        else:
            if len(region) != 2:
                raise MalformedInput("translation region needs a u and a v interval", source="region")
            self.region = (_interval(region[0], "region.u"), _interval(region[1], "region.v"))

    @property
    def dim(self) -> int:
        return self.base.dim

    def generate(self, n, rng):
        rows = self.base.points[rng.integers(0, self.base.size, size=n)]
        if self.family is TransformFamily.ROTATION:
            return rotate(rows, rng.uniform(*self.region, size=n)), None
        u = rng.uniform(*self.region[0], size=n)
        v = rng.uniform(*self.region[1], size=n)
        return translate(rows, u, v), None

    def _fields(self):
        region = list(self.region) if self.family is TransformFamily.ROTATION else [list(r) for r in self.region]
        return {"base": self.base.points.tolist(), "family": self.family.value, "region": region}


def sample(spec: ManifoldSpec, n: int, seed: int) -> PointCloud:
    """
    Draw n points of the spec

    :param spec: Generator to sample
    :type spec: ManifoldSpec
    :param n: Number of points, at least 1
    :type n: int
    :param seed: Seed for numpy.random.default_rng
    :type seed: int
    :return: The labelled (for unions) cloud
    :rtype: PointCloud
    """
    if n < 1:
        raise MalformedInput(f"need at least one point, got n={n}")
    rng = np.random.default_rng(seed)
    points, labels = spec.generate(n, rng)
    if spec.noise_sigma > 0:
        points = points + rng.normal(0.0, spec.noise_sigma, size=points.shape)
    return PointCloud(points, labels)


def rectangle(center: Sequence[float], width: float, height: float, noise_sigma: float = 0.0) -> Union:
    """
    Axis-aligned rectangle as the union of its four sides

    :param center: Center of the rectangle
    :type center: Sequence[float]
    :param width: Extent along x1
    :type width: float
    :param height: Extent along x2
    :type height: float
    :return: Union labelled bottom, right, top, left
    :rtype: Union
    """
    if width <= 0 or height <= 0:
        raise MalformedInput(f"rectangle sides must be positive, got {width} x {height}")
    cx, cy = center
    x1, x2 = cx - width / 2.0, cx + width / 2.0
    y1, y2 = cy - height / 2.0, cy + height / 2.0
    sides = [
        Segment((x1, y1), (x2, y1)),
        Segment((x2, y1), (x2, y2)),
        Segment((x2, y2), (x1, y2)),
        Segment((x1, y2), (x1, y1)),
    ]
    return Union(sides, labels=["bottom", "right", "top", "left"], noise_sigma=noise_sigma)


def trajectory_cloud(
    points: Sequence[Sequence[float]],
    velocity: Sequence[Sequence[float]],
    t_samples: int,
    t_max: float = 1.0,
) -> List[PointCloud]:
    """
    One 1-appended trajectory cloud per starting point, all moving with the
    same velocity polynomial

    :param points: Starting positions
    :type points: Sequence[Sequence[float]]
    :param velocity: Coefficient vectors of v(t), constant term first
    :type velocity: Sequence[Sequence[float]]
    :param t_samples: Number of times, at least degree(v) + 2
    :type t_samples: int
    :param t_max: Last time, the first is 0, defaults to 1.0
    :type t_max: float, optional
    :return: One cloud per object
    :rtype: List[PointCloud]
    """
    clouds = []
    for point in points:
        spec = Trajectory(point, velocity, region=(0.0, t_max))
        if t_samples < spec.velocity_degree + 2:
            raise MalformedInput(
                f"need at least {spec.velocity_degree + 2} time samples, got {t_samples}", source="t_samples"
            )
        clouds.append(sample(spec, t_samples, seed=0))
    return clouds


def rotate(points: np.ndarray, theta: Any) -> np.ndarray:
    """
    x' = x cos + y sin, y' = -x sin + y cos on the first two columns.
    theta is a scalar or one angle per row.
    """
    cos, sin = np.cos(theta), np.sin(theta)
    moved = np.array(points, dtype=float, copy=True)
    moved[:, 0] = points[:, 0] * cos + points[:, 1] * sin
    moved[:, 1] = -points[:, 0] * sin + points[:, 1] * cos
    return moved


def translate(points: np.ndarray, u: Any, v: Any) -> np.ndarray:
    moved = np.array(points, dtype=float, copy=True)
    moved[:, 0] += u
    moved[:, 1] += v
    return moved


def transform_family(base: PointCloud, family: TransformFamily, params: Sequence[Any]) -> List[PointCloud]:
    """
    One transformed copy of base per parameter. Columns past the first two
    are passed through unchanged.

    :param base: Cloud whose first two columns are positions
    :type base: PointCloud
    :param family: Rotation (params are angles) or translation (params are (u, v))
    :type family: TransformFamily
    :param params: One parameter per output cloud
    :type params: Sequence[Any]
    :return: Transformed clouds, in parameter order
    :rtype: List[PointCloud]
    """
    if base.dim < 2:
        raise MalformedInput("transforms act on the first two coordinates")
    family = TransformFamily(family)
    if family is TransformFamily.ROTATION:
        return [base.with_points(rotate(base.points, float(theta))) for theta in params]
    return [base.with_points(translate(base.points, float(u), float(v))) for u, v in params]


def from_dict(data: Mapping[str, Any]) -> ManifoldSpec:
    """Rebuild a spec from its JSON description"""
    try:
        kind = data["kind"]
        noise = float(data.get("noise_sigma", 0.0))
        if kind == "subspace":
            return Subspace(data["basis_vectors"], data.get("offset"), data.get("region"), noise)
        if kind == "circle":
            return Circle(
                data.get("center", (0.0, 0.0)),
                data.get("radius", 1.0),
                data.get("region", (0.0, TWO_PI)),
                data.get("spacing", "random"),
                noise,
            )
        if kind == "sphere":
            return Sphere(data["center"], data.get("radius", 1.0), data.get("region"), noise)
        if kind == "poly":
            terms = {tuple(term["exponents"]): term["coefficient"] for term in data["terms"]}
            return PolyGenerator(terms, data.get("region"), noise)
        if kind == "segment":
            return Segment(data["start"], data["end"], data.get("region", (0.0, 1.0)), noise)
        if kind == "union":
            return Union([from_dict(part) for part in data["parts"]], data.get("labels"), noise)
        if kind == "trajectory":
            return Trajectory(data["initial_point"], data["velocity"], data.get("region", (0.0, 1.0)), noise)
        if kind == "transform":
            return Transformed(PointCloud(data["base"]), TransformFamily(data["family"]), data["region"], noise)
    except KeyError as exc:
        raise MalformedInput(f"missing field {exc.args[0]!r}", source="spec")
    except (TypeError, ValueError) as exc:
        raise MalformedInput(str(exc), source="spec")
    raise MalformedInput(f"unknown manifold kind {data.get('kind')!r}", source="spec.kind")
