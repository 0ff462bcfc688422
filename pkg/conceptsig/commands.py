"""
Commands are what the command line can be asked to do.
Each subcommand is one Command subclass; main.py builds the parser from
:data:`commands` and calls 'perform' on the chosen one.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Dict, List, Optional, TextIO, Type

import numpy as np  # type: ignore

import experiments
import manifold_factories
import serialization
import tolerances
from algebra import discover_dictionary, intersect, overlap_identity, similarity
from exceptions import ExperimentFailed, MalformedInput
from families import FlattenKind
from hierarchy import Level2Config, hierarchy_score, signature_of_signatures
from manifolds import sample
from point_cloud import PointCloud
from projection import RandomProjection, project, target_dim
from random_mlp import RandomMLP, published_residuals, raw_moment, recover_moment, recover_moment_squared
from report_log import ReportLog
from setup_stream import engine_from_file, load_engine
from signature import FitConfig, fit, membership_scores

logger = logging.getLogger(__name__)


class Command:
    """
    Defines the base class for all commands
    The 'perform' method must be implemented by all subclasses
    """
    name = ""
    help = ""

    def __init__(self, args: argparse.Namespace, stream: Optional[TextIO] = None) -> None:
        """
        :param args: Parsed command line, including the global --seed
        :type args: argparse.Namespace
        :param stream: Where printed results go, defaults to stdout
        :type stream: Optional[TextIO], optional
        """
        self.args = args
        self.stream = stream or sys.stdout

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Declare this command's flags"""

    @property
    def seed(self) -> int:
        return getattr(self.args, "seed", 0)

    def print(self, text: str) -> None:
        self.stream.write(text + "\n")

    def print_json(self, data: object) -> None:
        self.print(json.dumps(data, indent=1, sort_keys=True))

    def perform(self) -> int:
        """Run the command and return its exit code.
        This method must be overridden by Command subclasses.
        """
        raise NotImplementedError()


commands: Dict[str, Type[Command]] = {}


def register(cls: Type[Command]) -> Type[Command]:
    commands[cls.name] = cls
    return cls


def _output(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("-o", "--output", required=required, help="file to write")


@register
class GenCommand(Command):
    name = "gen"
    help = "sample points from a manifold spec"

    @classmethod
    def add_arguments(cls, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument("--spec", help="ManifoldSpec JSON file")
        source.add_argument("--preset", choices=sorted(manifold_factories.presets), help="named generator")
        parser.add_argument("--n", type=int, required=True, help="number of points")
        parser.add_argument("--noise", type=float, default=None, help="override the spec's noise_sigma")
        _output(parser)

    def perform(self):
        if self.args.spec:
            spec = serialization.read_spec(self.args.spec)
            if self.args.noise is not None:
                spec.noise_sigma = self.args.noise
        else:
            spec = manifold_factories.copied(self.args.preset, self.args.noise or 0.0)
        cloud = sample(spec, self.args.n, self.seed)
        serialization.write_cloud(cloud, self.args.output)
        logger.info("wrote %d points of dimension %d to %s", cloud.size, cloud.dim, self.args.output)
        return 0


def _fit_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--degree", type=int, required=True, help="largest monomial degree")
    parser.add_argument("--epsilon", type=float, default=tolerances.default_epsilon, help="threshold of T_eps")
    parser.add_argument("--no-constant", action="store_true", help="leave out the constant monomial")
    parser.add_argument("--scaling", choices=["raw", "bombieri"], default="raw")
    parser.add_argument("--proj", type=int, default=None, help="randomly project to this dimension first")


def _fit_config(args: argparse.Namespace, seed: int) -> FitConfig:
    return FitConfig(
        degree=args.degree,
        epsilon=args.epsilon,
        include_constant=not args.no_constant,
        scaling=args.scaling,
        projection_dim=args.proj,
        seed=seed,
    )


@register
class FitCommand(Command):
    name = "fit"
    help = "fit the signature of a point cloud"

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("--input", required=True, help="point cloud CSV")
        _fit_arguments(parser)
        _output(parser)

    def perform(self):
        sig = fit(serialization.read_cloud(self.args.input), _fit_config(self.args, self.seed))
        serialization.write_signature(sig, self.args.output)
        logger.info("null rank %d, eps rank %d", sig.null_rank, sig.eps_rank)
        return 0


@register
class ScoreCommand(Command):
    name = "score"
    help = "membership score of points under a signature"

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("signature", help="signature JSON")
        points = parser.add_mutually_exclusive_group(required=True)
        points.add_argument("--point", action="append", help="comma separated coordinates, repeatable")
        points.add_argument("--input", help="point cloud CSV")
        parser.add_argument("--eps", action="store_true", help="score against T_eps")

    def perform(self):
        sig = serialization.read_signature(self.args.signature)
        if self.args.input:
            points = serialization.read_cloud(self.args.input).points
        else:
            points = np.array([serialization.parse_point(text) for text in self.args.point])
        for score in membership_scores(sig, points, use_eps=self.args.eps):
            self.print(f"{score:.10g}")
        return 0


@register
class IntersectCommand(Command):
    name = "intersect"
    help = "signature of the intersection of two concepts"

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("first")
        parser.add_argument("second")
        parser.add_argument("--tol", type=float, default=None)
        parser.add_argument("--max-iter", type=int, default=None)
        _output(parser)

    def perform(self):
        meet = intersect(
            serialization.read_signature(self.args.first),
            serialization.read_signature(self.args.second),
            tol=self.args.tol,
            max_iter=self.args.max_iter,
        )
        serialization.write_signature(meet, self.args.output)
        return 0


@register
class SimCommand(Command):
    name = "sim"
    help = "T and F overlaps of two signatures"

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("first")
        parser.add_argument("second")

    def perform(self):
        first = serialization.read_signature(self.args.first)
        second = serialization.read_signature(self.args.second)
        overlap = similarity(first, second)
        self.print_json({
            "t_overlap": overlap.t_overlap,
            "f_overlap": overlap.f_overlap,
            "t_overlap_from_f": overlap_identity(first, second),
        })
        return 0


@register
class DictCommand(Command):
    name = "dict"
    help = "atomic concepts of a set of signatures"

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("signatures", nargs="+", help="signature files or directories")
        parser.add_argument("--tol", type=float, default=None)
        parser.add_argument("--dedup", type=float, default=None, help="dedup threshold")
        _output(parser)

    def perform(self):
        atoms = discover_dictionary(
            serialization.read_signatures(self.args.signatures), tol=self.args.tol, dedup_threshold=self.args.dedup
        )
        os.makedirs(self.args.output, exist_ok=True)
        for i, atom in enumerate(atoms):
            serialization.write_signature(atom, os.path.join(self.args.output, f"atom_{i:03d}.json"))
        self.print(f"{len(atoms)} atoms")
        return 0


@register
class HierCommand(Command):
    name = "hier"
    help = "level-2 signature of a family of signatures"

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("--sigs", nargs="+", required=True, help="signature files or directories")
        parser.add_argument("--degree", type=int, default=2)
        parser.add_argument("--epsilon", type=float, default=tolerances.level2_epsilon)
        parser.add_argument("--proj", type=int, default=tolerances.level2_projection_dim)
        parser.add_argument("--kind", choices=[kind.value for kind in FlattenKind], default=FlattenKind.NULL.value)
        _output(parser)

    def perform(self):
        config = Level2Config(
            degree=self.args.degree,
            epsilon=self.args.epsilon,
            projection_dim=self.args.proj,
            seed=self.seed,
            kind=FlattenKind(self.args.kind),
        )
        concept = signature_of_signatures(serialization.read_signatures(self.args.sigs), config)
        serialization.write_signature(concept, self.args.output)
        return 0


@register
class HierScoreCommand(Command):
    name = "hier-score"
    help = "level-2 membership of a signature"

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("concept")
        parser.add_argument("candidate")
        parser.add_argument("--kind", choices=[kind.value for kind in FlattenKind], default=FlattenKind.NULL.value)
        parser.add_argument("--exact", action="store_true", help="score against T instead of T_eps")

    def perform(self):
        score = hierarchy_score(
            serialization.read_signature(self.args.concept),
            serialization.read_signature(self.args.candidate),
            FlattenKind(self.args.kind),
            use_eps=not self.args.exact,
        )
        self.print(f"{score:.10g}")
        return 0


@register
class StreamCommand(Command):
    name = "stream"
    help = "run points through the layered stream"

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("--config", help="stream configuration JSON, defaults built in")
        parser.add_argument("--input", required=True, help="point cloud CSV, one step per row")
        parser.add_argument("--report", required=True, help="JSON lines report")
        parser.add_argument("--dictionary", help="directory to write the concept dictionaries to")
        parser.add_argument("--load-dictionary", help="directory of dictionaries to start from")
        parser.add_argument("--resume", help="checkpoint to continue from")
        parser.add_argument("--checkpoint", help="file to save the engine to afterwards")

    def perform(self):
        if self.args.resume:
            engine = load_engine(self.args.resume)
        else:
            engine = engine_from_file(self.args.config, self.args.load_dictionary, self.seed)
        reports = engine.run(serialization.read_cloud(self.args.input).points)
        serialization.write_reports(reports, self.args.report)
        if self.args.dictionary:
            serialization.write_dictionaries(engine.layers, self.args.dictionary)
        if self.args.checkpoint:
            engine.save_as(self.args.checkpoint)
        self.print(" ".join(f"layer{layer.index}={len(layer.dictionary)}" for layer in engine.layers))
        return 0


@register
class ProjectCommand(Command):
    name = "project"
    help = "randomly project a point cloud"

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("--input", required=True, help="point cloud CSV")
        parser.add_argument("--dim", type=int, help="output dimension")
        parser.add_argument("--k", type=int, help="manifold dimension, to derive --dim")
        parser.add_argument("--delta", type=float, default=0.05, help="failure probability, to derive --dim")
        parser.add_argument("--distortion", type=float, default=0.5, help="allowed distortion, to derive --dim")
        _output(parser)

    def perform(self):
        if self.args.dim is None:
            if self.args.k is None:
                raise MalformedInput("give --dim or --k", source="project")
            dim = target_dim(self.args.k, self.args.delta, self.args.distortion)
        else:
            dim = self.args.dim
        cloud = serialization.read_cloud(self.args.input)
        serialization.write_cloud(project(RandomProjection(cloud.dim, dim, self.seed), cloud), self.args.output)
        self.print(str(dim))
        return 0


@register
class MlpCheckCommand(Command):
    name = "mlp-check"
    help = "compare moments recovered by a random network with direct ones"

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("--d", type=int, required=True, help="input dimension")
        parser.add_argument("--units", type=int, default=tolerances.mlp_units)
        parser.add_argument("--input", help="point cloud CSV, Gaussian points when missing")
        parser.add_argument("--n", type=int, default=1000, help="number of Gaussian points")

    def perform(self):
        if self.args.input:
            cloud = serialization.read_cloud(self.args.input)
        else:
            cloud = PointCloud(np.random.default_rng(self.seed).standard_normal((self.args.n, self.args.d)))
        net = RandomMLP(self.args.d, self.args.units, self.seed)
        calibration = net.calibrate()
        moment = raw_moment(cloud)
        squared = moment @ moment
        published = published_residuals(self.args.d)
        self.print_json({
            "d": self.args.d,
            "units": self.args.units,
            "moment_error": float(np.linalg.norm(recover_moment(net, cloud) - moment) / np.linalg.norm(moment)),
            "squared_error": float(np.linalg.norm(recover_moment_squared(net, cloud) - squared) / np.linalg.norm(squared)),
            "calibration": {
                "moment": list(calibration.moment),
                "moment_squared": list(calibration.moment_squared),
                "residuals": list(calibration.residuals),
            },
            "published_constants_residuals": list(published),
        })
        return 0


@register
class ReproCommand(Command):
    name = "repro"
    help = "run a named experiment, or 'list' them"

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument("experiment", help="experiment name, 'all' or 'list'")
        _output(parser, required=False)

    def names(self) -> List[str]:
        if self.args.experiment == "all":
            return list(experiments.experiments)
        if self.args.experiment not in experiments.experiments:
            raise MalformedInput(f"unknown experiment {self.args.experiment!r}", source="repro")
        return [self.args.experiment]

    def perform(self):
        if self.args.experiment == "list":
            for name, cls in experiments.experiments.items():
                self.print(f"{name:24s} {cls.summary}")
            return 0
        log = ReportLog()
        outcomes = [experiments.run(name, self.seed, log) for name in self.names()]
        log.render(self.stream)
        if self.args.output:
            with open(self.args.output, "w") as f:
                json.dump([outcome.to_dict() for outcome in outcomes], f, indent=1, sort_keys=True)
                f.write("\n")
        failed = [outcome.name for outcome in outcomes if not outcome.passed]
        if failed:
            raise ExperimentFailed(1)
        return 0
