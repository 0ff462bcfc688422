"""
Calculus over signatures: similarity, intersection, inclusion and the
discovery of atomic concepts by repeated intersection.

F = I - T projects onto the polynomials that do not vanish on a concept.
The intersection of two concepts is the limit of alternating matrix
products of their F projectors.
"""
import logging
from typing import List, NamedTuple, Optional, Sequence

import numpy as np  # type: ignore
import scipy.linalg  # type: ignore

import tolerances
from exceptions import IntersectionNotConverged, MalformedInput, NotSingleEquation
from signature import MomentMatrix, Signature

logger = logging.getLogger(__name__)


class Overlap(NamedTuple):
    t_overlap: float
    f_overlap: float


def _require_same_basis(sig1: Signature, sig2: Signature) -> None:
    if sig1.basis != sig2.basis:
        raise MalformedInput(f"signatures use different bases: {sig1.basis!r} and {sig2.basis!r}")


def complement(sig: Signature) -> np.ndarray:
    """F = I - T"""
    return sig.complement()


def similarity(sig1: Signature, sig2: Signature) -> Overlap:
    """
    Frobenius overlaps of the two null projectors and of the two complements

    :raises MalformedInput: When the bases differ
    :return: (T1.T2, F1.F2)
    :rtype: Overlap
    """
    _require_same_basis(sig1, sig2)
    t_overlap = float(np.sum(sig1.null_projector * sig2.null_projector))
    f_overlap = float(np.sum(sig1.complement() * sig2.complement()))
    return Overlap(max(t_overlap, 0.0), max(f_overlap, 0.0))


def overlap_identity(sig1: Signature, sig2: Signature) -> float:
    """T1.T2 predicted from the complements: F1.F2 + m - rank F1 - rank F2."""
    _require_same_basis(sig1, sig2)
    f_overlap = similarity(sig1, sig2).f_overlap
    m = sig1.size
    return f_overlap + m - (m - sig1.null_rank) - (m - sig2.null_rank)


def coefficient_similarity(sig1: Signature, sig2: Signature) -> float:
    """
    (c1 . c2)^2 for the unit null vectors of two single-equation concepts

    :raises NotSingleEquation: When either null rank is not 1
    :return: Value in [0, 1]
    :rtype: float
    """
    _require_same_basis(sig1, sig2)
    for sig in (sig1, sig2):
        if sig.null_rank != 1:
            raise NotSingleEquation(f"not a single-equation manifold, null rank is {sig.null_rank}")
    c1 = sig1.null_vectors()[:, 0]
    c2 = sig2.null_vectors()[:, 0]
    return float(np.dot(c1, c2) ** 2)


def _from_complement(template: Signature, f_projector: np.ndarray, source: str = "") -> Signature:
    """Signature whose T is I - F, with F standing in for the moment matrix"""
    m = template.size
    eigenvalues = scipy.linalg.eigvalsh(f_projector)
    rank = int(np.sum(eigenvalues > 0.5))
    null = np.eye(m) - f_projector
    return Signature(
        basis=template.basis,
        moment=MomentMatrix(f_projector, template.basis),
        singular_values=np.clip(eigenvalues[::-1], 0.0, None),
        null_projector=null,
        eps_projector=null.copy(),
        epsilon=template.epsilon,
        null_rank=m - rank,
        eps_rank=m - rank,
        projection=template.projection,
        source=source,
    )


def intersect(
    sig1: Signature,
    sig2: Signature,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> Signature:
    """
    Signature of the intersection of two concepts. Iterates
    P <- F1 P F1, P <- F2 P F2 from P = I until the update is below tol,
    then rounds the eigenvalues of the limit at 0.5.

    :param sig1: First concept
    :type sig1: Signature
    :param sig2: Second concept
    :type sig2: Signature
    :param tol: Frobenius stopping tolerance, defaults to tolerances.intersect_tol
    :type tol: Optional[float], optional
    :param max_iter: Iteration cap, defaults to tolerances.intersect_max_iter
    :type max_iter: Optional[int], optional
    :raises IntersectionNotConverged: When the cap is reached first
    :return: Signature with F = projector onto range(F1) and range(F2)
    :rtype: Signature
    """
    _require_same_basis(sig1, sig2)
    tol = tolerances.intersect_tol if tol is None else tol
    max_iter = tolerances.intersect_max_iter if max_iter is None else max_iter
    f1 = sig1.complement()
    f2 = sig2.complement()

    current = np.eye(sig1.size)
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        updated = f1 @ current @ f1
        updated = f2 @ updated @ f2
        updated = (updated + updated.T) / 2.0
        residual = float(np.linalg.norm(updated - current))
        current = updated
        if residual <= tol:
            break
    else:
        raise IntersectionNotConverged(residual, max_iter)

    eigenvalues, eigenvectors = scipy.linalg.eigh(current)
    unsure = (eigenvalues > tolerances.rounding_warn_low) & (eigenvalues < tolerances.rounding_warn_high)
    if np.any(unsure):
        logger.warning(
            "ill-separated intersection, eigenvalues %s rounded at 0.5",
            np.array2string(eigenvalues[unsure], precision=3),
        )
    kept = eigenvectors[:, eigenvalues > 0.5]
    logger.debug("intersection converged after %d iterations, rank %d", iteration, kept.shape[1])
    return _from_complement(sig1, kept @ kept.T)


def subset_check(sig_outer: Signature, sig_inner: Signature, tol: Optional[float] = None) -> bool:
    """True when range(F_inner) lies inside range(F_outer), i.e. F_O F_V == F_V"""
    _require_same_basis(sig_outer, sig_inner)
    tol = tolerances.subset_tol if tol is None else tol
    f_outer = sig_outer.complement()
    f_inner = sig_inner.complement()
    return float(np.linalg.norm(f_outer @ f_inner - f_inner)) <= tol


def _same_concept(sig1: Signature, sig2: Signature, threshold: float) -> bool:
    return float(np.linalg.norm(sig1.null_projector - sig2.null_projector)) <= threshold


def _complement_rank(sig: Signature) -> int:
    return sig.size - sig.null_rank


def discover_dictionary(
    sigs: Sequence[Signature],
    tol: Optional[float] = None,
    dedup_threshold: Optional[float] = None,
    max_iter: Optional[int] = None,
    max_rounds: int = 8,
) -> List[Signature]:
    """
    Atomic concepts hidden in a set of (union) concepts.

    Inputs are deduplicated, then closed under pairwise intersection,
    dropping empty intersections and results equal to something already
    known. The atoms are the maximal derived intersections together with
    the inputs that contain no smaller known concept. Order follows the
    inputs, then the order in which intersections were found.

    :param sigs: Signatures on a common basis
    :type sigs: Sequence[Signature]
    :param tol: Stopping tolerance handed to :func:`intersect`
    :type tol: Optional[float], optional
    :param dedup_threshold: Frobenius distance under which two concepts are the same
    :type dedup_threshold: Optional[float], optional
    :param max_iter: Iteration cap handed to :func:`intersect`
    :type max_iter: Optional[int], optional
    :param max_rounds: Closure rounds before giving up on new elements, defaults to 8
    :type max_rounds: int, optional
    :return: Atomic signatures
    :rtype: List[Signature]
    """
    if not sigs:
        raise MalformedInput("no signatures to discover atoms from")
    for sig in sigs[1:]:
        _require_same_basis(sigs[0], sig)
    threshold = tolerances.dedup_threshold if dedup_threshold is None else dedup_threshold
    subset_tol = max(tolerances.subset_tol, threshold)

    def known(candidate: Signature, pool: Sequence[Signature]) -> bool:
        return any(_same_concept(candidate, other, threshold) for other in pool)

    inputs: List[Signature] = []
    for sig in sigs:
        if not known(sig, inputs):
            inputs.append(sig)
    if len(inputs) == 1:
        return inputs

    derived: List[Signature] = []
    tried = set()
    for round_number in range(max_rounds):
        pool = inputs + derived
        found = []
        for i in range(len(pool)):
            for j in range(i + 1, len(pool)):
                if (i, j) in tried:
                    continue
                tried.add((i, j))
                try:
                    candidate = intersect(pool[i], pool[j], tol=tol, max_iter=max_iter)
                except IntersectionNotConverged as exc:
                    logger.warning("skipping pair (%d, %d): %s", i, j, exc)
                    continue
                if _complement_rank(candidate) == 0:
                    continue
                if known(candidate, pool + found):
                    continue
                candidate.source = f"{pool[i].source or i}&{pool[j].source or j}"
                found.append(candidate)
        if not found:
            break
        derived.extend(found)
        logger.debug("closure round %d added %d concepts", round_number, len(found))
    else:
        logger.warning("closure still growing after %d rounds, stopping", max_rounds)

    def strictly_inside(inner: Signature, outer: Signature) -> bool:
        return not _same_concept(inner, outer, threshold) and subset_check(outer, inner, subset_tol)

    atoms = [
        sig
        for sig in derived
        if not any(strictly_inside(sig, other) for other in derived)
    ]
    known_concepts = inputs + derived
    atoms = [
        sig
        for sig in inputs
        if not any(strictly_inside(other, sig) for other in known_concepts)
    ] + atoms
    logger.info("%d inputs, %d intersections, %d atoms", len(inputs), len(derived), len(atoms))
    return atoms
