"""Parsing and preparation of gene-phenotype association data.

Associations arrive as a flat gene/phenotype pair list; the phenotype
ontology arrives as parent-child edges (plain TSV or a minimal OBO subset).
Terms get a level equal to the length of the longest path from any root,
with roots at level 1. Splitting by two consecutive levels produces the two
association views plus the parent-child mapping matrix that the joint
factorization consumes.
"""

from __future__ import annotations

import warnings
from collections import defaultdict, deque
from dataclasses import dataclass, field

from scipy import sparse

from .exceptions import (
    CycleError,
    EmptyInputError,
    EmptyViewError,
    LevelError,
    ParseError,
    UnknownTermError,
)
from .matrix import sparse_binary

__all__ = [
    "LabeledAssociations",
    "OntologyHierarchy",
    "SplitViews",
    "build_associations",
    "parse_associations",
    "build_hierarchy",
    "parse_hierarchy",
    "split_by_levels",
    "true_path_enrich",
    "parse_truth_pairs",
    "parse_pathways",
]


@dataclass(frozen=True)
class LabeledAssociations:
    """Deduplicated gene-phenotype pairs with first-seen identifier order."""

    genes: tuple[str, ...]
    phenotypes: tuple[str, ...]
    pairs: frozenset[tuple[str, str]]

    def pairs_of(self, gene: str) -> tuple[str, ...]:
        """Phenotypes annotated to ``gene``, in phenotype registry order."""
        mine = {p for g, p in self.pairs if g == gene}
        return tuple(p for p in self.phenotypes if p in mine)


@dataclass(frozen=True)
class OntologyHierarchy:
    """A DAG of is-a edges with per-term depth.

    ``level[t]`` is the longest-path distance from any root (terms with no
    parent sit at level 1).
    """

    terms: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    level: dict[str, int]
    _parents: dict[str, tuple[str, ...]] = field(repr=False, default_factory=dict)

    def ancestors(self, term: str) -> set[str]:
        """All terms reachable by walking parent edges upward from ``term``."""
        if term not in self.level:
            raise UnknownTermError(term)
        seen: set[str] = set()
        stack = list(self._parents.get(term, ()))
        while stack:
            t = stack.pop()
            if t not in seen:
                seen.add(t)
                stack.extend(self._parents.get(t, ()))
        return seen


@dataclass(frozen=True)
class SplitViews:
    """The two per-level association matrices and their mapping matrix.

    ``a1`` covers phenotypes at the parent level, ``a2`` the child level;
    both share gene rows. ``m[i, j] == 1`` exactly when ``parent_labels[i]``
    is a hierarchy parent of ``child_labels[j]``.
    """

    a1: sparse.csr_array
    a2: sparse.csr_array
    m: sparse.csr_array
    gene_labels: tuple[str, ...]
    parent_labels: tuple[str, ...]
    child_labels: tuple[str, ...]
    dropped_genes: tuple[str, ...] = ()


def build_associations(pair_list) -> LabeledAssociations:
    """Deduplicate an iterable of (gene, phenotype) pairs, keeping order."""
    genes: list[str] = []
    phenos: list[str] = []
    gene_seen: set[str] = set()
    pheno_seen: set[str] = set()
    pairs: set[tuple[str, str]] = set()
    for g, p in pair_list:
        if g not in gene_seen:
            gene_seen.add(g)
            genes.append(g)
        if p not in pheno_seen:
            pheno_seen.add(p)
            phenos.append(p)
        pairs.add((g, p))
    return LabeledAssociations(tuple(genes), tuple(phenos), frozenset(pairs))


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def _split_two_fields(path, lineno, line) -> tuple[str, str]:
    fields = line.split("\t")
    if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
        raise ParseError(
            f"expected two tab-separated fields, got {line!r}", path=path, line=lineno
        )
    return fields[0].strip(), fields[1].strip()


def parse_associations(path) -> LabeledAssociations:
    """Read a ``gene<TAB>phenotype`` file, skipping ``#`` comments."""
    pair_list = [_split_two_fields(path, n, line) for n, line in _data_lines(path)]
    if not pair_list:
        raise EmptyInputError(f"{path}: no association records")
    return build_associations(pair_list)


def build_hierarchy(terms, edges) -> OntologyHierarchy:
    """Assemble a hierarchy from explicit terms and (parent, child) edges.

    Levels are assigned by longest path from a root via a topological sweep;
    a directed cycle raises :class:`CycleError` naming one member.
    """
    terms = tuple(dict.fromkeys(terms))
    term_set = set(terms)
    edge_set = set()
    for parent, child in edges:
        if parent not in term_set:
            raise UnknownTermError(parent)
        if child not in term_set:
            raise UnknownTermError(child)
        edge_set.add((parent, child))

    children: dict[str, list[str]] = defaultdict(list)
    parents: dict[str, list[str]] = defaultdict(list)
    indegree = {t: 0 for t in terms}
    for parent, child in sorted(edge_set):
        children[parent].append(child)
        parents[child].append(parent)
        indegree[child] += 1

    level = {t: 1 for t in terms if indegree[t] == 0}
    queue = deque(t for t in terms if indegree[t] == 0)
    processed = 0
    remaining = dict(indegree)
    while queue:
        t = queue.popleft()
        processed += 1
        for c in children.get(t, ()):
            level[c] = max(level.get(c, 1), level[t] + 1)
            remaining[c] -= 1
            if remaining[c] == 0:
                queue.append(c)
    if processed != len(terms):
        member = next(t for t in terms if remaining[t] > 0)
        raise CycleError(member)

    parent_map = {t: tuple(parents[t]) for t in terms if parents[t]}
    return OntologyHierarchy(terms, frozenset(edge_set), level, parent_map)


def parse_hierarchy(path) -> OntologyHierarchy:
    """Read an ontology from TSV edges, or an OBO subset if ``path`` ends in .obo."""
    if str(path).endswith(".obo"):
        return _parse_obo(path)
    edges = [_split_two_fields(path, n, line) for n, line in _data_lines(path)]
    if not edges:
        raise EmptyInputError(f"{path}: no hierarchy edges")
    terms: list[str] = []
    seen: set[str] = set()
    for parent, child in edges:
        for t in (parent, child):
            if t not in seen:
                seen.add(t)
                terms.append(t)
    return build_hierarchy(terms, edges)


def _parse_obo(path) -> OntologyHierarchy:
    """Minimal OBO reader: only ``[Term]`` stanzas with ``id:`` and ``is_a:`` lines."""
    terms: list[str] = []
    child_of: list[tuple[str, str]] = []  # (parent, child)
    current: str | None = None
    in_term = False
    for lineno, line in _data_lines(path):
        line = line.strip()
        if line.startswith("["):
            in_term = line == "[Term]"
            current = None
            continue
        if not in_term:
            continue
        if line.startswith("id:"):
            current = line[len("id:"):].strip()
            if not current:
                raise ParseError("empty id", path=path, line=lineno)
            terms.append(current)
        elif line.startswith("is_a:"):
            if current is None:
                raise ParseError("is_a before id", path=path, line=lineno)
            target = line[len("is_a:"):].split("!")[0].strip()
            if not target:
                raise ParseError("empty is_a target", path=path, line=lineno)
            child_of.append((target, current))
    if not terms:
        raise EmptyInputError(f"{path}: no [Term] stanzas")
    return build_hierarchy(terms, child_of)


def split_by_levels(
    assoc: LabeledAssociations,
    hier: OntologyHierarchy,
    parent_level: int,
    child_level: int,
) -> SplitViews:
    """Split associations into parent-level and child-level matrices.

    Phenotypes at a requested level with no associated gene are dropped from
    their view and from the mapping matrix. Genes with no association at
    either level are dropped (and reported); genes annotated at only one of
    the two levels are kept with an all-zero row in the other view, since
    the shared gene factor needs aligned rows.
    """
    if child_level != parent_level + 1:
        raise LevelError(
            f"child level must be parent level + 1, got {parent_level} and {child_level}"
        )
    if not any(lv == parent_level for lv in hier.level.values()):
        raise LevelError(f"no hierarchy terms at level {parent_level}")
    if not any(lv == child_level for lv in hier.level.values()):
        raise LevelError(f"no hierarchy terms at level {child_level}")

    parent_labels = tuple(
        p for p in assoc.phenotypes if hier.level.get(p) == parent_level
    )
    child_labels = tuple(
        p for p in assoc.phenotypes if hier.level.get(p) == child_level
    )
    parent_idx = {p: i for i, p in enumerate(parent_labels)}
    child_idx = {p: j for j, p in enumerate(child_labels)}

    by_gene: dict[str, list[str]] = defaultdict(list)
    for g, p in assoc.pairs:
        by_gene[g].append(p)

    gene_labels = []
    dropped = []
    only_one_level = 0
    for g in assoc.genes:
        in_parent = any(p in parent_idx for p in by_gene[g])
        in_child = any(p in child_idx for p in by_gene[g])
        if in_parent or in_child:
            gene_labels.append(g)
            if in_parent != in_child:
                only_one_level += 1
        else:
            dropped.append(g)
    if dropped:
        warnings.warn(
            f"dropped {len(dropped)} gene(s) with no association at level "
            f"{parent_level} or {child_level}"
        )
    if only_one_level:
        warnings.warn(
            f"{only_one_level} gene(s) are annotated at only one of the two "
            "levels and keep an all-zero row in the other view"
        )

    gene_idx = {g: i for i, g in enumerate(gene_labels)}
    a1_pairs = []
    a2_pairs = []
    for g in gene_labels:
        for p in by_gene[g]:
            if p in parent_idx:
                a1_pairs.append((gene_idx[g], parent_idx[p]))
            elif p in child_idx:
                a2_pairs.append((gene_idx[g], child_idx[p]))
    if not gene_labels or not parent_labels or not a1_pairs:
        raise EmptyViewError(f"no associations at parent level {parent_level}")
    if not child_labels or not a2_pairs:
        raise EmptyViewError(f"no associations at child level {child_level}")

    m_pairs = [
        (parent_idx[p], child_idx[c])
        for p, c in hier.edges
        if p in parent_idx and c in child_idx
    ]
    n = len(gene_labels)
    a1 = sparse_binary((n, len(parent_labels)), a1_pairs)
    a2 = sparse_binary((n, len(child_labels)), a2_pairs)
    m = sparse_binary((len(parent_labels), len(child_labels)), m_pairs)
    return SplitViews(
        a1, a2, m, tuple(gene_labels), parent_labels, child_labels, tuple(dropped)
    )


def true_path_enrich(
    assoc: LabeledAssociations, hier: OntologyHierarchy
) -> LabeledAssociations:
    """Propagate every annotation to all ancestor terms (upward closure).

    Idempotent and monotone; raises :class:`UnknownTermError` if an
    annotated phenotype is missing from the hierarchy.
    """
    for p in assoc.phenotypes:
        if p not in hier.level:
            raise UnknownTermError(p)
    term_order = {t: i for i, t in enumerate(hier.terms)}
    closure: dict[str, tuple[str, ...]] = {}
    for p in assoc.phenotypes:
        anc = hier.ancestors(p)
        closure[p] = tuple(sorted(anc, key=term_order.__getitem__))

    pheno_order = {p: i for i, p in enumerate(assoc.phenotypes)}
    by_gene: dict[str, list[str]] = defaultdict(list)
    for g, p in assoc.pairs:
        by_gene[g].append(p)

    pair_list: list[tuple[str, str]] = []
    for g in assoc.genes:
        for p in sorted(by_gene[g], key=pheno_order.__getitem__):
            pair_list.append((g, p))
            pair_list.extend((g, q) for q in closure[p])
    return build_associations(pair_list)


def parse_truth_pairs(path) -> list[tuple[str, str]]:
    """Read a ``geneA<TAB>geneB`` file of unordered ground-truth pairs."""
    pairs = [_split_two_fields(path, n, line) for n, line in _data_lines(path)]
    if not pairs:
        raise EmptyInputError(f"{path}: no gene pairs")
    return pairs


def parse_pathways(path) -> dict[str, set[str]]:
    """Read a ``pathway_id<TAB>gene`` membership file into pathway -> genes."""
    membership: dict[str, set[str]] = {}
    for n, line in _data_lines(path):
        pw, gene = _split_two_fields(path, n, line)
        membership.setdefault(pw, set()).add(gene)
    if not membership:
        raise EmptyInputError(f"{path}: no pathway memberships")
    return membership
