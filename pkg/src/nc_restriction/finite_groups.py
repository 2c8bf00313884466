"""
Finite Groups Module

This script defines finite groups stored as explicit multiplication tables together with the
subsets, subgroup embeddings and quotients that the exact computations are built on.
Groups are constructed from descriptors such as "cyclic:8", "dihedral:6", "heisenberg:3"
and "product:cyclic:2,dihedral:3".

Element orderings are canonical per constructor:
    - cyclic N: index k is the residue k mod N.
    - dihedral N (order 2N): index k is r^k and index N + k is r^k s, with s r s = r^-1.
    - heisenberg N (order N^3): index (x * N + y) * N + z is the upper triangular triple (x, y, z) mod N,
      multiplied as (x, y, z)(x', y', z') = (x + x', y + y', z + z' + x y').
    - product A,B: index a * |B| + b is the pair (a, b).

"""

import functools
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)

MAX_ORDER = 4096
EXHAUSTIVE_ASSOCIATIVITY_ORDER = 64
SAMPLED_ASSOCIATIVITY_TRIPLES = 20000


class MalformedDescriptorError(Exception):
    """Exception raised when a group or subset descriptor cannot be parsed"""


class GroupOrderOverflowError(Exception):
    """Exception raised when a group would exceed the maximal supported order"""


class GroupTableError(Exception):
    """Exception raised when a multiplication table violates a group axiom"""


class ElementNotFoundError(Exception):
    """Exception raised when an element index does not belong to the group"""


class NotASubgroupError(Exception):
    """Exception raised when a subset is not closed under the group operations"""


class NotNormalError(Exception):
    """Exception raised when a subgroup is not normal"""


class NotSymmetricError(Exception):
    """Exception raised when a subset is required to be symmetric but is not"""


class EmptySubsetError(Exception):
    """Exception raised when a subset is required to be nonempty"""


class ParentMismatchError(Exception):
    """Exception raised when two objects live on different groups"""


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """
    A finite group given by its multiplication table.

    Attributes:
        mul: N x N table, mul[a, b] is the index of the product ab.
        inv: length N table of inverses.
        identity: index of the identity element.
        label: descriptor the group was built from.
        generators: generating elements used for word balls and word lengths.
    """

    mul: np.ndarray
    inv: np.ndarray
    identity: int
    label: str
    generators: Tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        mul = np.array(self.mul, dtype=np.int64)
        inv = np.array(self.inv, dtype=np.int64)
        order = mul.shape[0] if mul.ndim == 2 else 0

        # 1. table shape and order limit
        if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or order == 0:
            raise GroupTableError("The multiplication table must be a nonempty square table.")
        if order > MAX_ORDER:
            raise GroupOrderOverflowError(f"Group order {order} exceeds the maximum of {MAX_ORDER}.")
        if inv.shape != (order,):
            raise GroupTableError("The inverse table does not match the order of the group.")

        # 2. every row and column is a permutation of 0..N-1
        expected = np.arange(order)
        if not (np.all(np.sort(mul, axis=1) == expected) and np.all(np.sort(mul, axis=0) == expected[:, None])):
            raise GroupTableError("Rows and columns of the multiplication table must be permutations.")

        # 3. identity and inverses
        if not 0 <= self.identity < order:
            raise ElementNotFoundError("The identity index is not an element of the group.")
        if not (np.all(mul[self.identity] == expected) and np.all(mul[:, self.identity] == expected)):
            raise GroupTableError("The identity element does not act trivially.")
        if not np.all(mul[expected, inv] == self.identity):
            raise GroupTableError("The inverse table does not invert every element.")

        # 4. associativity, exhaustive for small groups and sampled otherwise
        if order <= EXHAUSTIVE_ASSOCIATIVITY_ORDER:
            left = mul[mul[:, :, None], expected[None, None, :]]
            right = mul[expected[:, None, None], mul[None, :, :]]
        else:
            rng = np.random.default_rng(order)
            x, y, z = rng.integers(0, order, size=(3, SAMPLED_ASSOCIATIVITY_TRIPLES))
            left = mul[mul[x, y], z]
            right = mul[x, mul[y, z]]
        if not np.array_equal(left, right):
            raise GroupTableError("The multiplication table is not associative.")

        for generator in self.generators:
            if not 0 <= generator < order:
                raise ElementNotFoundError(f"Generator {generator} is not an element of the group.")

        mul.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "mul", mul)
        object.__setattr__(self, "inv", inv)
        object.__setattr__(self, "identity", int(self.identity))
        object.__setattr__(self, "generators", tuple(int(g) for g in self.generators))

    @property
    def order(self) -> int:
        """Number of elements"""
        return int(self.mul.shape[0])

    def multiply(self, a: int, b: int) -> int:
        """Index of the product ab"""
        return int(self.mul[a, b])

    def inverse(self, a: int) -> int:
        """Index of the inverse of a"""
        return int(self.inv[a])

    def conjugate(self, s: int, t: int) -> int:
        """Index of s t s^-1"""
        return int(self.mul[self.mul[s, t], self.inv[s]])

    @functools.cached_property
    def is_abelian(self) -> bool:
        """True when the multiplication table is symmetric"""
        return bool(np.array_equal(self.mul, self.mul.T))

    def center(self) -> "GroupSubset":
        """Elements commuting with every element of the group"""
        members = np.flatnonzero(np.all(self.mul == self.mul.T, axis=1))
        return GroupSubset(self, tuple(members.tolist()))

    def element_order(self, a: int) -> int:
        """Smallest k >= 1 with a^k = e"""
        power, k = a, 1
        while power != self.identity:
            power = int(self.mul[power, a])
            k += 1
        return k


def same_group(first: FiniteGroup, second: FiniteGroup) -> bool:
    """True when both objects describe the same multiplication table."""
    if first is second:
        return True
    return (
        first.order == second.order
        and first.identity == second.identity
        and np.array_equal(first.mul, second.mul)
    )


def require_same_group(first: FiniteGroup, second: FiniteGroup) -> None:
    """Raise ParentMismatchError unless both groups coincide."""
    if not same_group(first, second):
        raise ParentMismatchError(f"Objects live on different groups ({first.label} and {second.label}).")


####################
# GROUP BUILDERS   #
####################


def _check_order(order: int, descriptor: str) -> None:
    if order > MAX_ORDER:
        raise GroupOrderOverflowError(f"{descriptor} has order {order}, the maximum is {MAX_ORDER}.")
    if order < 1:
        raise MalformedDescriptorError(f"{descriptor} does not describe a nonempty group.")


def cyclic_group(n: int) -> FiniteGroup:
    """The cyclic group Z_n."""
    _check_order(n, f"cyclic:{n}")
    elements = np.arange(n)
    mul = (elements[:, None] + elements[None, :]) % n
    inv = (-elements) % n
    return FiniteGroup(mul, inv, 0, f"cyclic:{n}", (1,) if n > 1 else ())


def dihedral_group(n: int) -> FiniteGroup:
    """The dihedral group of order 2n generated by a rotation r and a reflection s."""
    _check_order(2 * n, f"dihedral:{n}")
    elements = np.arange(2 * n)
    rotation, flip = elements % n, elements // n
    sign = np.where(flip == 0, 1, -1)
    new_rotation = (rotation[:, None] + sign[:, None] * rotation[None, :]) % n
    new_flip = flip[:, None] ^ flip[None, :]
    mul = new_flip * n + new_rotation
    inv = np.where(flip == 0, (-rotation) % n, elements)
    generators = (1, n) if n > 1 else (n,)
    return FiniteGroup(mul, inv, 0, f"dihedral:{n}", generators)


def heisenberg_group(n: int) -> FiniteGroup:
    """Upper triangular unipotent 3 x 3 matrices over Z_n."""
    _check_order(n**3, f"heisenberg:{n}")
    elements = np.arange(n**3)
    x, y, z = elements // (n * n), (elements // n) % n, elements % n
    new_x = (x[:, None] + x[None, :]) % n
    new_y = (y[:, None] + y[None, :]) % n
    new_z = (z[:, None] + z[None, :] + x[:, None] * y[None, :]) % n
    mul = (new_x * n + new_y) * n + new_z
    inv = (((-x) % n) * n + (-y) % n) * n + (-z + x * y) % n
    generators = (n * n, n) if n > 1 else ()
    return FiniteGroup(mul, inv, 0, f"heisenberg:{n}", generators)


def direct_product(first: FiniteGroup, second: FiniteGroup) -> FiniteGroup:
    """The direct product with element (a, b) stored at index a * |second| + b."""
    label = f"product:{first.label},{second.label}"
    _check_order(first.order * second.order, label)
    size = second.order
    elements = np.arange(first.order * size)
    a, b = elements // size, elements % size
    mul = first.mul[a[:, None], a[None, :]] * size + second.mul[b[:, None], b[None, :]]
    inv = first.inv[a] * size + second.inv[b]
    generators = tuple(g * size + second.identity for g in first.generators) + tuple(
        first.identity * size + h for h in second.generators
    )
    return FiniteGroup(mul, inv, first.identity * size + second.identity, label, generators)


_CONSTRUCTORS = {
    "cyclic": cyclic_group,
    "dihedral": dihedral_group,
    "heisenberg": heisenberg_group,
}


def build_group(descriptor: str) -> FiniteGroup:
    """
    Build a finite group from its descriptor.

    Nested products are written in the right-hand factor, e.g. "product:cyclic:2,product:cyclic:2,cyclic:3".

    Args:
        descriptor (str): "cyclic:N", "dihedral:N", "heisenberg:N" or "product:A,B".

    Returns:
        FiniteGroup: the validated group.

    Raises:
        MalformedDescriptorError: the descriptor cannot be parsed.
        GroupOrderOverflowError: the group would exceed 4096 elements.
    """
    kind, separator, argument = descriptor.strip().partition(":")
    if not separator:
        raise MalformedDescriptorError(f"Group descriptor '{descriptor}' has no ':' separator.")
    if kind == "product":
        left, comma, right = argument.partition(",")
        if not comma or not left or not right:
            raise MalformedDescriptorError(f"Product descriptor '{descriptor}' needs two factors.")
        return direct_product(build_group(left), build_group(right))
    if kind not in _CONSTRUCTORS:
        raise MalformedDescriptorError(f"Unknown group family '{kind}' in '{descriptor}'.")
    try:
        size = int(argument)
    except ValueError as error:
        raise MalformedDescriptorError(f"'{argument}' is not an integer in '{descriptor}'.") from error
    if size < 1:
        raise MalformedDescriptorError(f"Group parameter must be positive in '{descriptor}'.")
    group = _CONSTRUCTORS[kind](size)
    logger.debug("built %s of order %d", group.label, group.order)
    return group


def group_to_json(group: FiniteGroup) -> Dict:
    """Serializable dump {order, mul, inv, identity, label, generators}."""
    return {
        "order": group.order,
        "mul": group.mul.tolist(),
        "inv": group.inv.tolist(),
        "identity": group.identity,
        "label": group.label,
        "generators": list(group.generators),
    }


def group_from_json(data: Dict) -> FiniteGroup:
    """Rebuild (and revalidate) a group from its JSON dump."""
    group = FiniteGroup(
        np.array(data["mul"]), np.array(data["inv"]), data["identity"], data["label"], tuple(data.get("generators", ()))
    )
    if group.order != data["order"]:
        raise GroupTableError("Stored order does not match the multiplication table.")
    return group


def dump_group(group: FiniteGroup, path: str) -> None:
    """Write the JSON dump of a group."""
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(group_to_json(group), fp)


def load_group(path: str) -> FiniteGroup:
    """Read a group written by dump_group."""
    with open(path, "r", encoding="utf-8") as fp:
        return group_from_json(json.load(fp))


####################
# SUBSETS          #
####################


@dataclass(frozen=True, eq=False)
class GroupSubset:
    """A subset of a finite group, stored as a sorted tuple of element indices."""

    parent: FiniteGroup
    members: Tuple[int, ...]

    def __post_init__(self) -> None:
        members = tuple(sorted({int(m) for m in self.members}))
        for member in members:
            if not 0 <= member < self.parent.order:
                raise ElementNotFoundError(f"Element {member} is not in {self.parent.label}.")
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, element: int) -> bool:
        return int(element) in self.members

    @property
    def size(self) -> int:
        """Cardinality"""
        return len(self.members)

    @property
    def array(self) -> np.ndarray:
        """Members as an integer array"""
        return np.array(self.members, dtype=np.int64)

    def mask(self) -> np.ndarray:
        """Boolean indicator over the parent group"""
        indicator = np.zeros(self.parent.order, dtype=bool)
        indicator[list(self.members)] = True
        return indicator

    def inverse(self) -> "GroupSubset":
        """The set of inverses"""
        return GroupSubset(self.parent, tuple(self.parent.inv[self.array].tolist()))

    @property
    def is_symmetric(self) -> bool:
        """True when the subset equals its set of inverses"""
        return self.inverse().members == self.members

    def union(self, other: "GroupSubset") -> "GroupSubset":
        """Set union on the same parent"""
        require_same_group(self.parent, other.parent)
        return GroupSubset(self.parent, self.members + other.members)


def conjugate_set(s: int, subset: GroupSubset) -> GroupSubset:
    """
    The conjugated set s V s^-1.

    Args:
        s (int): conjugating element.
        subset (GroupSubset): the set V.

    Returns:
        GroupSubset: {s v s^-1 : v in V}.
    """
    group = subset.parent
    if not 0 <= s < group.order:
        raise ElementNotFoundError(f"Element {s} is not in {group.label}.")
    if subset.size == 0:
        return GroupSubset(group, ())
    conjugated = group.mul[group.mul[s, subset.array], group.inv[s]]
    return GroupSubset(group, tuple(conjugated.tolist()))


@functools.lru_cache(maxsize=32)
def cayley_graph(group: FiniteGroup) -> nx.Graph:
    """Undirected Cayley graph for the listed generators and their inverses."""
    graph = nx.Graph()
    graph.add_nodes_from(range(group.order))
    for generator in group.generators:
        for step in {generator, int(group.inv[generator])}:
            targets = group.mul[np.arange(group.order), step]
            graph.add_edges_from(zip(range(group.order), targets.tolist()))
    return graph


@functools.lru_cache(maxsize=32)
def word_lengths(group: FiniteGroup) -> np.ndarray:
    """Word length of every element in the listed generators (-1 when unreachable)."""
    lengths = np.full(group.order, -1, dtype=np.int64)
    for element, length in nx.single_source_shortest_path_length(cayley_graph(group), group.identity).items():
        lengths[element] = length
    lengths.setflags(write=False)
    return lengths


def word_ball(group: FiniteGroup, radius: int) -> GroupSubset:
    """Elements of word length at most radius; symmetric and contains the identity."""
    if radius < 0:
        raise MalformedDescriptorError("Word-ball radius must be nonnegative.")
    reached = nx.single_source_shortest_path_length(cayley_graph(group), group.identity, cutoff=radius)
    return GroupSubset(group, tuple(reached))


def parse_subset(group: FiniteGroup, spec: str) -> GroupSubset:
    """
    Parse a subset specification.

    Args:
        group (FiniteGroup): parent group.
        spec (str): "indices:0,3,5", "ball:k", "all" or "identity".

    Returns:
        GroupSubset: the parsed subset.
    """
    kind, _, argument = spec.strip().partition(":")
    try:
        if kind == "indices":
            return GroupSubset(group, tuple(int(token) for token in argument.split(",") if token.strip()))
        if kind == "ball":
            return word_ball(group, int(argument))
    except ValueError as error:
        raise MalformedDescriptorError(f"Cannot parse subset '{spec}'.") from error
    if kind == "all":
        return GroupSubset(group, tuple(range(group.order)))
    if kind == "identity":
        return GroupSubset(group, (group.identity,))
    raise MalformedDescriptorError(f"Unknown subset kind '{kind}' in '{spec}'.")


####################
# EMBEDDINGS       #
####################


@dataclass(frozen=True, eq=False)
class SubgroupEmbedding:
    """An injective homomorphism sub -> amb given by the table map."""

    sub: FiniteGroup
    amb: FiniteGroup
    map: np.ndarray

    def __post_init__(self) -> None:
        mapping = np.array(self.map, dtype=np.int64)
        # 1. shape and injectivity
        if mapping.shape != (self.sub.order,):
            raise NotASubgroupError("The embedding table must have one entry per element of the subgroup.")
        if np.any(mapping < 0) or np.any(mapping >= self.amb.order):
            raise ElementNotFoundError("The embedding maps outside the ambient group.")
        if np.unique(mapping).size != mapping.size:
            raise NotASubgroupError("The embedding is not injective.")
        # 2. identity and multiplicativity
        if mapping[self.sub.identity] != self.amb.identity:
            raise NotASubgroupError("The embedding does not preserve the identity.")
        if not np.array_equal(self.amb.mul[mapping[:, None], mapping[None, :]], mapping[self.sub.mul]):
            raise NotASubgroupError("The embedding is not a homomorphism.")
        mapping.setflags(write=False)
        object.__setattr__(self, "map", mapping)

    def image(self) -> GroupSubset:
        """Image of the subgroup inside the ambient group"""
        return GroupSubset(self.amb, tuple(self.map.tolist()))


def subgroup_embedding(group: FiniteGroup, members: Sequence[int], label: str | None = None) -> SubgroupEmbedding:
    """
    Build the abstract subgroup on the given members and its embedding.

    The subgroup elements are numbered in increasing order of their ambient indices.
    """
    ordered = sorted({int(m) for m in members})
    lookup = np.full(group.order, -1, dtype=np.int64)
    lookup[ordered] = np.arange(len(ordered))
    index = np.array(ordered, dtype=np.int64)

    # 1. closure under products and inverses
    if group.identity not in ordered:
        raise NotASubgroupError("A subgroup must contain the identity.")
    products = lookup[group.mul[index[:, None], index[None, :]]]
    inverses = lookup[group.inv[index]]
    if np.any(products < 0) or np.any(inverses < 0):
        raise NotASubgroupError(f"The subset {ordered} is not closed in {group.label}.")

    sub = FiniteGroup(products, inverses, int(lookup[group.identity]), label or f"{group.label}/sub{len(ordered)}")
    return SubgroupEmbedding(sub, group, index)


def identity_embedding(group: FiniteGroup) -> SubgroupEmbedding:
    """The embedding of a group into itself."""
    return SubgroupEmbedding(group, group, np.arange(group.order))


@dataclass(frozen=True, eq=False)
class QuotientMap:
    """
    The quotient G/H of a group by a normal subgroup.

    Cosets are numbered by increasing least element; the representative of a coset is its least element.
    """

    group: FiniteGroup
    quotient: FiniteGroup
    projection: np.ndarray
    representatives: np.ndarray
    kernel: GroupSubset

    @property
    def kernel_order(self) -> int:
        """|H|"""
        return self.kernel.size


def is_normal(group: FiniteGroup, members: Sequence[int]) -> bool:
    """True when g H g^-1 = H for every g."""
    index = np.array(sorted(set(members)), dtype=np.int64)
    inside = np.zeros(group.order, dtype=bool)
    inside[index] = True
    conjugates = group.mul[group.mul[:, index], group.inv[:, None]]
    return bool(np.all(inside[conjugates]))


def quotient_group(group: FiniteGroup, members: Sequence[int]) -> QuotientMap:
    """
    Build the quotient G/H.

    Raises:
        NotASubgroupError: H is not a subgroup.
        NotNormalError: H is not normal in G.
    """
    embedding = subgroup_embedding(group, members)
    kernel = embedding.image()
    if not is_normal(group, kernel.members):
        raise NotNormalError(f"{kernel.members} is not a normal subgroup of {group.label}.")

    least = np.min(group.mul[:, kernel.array], axis=1)
    representatives, projection = np.unique(least, return_inverse=True)
    mul = projection[group.mul[representatives[:, None], representatives[None, :]]]
    inv = projection[group.inv[representatives]]
    quotient = FiniteGroup(mul, inv, int(projection[group.identity]), f"{group.label}/H{kernel.size}")
    logger.debug("quotient of %s by a subgroup of order %d has order %d", group.label, kernel.size, quotient.order)
    return QuotientMap(group, quotient, projection.astype(np.int64), representatives.astype(np.int64), kernel)


def random_subset(group: FiniteGroup, rng: np.random.Generator, size: int, symmetric: bool = False) -> GroupSubset:
    """Uniformly random subset; a symmetric subset also contains the identity."""
    chosen: List[int] = rng.choice(group.order, size=min(size, group.order), replace=False).tolist()
    if symmetric:
        chosen = chosen + [int(group.inv[c]) for c in chosen] + [group.identity]
    return GroupSubset(group, tuple(chosen))
