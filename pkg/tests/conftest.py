"""Shared fixtures and small instance factories."""

from __future__ import annotations

import math

import pytest

from doubletree import (
    Instance,
    Metric,
    Point,
    generate_uniform,
    minimum_spanning_tree,
    root_tree,
)


def make_instance(coords, name="test", rounded=False):
    pts = tuple(Point(float(x), float(y)) for x, y in coords)
    metric = Metric.euclid_rounded() if rounded else Metric.euclid()
    return Instance(name, len(pts), pts, metric)


def mst_tree(inst):
    return root_tree(minimum_spanning_tree(inst), inst.n)


def random_instance(n, seed, box=1.0):
    return generate_uniform(n, seed, box)


@pytest.fixture
def collinear3():
    # nodes 0, 1, 2 on a line at unit spacing
    return make_instance([(0, 0), (1, 0), (2, 0)], name="collinear3")


@pytest.fixture
def unit_square():
    return make_instance([(0, 0), (1, 0), (1, 1), (0, 1)], name="square")


@pytest.fixture
def star5():
    # center 0 with four unit-distance arms
    return make_instance([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)], name="star5")


STAR5_BEST = 2.0 + 3.0 * math.sqrt(2.0)
