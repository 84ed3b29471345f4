"""Shared fixtures: tiny graphs and synthetic heterogeneous dataset builders."""

from __future__ import annotations

import os

import numpy as np
import pytest

from hhea.kg import CalendarConfig, load_anchors, load_kg


def write_facts(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write("\t".join(row) + "\n")


def write_anchors(path, pairs):
    with open(path, "w", encoding="utf-8") as fh:
        for a, b in pairs:
            fh.write(f"{a}\t{b}\n")


@pytest.fixture
def tiny_kg(tmp_path):
    """Path graph a - b - c (2 facts, 1 relation)."""
    path = tmp_path / "tiny.tsv"
    write_facts(path, [("a", "r1", "b"), ("b", "r1", "c")])
    return load_kg(str(path), temporal=False)


@pytest.fixture
def temporal_kg(tmp_path):
    path = tmp_path / "temporal.tsv"
    write_facts(
        path,
        [
            ("a", "r1", "b", "1995-03", "1995-05"),
            ("b", "r2", "c", "1995-01"),
            ("a", "r2", "c", "1995-01", "1995-02"),
        ],
    )
    return load_kg(str(path), temporal=True)


def make_mirrored_dataset(dirpath, n_pairs=10, n_extra=10, seed=0):
    """Two graphs whose anchored halves are exact mirrors (names, facts, months).

    Anchored entities share names and an identical subgraph over the shared
    half, so name and time evidence both separate every pair exactly.  Each
    side additionally has private entities with private facts.
    Returns (kg1_path, kg2_path, anchors_path, shared_names).
    """
    rng = np.random.default_rng(seed)
    shared = [f"shared entity {i:03d}" for i in range(n_pairs)]
    left = [f"left only {i:03d}" for i in range(n_extra)]
    right = [f"right only {i:03d}" for i in range(n_extra)]

    shared_facts = []
    for i in range(n_pairs):
        j = (i + 1) % n_pairs
        month = f"1995-{rng.integers(1, 13):02d}"
        shared_facts.append((shared[i], "knows", shared[j], month))
        k = int(rng.integers(n_pairs))
        shared_facts.append((shared[i], "met", shared[k], f"1996-{rng.integers(1, 13):02d}"))

    def private_facts(names, rel):
        rows = []
        for i in range(len(names)):
            j = (i + 1) % len(names)
            rows.append((names[i], rel, names[j], f"1997-{rng.integers(1, 13):02d}"))
        return rows

    kg1_rows = shared_facts + private_facts(left, "works_with")
    kg2_rows = shared_facts + private_facts(right, "linked_to")

    kg1_path = os.path.join(dirpath, "kg1.tsv")
    kg2_path = os.path.join(dirpath, "kg2.tsv")
    anchors_path = os.path.join(dirpath, "anchors.tsv")
    write_facts(kg1_path, kg1_rows)
    write_facts(kg2_path, kg2_rows)
    write_anchors(anchors_path, [(s, s) for s in shared])
    return kg1_path, kg2_path, anchors_path, shared


def make_heterogeneous_dataset(
    dirpath,
    n_pairs=200,
    n_extra1=100,
    n_extra2=60,
    facts_per_entity1=6,
    facts_per_entity2=2,
    seed=0,
):
    """Aligned graphs of different scale and density.

    Names are the dominant signal (anchored pairs share names).  Temporal
    evidence is weakly informative: every entity lives in one of four coarse
    eras, aligned pairs share their era, and fact months fall inside the head
    entity's era.  Dozens of entities share each era, so time alone cannot
    identify a counterpart, but wiping facts does lose real evidence.
    Structure is independent per side.  Returns (kg1, kg2, anchors) paths.
    """
    rng = np.random.default_rng(seed)
    shared = [f"person {i:04d}" for i in range(n_pairs)]
    names1 = shared + [f"event {i:04d}" for i in range(n_extra1)]
    names2 = shared + [f"place {i:04d}" for i in range(n_extra2)]
    relations = ["attended", "visited", "supported", "opposed"]
    era_starts = (0, 72, 144, 216)
    era_width = 60
    shared_eras = {name: era_starts[int(rng.integers(4))] for name in shared}

    def random_facts(names, per_entity):
        eras = {
            name: shared_eras.get(name, era_starts[int(rng.integers(4))]) for name in names
        }
        rows = []
        n = len(names)
        for i in range(n):
            for _ in range(per_entity):
                j = int(rng.integers(n))
                rel = relations[int(rng.integers(len(relations)))]
                begin = eras[names[i]] + int(rng.integers(era_width))
                end = begin + int(rng.integers(0, 6))
                rows.append(
                    (
                        names[i],
                        rel,
                        names[j],
                        f"{1995 + begin // 12}-{begin % 12 + 1:02d}",
                        f"{1995 + end // 12}-{end % 12 + 1:02d}",
                    )
                )
        return rows

    kg1_path = os.path.join(dirpath, "kg1.tsv")
    kg2_path = os.path.join(dirpath, "kg2.tsv")
    anchors_path = os.path.join(dirpath, "anchors.tsv")
    write_facts(kg1_path, random_facts(names1, facts_per_entity1))
    write_facts(kg2_path, random_facts(names2, facts_per_entity2))
    write_anchors(anchors_path, [(s, s) for s in shared])
    return kg1_path, kg2_path, anchors_path


def load_pair(kg1_path, kg2_path, anchors_path, temporal=True):
    calendar = CalendarConfig()
    kg1 = load_kg(kg1_path, temporal, calendar)
    kg2 = load_kg(kg2_path, temporal, calendar)
    return kg1, kg2, load_anchors(anchors_path, kg1, kg2)
