"""Ball cache files: persisted LengthIndex tables.

Format (text, UTF-8, LF):

    rdlab-ball-cache v1 | <group descriptor> | N=<radius>
    <canonical key>TAB<length>
    ...

Records are sorted by (length, key), which matches the in-memory sphere
order, so a reloaded index behaves bit-identically to a fresh enumeration.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .errors import RdlabError
from .groups import DEFAULT_BUDGET, LengthIndex, enumerate_balls, parse_descriptor

HEADER_PREFIX = "rdlab-ball-cache v1"


class CacheFormatError(RdlabError):
    pass


def cache_filename(descriptor, radius):
    return f"{descriptor}.N{radius}.ballcache"


def serialize_index(index: LengthIndex):
    spec = index.spec
    lines = [f"{HEADER_PREFIX} | {spec.descriptor()} | N={index.radius}"]
    for n in range(index.radius + 1):
        for g in index.sphere(n):
            lines.append(f"{spec.element_key(g)}\t{n}")
    return "\n".join(lines) + "\n"


def write_ball_cache(index: LengthIndex, path):
    data = serialize_index(index)
    Path(path).write_text(data, encoding="utf-8")
    return hashlib.sha256(data.encode("utf-8")).hexdigest()


def read_ball_cache(path, spec=None):
    """Load a cache file into a LengthIndex; validates header and contents."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise CacheFormatError(f"{path}: empty cache file")
    parts = [p.strip() for p in lines[0].split("|")]
    if len(parts) != 3 or parts[0] != HEADER_PREFIX or not parts[2].startswith("N="):
        raise CacheFormatError(f"{path}: bad header {lines[0]!r}")
    descriptor = parts[1]
    radius = int(parts[2][2:])
    if spec is None:
        spec = parse_descriptor(descriptor)
    elif spec.descriptor() != descriptor:
        raise CacheFormatError(
            f"{path}: cache is for {descriptor!r}, expected {spec.descriptor()!r}")

    lengths = {}
    spheres = [[] for _ in range(radius + 1)]
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            key, n_text = line.split("\t")
            n = int(n_text)
        except ValueError:
            raise CacheFormatError(f"{path}:{lineno}: bad record {line!r}") from None
        if not 0 <= n <= radius:
            raise CacheFormatError(f"{path}:{lineno}: length {n} outside radius")
        g = spec.parse_key(key)
        if g in lengths:
            raise CacheFormatError(f"{path}:{lineno}: duplicate element {key!r}")
        lengths[g] = n
        spheres[n].append(g)
    return LengthIndex(spec=spec, radius=radius, lengths=lengths, spheres=spheres)


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def cache_roundtrip(spec, N, path, budget=DEFAULT_BUDGET):
    """Enumerate, write, reload, and compare; True iff the reload is identical."""
    index = enumerate_balls(spec, N, budget=budget)
    write_ball_cache(index, path)
    loaded = read_ball_cache(path, spec)
    return (loaded.lengths == index.lengths
            and loaded.sphere_sizes == index.sphere_sizes
            and loaded.ball_sizes == index.ball_sizes
            and all(loaded.sphere(n) == index.sphere(n)
                    for n in range(index.radius + 1)))


def check_ball_cache(path, spec=None, budget=DEFAULT_BUDGET):
    """Re-enumerate and byte-compare against the file; (ok, detail) result."""
    try:
        loaded = read_ball_cache(path, spec)
    except (CacheFormatError, ValueError) as exc:
        return False, f"unreadable cache: {exc}"
    fresh = enumerate_balls(loaded.spec, loaded.radius, budget=budget)
    expected = serialize_index(fresh)
    actual = Path(path).read_text(encoding="utf-8")
    if expected != actual:
        want = hashlib.sha256(expected.encode("utf-8")).hexdigest()
        got = hashlib.sha256(actual.encode("utf-8")).hexdigest()
        return False, f"digest mismatch: expected {want}, file has {got}"
    return True, f"ok: {loaded.size()} elements to radius {loaded.radius}"


def find_cache(cache_dir, spec, min_radius):
    """Smallest adequate cache file for ``spec`` in ``cache_dir``, or None."""
    if cache_dir is None:
        return None
    directory = Path(cache_dir)
    if not directory.is_dir():
        return None
    best = None
    prefix = f"{spec.descriptor()}.N"
    for entry in sorted(directory.iterdir()):
        name = entry.name
        if not (name.startswith(prefix) and name.endswith(".ballcache")):
            continue
        try:
            radius = int(name[len(prefix):-len(".ballcache")])
        except ValueError:
            continue
        if radius >= min_radius and (best is None or radius < best[0]):
            best = (radius, entry)
    return best[1] if best else None
