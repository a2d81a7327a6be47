"""
Table caching for Kloosterman tables.

Two layers: an in-process LRU of built tables and an optional on-disk binary
cache under ``settings.cache`` (env ``KLOOSTERLAB_CACHE``).

Disk format ("KLTB"): little-endian header
``magic[4] version:u32 p:u64 b:u64 method:u8`` followed by p float64 values.
"""

from typing import Optional, Tuple, Union
from pathlib import Path
from cachetools import LRUCache
from engine.kloosterman import KloostermanTable, AngleTable, build_table, build_angles
from engine.core_arith import as_prime
from shared.config import settings
from shared.exceptions import CacheFormatError
from shared.models import TableMethod
import numpy as np
import threading
import tempfile
import os
import struct
import logging

logger = logging.getLogger(__name__)

MAGIC = b"KLTB"
VERSION = 1
_HEADER = struct.Struct("<4sIQQB")
_METHOD_CODES = {TableMethod.NAIVE: 0, TableMethod.DFT: 1}
_METHOD_BY_CODE = {code: method for method, code in _METHOD_CODES.items()}

_table_cache = LRUCache(maxsize=settings.memory_cache_size)
_angle_cache = LRUCache(maxsize=settings.memory_cache_size)
_lock = threading.RLock()


# ============================================
# Binary format
# ============================================

def save_table(table: KloostermanTable, path: Union[str, Path]) -> Path:
    """
    Write a table in KLTB format.

    Args:
        table: Table to persist
        path: Destination file

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _HEADER.pack(MAGIC, VERSION, table.p, table.b, _METHOD_CODES[table.method])
    with tempfile.NamedTemporaryFile(dir=path.parent, prefix=path.name + ".", suffix=".tmp", delete=False) as f:
        f.write(header)
        f.write(table.values.astype("<f8").tobytes())
    try:
        os.replace(f.name, path)
    except OSError:
        Path(f.name).unlink(missing_ok=True)
        raise
    logger.debug(f"Saved table p={table.p}, b={table.b} to {path}")
    return path


def load_table(
    path: Union[str, Path],
    expect: Optional[Tuple[int, int, TableMethod]] = None
) -> KloostermanTable:
    """
    Read a KLTB file.

    Args:
        path: Source file
        expect: Optional (p, b, method) the header must match

    Returns:
        The stored table

    Raises:
        CacheFormatError: bad magic/version, truncated payload or header mismatch
    """
    path = Path(path)
    with open(path, "rb") as f:
        raw_header = f.read(_HEADER.size)
        if len(raw_header) != _HEADER.size:
            raise CacheFormatError(f"{path}: truncated header")
        magic, version, p, b, code = _HEADER.unpack(raw_header)
        if magic != MAGIC:
            raise CacheFormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise CacheFormatError(f"{path}: unsupported version {version}")
        if code not in _METHOD_BY_CODE:
            raise CacheFormatError(f"{path}: unknown method code {code}")
        method = _METHOD_BY_CODE[code]

        if expect is not None and (p, b, method) != tuple(expect):
            raise CacheFormatError(
                f"{path}: header (p={p}, b={b}, method={method.value}) does not match request"
            )

        payload = f.read()
    if len(payload) != 8 * p:
        raise CacheFormatError(f"{path}: expected {8 * p} payload bytes, got {len(payload)}")

    values = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return KloostermanTable(p=p, b=b, method=method, values=values)


def cache_path(p: int, b: int, method: TableMethod, directory: Optional[Path] = None) -> Optional[Path]:
    """File name of a cached table, or None when the disk cache is disabled."""
    directory = directory if directory is not None else settings.cache
    if directory is None:
        return None
    return Path(directory) / f"kl_p{p}_b{b}_{method.value}.kltb"


# ============================================
# Cached access
# ============================================

def get_table(
    p: int,
    b: int = 1,
    method: Union[TableMethod, str] = TableMethod.DFT,
    directory: Optional[Path] = None
) -> KloostermanTable:
    """
    Get a table from memory, then disk, else build and store it.

    Args:
        p: Prime modulus
        b: Twist
        method: Evaluation method
        directory: Disk cache override (default ``settings.cache``)

    Returns:
        KloostermanTable
    """
    p = as_prime(p)
    method = TableMethod(method)
    key = (p, b % p, method)

    with _lock:
        if key in _table_cache:
            logger.debug(f"Memory cache hit for table {key}")
            return _table_cache[key]

    table = None
    path = cache_path(p, b % p, method, directory)
    if path is not None and path.exists():
        try:
            table = load_table(path, expect=key)
            logger.info(f"Disk cache hit for table p={p}, b={b % p}: {path}")
        except CacheFormatError as e:
            logger.warning(f"Ignoring cached table: {e}")
            table = None

    if table is None:
        table = build_table(b, p, method)
        if path is not None:
            try:
                save_table(table, path)
            except OSError as e:
                logger.warning(f"Could not write table cache {path}: {e}")

    with _lock:
        _table_cache[key] = table
    return table


def get_angles(p: int, h: int = 1, method: Union[TableMethod, str] = TableMethod.DFT) -> AngleTable:
    """
    Cached AngleTable for (p, h), built from the b = 1 table.

    Args:
        p: Prime modulus
        h: Multiplicative twist
        method: Evaluation method for the underlying table

    Returns:
        AngleTable
    """
    p = as_prime(p)
    method = TableMethod(method)
    key = (p, h % p, method)
    with _lock:
        if key in _angle_cache:
            return _angle_cache[key]

    angles = build_angles(get_table(p, 1, method), h)
    with _lock:
        _angle_cache[key] = angles
    return angles


def clear_cache():
    """Clear the in-memory caches."""
    with _lock:
        _table_cache.clear()
        _angle_cache.clear()
    logger.info("Table cache cleared")
