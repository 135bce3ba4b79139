"""Leave-one-subject-out fold construction."""

from __future__ import annotations

from ..errors import DataError


def loso_folds(subjects) -> list[tuple[tuple[str, ...], str]]:
    """One (train subjects, test subject) fold per subject, sorted by id.

    Accepts a store mapping (keys are subject ids) or any iterable of ids.
    """
    if hasattr(subjects, "keys"):
        ids = list(subjects.keys())
    else:
        ids = list(subjects)
    ids = sorted(str(s) for s in ids)
    if len(ids) != len(set(ids)):
        raise DataError("duplicate subject ids")
    if len(ids) < 2:
        raise DataError(f"{len(ids)} subject(s); leave-one-out needs at least 2")
    return [
        (tuple(s for s in ids if s != test), test)
        for test in ids
    ]
