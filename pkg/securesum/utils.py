import os
import tempfile

from securesum.exceptions import ConfigurationError

RANGE_SEPARATOR = ".."


# Config files
def parse_config_file(path):
    """
    Read a flat ``key=value`` config file.

    :param path: Path of the file; blank lines and ``#`` comments are skipped.
    :return: Dict of option name to raw string value, dashes in keys turned
        into underscores so they match the command-line option names.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as e:
        raise ConfigurationError(f"cannot read config file {path}: {e.strerror}") from e

    values = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lstrip("-").replace("-", "_")
        if not sep or not key:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        values[key] = value.strip()
    return values


# Output files
def _default_mode():
    umask = os.umask(0)
    os.umask(umask)
    return 0o666 & ~umask


def _stage(path, text, mode):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".securesum-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.chmod(tmp_path, mode)
    except BaseException:
        os.remove(tmp_path)
        raise
    return tmp_path


def write_atomically(files):
    """
    Write every ``{path: text}`` entry through a temporary file next to it.

    Files are renamed into place only once all of them have been written, so
    a failure leaves none of them behind. They get the usual umask-derived mode.
    """
    mode = _default_mode()
    staged, placed = [], []
    try:
        for path, text in files.items():
            staged.append((_stage(path, text, mode), path))
        for tmp_path, path in staged:
            os.replace(tmp_path, path)
            placed.append(path)
    except BaseException:
        for tmp_path, _ in staged:
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
        for path in placed:
            os.remove(path)
        raise


# Parties and integer lists
def party_label(party):
    return f"P{party}"


def parse_int_list(text, what="value"):
    items = [item.strip() for item in str(text).split(",")]
    try:
        return tuple(int(item.upper().removeprefix("P")) if what == "party" else int(item) for item in items)
    except ValueError:
        raise ConfigurationError(f"expected a comma-separated list of integers for {what}, got {text!r}") from None


def parse_n_range(text):
    """``"4"`` -> ``(4, 4)``; ``"4..8"`` -> ``(4, 8)``."""
    text = str(text).strip()
    lo, sep, hi = text.partition(RANGE_SEPARATOR)
    try:
        bounds = (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError:
        raise ConfigurationError(f"expected a party count or a range like 4..8, got {text!r}") from None
    if bounds[0] > bounds[1]:
        raise ConfigurationError(f"empty party-count range {text!r}")
    return bounds
