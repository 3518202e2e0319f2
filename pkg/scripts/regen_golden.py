"""Regenerate corpus/golden from corpus/surface.

Review the diff by hand before committing: the fixtures pin the translation
tables row by row.
"""

import pathlib

from dcbpv.cli import emit_translation, translate_program
from dcbpv.parser import load

ROOT = pathlib.Path(__file__).resolve().parent.parent
SURFACE = ROOT / "corpus" / "surface"
GOLDEN = ROOT / "corpus" / "golden"


def main() -> None:
    GOLDEN.mkdir(exist_ok=True)
    for path in sorted(SURFACE.glob("*.dcbpv")):
        prog = load(path.read_text())
        for direction in ("cbv", "cbn"):
            text = emit_translation(prog, translate_program(prog, direction, "dependent"))
            (GOLDEN / f"{path.stem}.{direction}.dcbpv").write_text(text)


if __name__ == "__main__":
    main()
