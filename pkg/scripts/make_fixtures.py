"""Write the fixture corpus (one JSON bundle per worked example) to fixtures/."""

import argparse
from pathlib import Path

from scorevoting.instances import ALL_FIXTURES, dump_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "fixtures"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for make in ALL_FIXTURES:
        fx = make()
        path = out / f"{fx.name}.json"
        dump_fixture(fx, path)
        print(path)


if __name__ == "__main__":
    main()
