#!/usr/bin/env python3
"""Download the ISCAS-85 .bench benchmarks listed in benchmarks/manifest.json.

Each file is validated by parsing it and comparing (inputs, outputs, gates)
against the manifest before it is kept.  Mirrors rot; if none of the URL
templates work for a circuit, fetch it manually from any ISCAS-85
distribution and drop it into benchmarks/ (the test suite validates it the
same way).
"""

import json
import sys
import urllib.request
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from splitsec import netlist  # noqa: E402


def fetch(url: str, timeout: float = 30.0) -> str:
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.read().decode("utf-8", errors="replace")


def main() -> int:
    manifest = json.loads((REPO / "benchmarks" / "manifest.json").read_text())
    out_dir = REPO / "benchmarks"
    failures = []
    for entry in manifest["benchmarks"]:
        name = entry["name"]
        dest = out_dir / f"{name}.bench"
        if dest.exists():
            print(f"{name}: already present")
            continue
        got = False
        for tmpl in manifest["url_templates"]:
            url = tmpl.format(name=name)
            try:
                text = fetch(url)
                g = netlist.parse_bench(text, name)
                st = netlist.stats(g)
                expect = (entry["inputs"], entry["outputs"], entry["gates"])
                have = (st.input_count, st.output_count, st.gate_count)
                if have != expect:
                    print(f"{name}: {url} has stats {have}, expected {expect}; skipping")
                    continue
                dest.write_text(text)
                print(f"{name}: fetched from {url}")
                got = True
                break
            except Exception as exc:
                print(f"{name}: {url} failed ({type(exc).__name__}: {exc})")
        if not got:
            failures.append(name)
    if failures:
        print(f"\ncould not fetch: {', '.join(failures)}")
        print("supply these files manually in benchmarks/ "
              "or set SPLITSEC_BENCH_DIR to a directory that has them")
        return 1
    print("\nall benchmarks present")
    return 0


if __name__ == "__main__":
    sys.exit(main())
