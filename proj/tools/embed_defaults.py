#!/usr/bin/env python3
"""Regenerate include/ccp/defaults.hpp from the files under data/."""
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
ENTRIES = [
    ("kDefaultTermModel", "default_model.txt"),
    ("kDefaultEnglishModel", "english_top100.txt"),
    ("kDefaultPerformance", "perf_default.cfg"),
    ("kDefaultDistributionTable", "ccp_distribution.csv"),
]

out = [
    "#pragma once",
    "",
    "#include <string_view>",
    "",
    "// Built-in copies of the files under data/, written by tools/embed_defaults.py.",
    "// tests/test_defaults.cpp keeps them in sync.",
    "",
    "namespace ccp::defaults {",
    "",
]
for name, fname in ENTRIES:
    text = (ROOT / "data" / fname).read_text()
    assert ")ccp\"" not in text
    out.append(f'inline constexpr std::string_view {name} = R"ccp({text})ccp";')
    out.append("")
out.append("}  // namespace ccp::defaults")
(ROOT / "include" / "ccp" / "defaults.hpp").write_text("\n".join(out) + "\n")
