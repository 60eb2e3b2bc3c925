from collections import defaultdict

CRITERIA = {
    1: "BSS spectral bound",
    2: "BSS singular-value band",
    3: "synthetic RLSC error is zero",
    4: "relevant features in every top-5",
    5: "RLSC additive bound",
    6: "risk formula vs Monte-Carlo",
    7: "risk inflation under measured distortion",
    8: "kernel sandwich",
    9: "primal/dual ridge agreement",
    10: "leverage failure rate at calibrated constant",
    11: "demo corpora trend (bss <= leverage)",
    12: "fold hygiene and byte-identical CSV",
}

_outcomes = defaultdict(list)
_notes = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    n = props.get("criterion")
    if n is None:
        return
    if report.when == "call" or report.outcome == "failed":
        _outcomes[n].append((report.nodeid.split("::")[-1], report.outcome))
    if report.when == "call" and "note" in props:
        _notes[n].append(props["note"])


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_outcomes):
        results = _outcomes[n]
        failed = [name for name, outcome in results if outcome == "failed"]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {n:2d} {status}: {CRITERIA.get(n, '')}"
        if failed:
            line += f" (failed: {', '.join(failed)})"
        for note in _notes[n]:
            line += f" [{note}]"
        tr.write_line(line)
