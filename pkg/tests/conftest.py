import pytest

from refminer import ProminenceModel, TripleStore

GEO = [
    ("Guyana", "in", "SA"),
    ("Suriname", "in", "SA"),
    ("Brazil", "in", "SA"),
    ("Germany", "in", "Europe"),
    ("France", "in", "Europe"),
    ("Guyana", "officialLang", "English"),
    ("Suriname", "officialLang", "Dutch"),
    ("Brazil", "officialLang", "Portuguese"),
    ("Germany", "officialLang", "German"),
    ("France", "officialLang", "French"),
    ("English", "langFamily", "Germanic"),
    ("Dutch", "langFamily", "Germanic"),
    ("German", "langFamily", "Germanic"),
    ("Portuguese", "langFamily", "Romance"),
    ("French", "langFamily", "Romance"),
]

# mayors and their parties; Socialist has the most mayors, and "member"
# joins with "mayor" less often than "party" does
MAYORS = [
    ("Lyon", "mayor", "m1"),
    ("Lille", "mayor", "m2"),
    ("Nantes", "mayor", "m3"),
    ("Nice", "mayor", "m4"),
    ("Rennes", "mayor", "m5"),
    ("m1", "party", "Socialist"),
    ("m2", "party", "Socialist"),
    ("m3", "party", "Socialist"),
    ("m4", "party", "Green"),
    ("m5", "party", "Conservative"),
    ("m6", "party", "Conservative"),
    ("m7", "party", "Conservative"),
    ("m8", "party", "Conservative"),
    ("m1", "member", "Senate"),
    ("m4", "member", "Senate"),
    ("m6", "member", "Senate"),
]


def zipf_triples(n_objects=100, top=1000, pred="likes"):
    """Object ``o{k}`` appears with ``floor(top / k)`` distinct subjects."""
    out = []
    for k in range(1, n_objects + 1):
        out.extend((f"s{j}", pred, f"o{k}") for j in range(top // k))
    return out


@pytest.fixture
def geo_store():
    return TripleStore.from_triples(GEO)


@pytest.fixture
def geo_model(geo_store):
    return ProminenceModel(geo_store)


@pytest.fixture
def mayor_store():
    return TripleStore.from_triples(MAYORS)


@pytest.fixture(scope="session")
def zipf_store():
    return TripleStore.from_triples(zipf_triples())


@pytest.fixture
def geo_nt(tmp_path):
    path = tmp_path / "geo.nt"
    lines = [f"<http://ex/{s}> <http://ex/{p}> <http://ex/{o}> ." for s, p, o in GEO]
    path.write_text("# geography\n\n" + "\n".join(lines) + "\n", encoding="utf-8")
    return path


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """``record(n, ok, detail)`` prints and collects one line per criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, ok, detail=""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
