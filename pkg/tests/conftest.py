import shutil
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
CORPUS_DIR = REPO_ROOT / "corpus"

# The two reference listings, kept verbatim for line-number assertions.
PARALLEL_SUM_LISTING = """\
// Simplified C++ with OpenMP
double parallel_sum(double* data, int size) {
    double total = 0.0;
    #pragma omp parallel for
    for (int i = 0; i < size; ++i) {
        total += data[i]; // BUG: Race condition on 'total'
    }
    return total;
}
"""

EXCHANGE_DATA_LISTING = """\
// Simplified C++ with MPI
void exchange_data(int rank, int partner_rank) {
    int send_buf = rank;
    int recv_buf = -1;
    // Both processes try to send first
    MPI_Send(&send_buf, 1, MPI_INT, partner_rank, 0, MPI_COMM_WORLD);
    MPI_Recv(&recv_buf, 1, MPI_INT, partner_rank, 0, MPI_COMM_WORLD, MPI_STATUS_IGNORE);
}
"""


@pytest.fixture(scope="session")
def corpus_dir():
    return CORPUS_DIR


@pytest.fixture(scope="session")
def seed_kg():
    from hpctestgen import kg

    return kg.load_seed_kg()


@pytest.fixture()
def parallel_sum_unit():
    from hpctestgen.sketch import SourceUnit

    return SourceUnit(path="parallel_sum.cpp", text=PARALLEL_SUM_LISTING)


@pytest.fixture()
def exchange_data_unit():
    from hpctestgen.sketch import SourceUnit

    return SourceUnit(path="exchange_data.cpp", text=EXCHANGE_DATA_LISTING)


def has_cxx():
    return shutil.which("g++") or shutil.which("clang++")


def has_mpi():
    return shutil.which("mpicxx") and shutil.which("mpirun")


needs_cxx = pytest.mark.skipif(not has_cxx(), reason="no C++ compiler on this host")
needs_mpi = pytest.mark.skipif(not has_mpi(), reason="no MPI toolchain on this host")


def pytest_terminal_summary(terminalreporter):
    """Per-criterion acceptance outcomes, printed after capture ends."""
    try:
        from test_acceptance import _RESULTS
    except ImportError:
        return
    if not _RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("=== acceptance criteria ===")
    for number, title, outcome in sorted(_RESULTS):
        terminalreporter.write_line(f"criterion {number:>2} {outcome:4s} {title}")
