// Generated test {{TEST_ID}} (backend: template)
// Degenerate one-process communicator: the collective must reduce to an
// identity and hand back the local contribution unchanged.
#include <mpi.h>
#include <cstdio>

{{MINICHECK}}

{{EXCERPT}}

int main(int argc, char** argv) {
    MPI_Init(&argc, &argv);
    int rank = -1;
    int size = 0;
    MPI_Comm_rank(MPI_COMM_WORLD, &rank);
    MPI_Comm_size(MPI_COMM_WORLD, &size);
    const bool setup_ok = (size == {{NUM_PROCESSES}});
    if (!setup_ok && rank == 0) {
        std::fprintf(stderr, "This test requires exactly %d processes.\n", {{NUM_PROCESSES}});
    }
    if (setup_ok) {
        const double local_value = 3.5;
        minicheck::install_watchdog({{TIMEOUT_SECONDS}});
        double got = {{TARGET_FUNCTION}}(local_value);
        minicheck::disarm_watchdog();
        MC_CHECK_EQ_DOUBLE(got, local_value, "single-process collective returns the local value unchanged");
    }

    int local_fail = minicheck::failure_count() > 0 ? 1 : 0;
    int any_fail = 0;
    MPI_Allreduce(&local_fail, &any_fail, 1, MPI_INT, MPI_MAX, MPI_COMM_WORLD);
    MPI_Finalize();
    if (!setup_ok) {
        return minicheck::MC_SETUP_ERROR;
    }
    if (rank == 0) {
        std::fprintf(stderr, "[{{TEST_ID}}] RESULT: %s\n", any_fail ? "FAIL" : "PASS");
    }
    return any_fail ? minicheck::MC_ASSERT_FAIL : minicheck::MC_PASS;
}
