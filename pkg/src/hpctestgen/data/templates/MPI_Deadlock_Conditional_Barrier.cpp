// Generated test {{TEST_ID}} (backend: template)
// Every rank invokes the synchronization path; a barrier reached by only a
// subset of ranks stalls, and the watchdog reports the timeout.
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
        minicheck::install_watchdog({{TIMEOUT_SECONDS}});
        {{TARGET_FUNCTION}}();
        minicheck::disarm_watchdog();
        MC_CHECK(true, "synchronization path completed within the timeout on this rank");
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
