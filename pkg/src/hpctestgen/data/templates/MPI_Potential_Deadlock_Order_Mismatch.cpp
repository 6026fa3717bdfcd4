// Generated test {{TEST_ID}} (backend: template)
// Both ranks invoke the exchange simultaneously. A symmetric blocking
// protocol stalls; the watchdog turns the stall into a timeout verdict.
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
        // Scenario under test: rank 0 should send first ({{RANK0_SEND_FIRST}}),
        // rank 1 should receive first ({{RANK1_RECV_FIRST}}). The call below is
        // expected to hang when the target orders both ranks send-first.
        minicheck::install_watchdog({{TIMEOUT_SECONDS}});
        {{TARGET_FUNCTION}}(rank, 1 - rank);
        minicheck::disarm_watchdog();
        MC_CHECK(true, "exchange completed within the timeout on this rank");
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
