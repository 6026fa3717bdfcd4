// Generated test {{TEST_ID}} (backend: template)
// Guarded counter under contention: the update must never lose an increment.
#include <omp.h>
#include <cstdio>

{{MINICHECK}}

{{EXCERPT}}

int main() {
    omp_set_num_threads({{NUM_THREADS}});
    const long expected = (long){{NUM_THREADS}} * (long){{INCREMENTS_PER_THREAD}};

    minicheck::install_watchdog({{TIMEOUT_SECONDS}});
    bool exact = true;
    for (int rep = 0; rep < {{REPETITIONS}} && exact; ++rep) {
        long got = {{TARGET_FUNCTION}}({{INCREMENTS_PER_THREAD}});
        if (got != expected) {
            std::fprintf(stderr, "[{{TEST_ID}}] rep %d: expected %ld, got %ld\n", rep, expected, got);
            exact = false;
        }
    }
    minicheck::disarm_watchdog();
    MC_CHECK(exact, "guarded counter equals num_threads * increments_per_thread on every repetition");
    return minicheck::finish();
}
