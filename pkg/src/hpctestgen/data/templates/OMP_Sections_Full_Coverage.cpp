// Generated test {{TEST_ID}} (backend: template)
// Every section must execute exactly once per encounter of the construct.
#include <omp.h>
#include <cstdio>

{{MINICHECK}}

{{EXCERPT}}

int main() {
    omp_set_num_threads({{NUM_THREADS}});
    const int sections = {{NUM_SECTIONS}};
    int stage_runs[{{NUM_SECTIONS}}];
    for (int s = 0; s < sections; ++s) {
        stage_runs[s] = 0;
    }

    minicheck::install_watchdog({{TIMEOUT_SECONDS}});
    for (int rep = 0; rep < {{REPETITIONS}}; ++rep) {
        {{TARGET_FUNCTION}}(stage_runs);
    }
    minicheck::disarm_watchdog();

    bool covered = true;
    for (int s = 0; s < sections; ++s) {
        if (stage_runs[s] != {{REPETITIONS}}) {
            std::fprintf(stderr, "[{{TEST_ID}}] section %d ran %d times, expected %d\n", s, stage_runs[s], {{REPETITIONS}});
            covered = false;
        }
    }
    MC_CHECK(covered, "each section executed exactly once per encounter");
    return minicheck::finish();
}
