// Generated test {{TEST_ID}} (backend: template)
// Two-phase update: if any thread skips the barrier, the run hangs and the
// watchdog converts it into a timeout verdict.
#include <omp.h>
#include <cstdio>
#include <vector>

{{MINICHECK}}

{{EXCERPT}}

int main() {
    const int n = {{INPUT_SIZE}};
    std::vector<double> ref(n), data(n);

    minicheck::install_watchdog({{TIMEOUT_SECONDS}});
    // Reference: a team of one trivially satisfies its own barrier.
    for (int i = 0; i < n; ++i) {
        ref[i] = (double)(i + 1);
    }
    omp_set_num_threads(1);
    {{TARGET_FUNCTION}}(ref.data(), n);

    omp_set_num_threads({{NUM_THREADS}});
    for (int i = 0; i < n; ++i) {
        data[i] = (double)(i + 1);
    }
    {{TARGET_FUNCTION}}(data.data(), n);
    minicheck::disarm_watchdog();

    bool all_match = true;
    for (int i = 0; i < n; ++i) {
        if (data[i] != ref[i]) {
            std::fprintf(stderr, "[{{TEST_ID}}] data[%d] expected %.17g, got %.17g\n", i, ref[i], data[i]);
            all_match = false;
            break;
        }
    }
    MC_CHECK(all_match, "two-phase update completed and matches the single-thread reference");
    return minicheck::finish();
}
