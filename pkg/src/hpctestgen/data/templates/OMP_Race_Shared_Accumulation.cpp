// Generated test {{TEST_ID}} (backend: template)
// Consistency check for a parallel accumulation suspected of racing.
#include <omp.h>
#include <cstdio>
#include <vector>

{{MINICHECK}}

{{EXCERPT}}

int main() {
    omp_set_num_threads({{NUM_THREADS}});
    const int n = {{INPUT_SIZE}};
    std::vector<double> data(n);
    for (int i = 0; i < n; ++i) {
        data[i] = (double)(i + 1);
    }
    // Integer-valued doubles keep the sum exact under any addition order.
    const double expected_sum = {{EXPECTED_SUM}};

    minicheck::install_watchdog({{TIMEOUT_SECONDS}});
    bool is_consistent = true;
    int first_bad_rep = -1;
    for (int rep = 0; rep < {{REPETITIONS}}; ++rep) {
        double got = {{TARGET_FUNCTION}}(data.data(), n);
        if (got != expected_sum) {
            is_consistent = false;
            first_bad_rep = rep;
            std::fprintf(stderr, "[{{TEST_ID}}] rep %d: expected %.17g, got %.17g\n", rep, expected_sum, got);
            break;
        }
    }
    minicheck::disarm_watchdog();
    (void)first_bad_rep;
    MC_CHECK(is_consistent, "accumulation is consistent with the sequential reference across repetitions");
    return minicheck::finish();
}
