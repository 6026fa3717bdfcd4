// Generated test {{TEST_ID}} (backend: template)
// Worksharing loop under schedule({{SCHEDULE}}): results must not depend on
// how iterations are assigned to threads.
#include <omp.h>
#include <cstdio>
#include <vector>

{{MINICHECK}}

{{EXCERPT}}

int main() {
    const int n = {{INPUT_SIZE}};
    std::vector<double> in(n), ref(n), out(n);
    for (int i = 0; i < n; ++i) {
        in[i] = (double)(i + 1);
    }

    minicheck::install_watchdog({{TIMEOUT_SECONDS}});
    omp_set_num_threads(1);
    {{TARGET_FUNCTION}}(in.data(), ref.data(), n);

    omp_set_num_threads({{NUM_THREADS}});
    bool all_match = true;
    for (int rep = 0; rep < {{REPETITIONS}} && all_match; ++rep) {
        for (int i = 0; i < n; ++i) {
            out[i] = 0.0;
        }
        {{TARGET_FUNCTION}}(in.data(), out.data(), n);
        for (int i = 0; i < n; ++i) {
            if (out[i] != ref[i]) {
                std::fprintf(stderr, "[{{TEST_ID}}] rep %d: out[%d] expected %.17g, got %.17g\n", rep, i, ref[i], out[i]);
                all_match = false;
                break;
            }
        }
    }
    minicheck::disarm_watchdog();
    MC_CHECK(all_match, "schedule policy does not change results relative to the single-thread reference");
    return minicheck::finish();
}
