// Generated test {{TEST_ID}} (backend: template)
// Task-computed block checksums combined by the spawning thread; the total
// must match the closed-form reference on every repetition.
#include <omp.h>
#include <cstdio>
#include <vector>

{{MINICHECK}}

{{EXCERPT}}

int main() {
    omp_set_num_threads({{NUM_THREADS}});
    const int blocks = {{NUM_BLOCKS}};
    const int block_len = {{BLOCK_LEN}};
    const long long n = (long long)blocks * (long long)block_len;
    std::vector<int> data((size_t)n);
    for (long long i = 0; i < n; ++i) {
        data[(size_t)i] = (int)(i + 1);
    }
    const long long expected_total = {{EXPECTED_TOTAL}};

    minicheck::install_watchdog({{TIMEOUT_SECONDS}});
    std::vector<long long> block_sums((size_t)blocks);
    bool is_consistent = true;
    for (int rep = 0; rep < {{REPETITIONS}}; ++rep) {
        for (int b = 0; b < blocks; ++b) {
            block_sums[(size_t)b] = 0;
        }
        long long got = {{TARGET_FUNCTION}}(data.data(), block_sums.data(), blocks, block_len);
        if (got != expected_total) {
            std::fprintf(stderr, "[{{TEST_ID}}] rep %d: expected %lld, got %lld\n", rep, expected_total, got);
            is_consistent = false;
            break;
        }
    }
    minicheck::disarm_watchdog();
    MC_CHECK(is_consistent, "task-combined checksum is consistent with the sequential reference across repetitions");
    return minicheck::finish();
}
