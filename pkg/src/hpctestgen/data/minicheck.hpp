// minicheck: embedded micro test harness (version 1)
//
// Self-contained assertion + watchdog support for generated parallel tests.
// No external framework: a test is a plain program whose exit code reports
// the outcome.
//
// Exit code contract:
//   0  all checks passed
//   2  at least one check failed
//   3  watchdog fired (suspected hang / deadlock)
//   4  setup error (wrong process count, bad harness configuration)
#ifndef MINICHECK_HPP
#define MINICHECK_HPP

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <cstring>
#include <unistd.h>

namespace minicheck {

enum ExitCode { MC_PASS = 0, MC_ASSERT_FAIL = 2, MC_TIMEOUT = 3, MC_SETUP_ERROR = 4 };

inline int& failure_count() {
    static int count = 0;
    return count;
}

// Async-signal-safe: write a fixed message and exit with the timeout code.
inline void watchdog_handler(int) {
    const char msg[] = "[minicheck] TIMEOUT: watchdog fired, suspected hang\n";
    ssize_t ignored = write(2, msg, sizeof(msg) - 1);
    (void)ignored;
    _exit(MC_TIMEOUT);
}

// Arm a whole-seconds alarm; ceil() keeps the bound within timeout + 1 s.
inline void install_watchdog(double seconds) {
    signal(SIGALRM, watchdog_handler);
    unsigned whole = (unsigned)seconds;
    if ((double)whole < seconds) whole += 1u;
    if (whole == 0u) whole = 1u;
    alarm(whole);
}

inline void disarm_watchdog() { alarm(0); }

inline void record_failure(const char* what, const char* file, int line) {
    std::fprintf(stderr, "[minicheck] FAIL: %s (%s:%d)\n", what, file, line);
    failure_count() += 1;
}

inline void setup_error(const char* what) {
    std::fprintf(stderr, "[minicheck] SETUP ERROR: %s\n", what);
    std::exit(MC_SETUP_ERROR);
}

// Final verdict for single-process tests.
inline int finish() {
    if (failure_count() > 0) {
        std::fprintf(stderr, "[minicheck] RESULT: %d check(s) failed\n", failure_count());
        return MC_ASSERT_FAIL;
    }
    std::fprintf(stderr, "[minicheck] RESULT: all checks passed\n");
    return MC_PASS;
}

}  // namespace minicheck

#define MC_CHECK(cond, what) \
    do { \
        if (!(cond)) minicheck::record_failure(what, __FILE__, __LINE__); \
    } while (0)

#define MC_CHECK_EQ_INT(actual, expected, what) \
    do { \
        long long mc_a = (long long)(actual); \
        long long mc_e = (long long)(expected); \
        if (mc_a != mc_e) { \
            std::fprintf(stderr, "[minicheck] expected %lld, got %lld\n", mc_e, mc_a); \
            minicheck::record_failure(what, __FILE__, __LINE__); \
        } \
    } while (0)

#define MC_CHECK_EQ_DOUBLE(actual, expected, what) \
    do { \
        double mc_a = (double)(actual); \
        double mc_e = (double)(expected); \
        if (!(mc_a == mc_e)) { \
            std::fprintf(stderr, "[minicheck] expected %.17g, got %.17g\n", mc_e, mc_a); \
            minicheck::record_failure(what, __FILE__, __LINE__); \
        } \
    } while (0)

#endif  // MINICHECK_HPP
