#include <omp.h>

// Two-phase update; every thread meets the barrier between phases.
void phase_update(double* data, int n) {
    #pragma omp parallel
    {
        int tid = omp_get_thread_num();
        int nth = omp_get_num_threads();
        for (int i = tid; i < n; i += nth) {
            data[i] += 1.0;
        }
        #pragma omp barrier
        for (int i = tid; i < n; i += nth) {
            data[i] *= 2.0;
        }
    }
}
