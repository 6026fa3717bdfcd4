#include <omp.h>

// Two-phase update separated by a barrier that only thread 0 reaches.
void phase_update(double* data, int n) {
    #pragma omp parallel
    {
        int tid = omp_get_thread_num();
        int nth = omp_get_num_threads();
        for (int i = tid; i < n; i += nth) {
            data[i] += 1.0;
        }
        if (tid == 0) {
            #pragma omp barrier
        }
        for (int i = tid; i < n; i += nth) {
            data[i] *= 2.0;
        }
    }
}
