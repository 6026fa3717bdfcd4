#include <omp.h>

// Every thread bumps a shared counter; the update is serialized.
long shared_counter_sum(int increments_per_thread) {
    long counter = 0;
    #pragma omp parallel
    {
        for (int i = 0; i < increments_per_thread; ++i) {
            #pragma omp critical
            {
                counter += 1;
            }
        }
    }
    return counter;
}
