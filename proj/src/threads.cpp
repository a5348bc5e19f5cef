#include "tinet/threads.hpp"

#ifdef TINET_HAVE_OPENMP
#include <omp.h>
#endif

#include "tinet/errors.hpp"

namespace tinet {

void set_thread_count(int threads)
{
    if (threads < 1) throw InvalidArgument("thread count must be positive");
#ifdef TINET_HAVE_OPENMP
    omp_set_num_threads(threads);
#endif
}

int thread_count()
{
#ifdef TINET_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace tinet
