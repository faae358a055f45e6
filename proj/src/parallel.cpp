#include "kinoclear/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kinoclear {

int available_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace kinoclear
