#pragma once

#include <cstddef>

namespace kinoclear {

// Worker count for the OpenMP kernels. Results never depend on it.
struct Execution {
  int workers = 1;
};

// Number of hardware threads OpenMP would use by default.
int available_workers();

}  // namespace kinoclear
